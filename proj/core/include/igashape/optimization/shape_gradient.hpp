#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Dense>

#include "igashape/assembly/airgap.hpp"
#include "igashape/assembly/forms.hpp"
#include "igashape/optimization/design.hpp"
#include "igashape/solvers/linear_solver.hpp"

namespace igashape {

/// Everything besides the geometry that defines the tracking problem.
struct ShapeProblem {
    SourceSpec source;
    TargetFlux target;
    QuadratureOrder quadrature;
    SolverOptions solver;
    /// Weight of the gradient term in the auxiliary form, per patch;
    /// empty: default_alpha() of the domain being evaluated.
    std::vector<double> alpha;
};

/// State solve at one geometry. The factorized system is kept so that the
/// adjoint solve reuses it.
struct StateEvaluation {
    double objective = 0.0;
    Eigen::VectorXd u;
    Eigen::VectorXd adjoint_rhs;  // -dJ/du
    PcgLog log;
    std::shared_ptr<const SparseSymmetricSystem> system;
    std::shared_ptr<const SystemSolver> solver;
};

/// Solves the state problem and evaluates J. Throws FeasibilityError when a
/// patch fails the Jacobian sign certificate; solver errors propagate.
StateEvaluation evaluate_objective(const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                                   const ShapeProblem& problem);

/// The auxiliary form restricted to the design space: B = E^T diag(A, A) E
/// with E the design map extension. Global mode solves with the configured
/// linear solver (two scalar solves); InterfaceOnly forms the small dense
/// reduced matrix.
class RieszMetric {
public:
    RieszMetric(const MultiPatchDomain& domain, const GlobalDofMap& dof_map, const DesignVariableMap& map,
                const std::vector<double>& alpha, QuadratureOrder q, const SolverOptions& solver);
    ~RieszMetric();

    int size() const noexcept { return 2 * n_; }
    /// B^{-1} f.
    Eigen::VectorXd solve(const Eigen::VectorXd& functional) const;
    /// B v.
    Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
    /// Scalar block of B over the design points.
    const SparseMatrix& scalar_block() const noexcept { return scalar_; }

private:
    int n_ = 0;
    SparseMatrix scalar_;
    std::unique_ptr<SparseSymmetricSystem> aux_;
    std::unique_ptr<GlobalDofMap> aux_map_;
    std::unique_ptr<SystemSolver> solver_;
    Eigen::LLT<Eigen::MatrixXd> dense_;
};

struct ShapeGradient {
    Eigen::VectorXd adjoint;     // p, free dofs
    Eigen::VectorXd derivative;  // dJ over global dofs, x components first
    Eigen::VectorXd functional;  // E^T dJ: dJ along each design entry
    Eigen::VectorXd gradient;    // g with B g = functional
    Eigen::VectorXd field;       // E g over global dofs
    double norm = 0.0;           // sqrt(functional . g) = |g|_B
    std::shared_ptr<const RieszMetric> metric;
};

/// Adjoint solve, shape derivative, Riesz lift onto the design space.
/// -g is the steepest-descent direction: dJ(-g) = -|g|_B^2.
ShapeGradient compute_shape_gradient(const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                                     const DesignVariableMap& map, const StateEvaluation& state,
                                     const ShapeProblem& problem);

}  // namespace igashape
