#include "igashape/optimization/shape_gradient.hpp"

#include <cmath>
#include <string>

#include "igashape/assembly/shape_derivative.hpp"
#include "igashape/errors.hpp"

namespace igashape {

StateEvaluation evaluate_objective(const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                                   const ShapeProblem& problem) {
    for (int p = 0; p < domain.patch_count(); ++p) {
        if (jacobian_sign_certificate(domain.patch(p)) == JacobianSign::Mixed) {
            throw FeasibilityError("patch " + std::to_string(p) + ": Jacobian determinant changes sign");
        }
    }
    auto system = std::make_shared<SparseSymmetricSystem>(assemble_stiffness(domain, dof_map, problem.quadrature));
    system->rhs = assemble_load(domain, dof_map, problem.source, problem.quadrature);
    auto solver = std::make_shared<const SystemSolver>(*system, domain, dof_map, problem.solver);
    StateEvaluation out;
    SolveResult res = solver->solve(system->rhs);
    out.u = std::move(res.x);
    out.log = std::move(res.log);
    AirGapTerms terms = assemble_airgap_terms(domain, dof_map, problem.target, out.u, problem.quadrature);
    out.objective = terms.objective;
    out.adjoint_rhs = std::move(terms.adjoint_rhs);
    out.system = std::move(system);
    out.solver = std::move(solver);
    return out;
}

RieszMetric::RieszMetric(const MultiPatchDomain& domain, const GlobalDofMap& dof_map, const DesignVariableMap& map,
                         const std::vector<double>& alpha, QuadratureOrder q, const SolverOptions& solver)
    : n_(map.point_count()) {
    if (map.mode() == DesignMode::Global) {
        // design points are exactly the free dofs of this map, in order
        aux_map_ = std::make_unique<GlobalDofMap>(dof_map.with_fixed(map.frozen()));
        aux_ = std::make_unique<SparseSymmetricSystem>(assemble_auxiliary_form(domain, *aux_map_, alpha, q));
        scalar_ = aux_->matrix;
        if (n_ > 0) solver_ = std::make_unique<SystemSolver>(*aux_, domain, *aux_map_, solver);
        return;
    }
    const SparseSymmetricSystem a = assemble_auxiliary_form(domain, dof_map, alpha, q);
    std::vector<Eigen::Triplet<double>> t;
    const SparseMatrix& e = map.extension();
    for (int c = 0; c < e.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(e, c); it; ++it) {
            const int f = dof_map.free_index(static_cast<int>(it.row()));
            if (f >= 0) t.emplace_back(f, c, it.value());
        }
    }
    SparseMatrix ef(dof_map.free_count(), n_);
    ef.setFromTriplets(t.begin(), t.end());
    scalar_ = ef.transpose() * (a.matrix * ef);
    const Eigen::MatrixXd dense = Eigen::MatrixXd(scalar_);
    dense_.compute(0.5 * (dense + dense.transpose()));
    if (dense_.info() != Eigen::Success) throw SolverError("reduced auxiliary form is not positive definite");
}

RieszMetric::~RieszMetric() = default;

Eigen::VectorXd RieszMetric::solve(const Eigen::VectorXd& functional) const {
    if (functional.size() != size()) throw ContractError("functional size does not match the design space");
    Eigen::VectorXd out(size());
    if (n_ == 0) return out;
    if (solver_) {
        // two independent scalar problems
        out.head(n_) = solver_->solve(functional.head(n_)).x;
        out.tail(n_) = solver_->solve(functional.tail(n_)).x;
    } else {
        out.head(n_) = dense_.solve(functional.head(n_));
        out.tail(n_) = dense_.solve(functional.tail(n_));
    }
    return out;
}

Eigen::VectorXd RieszMetric::apply(const Eigen::VectorXd& v) const {
    if (v.size() != size()) throw ContractError("vector size does not match the design space");
    Eigen::VectorXd out(size());
    out.head(n_) = scalar_ * v.head(n_);
    out.tail(n_) = scalar_ * v.tail(n_);
    return out;
}

ShapeGradient compute_shape_gradient(const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                                     const DesignVariableMap& map, const StateEvaluation& state,
                                     const ShapeProblem& problem) {
    if (!state.solver) throw ContractError("state evaluation carries no solver");
    ShapeGradient out;
    out.adjoint = state.solver->solve(state.adjoint_rhs).x;
    out.derivative =
        assemble_shape_derivative(domain, dof_map, state.u, out.adjoint, problem.source, problem.quadrature);
    out.functional = map.restrict(out.derivative);
    const std::vector<double> alpha = problem.alpha.empty() ? default_alpha(domain) : problem.alpha;
    auto metric = std::make_shared<const RieszMetric>(domain, dof_map, map, alpha, problem.quadrature, problem.solver);
    out.gradient = metric->solve(out.functional);
    out.field = map.displacement(out.gradient);
    out.norm = std::sqrt(std::max(0.0, out.functional.dot(out.gradient)));
    out.metric = std::move(metric);
    return out;
}

}  // namespace igashape
