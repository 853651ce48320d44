#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "igashape/optimization/design.hpp"
#include "igashape/optimization/shape_gradient.hpp"

namespace igashape {

enum class OptimizerAlgorithm { SteepestDescent, Bfgs };

std::string_view algorithm_name(OptimizerAlgorithm a);
/// "steepest_descent" or "bfgs"; throws ConfigurationError otherwise.
OptimizerAlgorithm parse_algorithm(std::string_view name);

struct OptimizerConfig {
    OptimizerAlgorithm algorithm = OptimizerAlgorithm::SteepestDescent;
    DesignMode mode = DesignMode::Global;
    double nlp_tol = 1e-6;           // on |grad J|_B
    double objective_rel_tol = 1e-6;
    int patience = 3;
    int max_iterations = 50;
    /// First trial step; the direction is scaled so that step 1 moves the
    /// farthest control point by the reference length.
    double initial_step = 1.0;
    double step_shrink = 0.5;
    int max_shrinks = 30;
    /// Box bounds: initial position +- bound_radius * patch diameter * (1 + bound_relax).
    double bound_radius = 0.1;
    double bound_relax = 0.0;
    int lbfgs_memory = 8;

    /// Throws ConfigurationError for out-of-range values.
    void validate() const;
};

/// One accepted geometry.
struct DesignState {
    MultiPatchDomain domain;
    Eigen::VectorXd design;  // displacement coordinates relative to the initial domain
    int iteration = 0;
    double objective = 0.0;
    std::vector<JacobianSign> feasibility;  // per monitored patch
    StateEvaluation state;
};

struct LineSearchResult {
    bool accepted = false;
    double step = 0.0;
    int shrinks = 0;
    DesignState state;   // valid when accepted
    std::string reason;  // why the last trial was rejected
};

struct IterateRecord {
    int iteration = 0;
    double objective = 0.0;
    double step = 0.0;
    double gradient_norm = 0.0;
    int shrinks = 0;
    bool feasible = true;
};

enum class StopReason { GradientTolerance, ObjectiveStalled, MaxIterations, LineSearchFailed };

std::string_view stop_reason_name(StopReason r);

struct OptimizationResult {
    std::vector<IterateRecord> history;  // initial state plus one row per accepted iterate
    DesignState initial;
    DesignState final_state;
    StopReason reason = StopReason::MaxIterations;
    std::string message;
};

/// Called for the initial state and after every accepted iterate.
using IterateCallback = std::function<void(const DesignState&, const IterateRecord&)>;

/// Design space, bounds, and feasibility reference of one optimization run.
/// Geometry at design vector x: initial control points + E x.
class ShapeOptimizer {
public:
    /// Throws ConfigurationError for an invalid config, FeasibilityError when
    /// the initial domain fails the sign certificate.
    ShapeOptimizer(MultiPatchDomain initial, ShapeProblem problem, OptimizerConfig config);

    const MultiPatchDomain& initial_domain() const noexcept { return initial_; }
    const GlobalDofMap& dof_map() const noexcept { return dof_map_; }
    const DesignVariableMap& design_map() const noexcept { return map_; }
    const ShapeProblem& problem() const noexcept { return problem_; }
    const OptimizerConfig& config() const noexcept { return config_; }

    /// Patches certified after every step (those the design map moves).
    const std::vector<int>& monitored_patches() const noexcept { return map_.moving_patches(); }
    const std::vector<JacobianSign>& initial_signs() const noexcept { return signs_; }
    const Eigen::VectorXd& lower_bounds() const noexcept { return lower_; }
    const Eigen::VectorXd& upper_bounds() const noexcept { return upper_; }
    /// Smallest bound radius; steps are measured in this length.
    double reference_length() const noexcept { return reference_length_; }

    std::vector<JacobianSign> certify(const MultiPatchDomain& domain) const;
    MultiPatchDomain domain_at(const Eigen::VectorXd& design) const;
    /// Throws FeasibilityError, GeometryError, or solver errors.
    DesignState state_at(const Eigen::VectorXd& design, int iteration = 0) const;
    ShapeGradient gradient(const DesignState& state) const;

    /// Projected backtracking from config.initial_step: a trial at step t is
    /// clamp(x + t d) and is accepted when every monitored patch keeps its
    /// initial sign class and J decreases. Throws ContractError when d is
    /// zero or dJ(d) >= 0. Rejects after config.max_shrinks shrinks.
    LineSearchResult line_search(const DesignState& current, const ShapeGradient& grad,
                                 const Eigen::VectorXd& direction) const;

    OptimizationResult run(const IterateCallback& callback = {}) const;

private:
    MultiPatchDomain initial_;
    ShapeProblem problem_;
    OptimizerConfig config_;
    GlobalDofMap dof_map_;
    DesignVariableMap map_;
    std::vector<JacobianSign> signs_;
    Eigen::VectorXd lower_;
    Eigen::VectorXd upper_;
    double reference_length_ = 0.0;
};

/// Free-function forms of the ShapeOptimizer steps.
LineSearchResult feasibility_line_search(const ShapeOptimizer& opt, const DesignState& current,
                                         const ShapeGradient& grad, const Eigen::VectorXd& direction);
OptimizationResult optimize(const MultiPatchDomain& initial, const ShapeProblem& problem,
                            const OptimizerConfig& config, const IterateCallback& callback = {});

}  // namespace igashape
