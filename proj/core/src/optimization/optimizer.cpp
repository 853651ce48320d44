#include "igashape/optimization/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "igashape/errors.hpp"

namespace igashape {

std::string_view algorithm_name(OptimizerAlgorithm a) {
    return a == OptimizerAlgorithm::SteepestDescent ? "steepest_descent" : "bfgs";
}

OptimizerAlgorithm parse_algorithm(std::string_view name) {
    if (name == "steepest_descent") return OptimizerAlgorithm::SteepestDescent;
    if (name == "bfgs") return OptimizerAlgorithm::Bfgs;
    throw ConfigurationError("unknown optimizer algorithm '" + std::string(name) +
                             "' (expected steepest_descent or bfgs)");
}

std::string_view stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::GradientTolerance: return "gradient_tolerance";
        case StopReason::ObjectiveStalled: return "objective_stalled";
        case StopReason::MaxIterations: return "max_iterations";
        case StopReason::LineSearchFailed: return "line_search_failed";
    }
    return "unknown";
}

void OptimizerConfig::validate() const {
    auto fail = [](const std::string& what) { throw ConfigurationError("optimizer: " + what); };
    if (!(nlp_tol > 0.0)) fail("nlp_tol must be positive");
    if (!(objective_rel_tol > 0.0)) fail("objective_rel_tol must be positive");
    if (patience < 1) fail("patience must be at least 1");
    if (max_iterations < 0) fail("max_iterations must be non-negative");
    if (!(initial_step > 0.0)) fail("initial_step must be positive");
    if (!(step_shrink > 0.0 && step_shrink < 1.0)) fail("step_shrink must lie in (0, 1)");
    if (max_shrinks < 0) fail("max_shrinks must be non-negative");
    if (!(bound_radius > 0.0)) fail("bound_radius must be positive");
    if (!(bound_relax >= 0.0)) fail("bound_relax must be non-negative");
    if (lbfgs_memory < 1) fail("lbfgs_memory must be at least 1");
}

ShapeOptimizer::ShapeOptimizer(MultiPatchDomain initial, ShapeProblem problem, OptimizerConfig config)
    : initial_(std::move(initial)), problem_(std::move(problem)), config_(config) {
    config_.validate();
    dof_map_ = build_dof_map(initial_);
    map_ = DesignVariableMap::build(initial_, dof_map_, config_.mode);
    if (problem_.alpha.empty()) problem_.alpha = default_alpha(initial_);
    signs_ = certify(initial_);
    for (std::size_t k = 0; k < signs_.size(); ++k) {
        if (signs_[k] == JacobianSign::Mixed) {
            throw FeasibilityError("initial patch " + std::to_string(monitored_patches()[k]) +
                                   " has a Jacobian determinant that changes sign");
        }
    }
    std::vector<double> diameter(static_cast<std::size_t>(initial_.patch_count()));
    for (int p = 0; p < initial_.patch_count(); ++p) diameter[p] = initial_.patch(p).bounding_box_diameter();
    const int n = map_.point_count();
    std::vector<double> radius(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    std::vector<int> column(static_cast<std::size_t>(dof_map_.global_count()), -1);
    for (int i = 0; i < n; ++i) column[map_.points()[i]] = i;
    for (int p = 0; p < initial_.patch_count(); ++p) {
        for (int g : dof_map_.patch_dofs(p)) {
            if (column[g] >= 0) radius[column[g]] = std::min(radius[column[g]], config_.bound_radius * diameter[p]);
        }
    }
    lower_.resize(2 * n);
    upper_.resize(2 * n);
    reference_length_ = n > 0 ? *std::min_element(radius.begin(), radius.end()) : 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = radius[i] * (1.0 + config_.bound_relax);
        lower_(i) = lower_(n + i) = -r;
        upper_(i) = upper_(n + i) = r;
    }
}

std::vector<JacobianSign> ShapeOptimizer::certify(const MultiPatchDomain& domain) const {
    std::vector<JacobianSign> out;
    out.reserve(monitored_patches().size());
    for (int p : monitored_patches()) out.push_back(jacobian_sign_certificate(domain.patch(p)));
    return out;
}

MultiPatchDomain ShapeOptimizer::domain_at(const Eigen::VectorXd& design) const {
    return apply_design_update(initial_, dof_map_, map_, design, 1.0);
}

DesignState ShapeOptimizer::state_at(const Eigen::VectorXd& design, int iteration) const {
    DesignState st;
    st.domain = domain_at(design);
    st.design = design;
    st.iteration = iteration;
    st.feasibility = certify(st.domain);
    st.state = evaluate_objective(st.domain, dof_map_, problem_);
    st.objective = st.state.objective;
    return st;
}

ShapeGradient ShapeOptimizer::gradient(const DesignState& state) const {
    return compute_shape_gradient(state.domain, dof_map_, map_, state.state, problem_);
}

LineSearchResult ShapeOptimizer::line_search(const DesignState& current, const ShapeGradient& grad,
                                             const Eigen::VectorXd& direction) const {
    if (direction.size() != map_.size()) throw ContractError("search direction size does not match the design map");
    if (direction.lpNorm<Eigen::Infinity>() == 0.0) throw ContractError("search direction is zero");
    const double slope = grad.functional.dot(direction);
    if (!(slope < 0.0)) {
        std::ostringstream msg;
        msg << "search direction is not a descent direction (dJ(d) = " << slope << ")";
        throw ContractError(msg.str());
    }
    LineSearchResult out;
    double t = config_.initial_step;
    for (int k = 0; k <= config_.max_shrinks; ++k, t *= config_.step_shrink) {
        out.shrinks = k;
        out.step = t;
        const Eigen::VectorXd x = (current.design + t * direction).cwiseMax(lower_).cwiseMin(upper_);
        if ((x - current.design).lpNorm<Eigen::Infinity>() == 0.0) {
            out.reason = "box bounds block the search direction";
            return out;
        }
        const MultiPatchDomain trial = domain_at(x);
        const std::vector<JacobianSign> signs = certify(trial);
        if (signs != signs_) {
            const auto it = std::mismatch(signs.begin(), signs.end(), signs_.begin()).first;
            const int patch = monitored_patches()[static_cast<std::size_t>(it - signs.begin())];
            out.reason = "patch " + std::to_string(patch) + " changes its Jacobian sign class to " +
                         std::string(sign_name(*it));
            continue;
        }
        DesignState st;
        try {
            st = state_at(x, current.iteration + 1);
        } catch (const GeometryError& e) {
            out.reason = e.what();
            continue;
        } catch (const FeasibilityError& e) {
            out.reason = e.what();
            continue;
        }
        if (st.objective < current.objective) {
            out.accepted = true;
            out.state = std::move(st);
            out.reason.clear();
            return out;
        }
        out.reason = "objective did not decrease";
    }
    return out;
}

OptimizationResult ShapeOptimizer::run(const IterateCallback& callback) const {
    OptimizationResult res;
    DesignState st = state_at(Eigen::VectorXd::Zero(map_.size()), 0);
    ShapeGradient g = gradient(st);
    res.initial = st;
    IterateRecord rec{0, st.objective, 0.0, g.norm, 0, true};
    res.history.push_back(rec);
    if (callback) callback(st, rec);

    struct Pair {
        Eigen::VectorXd s, y;
        double rho;
    };
    std::deque<Pair> memory;
    int stalled = 0;
    res.reason = StopReason::MaxIterations;
    for (int it = 1; it <= config_.max_iterations; ++it) {
        if (g.norm < config_.nlp_tol) {
            res.reason = StopReason::GradientTolerance;
            break;
        }
        Eigen::VectorXd d = -g.gradient;
        if (config_.algorithm == OptimizerAlgorithm::Bfgs && !memory.empty()) {
            // two-loop recursion, H0 = gamma B^{-1}
            Eigen::VectorXd q = g.functional;
            for (Eigen::Index i = 0; i < q.size(); ++i) {
                if ((st.design(i) <= lower_(i) && q(i) > 0.0) || (st.design(i) >= upper_(i) && q(i) < 0.0)) q(i) = 0.0;
            }
            std::vector<double> a(memory.size());
            for (std::size_t i = memory.size(); i-- > 0;) {
                a[i] = memory[i].rho * memory[i].s.dot(q);
                q -= a[i] * memory[i].y;
            }
            const Pair& last = memory.back();
            const double gamma = last.s.dot(last.y) / last.y.dot(g.metric->solve(last.y));
            Eigen::VectorXd r = gamma * g.metric->solve(q);
            for (std::size_t i = 0; i < memory.size(); ++i) {
                const double b = memory[i].rho * memory[i].y.dot(r);
                r += (a[i] - b) * memory[i].s;
            }
            d = -r;
        }
        // components pushing against an active bound would be clamped away
        auto mask = [&](Eigen::VectorXd& v) {
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                if ((st.design(i) <= lower_(i) && v(i) < 0.0) || (st.design(i) >= upper_(i) && v(i) > 0.0)) v(i) = 0.0;
            }
        };
        mask(d);
        if (!(g.functional.dot(d) < 0.0)) {
            memory.clear();
            d = -g.gradient;
            mask(d);
        }
        if (!(g.functional.dot(d) < 0.0)) {
            // the Euclidean projected gradient is a descent direction whenever it is nonzero
            d = -g.functional;
            mask(d);
        }
        const double m = d.lpNorm<Eigen::Infinity>();
        if (m == 0.0) {
            res.reason = StopReason::GradientTolerance;
            res.message = "projected gradient vanishes on the box bounds";
            break;
        }
        if (config_.algorithm == OptimizerAlgorithm::SteepestDescent || memory.empty() || m > reference_length_) {
            d *= reference_length_ / m;
        }
        LineSearchResult ls = line_search(st, g, d);
        if (!ls.accepted) {
            res.reason = StopReason::LineSearchFailed;
            std::ostringstream msg;
            msg << "line search rejected at iteration " << it << " after " << ls.shrinks
                << " shrinks: " << ls.reason;
            res.message = msg.str();
            break;
        }
        DesignState next = std::move(ls.state);
        next.iteration = it;
        ShapeGradient g_next = gradient(next);
        if (config_.algorithm == OptimizerAlgorithm::Bfgs) {
            Eigen::VectorXd s = next.design - st.design;
            Eigen::VectorXd y = g_next.functional - g.functional;
            const double sy = s.dot(y);
            if (sy > 1e-12 * s.norm() * y.norm()) {
                memory.push_back({std::move(s), std::move(y), 1.0 / sy});
                if (static_cast<int>(memory.size()) > config_.lbfgs_memory) memory.pop_front();
            }
        }
        const double rel = std::abs(st.objective - next.objective) /
                           std::max(std::abs(st.objective), std::numeric_limits<double>::min());
        stalled = rel < config_.objective_rel_tol ? stalled + 1 : 0;
        rec = IterateRecord{it, next.objective, ls.step, g_next.norm, ls.shrinks, true};
        res.history.push_back(rec);
        st = std::move(next);
        g = std::move(g_next);
        if (callback) callback(st, rec);
        if (stalled >= config_.patience) {
            res.reason = StopReason::ObjectiveStalled;
            break;
        }
    }
    if (config_.max_iterations == 0 && g.norm < config_.nlp_tol) res.reason = StopReason::GradientTolerance;
    res.final_state = std::move(st);
    return res;
}

LineSearchResult feasibility_line_search(const ShapeOptimizer& opt, const DesignState& current,
                                         const ShapeGradient& grad, const Eigen::VectorXd& direction) {
    return opt.line_search(current, grad, direction);
}

OptimizationResult optimize(const MultiPatchDomain& initial, const ShapeProblem& problem,
                            const OptimizerConfig& config, const IterateCallback& callback) {
    return ShapeOptimizer(initial, problem, config).run(callback);
}

}  // namespace igashape
