#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "igashape/assembly/airgap.hpp"
#include "igashape/errors.hpp"
#include "igashape/optimization/design.hpp"
#include "igashape/optimization/optimizer.hpp"
#include "igashape/optimization/shape_gradient.hpp"
#include "support/solve.hpp"
#include "support/test_geometries.hpp"

using namespace igashape;
using namespace igashape::fixtures;

namespace {

// 3 x 3 unit squares: magnet in patch 0, iron design patch 4 surrounded by
// air, current in patch 2, the air-gap curve across patch 8.
MultiPatchDomain small_motor(int degree = 2, int spans = 2, bool with_curve = true) {
    const auto base = grid_domain(3, 3, degree, spans);
    std::vector<MaterialTag> mats(9, MaterialTag{MaterialKind::Air, 1.0, std::nullopt});
    mats[0] = MaterialTag{MaterialKind::Magnet, 0.9, Eigen::Vector2d(0.6, 1.0)};
    mats[4] = MaterialTag{MaterialKind::Ferromagnetic, 0.2, std::nullopt};
    AirGapCurve curve;
    if (with_curve) curve.segments.push_back({8, 1, 0.5, 0.0, 1.0});
    return build_topology(base.patches(), mats, base.dirichlet_sides(), {4}, curve);
}

ShapeProblem small_problem() {
    ShapeProblem pr;
    pr.source.current_density.assign(9, 0.0);
    pr.source.current_density[2] = -0.7;
    pr.target = TargetFlux::fourier(0.05, {0.3});
    return pr;
}

Eigen::VectorXd random_vector(int n, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = dist(gen);
    return v;
}

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST(DesignMap, GlobalExcludesDirichletAndCurvePatches) {
    const auto dom = small_motor();
    const auto map = build_dof_map(dom);
    const auto dv = DesignVariableMap::build(dom, map, DesignMode::Global);
    std::set<int> curve(map.patch_dofs(8).begin(), map.patch_dofs(8).end());
    int expected = 0;
    for (int g = 0; g < map.global_count(); ++g) {
        const bool movable = !map.is_dirichlet(g) && curve.count(g) == 0;
        expected += movable;
        EXPECT_EQ(dv.frozen()[g], !movable) << g;
    }
    EXPECT_EQ(dv.point_count(), expected);
    EXPECT_EQ(dv.size(), 2 * expected);
    // pure selection
    EXPECT_EQ(dv.extension().nonZeros(), expected);
    const DesignEntry e = dv.entry(dv.point_count() + 3);
    EXPECT_EQ(e.component, 1);
    EXPECT_EQ(map.global_index(e.patch, e.local), dv.points()[3]);
    EXPECT_THROW(dv.entry(dv.size()), ContractError);
}

TEST(DesignMap, InterfaceOnlyMatchesBruteForceEnumeration) {
    const auto dom = small_motor();
    const auto map = build_dof_map(dom);
    const auto dv = DesignVariableMap::build(dom, map, DesignMode::InterfaceOnly);
    // oracle: dofs of patch 4 shared with an air patch, held by no other
    // material, not in patch 8, not Dirichlet
    std::set<int> oracle;
    const auto copies = map.copies();
    for (int g : map.patch_dofs(4)) {
        bool air = false, curve = false, other = false;
        for (auto [p, k] : copies[g]) {
            if (p != 4 && dom.material(p).kind == MaterialKind::Air) air = true;
            if (p != 4 && dom.material(p).kind != MaterialKind::Air) other = true;
            if (p == 8) curve = true;
        }
        if (air && !other && !curve && !map.is_dirichlet(g)) oracle.insert(g);
    }
    EXPECT_EQ(std::set<int>(dv.points().begin(), dv.points().end()), oracle);
    EXPECT_EQ(oracle.size(), 10u);  // ring of 12 minus the corners on the curve patch and the magnet
}

TEST(DesignMap, InterfaceOnlyInteriorsAreSpringEquilibria) {
    const auto dom = small_motor(2, 4);
    const auto map = build_dof_map(dom);
    const auto dv = DesignVariableMap::build(dom, map, DesignMode::InterfaceOnly);
    const Eigen::VectorXd d = dv.displacement(random_vector(dv.size(), 5));
    const int ng = map.global_count();
    for (int p : dv.moving_patches()) {
        const int nu = dom.patch(p).basis().size_u();
        const int nv = dom.patch(p).basis().size_v();
        const auto& l2g = map.patch_dofs(p);
        for (int i = 1; i + 1 < nu; ++i) {
            for (int j = 1; j + 1 < nv; ++j) {
                for (int c = 0; c < 2; ++c) {
                    auto at = [&](int a, int b) { return d(c * ng + l2g[a * nv + b]); };
                    const double avg = 0.25 * (at(i - 1, j) + at(i + 1, j) + at(i, j - 1) + at(i, j + 1));
                    EXPECT_NEAR(at(i, j), avg, 1e-12);
                }
            }
        }
    }
    // the curve patch never moves
    EXPECT_EQ(std::count(dv.moving_patches().begin(), dv.moving_patches().end(), 8), 0);
}

TEST(DesignMap, InterfaceModeNeedsDesignAirInterface) {
    const auto base = grid_domain(2, 1, 1, 1);
    const auto dom = build_topology(base.patches(), base.materials(), base.dirichlet_sides(), {});
    EXPECT_THROW(DesignVariableMap::build(dom, build_dof_map(dom), DesignMode::InterfaceOnly), ConfigurationError);
}

TEST(SpringSmooth, UniformRingGivesUniformGrid) {
    const int nu = 5, nv = 4;
    std::vector<Point2> net(nu * nv);
    for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) {
            const bool ring = i == 0 || j == 0 || i == nu - 1 || j == nv - 1;
            net[i * nv + j] = ring ? Point2(i / 4.0, j / 3.0) : Point2(0.9, -3.0);
        }
    }
    const auto out = spring_smooth(nu, nv, net);
    for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) EXPECT_LT((out[i * nv + j] - Point2(i / 4.0, j / 3.0)).norm(), 1e-12);
    }
}

TEST(SpringSmooth, SingleUnknownIsNeighbourAverage) {
    std::vector<Point2> net(9, Point2::Zero());
    net[1] = Point2(1.0, 0.0);
    net[3] = Point2(0.0, 1.0);
    net[5] = Point2(2.0, 1.0);
    net[7] = Point2(1.0, 2.5);
    net[0] = Point2(-5.0, -5.0);  // corners do not enter
    net[4] = Point2(7.0, 7.0);
    const auto out = spring_smooth(3, 3, net);
    EXPECT_LT((out[4] - Point2(1.0, 1.125)).norm(), 1e-14);
}

TEST(SpringSmooth, InteriorStaysInConvexRing) {
    std::mt19937 gen(17);
    std::uniform_real_distribution<double> jitter(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const int nu = 4 + trial % 3, nv = 5;
        // ring positions on an ellipse, at increasing random angles
        std::vector<std::pair<int, int>> ring;
        for (int j = 0; j < nv; ++j) ring.emplace_back(0, j);
        for (int i = 1; i < nu; ++i) ring.emplace_back(i, nv - 1);
        for (int j = nv - 2; j >= 0; --j) ring.emplace_back(nu - 1, j);
        for (int i = nu - 2; i >= 1; --i) ring.emplace_back(i, 0);
        std::vector<double> ang(ring.size());
        double acc = 0.0;
        for (auto& a : ang) a = (acc += 0.5 + jitter(gen));
        std::vector<Point2> net(nu * nv, Point2(5.0, 5.0));
        std::vector<Point2> hull;
        for (std::size_t k = 0; k < ring.size(); ++k) {
            const double th = 2.0 * std::numbers::pi * ang[k] / (acc + 0.5);
            const Point2 x(2.0 * std::cos(th), std::sin(th));
            net[ring[k].first * nv + ring[k].second] = x;
            hull.push_back(x);
        }
        const auto out = spring_smooth(nu, nv, net);
        for (int i = 1; i + 1 < nu; ++i) {
            for (int j = 1; j + 1 < nv; ++j) {
                const Point2 x = out[i * nv + j];
                for (std::size_t k = 0; k < hull.size(); ++k) {
                    const Point2 a = hull[k], b = hull[(k + 1) % hull.size()];
                    const double cross = (b - a)(0) * (x - a)(1) - (b - a)(1) * (x - a)(0);
                    EXPECT_GE(cross, -1e-12);
                }
            }
        }
    }
}

TEST(SpringSmooth, RejectsBadNets) {
    EXPECT_THROW(spring_smooth(1, 3, std::vector<Point2>(3)), SmoothingError);
    EXPECT_THROW(spring_smooth(3, 3, std::vector<Point2>(8)), SmoothingError);
    const std::vector<Point2> two(4, Point2(1.0, 2.0));
    EXPECT_EQ(spring_smooth(2, 2, two), two);
}

TEST(DesignUpdate, ZeroStepIsIdentity) {
    const auto dom = small_motor();
    const auto map = build_dof_map(dom);
    const auto dv = DesignVariableMap::build(dom, map, DesignMode::InterfaceOnly);
    const auto out = apply_design_update(dom, map, dv, random_vector(dv.size(), 2), 0.0);
    for (int p = 0; p < dom.patch_count(); ++p) EXPECT_EQ(out.patch(p).control_points(), dom.patch(p).control_points());
}

TEST(DesignUpdate, RigidTranslationKeepsJacobians) {
    const auto dom = small_motor(2, 2, false);
    const auto map = build_dof_map(dom);
    const auto dv = DesignVariableMap::build(dom, map, DesignMode::Global);
    const int n = dv.point_count();
    Eigen::VectorXd dir(2 * n);
    dir.head(n).setConstant(0.03);
    dir.tail(n).setConstant(-0.02);
    const auto out = apply_design_update(dom, map, dv, dir, 2.0);
    for (int i = 0; i < n; ++i) {
        const DesignEntry e = dv.entry(i);
        const Point2 shift = out.patch(e.patch).control_points()[e.local] - dom.patch(e.patch).control_points()[e.local];
        EXPECT_LT((shift - Point2(0.06, -0.04)).norm(), 1e-15);
    }
    // the centre patch moves as a whole: unchanged Jacobian
    for (double u : {0.1, 0.5, 0.8}) {
        for (double v : {0.2, 0.7}) {
            EXPECT_LT((geometry_eval(out.patch(4), u, v).jacobian.jacobian - geometry_eval(dom.patch(4), u, v).jacobian.jacobian).norm(), 1e-13);
        }
    }
}

TEST(Objective, SelfTargetGivesZero) {
    const auto dom = small_motor();
    const auto map = build_dof_map(dom);
    ShapeProblem pr = small_problem();
    const auto first = evaluate_objective(dom, map, pr);
    EXPECT_GT(first.objective, 0.0);
    std::vector<double> s, v;
    for (const auto& pt : airgap_profile(dom, map, pr.target, first.u)) {
        s.push_back(pt.s);
        v.push_back(pt.flux);
    }
    pr.target = TargetFlux::tabulated(s, v);
    const auto self = evaluate_objective(dom, map, pr);
    EXPECT_NEAR(self.objective, 0.0, 1e-12);
    const auto dv = DesignVariableMap::build(dom, map, DesignMode::Global);
    const auto g = compute_shape_gradient(dom, map, dv, self, pr);
    EXPECT_EQ(g.gradient.lpNorm<Eigen::Infinity>(), 0.0);
    EXPECT_EQ(g.norm, 0.0);
}

TEST(Objective, FoldedPatchIsInfeasible) {
    auto dom = small_motor();
    const auto map = build_dof_map(dom);
    dom.control_points(4)[5] += Point2(2.0, 2.0);
    EXPECT_THROW(evaluate_objective(dom, map, small_problem()), FeasibilityError);
}

TEST(ShapeGradient, DescentIdentityAndScalarSplit) {
    const auto dom = small_motor();
    const auto map = build_dof_map(dom);
    const ShapeProblem pr = small_problem();
    const auto st = evaluate_objective(dom, map, pr);
    for (DesignMode mode : {DesignMode::Global, DesignMode::InterfaceOnly}) {
        const auto dv = DesignVariableMap::build(dom, map, mode);
        const auto g = compute_shape_gradient(dom, map, dv, st, pr);
        ASSERT_GT(g.norm, 0.0);
        const double dj_descent = -g.functional.dot(g.gradient);
        EXPECT_LT(dj_descent, 0.0);
        EXPECT_NEAR(dj_descent, -g.gradient.dot(g.metric->apply(g.gradient)), 1e-10 * std::abs(dj_descent));
        // monolithic block solve of diag(B, B)
        const Eigen::VectorXd block = reference_solve(vector_operator(g.metric->scalar_block()), g.functional);
        EXPECT_LT((block - g.gradient).norm(), 1e-10 * block.norm());
    }
}

TEST(ShapeGradient, IetiMetricMatchesDirect) {
    const auto dom = small_motor(2, 4);
    const auto map = build_dof_map(dom);
    ShapeProblem pr = small_problem();
    const auto st = evaluate_objective(dom, map, pr);
    const auto dv = DesignVariableMap::build(dom, map, DesignMode::Global);
    const auto direct = compute_shape_gradient(dom, map, dv, st, pr);
    pr.solver.kind = SolverKind::Ieti;
    pr.solver.tol = 1e-11;
    const auto st_ieti = evaluate_objective(dom, map, pr);
    EXPECT_NEAR(st_ieti.objective, st.objective, 1e-9 * st.objective);
    const auto ieti = compute_shape_gradient(dom, map, dv, st_ieti, pr);
    EXPECT_LT((ieti.gradient - direct.gradient).lpNorm<Eigen::Infinity>(),
              1e-7 * direct.gradient.lpNorm<Eigen::Infinity>());
}

TEST(ShapeGradient, PredictsFiniteDifferencesInBothModes) {
    const ShapeProblem pr = small_problem();
    for (DesignMode mode : {DesignMode::Global, DesignMode::InterfaceOnly}) {
        OptimizerConfig cfg;
        cfg.mode = mode;
        const ShapeOptimizer opt(small_motor(), pr, cfg);
        const DesignState st = opt.state_at(Eigen::VectorXd::Zero(opt.design_map().size()));
        const ShapeGradient g = opt.gradient(st);
        for (unsigned seed = 1; seed <= 5; ++seed) {
            const Eigen::VectorXd delta = 0.1 * random_vector(opt.design_map().size(), seed);
            const double exact = g.functional.dot(delta);
            std::vector<double> lt, le;
            for (double t : {1e-2, 1e-3, 1e-4, 1e-5}) {
                const double jt = opt.state_at(t * delta).objective;
                lt.push_back(std::log10(t));
                le.push_back(std::log10(std::abs((jt - st.objective) / t - exact)));
            }
            EXPECT_GE(lsq_slope(lt, le), 0.9) << design_mode_name(mode) << " seed " << seed;
        }
    }
}

TEST(LineSearch, TinyStepAcceptedAtFirstTrial) {
    OptimizerConfig cfg;
    cfg.initial_step = 1e-3;
    const ShapeOptimizer opt(small_motor(), small_problem(), cfg);
    const DesignState st = opt.state_at(Eigen::VectorXd::Zero(opt.design_map().size()));
    const ShapeGradient g = opt.gradient(st);
    const Eigen::VectorXd d = -g.gradient * (opt.reference_length() / g.gradient.lpNorm<Eigen::Infinity>());
    const auto ls = feasibility_line_search(opt, st, g, d);
    ASSERT_TRUE(ls.accepted);
    EXPECT_EQ(ls.shrinks, 0);
    EXPECT_LT(ls.state.objective, st.objective);
    EXPECT_EQ(ls.state.feasibility, opt.initial_signs());
}

TEST(LineSearch, RejectsZeroAndAscentDirections) {
    const ShapeOptimizer opt(small_motor(), small_problem(), OptimizerConfig{});
    const DesignState st = opt.state_at(Eigen::VectorXd::Zero(opt.design_map().size()));
    const ShapeGradient g = opt.gradient(st);
    EXPECT_THROW(opt.line_search(st, g, Eigen::VectorXd::Zero(opt.design_map().size())), ContractError);
    EXPECT_THROW(opt.line_search(st, g, g.gradient), ContractError);
}

TEST(LineSearch, EngineeredFoldShrinksBelowQuarter) {
    OptimizerConfig cfg;
    cfg.bound_radius = 10.0;  // bounds out of the way
    const ShapeOptimizer opt(small_motor(), small_problem(), cfg);
    const auto& dv = opt.design_map();
    const DesignState st = opt.state_at(Eigen::VectorXd::Zero(dv.size()));
    const ShapeGradient g = opt.gradient(st);
    // push the interior point (1,1) of patch 4 diagonally past its neighbours
    const int target = opt.dof_map().global_index(4, 1 * 4 + 1);
    const int i = static_cast<int>(std::find(dv.points().begin(), dv.points().end(), target) - dv.points().begin());
    ASSERT_LT(i, dv.point_count());
    Eigen::VectorXd fold = Eigen::VectorXd::Zero(dv.size());
    double amount = 0.0;
    for (double a = 0.05; a < 2.0; a += 0.01) {
        fold(i) = fold(dv.point_count() + i) = a;
        if (jacobian_sign_certificate(apply_design_update(opt.initial_domain(), opt.dof_map(), dv, fold, 0.25)
                                          .patch(4)) == JacobianSign::Mixed) {
            break;
        }
        amount = a;
    }
    fold(i) = fold(dv.point_count() + i) = amount;
    Eigen::VectorXd d = fold - (1e-6 / g.gradient.lpNorm<Eigen::Infinity>()) * g.gradient;
    if (!(g.functional.dot(d) < 0.0)) d -= (2.0 * g.functional.dot(fold) / (g.norm * g.norm)) * g.gradient;
    ASSERT_LT(g.functional.dot(d), 0.0);
    auto sign_at = [&](double t) {
        return jacobian_sign_certificate(apply_design_update(opt.initial_domain(), opt.dof_map(), dv, d, t).patch(4));
    };
    ASSERT_EQ(sign_at(1.0), JacobianSign::Mixed);
    ASSERT_EQ(sign_at(0.5), JacobianSign::Mixed);
    ASSERT_NE(sign_at(0.25), JacobianSign::Mixed);
    const auto ls = opt.line_search(st, g, d);
    ASSERT_TRUE(ls.accepted) << ls.reason;
    EXPECT_LE(ls.step, 0.25);
    EXPECT_EQ(ls.state.feasibility, opt.initial_signs());
}

TEST(Optimizer, ZeroIterationsBelowTolerance) {
    const auto dom = small_motor();
    ShapeProblem pr = small_problem();
    const auto st = evaluate_objective(dom, build_dof_map(dom), pr);
    std::vector<double> s, v;
    for (const auto& pt : airgap_profile(dom, build_dof_map(dom), pr.target, st.u)) {
        s.push_back(pt.s);
        v.push_back(pt.flux);
    }
    pr.target = TargetFlux::tabulated(s, v);
    const auto res = optimize(dom, pr, OptimizerConfig{});
    EXPECT_EQ(res.reason, StopReason::GradientTolerance);
    ASSERT_EQ(res.history.size(), 1u);
    EXPECT_EQ(res.final_state.design.lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(Optimizer, SteepestDescentAndBfgsDecreaseMonotonically) {
    for (OptimizerAlgorithm alg : {OptimizerAlgorithm::SteepestDescent, OptimizerAlgorithm::Bfgs}) {
        for (DesignMode mode : {DesignMode::Global, DesignMode::InterfaceOnly}) {
            OptimizerConfig cfg;
            cfg.algorithm = alg;
            cfg.mode = mode;
            cfg.max_iterations = 8;
            const ShapeOptimizer opt(small_motor(), small_problem(), cfg);
            int calls = 0;
            const auto res = opt.run([&](const DesignState& st, const IterateRecord& rec) {
                ++calls;
                EXPECT_EQ(st.feasibility, opt.initial_signs());
                EXPECT_EQ(rec.objective, st.objective);
            });
            const int accepted = static_cast<int>(res.history.size()) - 1;
            EXPECT_EQ(calls, accepted + 1);
            EXPECT_GE(accepted, 1) << algorithm_name(alg) << " " << design_mode_name(mode) << ": " << res.message;
            for (std::size_t k = 1; k < res.history.size(); ++k) {
                EXPECT_LT(res.history[k].objective, res.history[k - 1].objective);
                EXPECT_TRUE(res.history[k].feasible);
            }
            EXPECT_LT(res.final_state.objective, res.initial.objective);
            EXPECT_LE(res.final_state.design.maxCoeff(), opt.upper_bounds().maxCoeff());
        }
    }
}

TEST(Optimizer, ConfigValidation) {
    OptimizerConfig cfg;
    cfg.step_shrink = 1.0;
    EXPECT_THROW(cfg.validate(), ConfigurationError);
    cfg = OptimizerConfig{};
    cfg.nlp_tol = 0.0;
    EXPECT_THROW(cfg.validate(), ConfigurationError);
    cfg = OptimizerConfig{};
    cfg.bound_relax = -1.0;
    EXPECT_THROW(cfg.validate(), ConfigurationError);
    EXPECT_NO_THROW(OptimizerConfig{}.validate());
    EXPECT_EQ(parse_algorithm("bfgs"), OptimizerAlgorithm::Bfgs);
    EXPECT_THROW(parse_algorithm("newton"), ConfigurationError);
    EXPECT_EQ(parse_design_mode("interface"), DesignMode::InterfaceOnly);
}
