#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "igashape/assembly/airgap.hpp"
#include "igashape/assembly/field.hpp"
#include "igashape/assembly/forms.hpp"
#include "igashape/assembly/shape_derivative.hpp"
#include "igashape/errors.hpp"
#include "support/solve.hpp"
#include "support/test_geometries.hpp"

using namespace igashape;
using namespace igashape::fixtures;

namespace {

// 3 x 3 grid of unit squares: magnet in patch 0, current in the centre
// patch 4, the air-gap curve inside patch 8.
struct Problem {
    MultiPatchDomain domain;
    GlobalDofMap map;
    SourceSpec source;
    TargetFlux target = TargetFlux::fourier(0.1, {0.4});
};

Problem make_problem() {
    const auto base = grid_domain(3, 3, 2, 2);
    auto mats = base.materials();
    mats[0] = MaterialTag{MaterialKind::Magnet, 0.9, Eigen::Vector2d(0.6, 1.0)};
    mats[4].reluctivity = 2.5;
    AirGapCurve c{{{8, 1, 0.5, 0.0, 1.0}}};
    Problem pr{build_topology(base.patches(), mats, base.dirichlet_sides(), {4}, c), {}, {}};
    pr.map = build_dof_map(pr.domain);
    pr.source.current_density.assign(9, 0.0);
    pr.source.current_density[4] = 1.3;
    pr.source.current_density[2] = -0.7;
    return pr;
}

struct StateAdjoint {
    double objective;
    Eigen::VectorXd u;
    Eigen::VectorXd p;
};

StateAdjoint solve(const Problem& pr, const MultiPatchDomain& dom) {
    const auto k = assemble_stiffness(dom, pr.map);
    const Eigen::VectorXd f = assemble_load(dom, pr.map, pr.source);
    StateAdjoint out;
    out.u = reference_solve(k.matrix, f);
    const auto terms = assemble_airgap_terms(dom, pr.map, pr.target, out.u);
    out.objective = terms.objective;
    out.p = reference_solve(k.matrix, terms.adjoint_rhs);
    return out;
}

MultiPatchDomain moved(const MultiPatchDomain& dom, const GlobalDofMap& map, const Eigen::VectorXd& field, double t) {
    MultiPatchDomain out = dom;
    const int ng = map.global_count();
    for (int p = 0; p < out.patch_count(); ++p) {
        auto& cps = out.control_points(p);
        const auto& l2g = map.patch_dofs(p);
        for (std::size_t k = 0; k < cps.size(); ++k) {
            cps[k] += t * Point2(field(l2g[k]), field(ng + l2g[k]));
        }
    }
    return out;
}

// Smooth field vanishing outside the centre patch [1,2]^2.
Eigen::VectorXd bump_field(const Problem& pr, int seed) {
    std::mt19937 rng(static_cast<unsigned>(seed));
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const double a = d(rng), b = d(rng), kx = 1 + (seed % 2), ky = 1 + (seed % 3 == 0);
    const double pi = std::numbers::pi;
    auto bump = [=](const Point2& x) {
        if (x(0) < 1 || x(0) > 2 || x(1) < 1 || x(1) > 2) return 0.0;
        return std::sin(pi * (x(0) - 1)) * std::sin(pi * (x(1) - 1));
    };
    const Eigen::VectorXd fx = greville_coefficients(pr.domain, pr.map, [&](const Point2& x) {
        return a * bump(x) * std::cos(kx * pi * x(1));
    });
    const Eigen::VectorXd fy = greville_coefficients(pr.domain, pr.map, [&](const Point2& x) {
        return b * bump(x) * std::sin(ky * pi * x(0));
    });
    Eigen::VectorXd out(2 * pr.map.global_count());
    out << fx, fy;
    return 0.2 * out;
}

}  // namespace

TEST(ShapeDerivative, ZeroFieldsGiveZero) {
    auto pr = make_problem();
    const Eigen::VectorXd z = Eigen::VectorXd::Zero(pr.map.free_count());
    SourceSpec none;
    auto mats = pr.domain.materials();
    for (auto& m : mats) m = MaterialTag::air();
    const auto dom = build_topology(pr.domain.patches(), mats, pr.domain.dirichlet_sides());
    EXPECT_EQ(assemble_shape_derivative(dom, pr.map, z, z, none).lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(ShapeDerivative, RigidTranslationHasZeroDerivative) {
    auto pr = make_problem();
    const auto sa = solve(pr, pr.domain);
    const Eigen::VectorXd dj = assemble_shape_derivative(pr.domain, pr.map, sa.u, sa.p, pr.source);
    const int ng = pr.map.global_count();
    ASSERT_GT(dj.cwiseAbs().sum(), 0.0);
    EXPECT_LE(std::abs(dj.head(ng).sum()), 1e-10 * dj.cwiseAbs().sum());
    EXPECT_LE(std::abs(dj.tail(ng).sum()), 1e-10 * dj.cwiseAbs().sum());
}

TEST(ShapeDerivative, RejectsMismatchedVectors) {
    auto pr = make_problem();
    const Eigen::VectorXd z = Eigen::VectorXd::Zero(pr.map.free_count() + 1);
    EXPECT_THROW(assemble_shape_derivative(pr.domain, pr.map, z, z, pr.source), ContractError);
}

TEST(ShapeDerivative, MatchesDomainPerturbationFiniteDifferences) {
    auto pr = make_problem();
    const auto base = solve(pr, pr.domain);
    ASSERT_GT(base.objective, 0.0);
    const Eigen::VectorXd dj = assemble_shape_derivative(pr.domain, pr.map, base.u, base.p, pr.source);
    for (int seed = 1; seed <= 5; ++seed) {
        const Eigen::VectorXd phi = bump_field(pr, seed);
        const double exact = dj.dot(phi);
        ASSERT_GT(std::abs(exact), 0.0);
        std::vector<double> err;
        for (double t : {1e-2, 1e-3, 1e-4, 1e-5}) {
            const double jt = solve(pr, moved(pr.domain, pr.map, phi, t)).objective;
            err.push_back(std::abs((jt - base.objective) / t - exact));
        }
        // first order in t until round-off
        EXPECT_LT(err[1], 0.2 * err[0]) << "seed " << seed;
        EXPECT_LT(err[2], 0.2 * err[1]) << "seed " << seed;
        EXPECT_LT(err[3], 1e-3 * std::abs(exact)) << "seed " << seed;
        // central differences agree much more closely
        const double h = 1e-4;
        const double cd = (solve(pr, moved(pr.domain, pr.map, phi, h)).objective -
                           solve(pr, moved(pr.domain, pr.map, phi, -h)).objective) /
                          (2 * h);
        EXPECT_NEAR(cd, exact, 1e-6 * std::abs(exact)) << "seed " << seed;
    }
}
