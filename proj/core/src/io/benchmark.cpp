#include "igashape/io/benchmark.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "igashape/errors.hpp"

namespace igashape {

std::string_view benchmark_name(BenchmarkKind kind) {
    return kind == BenchmarkKind::MotorLike ? "motor_like" : "square_grid";
}

BenchmarkKind parse_benchmark(std::string_view name) {
    if (name == "motor_like") return BenchmarkKind::MotorLike;
    if (name == "square_grid") return BenchmarkKind::SquareGrid;
    throw ConfigurationError("unknown benchmark '" + std::string(name) + "' (expected motor_like or square_grid)");
}

MultiPatchDomain square_grid(int n, int level, int degree) {
    if (n < 1) throw ConfigurationError("square_grid needs at least one patch per direction");
    if (level < 0) throw ConfigurationError("refinement level must be non-negative");
    if (degree < 1) throw ConfigurationError("degree must be at least 1");
    const int spans = 1 << level;
    std::vector<Patch> patches;
    std::vector<SideRef> dirichlet;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            TensorBasis2D basis{KnotVector::uniform(degree, spans), KnotVector::uniform(degree, spans)};
            patches.push_back(Patch::from_greville(std::move(basis), [&](double u, double v) {
                return Point2(i + u, j + v);
            }));
            const int p = i * n + j;
            if (i == 0) dirichlet.push_back({p, Side::West});
            if (i == n - 1) dirichlet.push_back({p, Side::East});
            if (j == 0) dirichlet.push_back({p, Side::South});
            if (j == n - 1) dirichlet.push_back({p, Side::North});
        }
    }
    std::vector<MaterialTag> materials(patches.size(), MaterialTag{MaterialKind::Air, 1.0, std::nullopt});
    return build_topology(std::move(patches), std::move(materials), std::move(dirichlet));
}

namespace {

/// Control points of the cubic arc interpolating the unit circle at the
/// Greville points of `kv` over [0, angle].
std::vector<Point2> unit_arc(const KnotVector& kv, double angle) {
    const std::vector<double> g = kv.greville();
    const int n = kv.size();
    Eigen::MatrixXd colloc = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd rhs(n, 2);
    for (int i = 0; i < n; ++i) {
        const BasisValues b = eval_basis(kv, g[i]);
        for (int j = 0; j < b.values.cols(); ++j) colloc(i, b.first + j) = b.values(0, j);
        rhs(i, 0) = std::cos(angle * g[i]);
        rhs(i, 1) = std::sin(angle * g[i]);
    }
    const Eigen::MatrixXd c = colloc.partialPivLu().solve(rhs);
    std::vector<Point2> out;
    for (int j = 0; j < n; ++j) out.emplace_back(c(j, 0), c(j, 1));
    // end points exactly on the circle
    out.front() = Point2(1.0, 0.0);
    out.back() = Point2(std::cos(angle), std::sin(angle));
    return out;
}

}  // namespace

MultiPatchDomain motor_like(int level) {
    if (level < 0) throw ConfigurationError("refinement level must be non-negative");
    using L = MotorLayout;
    namespace bm = benchmark_materials;
    constexpr int degree = 3;
    std::vector<Patch> patches;
    std::vector<MaterialTag> materials;
    std::vector<SideRef> dirichlet;
    std::set<int> design;
    AirGapCurve airgap;
    const double dtheta = 2.0 * std::numbers::pi / L::kSectors;
    const std::vector<Point2> arc = unit_arc(KnotVector::uniform(degree, L::kLevel0Spans), dtheta);
    for (int ring = 0; ring < L::kRings; ++ring) {
        const double r0 = L::kRadii[ring];
        const double r1 = L::kRadii[ring + 1];
        for (int k = 0; k < L::kSectors; ++k) {
            const Eigen::Rotation2Dd rot(k * dtheta);
            TensorBasis2D basis{KnotVector::uniform(degree, L::kLevel0Spans),
                                KnotVector::uniform(degree, L::kLevel0Spans)};
            std::vector<Point2> cps;
            for (double u : basis.u.greville()) {
                const double r = r0 + (r1 - r0) * u;
                for (const Point2& a : arc) cps.push_back(r * (rot * a));
            }
            Patch patch(std::move(basis), std::move(cps));
            for (int l = 0; l < level; ++l) patch = patch.refined();
            patches.push_back(std::move(patch));
            const int p = L::patch(ring, k);
            switch (ring) {
                case L::kMagnetRing:
                    if (L::is_magnet_sector(k)) {
                        const int pole = ((k + 1) / 4) % 4;
                        const double angle = pole * std::numbers::pi / 2.0;
                        const double sign = pole % 2 == 0 ? 1.0 : -1.0;
                        const Eigen::Vector2d m =
                            sign * bm::kMagnetizationMagnitude * Eigen::Vector2d(std::cos(angle), std::sin(angle));
                        materials.push_back(MaterialTag::magnet(bm::kMagnetRelativePermeability, m));
                    } else {
                        materials.push_back(MaterialTag::air());
                    }
                    break;
                case L::kAirGapRing:
                    materials.push_back(MaterialTag::air_gap());
                    airgap.segments.push_back({p, 0, 0.5, 0.0, 1.0});
                    break;
                case L::kDesignRing:
                    design.insert(p);
                    materials.push_back(MaterialTag::ferromagnetic(bm::kIronRelativePermeability));
                    break;
                default:
                    materials.push_back(MaterialTag::ferromagnetic(bm::kIronRelativePermeability));
            }
            if (ring == 0) dirichlet.push_back({p, Side::West});
            if (ring == L::kRings - 1) dirichlet.push_back({p, Side::East});
        }
    }
    return build_topology(std::move(patches), std::move(materials), std::move(dirichlet), std::move(design),
                          std::move(airgap));
}

MultiPatchDomain generate_benchmark(const BenchmarkSpec& spec) {
    if (spec.kind == BenchmarkKind::MotorLike) return motor_like(spec.level);
    return square_grid(spec.grid, spec.level, spec.degree);
}

TargetFlux matched_pole_target(const MultiPatchDomain& domain, const GlobalDofMap& dof_map, const Eigen::VectorXd& u,
                               QuadratureOrder q) {
    return TargetFlux::poles(2, mean_flux_magnitude(domain, dof_map, u, q));
}

}  // namespace igashape
