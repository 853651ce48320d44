#pragma once

#include <array>
#include <string_view>

#include "igashape/assembly/airgap.hpp"
#include "igashape/topology/multipatch.hpp"

namespace igashape {

enum class BenchmarkKind { MotorLike, SquareGrid };

std::string_view benchmark_name(BenchmarkKind kind);
/// "motor_like" or "square_grid"; throws ConfigurationError otherwise.
BenchmarkKind parse_benchmark(std::string_view name);

struct BenchmarkSpec {
    BenchmarkKind kind = BenchmarkKind::MotorLike;
    int level = 0;   // uniform refinements of the level-0 geometry
    int grid = 2;    // square_grid: n x n patches
    int degree = 3;  // square_grid only; motor_like is always cubic
};

/// Full annulus of 16 sectors and 5 rings, patch index ring * 16 + sector,
/// u radial and v counterclockwise. Rings from the inside: rotor yoke,
/// magnet ring (4 magnets of 2 sectors each, alternating radial
/// magnetization, air pockets in between), design ring, air gap with the
/// curve on its middle knot line, stator. Inner and outer circles are
/// Dirichlet. Level 0 has 4 x 4 cubic spans per patch.
struct MotorLayout {
    static constexpr int kSectors = 16;
    static constexpr int kRings = 5;
    static constexpr int kLevel0Spans = 4;
    static constexpr std::array<double, kRings + 1> kRadii{0.020, 0.030, 0.038, 0.045, 0.047, 0.070};
    static constexpr int kYokeRing = 0;
    static constexpr int kMagnetRing = 1;
    static constexpr int kDesignRing = 2;
    static constexpr int kAirGapRing = 3;
    static constexpr int kStatorRing = 4;

    static constexpr int patch(int ring, int sector) { return ring * kSectors + sector; }
    /// Magnet ring sectors 4k-1 and 4k form pole k (centered at k * 90 deg).
    static constexpr bool is_magnet_sector(int sector) { return sector % 4 == 0 || sector % 4 == 3; }
    /// Radial interfaces between rings plus angular ones between sectors.
    static constexpr int interface_count() { return (kRings - 1) * kSectors + kRings * kSectors; }
};

/// n x n unit patches on [0, n]^2, reluctivity 1, Dirichlet outer boundary,
/// 2^level spans per patch and direction.
MultiPatchDomain square_grid(int n, int level, int degree);

MultiPatchDomain motor_like(int level);

/// Throws ConfigurationError for a negative level, degree < 1 or grid < 1.
MultiPatchDomain generate_benchmark(const BenchmarkSpec& spec);

/// Four-pole target A cos(2 (2 pi s / L)) with A the mean |grad(u).tau| of
/// the state u on Gamma.
TargetFlux matched_pole_target(const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                               const Eigen::VectorXd& u, QuadratureOrder q = {});

}  // namespace igashape
