#pragma once

#include <numbers>
#include <optional>
#include <string_view>

#include <Eigen/Core>

namespace igashape {

/// Vacuum reluctivity 1/mu_0 in m/H.
inline constexpr double kVacuumReluctivity = 1.0 / (4.0e-7 * std::numbers::pi);

enum class MaterialKind { Ferromagnetic, Air, Magnet, AirGap };

std::string_view material_name(MaterialKind kind);
MaterialKind parse_material(std::string_view name);

/// Piecewise-constant material data of one patch.
struct MaterialTag {
    MaterialKind kind = MaterialKind::Air;
    double reluctivity = kVacuumReluctivity;
    std::optional<Eigen::Vector2d> magnetization;  // A/m, magnets only

    static MaterialTag air() { return {MaterialKind::Air, kVacuumReluctivity, std::nullopt}; }
    static MaterialTag air_gap() { return {MaterialKind::AirGap, kVacuumReluctivity, std::nullopt}; }
    static MaterialTag ferromagnetic(double relative_permeability) {
        return {MaterialKind::Ferromagnetic, kVacuumReluctivity / relative_permeability, std::nullopt};
    }
    static MaterialTag magnet(double relative_permeability, const Eigen::Vector2d& m) {
        return {MaterialKind::Magnet, kVacuumReluctivity / relative_permeability, m};
    }

    /// M rotated by +90 degrees: (-M2, M1); zero outside magnets.
    Eigen::Vector2d magnetization_perp() const {
        if (!magnetization) return Eigen::Vector2d::Zero();
        return {-(*magnetization)(1), (*magnetization)(0)};
    }

    /// Throws ConfigurationError when reluctivity <= 0 or the magnetization
    /// presence does not match the kind.
    void validate() const;
};

/// Benchmark constants used by the bundled motor-like geometry.
namespace benchmark_materials {
inline constexpr double kIronRelativePermeability = 5100.0;
inline constexpr double kMagnetRelativePermeability = 1.05;
inline constexpr double kMagnetizationMagnitude = 1.0e5;
}  // namespace benchmark_materials

}  // namespace igashape
