#pragma once

#include <set>
#include <vector>

#include "igashape/spline/patch.hpp"
#include "igashape/topology/material.hpp"

namespace igashape {

struct SideRef {
    int patch = 0;
    Side side = Side::West;

    auto operator<=>(const SideRef&) const = default;
};

/// Two coinciding patch sides. `flipped` is true when the sides run in
/// opposite parametric directions.
struct Interface {
    SideRef a;
    SideRef b;
    bool flipped = false;
};

/// One piece of the air-gap curve: the iso-line `fixed_dir = value` of a
/// patch (fixed_dir 0: u is fixed, the curve runs in v; 1: v is fixed),
/// traversed from parameter `from` to `to`. The traversal direction defines
/// the unit tangent tau.
struct AirGapSegment {
    int patch = 0;
    int fixed_dir = 1;
    double value = 0.0;
    double from = 0.0;
    double to = 1.0;
};

struct AirGapCurve {
    std::vector<AirGapSegment> segments;
};

enum class SideKind { Interface, Dirichlet, Free };

/// Patches glued along conforming interfaces, with materials, Dirichlet
/// sides, the design region, and the air-gap curve.
class MultiPatchDomain {
public:
    MultiPatchDomain() = default;

    const std::vector<Patch>& patches() const noexcept { return patches_; }
    const Patch& patch(int i) const { return patches_.at(static_cast<std::size_t>(i)); }
    int patch_count() const noexcept { return static_cast<int>(patches_.size()); }

    /// Control points may move (shape updates); topology stays fixed.
    std::vector<Point2>& control_points(int i) { return patches_.at(static_cast<std::size_t>(i)).control_points(); }

    const std::vector<MaterialTag>& materials() const noexcept { return materials_; }
    const MaterialTag& material(int i) const { return materials_.at(static_cast<std::size_t>(i)); }

    const std::vector<Interface>& interfaces() const noexcept { return interfaces_; }
    const std::vector<SideRef>& dirichlet_sides() const noexcept { return dirichlet_; }
    const std::set<int>& design_patches() const noexcept { return design_; }
    const AirGapCurve& airgap() const noexcept { return airgap_; }

    SideKind side_kind(SideRef s) const;

    /// Patches sharing an interface with patch i.
    std::vector<int> neighbors(int i) const;

    friend MultiPatchDomain build_topology(std::vector<Patch>, std::vector<MaterialTag>,
                                           std::vector<SideRef>, std::set<int>, AirGapCurve);

private:
    std::vector<Patch> patches_;
    std::vector<MaterialTag> materials_;
    std::vector<Interface> interfaces_;
    std::vector<SideRef> dirichlet_;
    std::set<int> design_;
    AirGapCurve airgap_;
};

/// Tolerance for coincident control points, relative to the domain size.
inline constexpr double kInterfaceTolerance = 1e-10;

/// Detects interfaces by comparing side control points. Every side whose
/// control points coincide (forward or reversed) with another side becomes
/// an interface. Throws TopologyError for partially coinciding sides, for a
/// Dirichlet side that is also an interface, and for invalid indices; throws
/// ConfigurationError for invalid materials or air-gap segments that do not
/// lie on knot lines or do not connect.
MultiPatchDomain build_topology(std::vector<Patch> patches, std::vector<MaterialTag> materials,
                                std::vector<SideRef> dirichlet_sides, std::set<int> design_patches = {},
                                AirGapCurve airgap = {});

/// Reluctivity of patch i.
double reluctivity_field(const MultiPatchDomain& domain, int patch_index);

}  // namespace igashape
