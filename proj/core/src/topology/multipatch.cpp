#include "igashape/topology/multipatch.hpp"

#include <algorithm>
#include <sstream>

#include "igashape/errors.hpp"

namespace igashape {

std::string_view material_name(MaterialKind kind) {
    switch (kind) {
        case MaterialKind::Ferromagnetic: return "ferromagnetic";
        case MaterialKind::Air: return "air";
        case MaterialKind::Magnet: return "magnet";
        case MaterialKind::AirGap: return "airgap";
    }
    return "?";
}

MaterialKind parse_material(std::string_view name) {
    for (auto k : {MaterialKind::Ferromagnetic, MaterialKind::Air, MaterialKind::Magnet, MaterialKind::AirGap}) {
        if (material_name(k) == name) return k;
    }
    throw ParseError("unknown material kind '" + std::string(name) + "'");
}

void MaterialTag::validate() const {
    if (!(reluctivity > 0.0)) {
        throw ConfigurationError("reluctivity must be positive");
    }
    if (magnetization.has_value() != (kind == MaterialKind::Magnet)) {
        throw ConfigurationError("magnetization must be given exactly for magnet materials");
    }
}

SideKind MultiPatchDomain::side_kind(SideRef s) const {
    for (const auto& itf : interfaces_) {
        if (itf.a == s || itf.b == s) return SideKind::Interface;
    }
    if (std::find(dirichlet_.begin(), dirichlet_.end(), s) != dirichlet_.end()) return SideKind::Dirichlet;
    return SideKind::Free;
}

std::vector<int> MultiPatchDomain::neighbors(int i) const {
    std::set<int> out;
    for (const auto& itf : interfaces_) {
        if (itf.a.patch == i) out.insert(itf.b.patch);
        if (itf.b.patch == i) out.insert(itf.a.patch);
    }
    return {out.begin(), out.end()};
}

double reluctivity_field(const MultiPatchDomain& domain, int patch_index) {
    return domain.material(patch_index).reluctivity;
}

namespace {

struct SideGeometry {
    SideRef ref;
    std::vector<Point2> pts;
    Point2 lo;
    Point2 hi;
};

SideGeometry side_geometry(const Patch& p, SideRef ref) {
    SideGeometry g{ref, {}, {}, {}};
    for (int idx : p.side_indices(ref.side)) g.pts.push_back(p.control_points()[idx]);
    g.lo = g.pts.front();
    g.hi = g.pts.front();
    for (const auto& q : g.pts) {
        g.lo = g.lo.cwiseMin(q);
        g.hi = g.hi.cwiseMax(q);
    }
    return g;
}

bool close(const Point2& a, const Point2& b, double tol) { return (a - b).lpNorm<Eigen::Infinity>() <= tol; }

std::string describe(SideRef s) {
    std::ostringstream os;
    os << "patch " << s.patch << " side " << side_name(s.side);
    return os.str();
}

// 0: disjoint or corner contact, 1: forward match, 2: reversed match.
int match_sides(const SideGeometry& a, const SideGeometry& b, double tol) {
    if ((a.lo.array() > b.hi.array() + tol).any() || (b.lo.array() > a.hi.array() + tol).any()) return 0;
    const auto& pa = a.pts;
    const auto& pb = b.pts;
    const bool fwd_ends = close(pa.front(), pb.front(), tol) && close(pa.back(), pb.back(), tol);
    const bool rev_ends = close(pa.front(), pb.back(), tol) && close(pa.back(), pb.front(), tol);
    if (fwd_ends || rev_ends) {
        if (pa.size() == pb.size()) {
            const std::size_t n = pa.size();
            bool fwd = fwd_ends;
            bool rev = rev_ends;
            for (std::size_t k = 0; k < n; ++k) {
                fwd = fwd && close(pa[k], pb[k], tol);
                rev = rev && close(pa[k], pb[n - 1 - k], tol);
            }
            if (fwd) return 1;
            if (rev) return 2;
        }
        throw TopologyError(describe(a.ref) + " and " + describe(b.ref) +
                            " share both end points but their control points differ");
    }
    // an interior control point touching the other side means overlap
    auto touches = [tol](const std::vector<Point2>& inner, const std::vector<Point2>& other) {
        for (std::size_t k = 1; k + 1 < inner.size(); ++k) {
            for (const auto& q : other) {
                if (close(inner[k], q, tol)) return true;
            }
        }
        return false;
    };
    if (touches(pa, pb) || touches(pb, pa)) {
        throw TopologyError(describe(a.ref) + " and " + describe(b.ref) + " partially coincide");
    }
    return 0;
}

void validate_airgap(const std::vector<Patch>& patches, const AirGapCurve& curve, double tol) {
    Point2 prev_end;
    for (std::size_t k = 0; k < curve.segments.size(); ++k) {
        const auto& s = curve.segments[k];
        std::ostringstream where;
        where << "air-gap segment " << k;
        if (s.patch < 0 || s.patch >= static_cast<int>(patches.size())) {
            throw ConfigurationError(where.str() + ": invalid patch index");
        }
        if (s.fixed_dir != 0 && s.fixed_dir != 1) {
            throw ConfigurationError(where.str() + ": fixed direction must be 0 (u) or 1 (v)");
        }
        const auto& basis = patches[s.patch].basis();
        const KnotVector& fixed = s.fixed_dir == 0 ? basis.u : basis.v;
        const KnotVector& running = s.fixed_dir == 0 ? basis.v : basis.u;
        if (!fixed.is_break(s.value) || !running.is_break(s.from) || !running.is_break(s.to)) {
            throw ConfigurationError(where.str() + ": curve and its end points must lie on knot lines");
        }
        if (s.from == s.to) {
            throw ConfigurationError(where.str() + ": empty parameter range");
        }
        auto eval = [&](double t) {
            return s.fixed_dir == 0 ? geometry_eval(patches[s.patch], s.value, t).point
                                    : geometry_eval(patches[s.patch], t, s.value).point;
        };
        const Point2 start = eval(s.from);
        if (k > 0 && !close(start, prev_end, tol)) {
            throw ConfigurationError(where.str() + ": does not start where the previous segment ends");
        }
        prev_end = eval(s.to);
    }
}

}  // namespace

MultiPatchDomain build_topology(std::vector<Patch> patches, std::vector<MaterialTag> materials,
                                std::vector<SideRef> dirichlet_sides, std::set<int> design_patches,
                                AirGapCurve airgap) {
    const int np = static_cast<int>(patches.size());
    if (np == 0) throw TopologyError("domain has no patches");
    if (static_cast<int>(materials.size()) != np) {
        throw TopologyError("one material per patch required");
    }
    for (const auto& m : materials) m.validate();
    for (const auto& s : dirichlet_sides) {
        if (s.patch < 0 || s.patch >= np) throw TopologyError("Dirichlet side refers to an invalid patch");
    }
    for (int d : design_patches) {
        if (d < 0 || d >= np) throw TopologyError("design patch index out of range");
    }

    Point2 lo = patches.front().control_points().front();
    Point2 hi = lo;
    for (const auto& p : patches) {
        const auto [a, b] = p.bounding_box();
        lo = lo.cwiseMin(a);
        hi = hi.cwiseMax(b);
    }
    const double tol = kInterfaceTolerance * std::max(1.0, (hi - lo).norm());

    std::vector<SideGeometry> sides;
    for (int i = 0; i < np; ++i) {
        for (Side s : kAllSides) sides.push_back(side_geometry(patches[i], {i, s}));
    }

    MultiPatchDomain dom;
    std::vector<int> used(sides.size(), 0);
    for (std::size_t a = 0; a < sides.size(); ++a) {
        for (std::size_t b = a + 1; b < sides.size(); ++b) {
            if (sides[a].ref.patch == sides[b].ref.patch) continue;
            const int m = match_sides(sides[a], sides[b], tol);
            if (m == 0) continue;
            if (used[a] || used[b]) {
                throw TopologyError(describe(sides[used[a] ? a : b].ref) + " matches more than one side");
            }
            used[a] = used[b] = 1;
            dom.interfaces_.push_back({sides[a].ref, sides[b].ref, m == 2});
        }
    }

    std::sort(dirichlet_sides.begin(), dirichlet_sides.end());
    dirichlet_sides.erase(std::unique(dirichlet_sides.begin(), dirichlet_sides.end()), dirichlet_sides.end());
    for (const auto& s : dirichlet_sides) {
        for (const auto& itf : dom.interfaces_) {
            if (itf.a == s || itf.b == s) {
                throw TopologyError(describe(s) + " is both an interface and a Dirichlet side");
            }
        }
    }

    validate_airgap(patches, airgap, tol);

    dom.patches_ = std::move(patches);
    dom.materials_ = std::move(materials);
    dom.dirichlet_ = std::move(dirichlet_sides);
    dom.design_ = std::move(design_patches);
    dom.airgap_ = std::move(airgap);
    return dom;
}

}  // namespace igashape
