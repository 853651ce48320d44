#include "igashape/optimization/design.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "igashape/errors.hpp"
#include "igashape/solvers/sparse_ldlt.hpp"

namespace igashape {

namespace {

using Triplet = Eigen::Triplet<double>;

// Interior points of an n_u x n_v net, numbered (i - 1) * (n_v - 2) + (j - 1).
struct InteriorLaplace {
    int n_u = 0;
    int n_v = 0;
    SparseLdlt factor;

    InteriorLaplace(int nu, int nv) : n_u(nu), n_v(nv) {
        const int m = interior_count();
        std::vector<Triplet> t;
        for (int i = 1; i + 1 < n_u; ++i) {
            for (int j = 1; j + 1 < n_v; ++j) {
                const int r = interior(i, j);
                t.emplace_back(r, r, 4.0);
                for (auto [di, dj] : {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
                    const int c = interior(i + di, j + dj);
                    if (c >= 0) t.emplace_back(r, c, -1.0);
                }
            }
        }
        if (m > 0) {
            Eigen::SparseMatrix<double> l(m, m);
            l.setFromTriplets(t.begin(), t.end());
            try {
                factor = SparseLdlt(l);
            } catch (const FactorizationError& e) {
                throw SmoothingError(std::string("spring system is singular: ") + e.what());
            }
        }
    }

    int interior_count() const { return std::max(n_u - 2, 0) * std::max(n_v - 2, 0); }
    int interior(int i, int j) const {
        if (i < 1 || j < 1 || i > n_u - 2 || j > n_v - 2) return -1;
        return (i - 1) * (n_v - 2) + (j - 1);
    }
    bool on_ring(int i, int j) const { return i == 0 || j == 0 || i == n_u - 1 || j == n_v - 1; }

    // rhs row r collects the ring neighbours of interior point r
    template <class F>
    void for_ring_links(F&& f) const {
        for (int i = 1; i + 1 < n_u; ++i) {
            for (int j = 1; j + 1 < n_v; ++j) {
                for (auto [di, dj] : {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
                    if (on_ring(i + di, j + dj)) f(interior(i, j), (i + di) * n_v + (j + dj));
                }
            }
        }
    }
};

}  // namespace

std::string_view design_mode_name(DesignMode mode) {
    return mode == DesignMode::Global ? "global" : "interface";
}

DesignMode parse_design_mode(std::string_view name) {
    if (name == "global") return DesignMode::Global;
    if (name == "interface") return DesignMode::InterfaceOnly;
    throw ConfigurationError("unknown design mode '" + std::string(name) + "' (expected global or interface)");
}

DesignEntry DesignVariableMap::entry(int i) const {
    if (i < 0 || i >= size()) throw ContractError("design index out of range");
    DesignEntry e = entries_[static_cast<std::size_t>(i % point_count())];
    e.component = i / point_count();
    return e;
}

Eigen::VectorXd DesignVariableMap::displacement(const Eigen::VectorXd& design) const {
    if (design.size() != size()) throw ContractError("design vector size does not match the design map");
    const Eigen::Index n = point_count();
    const Eigen::Index g = extension_.rows();
    Eigen::VectorXd out(2 * g);
    out.head(g) = extension_ * design.head(n);
    out.tail(g) = extension_ * design.tail(n);
    return out;
}

Eigen::VectorXd DesignVariableMap::restrict(const Eigen::VectorXd& global_field) const {
    const Eigen::Index g = extension_.rows();
    if (global_field.size() != 2 * g) throw ContractError("field size does not match the global dofs");
    const Eigen::Index n = point_count();
    Eigen::VectorXd out(2 * n);
    out.head(n) = extension_.transpose() * global_field.head(g);
    out.tail(n) = extension_.transpose() * global_field.tail(g);
    return out;
}

DesignVariableMap DesignVariableMap::build(const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                                           DesignMode mode) {
    DesignVariableMap out;
    out.mode_ = mode;
    const int ng = dof_map.global_count();
    std::vector<bool> excluded(static_cast<std::size_t>(ng), false);
    for (int g = 0; g < ng; ++g) excluded[g] = dof_map.is_dirichlet(g);
    std::set<int> curve_patches;
    for (const auto& seg : domain.airgap().segments) curve_patches.insert(seg.patch);
    for (int p : curve_patches) {
        for (int g : dof_map.patch_dofs(p)) excluded[g] = true;
    }

    std::vector<bool> chosen(static_cast<std::size_t>(ng), false);
    if (mode == DesignMode::Global) {
        for (int g = 0; g < ng; ++g) chosen[g] = !excluded[g];
    } else {
        const auto& design = domain.design_patches();
        for (const auto& itf : domain.interfaces()) {
            const bool a_design = design.count(itf.a.patch) > 0;
            const bool b_design = design.count(itf.b.patch) > 0;
            const bool a_air = domain.material(itf.a.patch).kind == MaterialKind::Air;
            const bool b_air = domain.material(itf.b.patch).kind == MaterialKind::Air;
            if (!((a_design && b_air && !b_design) || (b_design && a_air && !a_design))) continue;
            for (int k : domain.patch(itf.a.patch).side_indices(itf.a.side)) {
                const int g = dof_map.global_index(itf.a.patch, k);
                if (!excluded[g]) chosen[g] = true;
            }
        }
        // a point also held by a third material (e.g. a magnet corner) stays put
        const auto copies = dof_map.copies();
        for (int g = 0; g < ng; ++g) {
            if (!chosen[g]) continue;
            for (auto [p, k] : copies[g]) {
                if (!design.count(p) && domain.material(p).kind != MaterialKind::Air) chosen[g] = false;
            }
        }
        if (std::none_of(chosen.begin(), chosen.end(), [](bool c) { return c; })) {
            throw ConfigurationError("interface design mode: no movable control point between design and air patches");
        }
    }

    std::vector<int> column(static_cast<std::size_t>(ng), -1);
    for (int g = 0; g < ng; ++g) {
        if (!chosen[g]) continue;
        column[g] = static_cast<int>(out.points_.size());
        out.points_.push_back(g);
    }
    out.entries_.resize(out.points_.size());
    for (int p = domain.patch_count() - 1; p >= 0; --p) {
        const auto& l2g = dof_map.patch_dofs(p);
        for (int k = 0; k < static_cast<int>(l2g.size()); ++k) {
            if (column[l2g[k]] >= 0) out.entries_[column[l2g[k]]] = DesignEntry{l2g[k], p, k, 0};
        }
    }
    out.frozen_.assign(static_cast<std::size_t>(ng), true);
    for (int g : out.points_) out.frozen_[g] = false;

    std::vector<Triplet> t;
    for (std::size_t c = 0; c < out.points_.size(); ++c) t.emplace_back(out.points_[c], static_cast<int>(c), 1.0);
    if (mode == DesignMode::InterfaceOnly) {
        for (int p = 0; p < domain.patch_count(); ++p) {
            const auto& l2g = dof_map.patch_dofs(p);
            const int nu = domain.patch(p).basis().size_u();
            const int nv = domain.patch(p).basis().size_v();
            const InteriorLaplace lap(nu, nv);
            if (lap.interior_count() == 0) continue;
            // ring design points of this patch
            std::vector<int> cols;
            std::vector<int> col_of(l2g.size(), -1);
            lap.for_ring_links([&](int, int k) {
                const int c = column[l2g[k]];
                if (c >= 0 && col_of[k] < 0) {
                    col_of[k] = static_cast<int>(cols.size());
                    cols.push_back(c);
                }
            });
            if (cols.empty()) continue;
            Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(lap.interior_count(), static_cast<Eigen::Index>(cols.size()));
            lap.for_ring_links([&](int r, int k) {
                if (col_of[k] >= 0) rhs(r, col_of[k]) += 1.0;
            });
            const Eigen::MatrixXd x = lap.factor.solve(rhs);
            for (int i = 1; i + 1 < nu; ++i) {
                for (int j = 1; j + 1 < nv; ++j) {
                    const int r = lap.interior(i, j);
                    const int g = l2g[static_cast<std::size_t>(i * nv + j)];
                    for (std::size_t c = 0; c < cols.size(); ++c) {
                        const double v = x(r, static_cast<Eigen::Index>(c));
                        if (v != 0.0) t.emplace_back(g, cols[c], v);
                    }
                }
            }
        }
    }
    out.extension_.resize(ng, static_cast<int>(out.points_.size()));
    out.extension_.setFromTriplets(t.begin(), t.end());
    out.extension_.makeCompressed();

    std::vector<bool> moves(static_cast<std::size_t>(ng), false);
    for (int c = 0; c < out.extension_.outerSize(); ++c) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(out.extension_, c); it; ++it) moves[it.row()] = true;
    }
    for (int p = 0; p < domain.patch_count(); ++p) {
        const auto& l2g = dof_map.patch_dofs(p);
        if (std::any_of(l2g.begin(), l2g.end(), [&](int g) { return moves[g]; })) out.moving_.push_back(p);
    }
    return out;
}

std::vector<Point2> spring_smooth(int n_u, int n_v, const std::vector<Point2>& net) {
    if (n_u < 2 || n_v < 2) throw SmoothingError("spring smoothing needs a net of at least 2 x 2 points");
    if (static_cast<int>(net.size()) != n_u * n_v) throw SmoothingError("control net size does not match n_u x n_v");
    const InteriorLaplace lap(n_u, n_v);
    std::vector<Point2> out = net;
    const int m = lap.interior_count();
    if (m == 0) return out;
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, 2);
    lap.for_ring_links([&](int r, int k) { rhs.row(r) += net[static_cast<std::size_t>(k)].transpose(); });
    const Eigen::MatrixXd x = lap.factor.solve(rhs);
    for (int i = 1; i + 1 < n_u; ++i) {
        for (int j = 1; j + 1 < n_v; ++j) out[static_cast<std::size_t>(i * n_v + j)] = x.row(lap.interior(i, j)).transpose();
    }
    return out;
}

MultiPatchDomain apply_design_update(const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                                     const DesignVariableMap& map, const Eigen::VectorXd& direction, double step) {
    MultiPatchDomain out = domain;
    if (step == 0.0) {
        if (direction.size() != map.size()) throw ContractError("design vector size does not match the design map");
        return out;
    }
    const Eigen::VectorXd d = map.displacement(step * direction);
    const int ng = dof_map.global_count();
    for (int p : map.moving_patches()) {
        auto& cps = out.control_points(p);
        const auto& l2g = dof_map.patch_dofs(p);
        for (std::size_t k = 0; k < cps.size(); ++k) cps[k] += Point2(d(l2g[k]), d(ng + l2g[k]));
    }
    return out;
}

}  // namespace igashape
