#include "igashape/topology/dof_map.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "igashape/errors.hpp"

namespace igashape {

namespace {

class UnionFind {
public:
    explicit UnionFind(int n) : parent_(static_cast<std::size_t>(n)) { std::iota(parent_.begin(), parent_.end(), 0); }

    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent_[b] = a;
    }

private:
    std::vector<int> parent_;
};

bool same_knots(const KnotVector& a, const KnotVector& b) {
    if (a.degree() != b.degree() || a.knots().size() != b.knots().size()) return false;
    const double scale = std::max(1.0, std::abs(a.last() - a.first()));
    for (std::size_t i = 0; i < a.knots().size(); ++i) {
        if (std::abs(a.knots()[i] - b.knots()[i]) > 1e-12 * scale) return false;
    }
    return true;
}

}  // namespace

GlobalDofMap build_dof_map(const MultiPatchDomain& domain) {
    const int np = domain.patch_count();
    std::vector<int> offset(static_cast<std::size_t>(np) + 1, 0);
    for (int i = 0; i < np; ++i) offset[i + 1] = offset[i] + domain.patch(i).basis().size();

    UnionFind uf(offset.back());
    for (const auto& itf : domain.interfaces()) {
        const Patch& pa = domain.patch(itf.a.patch);
        const Patch& pb = domain.patch(itf.b.patch);
        const KnotVector& ka = pa.side_knots(itf.a.side);
        const KnotVector kb = itf.flipped ? pb.side_knots(itf.b.side).reversed() : pb.side_knots(itf.b.side);
        if (!same_knots(ka, kb)) {
            std::ostringstream msg;
            msg << "interface between patch " << itf.a.patch << " (" << side_name(itf.a.side) << ") and patch "
                << itf.b.patch << " (" << side_name(itf.b.side) << ") has non-matching knot vectors";
            throw ConformityError(msg.str());
        }
        const auto ia = pa.side_indices(itf.a.side);
        const auto ib = pb.side_indices(itf.b.side);
        const std::size_t n = ia.size();
        for (std::size_t k = 0; k < n; ++k) {
            const int other = itf.flipped ? ib[n - 1 - k] : ib[k];
            uf.unite(offset[itf.a.patch] + ia[k], offset[itf.b.patch] + other);
        }
    }

    GlobalDofMap map;
    std::vector<int> root_to_global(static_cast<std::size_t>(offset.back()), -1);
    map.local_to_global_.resize(static_cast<std::size_t>(np));
    for (int i = 0; i < np; ++i) {
        const int n = domain.patch(i).basis().size();
        auto& l2g = map.local_to_global_[i];
        l2g.resize(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            const int r = uf.find(offset[i] + k);
            if (root_to_global[r] < 0) root_to_global[r] = map.n_global_++;
            l2g[k] = root_to_global[r];
        }
    }

    map.dirichlet_.assign(static_cast<std::size_t>(map.n_global_), false);
    for (const auto& s : domain.dirichlet_sides()) {
        for (int k : domain.patch(s.patch).side_indices(s.side)) {
            map.dirichlet_[map.local_to_global_[s.patch][k]] = true;
        }
    }
    map.renumber_free();
    return map;
}

void GlobalDofMap::renumber_free() {
    free_index_.assign(static_cast<std::size_t>(n_global_), -1);
    free_to_global_.clear();
    n_free_ = 0;
    for (int g = 0; g < n_global_; ++g) {
        if (!dirichlet_[g]) {
            free_index_[g] = n_free_++;
            free_to_global_.push_back(g);
        }
    }
}

GlobalDofMap GlobalDofMap::with_fixed(const std::vector<bool>& extra_fixed) const {
    if (static_cast<int>(extra_fixed.size()) != n_global_) {
        throw ContractError("fixed-dof mask must have one entry per global dof");
    }
    GlobalDofMap out = *this;
    for (int g = 0; g < n_global_; ++g) {
        if (extra_fixed[g]) out.dirichlet_[g] = true;
    }
    out.renumber_free();
    return out;
}

std::vector<std::vector<std::pair<int, int>>> GlobalDofMap::copies() const {
    std::vector<std::vector<std::pair<int, int>>> out(static_cast<std::size_t>(n_global_));
    for (int p = 0; p < patch_count(); ++p) {
        const auto& l2g = local_to_global_[p];
        for (int k = 0; k < static_cast<int>(l2g.size()); ++k) out[l2g[k]].emplace_back(p, k);
    }
    return out;
}

}  // namespace igashape
