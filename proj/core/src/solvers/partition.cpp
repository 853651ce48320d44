#include "igashape/solvers/partition.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <sstream>

#include "igashape/errors.hpp"

namespace igashape {

double Partition::imbalance() const {
    if (dofs.empty()) return 1.0;
    const double mean = std::accumulate(dofs.begin(), dofs.end(), 0.0) / static_cast<double>(dofs.size());
    return mean > 0.0 ? *std::max_element(dofs.begin(), dofs.end()) / mean : 1.0;
}

std::vector<int> Partition::owner(int patch_count) const {
    std::vector<int> out(static_cast<std::size_t>(patch_count), -1);
    for (int s = 0; s < size(); ++s) {
        for (int p : subdomains[s]) out[p] = s;
    }
    return out;
}

int subdomain_dof_count(const GlobalDofMap& dof_map, const std::vector<int>& patches) {
    std::vector<int> all;
    for (int p : patches) {
        for (int g : dof_map.patch_dofs(p)) {
            if (dof_map.free_index(g) >= 0) all.push_back(g);
        }
    }
    std::sort(all.begin(), all.end());
    return static_cast<int>(std::unique(all.begin(), all.end()) - all.begin());
}

namespace {

using Graph = std::vector<std::vector<int>>;

Graph adjacency(const MultiPatchDomain& domain) {
    Graph g(static_cast<std::size_t>(domain.patch_count()));
    for (int i = 0; i < domain.patch_count(); ++i) g[i] = domain.neighbors(i);
    return g;
}

// BFS hop distances from a set of sources; unreachable = max int.
std::vector<int> distances(const Graph& g, const std::vector<int>& sources) {
    std::vector<int> d(g.size(), std::numeric_limits<int>::max());
    std::deque<int> q;
    for (int s : sources) {
        d[s] = 0;
        q.push_back(s);
    }
    while (!q.empty()) {
        const int v = q.front();
        q.pop_front();
        for (int w : g[v]) {
            if (d[w] == std::numeric_limits<int>::max()) {
                d[w] = d[v] + 1;
                q.push_back(w);
            }
        }
    }
    return d;
}

bool connected_without(const Graph& g, const std::vector<int>& owner, int sub, int removed) {
    int start = -1;
    int count = 0;
    for (int p = 0; p < static_cast<int>(owner.size()); ++p) {
        if (owner[p] == sub && p != removed) {
            ++count;
            if (start < 0) start = p;
        }
    }
    if (count == 0) return false;
    std::vector<char> seen(owner.size(), 0);
    std::deque<int> q{start};
    seen[start] = 1;
    int reached = 1;
    while (!q.empty()) {
        const int v = q.front();
        q.pop_front();
        for (int w : g[v]) {
            if (!seen[w] && owner[w] == sub && w != removed) {
                seen[w] = 1;
                ++reached;
                q.push_back(w);
            }
        }
    }
    return reached == count;
}

Partition from_owner(const std::vector<int>& owner, int n_sub, const GlobalDofMap& dof_map) {
    Partition out;
    out.subdomains.resize(static_cast<std::size_t>(n_sub));
    for (int p = 0; p < static_cast<int>(owner.size()); ++p) out.subdomains[owner[p]].push_back(p);
    for (const auto& s : out.subdomains) out.dofs.push_back(subdomain_dof_count(dof_map, s));
    return out;
}

std::vector<int> owner_weights(const std::vector<int>& owner, int n_sub, const GlobalDofMap& dof_map) {
    return from_owner(owner, n_sub, dof_map).dofs;
}

}  // namespace

Partition partition_per_patch(const MultiPatchDomain& domain, const GlobalDofMap& dof_map) {
    std::vector<int> owner(static_cast<std::size_t>(domain.patch_count()));
    std::iota(owner.begin(), owner.end(), 0);
    return from_owner(owner, domain.patch_count(), dof_map);
}

Partition partition_balanced(const MultiPatchDomain& domain, const GlobalDofMap& dof_map, int n_sub) {
    const int np = domain.patch_count();
    if (n_sub < 1 || n_sub > np) {
        std::ostringstream msg;
        msg << "cannot split " << np << " patches into " << n_sub << " subdomains";
        throw PartitionError(msg.str());
    }
    if (n_sub == np) return partition_per_patch(domain, dof_map);
    const Graph g = adjacency(domain);
    std::vector<int> weight(static_cast<std::size_t>(np));
    for (int p = 0; p < np; ++p) weight[p] = subdomain_dof_count(dof_map, {p});

    // one seed per connected component first, heaviest patch of each
    std::vector<int> component(static_cast<std::size_t>(np), -1);
    std::vector<int> seeds;
    for (int p = 0; p < np; ++p) {
        if (component[p] >= 0) continue;
        const auto d = distances(g, {p});
        int heaviest = p;
        for (int q = 0; q < np; ++q) {
            if (d[q] == std::numeric_limits<int>::max()) continue;
            component[q] = static_cast<int>(seeds.size());
            if (weight[q] > weight[heaviest]) heaviest = q;
        }
        seeds.push_back(heaviest);
    }
    if (static_cast<int>(seeds.size()) > n_sub) {
        std::ostringstream msg;
        msg << "domain has " << seeds.size() << " disconnected parts, more than " << n_sub << " subdomains";
        throw PartitionError(msg.str());
    }
    // further seeds: farthest from existing ones, heavier first on ties
    while (static_cast<int>(seeds.size()) < n_sub) {
        const auto d = distances(g, seeds);
        int best = -1;
        for (int p = 0; p < np; ++p) {
            if (std::find(seeds.begin(), seeds.end(), p) != seeds.end()) continue;
            if (best < 0 || d[p] > d[best] || (d[p] == d[best] && weight[p] > weight[best])) best = p;
        }
        seeds.push_back(best);
    }

    std::vector<int> owner(static_cast<std::size_t>(np), -1);
    std::vector<long> load(static_cast<std::size_t>(n_sub), 0);
    for (int s = 0; s < n_sub; ++s) {
        owner[seeds[s]] = s;
        load[s] = weight[seeds[s]];
    }
    for (;;) {
        int best_s = -1;
        int best_p = -1;
        for (int s = 0; s < n_sub; ++s) {
            if (best_s >= 0 && load[s] >= load[best_s]) continue;
            int cand = -1;
            int links = -1;
            for (int p = 0; p < np; ++p) {
                if (owner[p] != -1) continue;
                int l = 0;
                for (int w : g[p]) l += owner[w] == s;
                if (l > 0 && (l > links || (l == links && weight[p] > weight[cand]))) {
                    cand = p;
                    links = l;
                }
            }
            if (cand >= 0) {
                best_s = s;
                best_p = cand;
            }
        }
        if (best_s < 0) break;
        owner[best_p] = best_s;
        load[best_s] += weight[best_p];
    }

    // boundary exchange
    std::vector<int> w = owner_weights(owner, n_sub, dof_map);
    auto total_max = [](const std::vector<int>& v) { return *std::max_element(v.begin(), v.end()); };
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / n_sub;
    for (int iter = 0; iter < 4 * np * n_sub; ++iter) {
        if (total_max(w) <= 1.25 * mean) break;
        const int heavy = static_cast<int>(std::max_element(w.begin(), w.end()) - w.begin());
        int move_p = -1;
        int move_t = -1;
        int move_max = w[heavy];
        std::vector<int> move_w;
        for (int p = 0; p < np; ++p) {
            if (owner[p] != heavy) continue;
            for (int q : g[p]) {
                const int t = owner[q];
                if (t == heavy) continue;
                if (!connected_without(g, owner, heavy, p)) continue;
                std::vector<int> trial = owner;
                trial[p] = t;
                const std::vector<int> tw = owner_weights(trial, n_sub, dof_map);
                const int pair_max = std::max(tw[heavy], tw[t]);
                if (pair_max < move_max) {
                    move_max = pair_max;
                    move_p = p;
                    move_t = t;
                    move_w = tw;
                }
            }
        }
        if (move_p < 0) break;
        owner[move_p] = move_t;
        w = move_w;
    }
    Partition out = from_owner(owner, n_sub, dof_map);
    validate_partition(domain, out);
    return out;
}

void validate_partition(const MultiPatchDomain& domain, const Partition& partition) {
    const int np = domain.patch_count();
    std::vector<int> owner(static_cast<std::size_t>(np), -1);
    for (int s = 0; s < partition.size(); ++s) {
        if (partition.subdomains[s].empty()) throw PartitionError("empty subdomain");
        for (int p : partition.subdomains[s]) {
            if (p < 0 || p >= np) throw PartitionError("subdomain refers to an invalid patch");
            if (owner[p] >= 0) throw PartitionError("patch assigned to two subdomains");
            owner[p] = s;
        }
    }
    for (int p = 0; p < np; ++p) {
        if (owner[p] < 0) throw PartitionError("patch not assigned to any subdomain");
    }
    const Graph g = adjacency(domain);
    for (int s = 0; s < partition.size(); ++s) {
        if (!connected_without(g, owner, s, -1)) {
            std::ostringstream msg;
            msg << "subdomain " << s << " is not interface-connected";
            throw PartitionError(msg.str());
        }
    }
}

}  // namespace igashape
