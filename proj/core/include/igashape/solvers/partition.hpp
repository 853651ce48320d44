#pragma once

#include <vector>

#include "igashape/topology/dof_map.hpp"
#include "igashape/topology/multipatch.hpp"

namespace igashape {

/// Disjoint, interface-connected groups of patches covering the domain.
struct Partition {
    std::vector<std::vector<int>> subdomains;  // sorted patch indices
    std::vector<int> dofs;                     // free dofs touched by each subdomain

    int size() const { return static_cast<int>(subdomains.size()); }
    /// max(dofs) / mean(dofs).
    double imbalance() const;
    /// Subdomain of every patch.
    std::vector<int> owner(int patch_count) const;
};

/// Free dofs touched by a set of patches.
int subdomain_dof_count(const GlobalDofMap& dof_map, const std::vector<int>& patches);

/// Greedy growth from the heaviest patches on the patch adjacency graph,
/// then exchange of boundary patches toward max <= 1.25 * mean. When patch
/// granularity makes the bound unreachable, the most balanced partition
/// found is returned (see imbalance()). Throws PartitionError when
/// n_sub is out of [1, #patches] or the adjacency graph cannot supply
/// n_sub connected groups.
Partition partition_balanced(const MultiPatchDomain& domain, const GlobalDofMap& dof_map, int n_sub);

/// One subdomain per patch.
Partition partition_per_patch(const MultiPatchDomain& domain, const GlobalDofMap& dof_map);

/// Throws PartitionError unless the groups are disjoint, cover all patches
/// and are connected.
void validate_partition(const MultiPatchDomain& domain, const Partition& partition);

}  // namespace igashape
