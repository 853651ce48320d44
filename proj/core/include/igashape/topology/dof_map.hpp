#pragma once

#include <vector>

#include "igashape/topology/multipatch.hpp"

namespace igashape {

/// Continuous-Galerkin numbering: coincident interface basis functions share
/// one global index. Dirichlet dofs keep a global index but are excluded from
/// the reduced ("free") numbering used by the linear systems.
class GlobalDofMap {
public:
    GlobalDofMap() = default;

    int global_count() const noexcept { return n_global_; }
    int free_count() const noexcept { return n_free_; }
    int patch_count() const noexcept { return static_cast<int>(local_to_global_.size()); }

    const std::vector<int>& patch_dofs(int patch) const { return local_to_global_.at(static_cast<std::size_t>(patch)); }
    int global_index(int patch, int local) const { return patch_dofs(patch)[static_cast<std::size_t>(local)]; }

    bool is_dirichlet(int global) const { return dirichlet_[static_cast<std::size_t>(global)]; }
    const std::vector<bool>& dirichlet_mask() const noexcept { return dirichlet_; }

    /// Reduced index of a global dof, -1 when fixed.
    int free_index(int global) const { return free_index_[static_cast<std::size_t>(global)]; }
    int free_index(int patch, int local) const { return free_index(global_index(patch, local)); }
    int global_of_free(int free) const { return free_to_global_[static_cast<std::size_t>(free)]; }

    /// Same numbering with additional fixed dofs (e.g. frozen control points).
    GlobalDofMap with_fixed(const std::vector<bool>& extra_fixed) const;

    /// (patch, local) copies of every global dof.
    std::vector<std::vector<std::pair<int, int>>> copies() const;

    bool operator==(const GlobalDofMap&) const = default;

    friend GlobalDofMap build_dof_map(const MultiPatchDomain& domain);

private:
    void renumber_free();

    std::vector<std::vector<int>> local_to_global_;
    int n_global_ = 0;
    std::vector<bool> dirichlet_;
    std::vector<int> free_index_;
    std::vector<int> free_to_global_;
    int n_free_ = 0;
};

/// Throws ConformityError when matched sides carry different knot vectors.
GlobalDofMap build_dof_map(const MultiPatchDomain& domain);

}  // namespace igashape
