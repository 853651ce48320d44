#pragma once

#include <Eigen/Core>

#include "igashape/assembly/forms.hpp"

namespace igashape {

/// dJ(phi) = int S : D(phi) for every vector basis field phi_i e_c, where
/// S = (nu grad u.grad p - nu_mag grad p.M_perp - J3 p) I + nu_mag grad p (x) M_perp
///     - nu grad p (x) grad u - nu grad u (x) grad p.
/// u and p are free-dof vectors. The result is indexed by global dofs,
/// x components first: entry c * global_count + g. Entries of fixed dofs
/// are included; callers restrict to their design space.
Eigen::VectorXd assemble_shape_derivative(const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                                          const Eigen::VectorXd& u, const Eigen::VectorXd& p,
                                          const SourceSpec& source, QuadratureOrder q = {});

}  // namespace igashape
