#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "igashape/topology/dof_map.hpp"
#include "igashape/topology/multipatch.hpp"

namespace igashape {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Gauss points per span and direction: degree + 1 + extra.
struct QuadratureOrder {
    int extra = 0;

    int points(int degree) const { return degree + 1 + extra; }
};

/// Reduced system on the free dofs plus the patch-local blocks it was
/// assembled from. `matrix` stores both triangles, mirrored exactly.
struct SparseSymmetricSystem {
    SparseMatrix matrix;
    Eigen::VectorXd rhs;
    /// Patch-local matrices over all basis functions of each patch,
    /// Dirichlet ones included.
    std::vector<SparseMatrix> patch_blocks;

    int size() const { return static_cast<int>(matrix.rows()); }
};

/// Current density J3 per patch (A/m^2). Magnetization comes from the
/// magnet materials. `density` is an optional extra volume source f(x).
struct SourceSpec {
    std::vector<double> current_density;
    std::function<double(const Point2&)> density;

    double j3(int patch) const {
        return current_density.empty() ? 0.0 : current_density.at(static_cast<std::size_t>(patch));
    }
};

/// Patch-local matrices of  int coeff * grad(phi_i) . grad(phi_j)
/// with one coefficient per patch (empty: material reluctivity).
std::vector<SparseMatrix> patch_stiffness(const MultiPatchDomain& domain, QuadratureOrder q = {},
                                          const std::vector<double>& coefficient = {});

/// Patch-local mass matrices.
std::vector<SparseMatrix> patch_mass(const MultiPatchDomain& domain, QuadratureOrder q = {});

/// Sums patch blocks into the reduced global matrix.
SparseMatrix reduce_patch_blocks(const std::vector<SparseMatrix>& blocks, const GlobalDofMap& dof_map);

/// State operator: int nu grad(u).grad(eta). Throws GeometryError on a
/// non-positive Jacobian at a quadrature point. rhs is zero.
SparseSymmetricSystem assemble_stiffness(const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                                         QuadratureOrder q = {});

/// Reduced mass matrix.
SparseSymmetricSystem assemble_mass(const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                                    QuadratureOrder q = {});

/// rhs_i = int (J3 phi_i + nu_mag M_perp . grad phi_i) (+ f phi_i), on the
/// free dofs.
Eigen::VectorXd assemble_load(const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                              const SourceSpec& source, QuadratureOrder q = {});

/// alpha_p = (bounding-box diameter of patch p)^2.
std::vector<double> default_alpha(const MultiPatchDomain& domain);

/// Scalar block A of the auxiliary form b(phi, psi) = int phi.psi + alpha grad(phi):grad(psi).
/// The vector-valued operator is diag(A, A), see vector_operator().
/// Throws ConfigurationError when some alpha_p <= 0.
SparseSymmetricSystem assemble_auxiliary_form(const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                                              const std::vector<double>& alpha, QuadratureOrder q = {});

/// Block-diagonal diag(A, A), x components first.
SparseMatrix vector_operator(const SparseMatrix& scalar_block);

}  // namespace igashape
