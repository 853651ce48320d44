#include "igashape/assembly/forms.hpp"

#include <sstream>

#include "igashape/assembly/element_loop.hpp"
#include "igashape/errors.hpp"

namespace igashape {

namespace {

using Triplet = Eigen::Triplet<double>;

// mass_weight * int phi_i phi_j + stiff * int grad phi_i . grad phi_j
SparseMatrix patch_block(const Patch& patch, int index, QuadratureOrder q, double mass_weight, double stiff) {
    const PatchQuadrature quad(patch, q.points(patch.degree_u()), q.points(patch.degree_v()));
    const int n = patch.basis().size();
    std::vector<Triplet> trip;
    const std::size_t nloc = static_cast<std::size_t>((patch.degree_u() + 1) * (patch.degree_v() + 1));
    trip.reserve(quad.u.size() * quad.v.size() * nloc * nloc);
    Eigen::MatrixXd ke;
    for_each_element(patch, index, quad, [&](const ElementValues& ev) {
        const auto w = ev.weight.asDiagonal();
        ke.setZero(static_cast<Eigen::Index>(ev.local.size()), static_cast<Eigen::Index>(ev.local.size()));
        if (stiff != 0.0) {
            ke.noalias() += stiff * (ev.dNdx.transpose() * w * ev.dNdx);
            ke.noalias() += stiff * (ev.dNdy.transpose() * w * ev.dNdy);
        }
        if (mass_weight != 0.0) ke.noalias() += mass_weight * (ev.N.transpose() * w * ev.N);
        const int m = static_cast<int>(ev.local.size());
        for (int j = 0; j < m; ++j) {
            for (int i = 0; i < j; ++i) ke(j, i) = ke(i, j);
        }
        for (int j = 0; j < m; ++j) {
            for (int i = 0; i < m; ++i) trip.emplace_back(ev.local[i], ev.local[j], ke(i, j));
        }
    });
    SparseMatrix out(n, n);
    out.setFromTriplets(trip.begin(), trip.end());
    out.makeCompressed();
    return out;
}

void check_coefficients(const MultiPatchDomain& domain, const std::vector<double>& c, const char* what) {
    if (static_cast<int>(c.size()) != domain.patch_count()) {
        std::ostringstream msg;
        msg << what << ": expected " << domain.patch_count() << " values, got " << c.size();
        throw ContractError(msg.str());
    }
}

SparseSymmetricSystem finish(std::vector<SparseMatrix> blocks, const GlobalDofMap& dof_map) {
    SparseSymmetricSystem sys;
    sys.matrix = reduce_patch_blocks(blocks, dof_map);
    sys.rhs = Eigen::VectorXd::Zero(dof_map.free_count());
    sys.patch_blocks = std::move(blocks);
    return sys;
}

}  // namespace

std::vector<SparseMatrix> patch_stiffness(const MultiPatchDomain& domain, QuadratureOrder q,
                                          const std::vector<double>& coefficient) {
    if (!coefficient.empty()) check_coefficients(domain, coefficient, "stiffness coefficient");
    std::vector<SparseMatrix> out;
    out.reserve(static_cast<std::size_t>(domain.patch_count()));
    for (int i = 0; i < domain.patch_count(); ++i) {
        const double c = coefficient.empty() ? domain.material(i).reluctivity : coefficient[i];
        out.push_back(patch_block(domain.patch(i), i, q, 0.0, c));
    }
    return out;
}

std::vector<SparseMatrix> patch_mass(const MultiPatchDomain& domain, QuadratureOrder q) {
    std::vector<SparseMatrix> out;
    out.reserve(static_cast<std::size_t>(domain.patch_count()));
    for (int i = 0; i < domain.patch_count(); ++i) out.push_back(patch_block(domain.patch(i), i, q, 1.0, 0.0));
    return out;
}

SparseMatrix reduce_patch_blocks(const std::vector<SparseMatrix>& blocks, const GlobalDofMap& dof_map) {
    if (static_cast<int>(blocks.size()) != dof_map.patch_count()) {
        throw ContractError("one block per patch required");
    }
    std::size_t nnz = 0;
    for (const auto& b : blocks) nnz += static_cast<std::size_t>(b.nonZeros());
    std::vector<Triplet> trip;
    trip.reserve(nnz);
    for (int p = 0; p < static_cast<int>(blocks.size()); ++p) {
        const auto& l2g = dof_map.patch_dofs(p);
        const SparseMatrix& b = blocks[p];
        for (int col = 0; col < b.outerSize(); ++col) {
            const int fc = dof_map.free_index(l2g[col]);
            if (fc < 0) continue;
            for (SparseMatrix::InnerIterator it(b, col); it; ++it) {
                const int fr = dof_map.free_index(l2g[it.row()]);
                if (fr >= 0) trip.emplace_back(fr, fc, it.value());
            }
        }
    }
    SparseMatrix out(dof_map.free_count(), dof_map.free_count());
    out.setFromTriplets(trip.begin(), trip.end());
    out.makeCompressed();
    return out;
}

SparseSymmetricSystem assemble_stiffness(const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                                         QuadratureOrder q) {
    return finish(patch_stiffness(domain, q), dof_map);
}

SparseSymmetricSystem assemble_mass(const MultiPatchDomain& domain, const GlobalDofMap& dof_map, QuadratureOrder q) {
    return finish(patch_mass(domain, q), dof_map);
}

Eigen::VectorXd assemble_load(const MultiPatchDomain& domain, const GlobalDofMap& dof_map, const SourceSpec& source,
                              QuadratureOrder q) {
    if (!source.current_density.empty()) check_coefficients(domain, source.current_density, "current density");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dof_map.free_count());
    for (int p = 0; p < domain.patch_count(); ++p) {
        const MaterialTag& mat = domain.material(p);
        const double j3 = source.j3(p);
        const Eigen::Vector2d mperp = mat.magnetization_perp();
        const bool magnet = mperp.squaredNorm() > 0.0;
        if (j3 == 0.0 && !magnet && !source.density) continue;
        const Patch& patch = domain.patch(p);
        const PatchQuadrature quad(patch, q.points(patch.degree_u()), q.points(patch.degree_v()));
        const auto& l2g = dof_map.patch_dofs(p);
        Eigen::VectorXd local = Eigen::VectorXd::Zero(patch.basis().size());
        for_each_element(patch, p, quad, [&](const ElementValues& ev) {
            Eigen::VectorXd f = j3 * ev.weight;
            if (source.density) {
                for (Eigen::Index k = 0; k < f.size(); ++k) {
                    f(k) += ev.weight(k) * source.density(ev.x.row(k).transpose());
                }
            }
            Eigen::VectorXd fe = ev.N.transpose() * f;
            if (magnet) {
                const Eigen::VectorXd gx = (mat.reluctivity * mperp(0)) * ev.weight;
                const Eigen::VectorXd gy = (mat.reluctivity * mperp(1)) * ev.weight;
                fe += ev.dNdx.transpose() * gx + ev.dNdy.transpose() * gy;
            }
            for (std::size_t k = 0; k < ev.local.size(); ++k) local(ev.local[k]) += fe(static_cast<Eigen::Index>(k));
        });
        for (int k = 0; k < local.size(); ++k) {
            const int f = dof_map.free_index(l2g[k]);
            if (f >= 0) rhs(f) += local(k);
        }
    }
    return rhs;
}

std::vector<double> default_alpha(const MultiPatchDomain& domain) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(domain.patch_count()));
    for (const auto& p : domain.patches()) {
        const double d = p.bounding_box_diameter();
        out.push_back(d * d);
    }
    return out;
}

SparseSymmetricSystem assemble_auxiliary_form(const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                                              const std::vector<double>& alpha, QuadratureOrder q) {
    check_coefficients(domain, alpha, "alpha");
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (!(alpha[i] > 0.0)) {
            std::ostringstream msg;
            msg << "alpha must be positive on every patch (patch " << i << ": " << alpha[i] << ")";
            throw ConfigurationError(msg.str());
        }
    }
    std::vector<SparseMatrix> blocks;
    blocks.reserve(alpha.size());
    for (int i = 0; i < domain.patch_count(); ++i) blocks.push_back(patch_block(domain.patch(i), i, q, 1.0, alpha[i]));
    return finish(std::move(blocks), dof_map);
}

SparseMatrix vector_operator(const SparseMatrix& a) {
    const Eigen::Index n = a.rows();
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(2 * a.nonZeros()));
    for (int c = 0; c < a.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(a, c); it; ++it) {
            trip.emplace_back(it.row(), it.col(), it.value());
            trip.emplace_back(it.row() + n, it.col() + n, it.value());
        }
    }
    SparseMatrix out(2 * n, 2 * n);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

}  // namespace igashape
