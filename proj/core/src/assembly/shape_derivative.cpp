#include "igashape/assembly/shape_derivative.hpp"

#include "igashape/assembly/element_loop.hpp"
#include "igashape/assembly/field.hpp"
#include "igashape/errors.hpp"

namespace igashape {

Eigen::VectorXd assemble_shape_derivative(const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                                          const Eigen::VectorXd& u, const Eigen::VectorXd& p,
                                          const SourceSpec& source, QuadratureOrder q) {
    if (u.size() != dof_map.free_count() || p.size() != dof_map.free_count()) {
        throw ContractError("state and adjoint vectors must match the free dofs");
    }
    const int ng = dof_map.global_count();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * ng);
    for (int pi = 0; pi < domain.patch_count(); ++pi) {
        const Patch& patch = domain.patch(pi);
        const MaterialTag& mat = domain.material(pi);
        const double nu = mat.reluctivity;
        const Eigen::Vector2d mperp = mat.magnetization_perp();
        const double j3 = source.j3(pi);
        const Eigen::VectorXd cu = patch_coefficients(dof_map, u, pi);
        const Eigen::VectorXd cp = patch_coefficients(dof_map, p, pi);
        if (cp.isZero(0.0) && (cu.isZero(0.0) || (mperp.isZero(0.0) && j3 == 0.0))) continue;
        const PatchQuadrature quad(patch, q.points(patch.degree_u()), q.points(patch.degree_v()));
        const auto& l2g = dof_map.patch_dofs(pi);
        for_each_element(patch, pi, quad, [&](const ElementValues& ev) {
            const Eigen::MatrixXd gu = ev.gradient(cu);
            const Eigen::MatrixXd gp = ev.gradient(cp);
            const Eigen::VectorXd pv = ev.interpolate(cp);
            const Eigen::Index nq = ev.weight.size();
            // per-point S, then (S grad phi)_c = S_c0 dNdx + S_c1 dNdy
            Eigen::VectorXd s00(nq), s01(nq), s10(nq), s11(nq);
            for (Eigen::Index k = 0; k < nq; ++k) {
                const Eigen::Vector2d du = gu.row(k).transpose();
                const Eigen::Vector2d dp = gp.row(k).transpose();
                const double trace_part = nu * du.dot(dp) - mat.reluctivity * dp.dot(mperp) - j3 * pv(k);
                Eigen::Matrix2d s = trace_part * Eigen::Matrix2d::Identity();
                s += mat.reluctivity * dp * mperp.transpose();
                s -= nu * dp * du.transpose();
                s -= nu * du * dp.transpose();
                const double w = ev.weight(k);
                s00(k) = w * s(0, 0);
                s01(k) = w * s(0, 1);
                s10(k) = w * s(1, 0);
                s11(k) = w * s(1, 1);
            }
            const Eigen::VectorXd fx = ev.dNdx.transpose() * s00 + ev.dNdy.transpose() * s01;
            const Eigen::VectorXd fy = ev.dNdx.transpose() * s10 + ev.dNdy.transpose() * s11;
            for (std::size_t k = 0; k < ev.local.size(); ++k) {
                const int g = l2g[ev.local[k]];
                out(g) += fx(static_cast<Eigen::Index>(k));
                out(ng + g) += fy(static_cast<Eigen::Index>(k));
            }
        });
    }
    return out;
}

}  // namespace igashape
