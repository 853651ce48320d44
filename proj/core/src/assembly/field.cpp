#include "igashape/assembly/field.hpp"

#include <cmath>

#include <Eigen/LU>

#include "igashape/assembly/element_loop.hpp"
#include "igashape/errors.hpp"

namespace igashape {

Eigen::VectorXd patch_coefficients(const GlobalDofMap& dof_map, const Eigen::VectorXd& free_values, int patch) {
    if (free_values.size() != dof_map.free_count()) {
        throw ContractError("coefficient vector does not match the free dofs");
    }
    const auto& l2g = dof_map.patch_dofs(patch);
    Eigen::VectorXd out(static_cast<Eigen::Index>(l2g.size()));
    for (std::size_t k = 0; k < l2g.size(); ++k) {
        const int f = dof_map.free_index(l2g[k]);
        out(static_cast<Eigen::Index>(k)) = f >= 0 ? free_values(f) : 0.0;
    }
    return out;
}

Eigen::VectorXd expand_to_global(const GlobalDofMap& dof_map, const Eigen::VectorXd& free_values) {
    if (free_values.size() != dof_map.free_count()) {
        throw ContractError("coefficient vector does not match the free dofs");
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dof_map.global_count());
    for (int f = 0; f < dof_map.free_count(); ++f) out(dof_map.global_of_free(f)) = free_values(f);
    return out;
}

FieldValue evaluate_field(const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                          const Eigen::VectorXd& free_values, int patch, double u, double v) {
    const Patch& p = domain.patch(patch);
    const GeometryPoint g = geometry_eval(p, u, v);
    const BasisValues bu = eval_basis_derivs(p.basis().u, u, 1);
    const BasisValues bv = eval_basis_derivs(p.basis().v, v, 1);
    const Eigen::VectorXd c = patch_coefficients(dof_map, free_values, patch);
    double val = 0.0;
    Eigen::Vector2d dparam = Eigen::Vector2d::Zero();
    for (int a = 0; a < bu.values.cols(); ++a) {
        for (int b = 0; b < bv.values.cols(); ++b) {
            const double ck = c(p.basis().index(bu.first + a, bv.first + b));
            val += ck * bu.values(0, a) * bv.values(0, b);
            dparam(0) += ck * bu.values(1, a) * bv.values(0, b);
            dparam(1) += ck * bu.values(0, a) * bv.values(1, b);
        }
    }
    const Eigen::Matrix2d& jac = g.jacobian.jacobian;
    if (!(std::abs(g.jacobian.det) > 0.0)) throw GeometryError("singular Jacobian at evaluation point");
    FieldValue out;
    out.point = g.point;
    out.value = val;
    out.gradient = jac.transpose().inverse() * dparam;
    return out;
}

double l2_error(const MultiPatchDomain& domain, const GlobalDofMap& dof_map, const Eigen::VectorXd& free_values,
                const std::function<double(const Point2&)>& exact, QuadratureOrder q) {
    double sum = 0.0;
    for (int p = 0; p < domain.patch_count(); ++p) {
        const Patch& patch = domain.patch(p);
        const PatchQuadrature quad(patch, q.points(patch.degree_u()), q.points(patch.degree_v()));
        const Eigen::VectorXd c = patch_coefficients(dof_map, free_values, p);
        for_each_element(patch, p, quad, [&](const ElementValues& ev) {
            const Eigen::VectorXd uh = ev.interpolate(c);
            for (Eigen::Index k = 0; k < uh.size(); ++k) {
                const double e = uh(k) - exact(ev.x.row(k).transpose());
                sum += ev.weight(k) * e * e;
            }
        });
    }
    return std::sqrt(sum);
}

Eigen::VectorXd greville_coefficients(const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                                      const std::function<double(const Point2&)>& f) {
    Eigen::VectorXd out(dof_map.global_count());
    std::vector<bool> done(static_cast<std::size_t>(dof_map.global_count()), false);
    for (int p = 0; p < domain.patch_count(); ++p) {
        const auto& cps = domain.patch(p).control_points();
        const auto& l2g = dof_map.patch_dofs(p);
        for (std::size_t k = 0; k < l2g.size(); ++k) {
            if (done[l2g[k]]) continue;
            done[l2g[k]] = true;
            out(l2g[k]) = f(cps[k]);
        }
    }
    return out;
}

double domain_area(const MultiPatchDomain& domain, QuadratureOrder q) {
    double a = 0.0;
    for (int p = 0; p < domain.patch_count(); ++p) {
        const Patch& patch = domain.patch(p);
        const PatchQuadrature quad(patch, q.points(patch.degree_u()), q.points(patch.degree_v()));
        for_each_element(patch, p, quad, [&](const ElementValues& ev) { a += ev.weight.sum(); });
    }
    return a;
}

}  // namespace igashape
