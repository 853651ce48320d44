#pragma once

#include <functional>

#include <Eigen/Core>

#include "igashape/assembly/forms.hpp"

namespace igashape {

/// Patch-local coefficients of a free-dof vector (fixed dofs are zero).
Eigen::VectorXd patch_coefficients(const GlobalDofMap& dof_map, const Eigen::VectorXd& free_values, int patch);

/// Global-dof vector with fixed dofs set to zero.
Eigen::VectorXd expand_to_global(const GlobalDofMap& dof_map, const Eigen::VectorXd& free_values);

struct FieldValue {
    Point2 point;
    double value = 0.0;
    Eigen::Vector2d gradient;
};

/// u_h and its physical gradient at a parametric point of a patch.
FieldValue evaluate_field(const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                          const Eigen::VectorXd& free_values, int patch, double u, double v);

/// || u_h - exact ||_{L2}.
double l2_error(const MultiPatchDomain& domain, const GlobalDofMap& dof_map, const Eigen::VectorXd& free_values,
                const std::function<double(const Point2&)>& exact, QuadratureOrder q = {2});

/// Coefficients f(control point) per global dof; reproduces affine f
/// exactly.
Eigen::VectorXd greville_coefficients(const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                                     const std::function<double(const Point2&)>& f);

/// Total area of the domain.
double domain_area(const MultiPatchDomain& domain, QuadratureOrder q = {});

}  // namespace igashape
