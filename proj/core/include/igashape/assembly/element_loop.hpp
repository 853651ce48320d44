#pragma once

#include <sstream>
#include <vector>

#include <Eigen/Core>

#include "igashape/errors.hpp"
#include "igashape/spline/patch.hpp"
#include "igashape/spline/quadrature.hpp"

namespace igashape {

/// Basis data of one knot span in one direction, at its Gauss points.
struct SpanTable {
    int first = 0;             // first active basis function
    std::vector<double> t;     // parameter values
    std::vector<double> w;     // parametric weights
    Eigen::MatrixXd value;     // points x (p+1)
    Eigen::MatrixXd deriv;     // points x (p+1)
};

/// Per-direction Gauss tables of one patch. points_u/points_v: Gauss points
/// per span (0 selects degree + 1).
struct PatchQuadrature {
    PatchQuadrature(const Patch& patch, int points_u = 0, int points_v = 0);

    std::vector<SpanTable> u;
    std::vector<SpanTable> v;
};

/// Geometry and physical basis data on one element.
struct ElementValues {
    int span_u = 0;
    int span_v = 0;
    std::vector<int> local;   // patch-local basis indices, size nloc
    Eigen::MatrixXd N;        // nq x nloc
    Eigen::MatrixXd dNdx;     // nq x nloc
    Eigen::MatrixXd dNdy;     // nq x nloc
    Eigen::VectorXd weight;   // Gauss weight times det(DG)
    Eigen::VectorXd det;      // det(DG)
    Eigen::MatrixXd x;        // nq x 2 physical points

    /// Values of sum_k c[local[k]] N_k at the element points.
    Eigen::VectorXd interpolate(const Eigen::VectorXd& patch_coeffs) const;
    /// nq x 2 gradient of sum_k c[local[k]] N_k.
    Eigen::MatrixXd gradient(const Eigen::VectorXd& patch_coeffs) const;
};

/// Evaluates one element. Throws GeometryError when det(DG) <= 0 at a
/// quadrature point.
void compute_element(const Patch& patch, int patch_index, const PatchQuadrature& quad, int su, int sv,
                     ElementValues& out);

/// Calls f(ElementValues&) for every element of the patch.
template <class F>
void for_each_element(const Patch& patch, int patch_index, const PatchQuadrature& quad, F&& f) {
    ElementValues ev;
    for (int su = 0; su < static_cast<int>(quad.u.size()); ++su) {
        for (int sv = 0; sv < static_cast<int>(quad.v.size()); ++sv) {
            compute_element(patch, patch_index, quad, su, sv, ev);
            f(static_cast<const ElementValues&>(ev));
        }
    }
}

}  // namespace igashape
