#pragma once

#include <vector>

#include <Eigen/Core>

#include "igashape/assembly/forms.hpp"

namespace igashape {

/// Desired flux B_d over the arc length s of the air-gap curve:
/// a0 + sum_k (a_k cos(2 pi k s / L) + b_k sin(2 pi k s / L)), k >= 1.
class TargetFlux {
public:
    TargetFlux() = default;

    static TargetFlux constant(double value);
    static TargetFlux fourier(double a0, std::vector<double> cos_coeffs, std::vector<double> sin_coeffs = {});
    /// A cos(2 pole_pairs pi s / L): the benchmark target with 2 pole pairs.
    static TargetFlux poles(int pole_pairs, double amplitude);
    /// Piecewise-linear through (s_k, value_k), constant beyond the ends.
    /// s must be strictly increasing.
    static TargetFlux tabulated(std::vector<double> s, std::vector<double> values);

    double operator()(double s, double length) const;

    bool is_constant() const { return cos_.empty() && sin_.empty() && table_s_.empty(); }
    bool is_tabulated() const { return !table_s_.empty(); }
    const std::vector<double>& table_s() const { return table_s_; }
    const std::vector<double>& table_values() const { return table_v_; }
    double mean() const { return a0_; }
    const std::vector<double>& cos_coeffs() const { return cos_; }
    const std::vector<double>& sin_coeffs() const { return sin_; }

private:
    double a0_ = 0.0;
    std::vector<double> cos_;
    std::vector<double> sin_;
    std::vector<double> table_s_;
    std::vector<double> table_v_;
};

/// One quadrature point on the air-gap curve.
struct AirGapSample {
    int patch = 0;
    std::vector<int> local;   // patch-local basis indices
    Eigen::VectorXd dphi_ds;  // grad(phi_k) . tau
    double weight = 0.0;      // ds
    double s = 0.0;           // arc length from the curve start
    Point2 point;
    Point2 tangent;
};

struct AirGapQuadrature {
    std::vector<AirGapSample> samples;
    double length = 0.0;
};

/// Gauss points along the curve, segment by segment, in traversal order.
AirGapQuadrature airgap_quadrature(const MultiPatchDomain& domain, QuadratureOrder q = {});

struct AirGapTerms {
    double objective = 0.0;
    Eigen::VectorXd adjoint_rhs;  // free dofs
};

/// J = int_Gamma (grad(u).tau - B_d)^2 ds and the adjoint right-hand side
/// -2 int_Gamma (grad(u).tau - B_d)(grad(phi_i).tau) ds = -dJ/du_i.
AirGapTerms assemble_airgap_terms(const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                                  const TargetFlux& target, const Eigen::VectorXd& u, QuadratureOrder q = {});

struct ProfilePoint {
    double s = 0.0;
    Point2 point;
    double flux = 0.0;    // grad(u).tau
    double target = 0.0;  // B_d(s)
};

/// Flux profile at the curve quadrature points.
std::vector<ProfilePoint> airgap_profile(const MultiPatchDomain& domain, const GlobalDofMap& dof_map,
                                         const TargetFlux& target, const Eigen::VectorXd& u,
                                         QuadratureOrder q = {});

/// (1/L) int_Gamma |grad(u).tau| ds.
double mean_flux_magnitude(const MultiPatchDomain& domain, const GlobalDofMap& dof_map, const Eigen::VectorXd& u,
                           QuadratureOrder q = {});

}  // namespace igashape
