#pragma once
#include <vector>

#include "mdf/metric.hpp"

namespace mdf {

/// Arclength s_i = int_{r0}^{r_i} phi dr (cumulative trapezoid), s_0 = 0.
std::vector<double> arclength(const WarpedMetric& m);

/// Pointwise curvature of the warped product. k1 is the sectional curvature
/// of planes containing d/ds, k2 that of the orbit spheres:
///   k1 = -psi_ss / psi,   k2 = (1 - psi_s^2) / psi^2,
///   scalar = 4 k1 + 2 k2, ricci_sq = 4 k1^2 + 2 (k1 + k2)^2.
/// At a smooth center both k1 and k2 are filled by even extrapolation.
/// The factor 1 - psi_s^2 entering k2 and the quasilocal mass is accumulated
/// from the inner edge as int -2 psi_s psi_ss ds (it vanishes identically at
/// a smooth center), which avoids the catastrophic cancellation the direct
/// difference suffers at the first nodes. ms = (psi/2)(1 - psi_s^2) is the
/// Misner-Sharp mass built from the same factor.
struct CurvatureData {
  std::vector<double> k1, k2, scalar, ricci_sq, psi_s, psi_ss, ms;
};
CurvatureData curvature(const WarpedMetric& m);

/// Laplace-Beltrami of a scalar u: u_ss + 2 (psi_s/psi) u_s.
/// Center limit 3 u_ss(0); throat edge reduces to u_ss by parity.
/// `inner` is the parity of u about the inner edge (scalars are even).
std::vector<double> laplacian(const WarpedMetric& m, const std::vector<double>& u,
                              Parity inner = Parity::even);

/// Hessian eigenvalues of a radial scalar: radial u_ss, tangential
/// (psi_s/psi) u_s (twice). |Hess u|^2 = radial^2 + 2 tangential^2.
struct HessianComponents {
  std::vector<double> radial, tangential;
};
HessianComponents hessian_components(const WarpedMetric& m, const std::vector<double>& u,
                                     Parity inner = Parity::even);

/// Misner-Sharp / Hawking mass of the coordinate sphere through each node:
/// m(s) = (psi/2)(1 - psi_s^2). Same data as curvature(m).ms.
std::vector<double> misner_sharp(const WarpedMetric& m);

/// Trapezoid weights for int f dV = sum_i w_i f_i, dV = 4 pi psi^2 phi dr.
std::vector<double> volume_weights(const WarpedMetric& m);

struct IntegralResult {
  double value = 0.0;        // quadrature over the grid (+ tail if fitted)
  double tail = 0.0;         // fitted contribution beyond the outer edge
  double tail_exponent = 0.0;
  bool tail_fitted = false;
};

/// Volume integral of a nodal density with a power-law tail estimate fitted
/// over the outermost decade of psi. Densities decaying slower than psi^-3
/// (non-integrable or marginal) raise TailDivergence when check_tail is set.
IntegralResult volume_integral(const WarpedMetric& m, const std::vector<double>& density,
                               bool check_tail = true);

struct MassEstimate {
  double mass = 0.0;
  double uncertainty = 0.0; // spread between outer-window extrapolants
};

/// ADM mass by least-squares extrapolation of the Misner-Sharp profile in
/// powers of 1/psi over the outer 20% of nodes, cross-checked against the
/// outer 10%. Disagreement beyond max(rel_tol*|m|, abs_tol) raises
/// NonConvergentMass.
MassEstimate adm_mass(const WarpedMetric& m, double rel_tol = 1e-2, double abs_tol = 1e-6);

/// g -> w^4 g for w > 0 with w ~ 1 at the outer edge:
/// phi -> w^2 phi, psi -> w^2 psi.
WarpedMetric conformal_transform(const WarpedMetric& m, const std::vector<double>& w);

// ---------------------------------------------------------------------------
// Initial data families
// ---------------------------------------------------------------------------

struct InitialData {
  WarpedMetric metric;
  double min_scalar = 0.0;  // grid minimum of R at construction
  bool scalar_negative = false; // true when min_scalar is materially below 0
};

/// Flat space: phi = 1, psi = r on a uniform grid.
InitialData make_flat(int n, double r_max);

/// Exact Schwarzschild exterior anchored at the horizon throat, in arclength
/// gauge (phi = 1). The grid is sinh-graded towards the throat; psi runs from
/// 2M at s = 0 out to psi_max.
InitialData make_schwarzschild(int n, double mass, double psi_max = 0.0, double alpha = 6.0);

/// Conformally non-trivial center-class data from a quasi-local mass profile
/// m(rho) = M rho^3 / (rho^3 + rho0^3) in areal gauge:
/// phi = (1 - 2 m(rho)/rho)^(-1/2), psi = rho. Requires 2m/rho < 1 on the
/// grid (HorizonInProfile otherwise). Scalar curvature 4 m'(rho)/rho^2 >= 0.
InitialData make_mass_profile(int n, double mass, double rho0 = 0.0, double rho_max = 0.0);

/// Rotationally symmetric dumbbell: flat core, bulge, neck, Schwarzschild
/// tail, built from the slope angle theta (psi' = cos theta) so that
/// R = (2 sin theta / psi^2)(sin theta + 2 psi theta') >= 0 by construction.
struct DumbbellParams {
  double s_flat = 1.0;      // flat run-in from the center
  double rise_len = 3.0;    // quintic ramp 0 -> theta_max
  double theta_max = 2.1;   // > pi/2: psi turns over (bulge crest)
  double beta_neck = 0.35;  // fall rate factor in (0,1]; smaller -> deeper neck
  double theta_relax = 1.2;  // below this slope angle blend beta -> 1
  double blend_width = 0.25; // theta-width of that blend
  double ramp_len = 0.5;    // s-width of the fall-rate switch-on
  double s_max = 140.0;
};
InitialData make_dumbbell(int n, const DumbbellParams& p = {});

/// Center-class data from an explicit psi(s) profile in arclength gauge
/// (phi = 1). Validates the smooth center; flags negative scalar curvature.
InitialData make_neck_profile(RadialGrid s_grid, std::vector<double> psi);

// Closed-form Schwarzschild relations used by the preset and by tests.
double schw_arclength(double psi, double mass);      // s(psi) from the throat
double schw_psi_of_arclength(double s, double mass); // inverse of the above

} // namespace mdf
