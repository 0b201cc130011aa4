#pragma once
#include <vector>

#include "mdf/metric.hpp"

namespace mdf {

/// Solution of the conformal boundary value problem
///   (-a lap + R) w = 0,  w -> 1 at the outer edge (Robin: w ~ 1 + c/psi),
/// zero flux at the inner edge (regular center / reflection throat).
/// Discretized in finite-volume flux form, which yields a symmetric
/// tridiagonal M-matrix for R >= 0 and makes the discrete counterpart of the
/// divergence identity a * (boundary flux) = int R w dV hold to quadrature
/// accuracy.
struct ConformalResult {
  std::vector<double> w;
  double a = 8.0;
  double c = 0.0;        // 1/psi coefficient of w - 1, from an outer-window fit
  double c_div = 0.0;    // same coefficient via -int R w dV / (4 pi a)
  double energy = 0.0;   // int (a |grad w|^2 + R w^2) dV
  double residual = 0.0; // RMS nodal strong-form residual (independent stencil)
};

ConformalResult solve_conformal(const WarpedMetric& m, double a = 8.0);

/// ADM mass change of the rescaling g -> w^4 g with the a = 8 solution:
/// flux form 2c, energy form -(1/16 pi) int (8 |grad w|^2 + R w^2) dV.
/// The two agree in the continuum; their mismatch measures discretization.
double mass_jump_flux(const ConformalResult& r);
double mass_jump_energy(const ConformalResult& r);

/// lambda_AF: infimum of (1/16 pi) int (4 |grad v|^2 + R v^2) dV over v -> 1.
/// The minimizer solves the a = 4 problem; value reported in both the energy
/// form and the equivalent boundary-flux form -c.
struct LambdaResult {
  double value = 0.0;      // energy form (the definition)
  double value_flux = 0.0; // -c, equal in the continuum
  ConformalResult sol;
};
LambdaResult lambda_af(const WarpedMetric& m);

/// Potential of the gradient-flow picture: f = -2 ln v with v the a = 4
/// minimizer, so e^{-f} = v^2 and 2 lap f - |grad f|^2 + R = 0.
std::vector<double> potential_f(const ConformalResult& a4);

/// Instantaneous production rate of lambda_AF along the curvature flow:
/// (1/16 pi) * 2 int |Ric + Hess f|^2 e^{-f} dV, evaluated with the radial /
/// tangential eigencomponents. On scalar-flat slices (f = 0) this reduces to
/// (1/16 pi) * 2 int |Ric|^2 dV, the mass decay rate of the continuum flow.
double lambda_rate(const WarpedMetric& m, const ConformalResult& a4);

/// lap h = source with zero inner flux and decay (Robin) at the outer edge,
/// normalized so h -> -Q/(4 pi psi) with Q = int source dV.
std::vector<double> poisson_solve(const WarpedMetric& m, const std::vector<double>& source);

} // namespace mdf
