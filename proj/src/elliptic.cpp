#include "mdf/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mdf/errors.hpp"
#include "mdf/geometry.hpp"
#include "mdf/parallel.hpp"

namespace mdf {
namespace {

constexpr double kPi = 3.14159265358979323846;

struct TriDiag {
  std::vector<double> diag, off, rhs; // off[i] couples nodes i and i+1
};

// Face conductances g_f = 4 pi (psi^2/phi)_f / h_f with arithmetic face means.
// Together with trapezoid cell volumes these make the discrete energy
//   sum_f a g_f (dw)^2 + sum_i R_i V_i w_i^2
// a second-order quadrature of int (a |grad w|^2 + R w^2) dV, and the row
// equations its exact gradient, so the solve inherits the variational
// structure of the continuum problem.
std::vector<double> face_conductance(const WarpedMetric& m) {
  const size_t n = (size_t)m.n();
  std::vector<double> g(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    const double qi = m.psi[i] * m.psi[i] / m.phi[i];
    const double qj = m.psi[i + 1] * m.psi[i + 1] / m.phi[i + 1];
    const double h = m.grid.r[i + 1] - m.grid.r[i];
    g[i] = 4.0 * kPi * 0.5 * (qi + qj) / h;
  }
  return g;
}

// Symmetric Thomas solve via LDL^T. A non-positive pivot means the operator
// lost positive definiteness (scalar curvature too negative for this a).
std::vector<double> solve_spd_tridiag(const TriDiag& t, const char* what) {
  const size_t n = t.diag.size();
  std::vector<double> d(n), y(n), x(n);
  d[0] = t.diag[0];
  y[0] = t.rhs[0];
  if (!(d[0] > 0.0) || !std::isfinite(d[0]))
    fail(ErrorCode::IndefiniteOperator, std::string(what) + ": non-positive pivot at row 0");
  for (size_t i = 1; i < n; ++i) {
    const double l = t.off[i - 1] / d[i - 1];
    d[i] = t.diag[i] - l * t.off[i - 1];
    y[i] = t.rhs[i] - l * y[i - 1];
    if (!(d[i] > 0.0) || !std::isfinite(d[i]))
      fail(ErrorCode::IndefiniteOperator,
           std::string(what) + ": non-positive pivot at row " + std::to_string(i));
  }
  x[n - 1] = y[n - 1] / d[n - 1];
  for (size_t i = n - 1; i-- > 0;) x[i] = (y[i] - t.off[i] * x[i + 1]) / d[i];
  return x;
}

// Least-squares fit y ~ c0 + c1/x over indices [j0, n).
double fit_const_plus_inverse(const std::vector<double>& x, const std::vector<double>& y,
                              size_t j0) {
  double s00 = 0, s01 = 0, s11 = 0, b0 = 0, b1 = 0;
  for (size_t j = j0; j < x.size(); ++j) {
    const double u = 1.0 / x[j];
    s00 += 1.0;
    s01 += u;
    s11 += u * u;
    b0 += y[j];
    b1 += u * y[j];
  }
  const double det = s00 * s11 - s01 * s01;
  if (!(std::abs(det) > 1e-300))
    fail(ErrorCode::InsufficientData, "degenerate asymptotic fit window");
  return (b0 * s11 - b1 * s01) / det;
}

// Outer Robin term. In the vacuum tail the decaying harmonic with u ~ 1/psi
// has the exact flux relation psi^2 u_s = -1, which together with the
// Misner-Sharp identity 2 ms = psi (1 - psi_s^2) gives
//   w_s + (1 + psi_s) / (2 psi) (w - 1) = 0
// exactly on the u-family (flat limit psi_s -> 1 recovers 1/psi). It enters
// the energy as beta (w_out - 1)^2 with beta = 4 pi a psi (1 + psi_s) / 2.
double robin_coefficient(const WarpedMetric& m, const CurvatureData& c, double a) {
  const size_t n = (size_t)m.n();
  if (!(c.psi_s[n - 1] > 0.0))
    fail(ErrorCode::NonConvergentMass, "outer edge not expanding; Robin closure invalid");
  return 4.0 * kPi * a * m.psi[n - 1] * 0.5 * (1.0 + c.psi_s[n - 1]);
}

// Regular-center closure. The node-0 dual cell has zero volume, so the raw
// finite-volume row degenerates to w0 = w1 (first order). Scaling the
// regularity condition -3a u_ss(0) + R0 u0 = f0, with u_ss(0) = 2(u1-u0)/s1^2,
// by the weight that matches the inner face conductance keeps the matrix
// symmetric and restores second order at the axis.
double center_weight(const WarpedMetric& m, double g0) {
  const double s1 = 0.5 * (m.phi[0] + m.phi[1]) * (m.grid.r[1] - m.grid.r[0]);
  return g0 * s1 * s1 / 6.0;
}

} // namespace

ConformalResult solve_conformal(const WarpedMetric& m, double a) {
  if (!(a > 0.0)) fail(ErrorCode::BadConfig, "conformal exponent a must be positive");
  const size_t n = (size_t)m.n();
  const CurvatureData cur = curvature(m);
  std::vector<double> vol = volume_weights(m);
  const std::vector<double> g = face_conductance(m);
  if (m.topology == Topology::center) vol[0] = center_weight(m, g[0]);

  TriDiag t;
  t.diag.assign(n, 0.0);
  t.off.assign(n - 1, 0.0);
  t.rhs.assign(n, 0.0);
  for (size_t i = 0; i + 1 < n; ++i) {
    const double k = a * g[i];
    t.diag[i] += k;
    t.diag[i + 1] += k;
    t.off[i] = -k;
  }
  for (size_t i = 0; i < n; ++i) t.diag[i] += cur.scalar[i] * vol[i];
  const double beta = robin_coefficient(m, cur, a);
  t.diag[n - 1] += beta;
  t.rhs[n - 1] += beta;

  ConformalResult r;
  r.a = a;
  r.w = solve_spd_tridiag(t, "conformal solve");
  for (size_t i = 0; i < n; ++i)
    if (!(r.w[i] > 0.0) || !std::isfinite(r.w[i]))
      fail(ErrorCode::NonPositiveW, "conformal factor not positive at node " + std::to_string(i));

  // 1/psi coefficient from the outermost decade: psi (w - 1) ~ c + d/psi.
  const double pmax = m.psi[n - 1];
  size_t j0 = n - 1;
  while (j0 > 0 && m.psi[j0 - 1] >= 0.1 * pmax) --j0;
  if (n - j0 < 8) j0 = n - std::min(n, n / 4 + 8);
  std::vector<double> y(n);
  for (size_t i = 0; i < n; ++i) y[i] = m.psi[i] * (r.w[i] - 1.0);
  r.c = fit_const_plus_inverse(m.psi, y, j0);

  // Divergence identity: a * 4 pi * (-c) = int R w dV (zero inner flux).
  r.c_div = -par::blocked_sum(n, [&](size_t i) { return cur.scalar[i] * r.w[i] * vol[i]; }) /
            (4.0 * kPi * a);

  // Discrete energy int (a |grad w|^2 + R w^2) dV: faces plus cells, plus the
  // gradient energy of the w = 1 + c u tail beyond the outer edge, which
  // integrates to 8 pi a c^2 / (psi (1 + psi_s)) in closed form.
  const double e_face = par::blocked_sum(n - 1, [&](size_t i) {
    const double dw = r.w[i + 1] - r.w[i];
    return a * g[i] * dw * dw;
  });
  const double e_cell =
      par::blocked_sum(n, [&](size_t i) { return cur.scalar[i] * vol[i] * r.w[i] * r.w[i]; });
  const double e_tail = 8.0 * kPi * a * r.c * r.c / (m.psi[n - 1] * (1.0 + cur.psi_s[n - 1]));
  r.energy = e_face + e_cell + e_tail;

  // Independent strong-form residual through the nodal stencils.
  const std::vector<double> lap = laplacian(m, r.w, m.scalar_parity());
  double ss = 0.0;
  for (size_t i = 1; i + 1 < n; ++i) {
    const double res = -a * lap[i] + cur.scalar[i] * r.w[i];
    ss += res * res;
  }
  r.residual = std::sqrt(ss / (double)(n - 2));
  return r;
}

double mass_jump_flux(const ConformalResult& r) {
  if (r.a != 8.0) fail(ErrorCode::BadConfig, "mass jump needs the a = 8 solution");
  return 2.0 * r.c;
}

double mass_jump_energy(const ConformalResult& r) {
  if (r.a != 8.0) fail(ErrorCode::BadConfig, "mass jump needs the a = 8 solution");
  return -r.energy / (16.0 * kPi);
}

LambdaResult lambda_af(const WarpedMetric& m) {
  LambdaResult out;
  out.sol = solve_conformal(m, 4.0);
  out.value = out.sol.energy / (16.0 * kPi);
  out.value_flux = -out.sol.c;
  return out;
}

std::vector<double> potential_f(const ConformalResult& a4) {
  if (a4.a != 4.0) fail(ErrorCode::BadConfig, "potential needs the a = 4 minimizer");
  std::vector<double> f(a4.w.size());
  for (size_t i = 0; i < f.size(); ++i) f[i] = -2.0 * std::log(a4.w[i]);
  return f;
}

double lambda_rate(const WarpedMetric& m, const ConformalResult& a4) {
  const size_t n = (size_t)m.n();
  if (a4.w.size() != n) fail(ErrorCode::BadConfig, "minimizer does not match the slice");
  const CurvatureData cur = curvature(m);
  const std::vector<double> f = potential_f(a4);
  const HessianComponents hess = hessian_components(m, f, m.scalar_parity());
  std::vector<double> density(n);
  for (size_t i = 0; i < n; ++i) {
    const double rad = 2.0 * cur.k1[i] + hess.radial[i];
    const double tan = cur.k1[i] + cur.k2[i] + hess.tangential[i];
    density[i] = (rad * rad + 2.0 * tan * tan) * a4.w[i] * a4.w[i]; // e^{-f} = v^2
  }
  const IntegralResult I = volume_integral(m, density, false);
  return 2.0 * I.value / (16.0 * kPi);
}

std::vector<double> poisson_solve(const WarpedMetric& m, const std::vector<double>& source) {
  const size_t n = (size_t)m.n();
  if (source.size() != n) fail(ErrorCode::BadConfig, "source does not match the slice");
  const CurvatureData cur = curvature(m);
  std::vector<double> vol = volume_weights(m);
  const std::vector<double> g = face_conductance(m);
  if (m.topology == Topology::center) vol[0] = center_weight(m, g[0]);

  TriDiag t;
  t.diag.assign(n, 0.0);
  t.off.assign(n - 1, 0.0);
  t.rhs.assign(n, 0.0);
  for (size_t i = 0; i + 1 < n; ++i) {
    t.diag[i] += g[i];
    t.diag[i + 1] += g[i];
    t.off[i] = -g[i];
  }
  t.diag[n - 1] += robin_coefficient(m, cur, 1.0);
  for (size_t i = 0; i < n; ++i) t.rhs[i] = -source[i] * vol[i];
  return solve_spd_tridiag(t, "poisson solve");
}

} // namespace mdf
