#include "mdf/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "mdf/errors.hpp"
#include "mdf/parallel.hpp"

namespace mdf {
namespace {

constexpr double kPi = 3.14159265358979323846;

Parity flip(Parity p) {
  if (p == Parity::even) return Parity::odd;
  if (p == Parity::odd) return Parity::even;
  return Parity::none;
}

// Even-quadratic extrapolation to the inner edge from offsets d1 < d2.
double even_extrap(double f1, double f2, double d1, double d2) {
  const double q1 = d1 * d1, q2 = d2 * d2;
  return (f1 * q2 - f2 * q1) / (q2 - q1);
}

// Quintic smoothstep: C^2 on [0,1], flat at both ends.
double smooth5(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

} // namespace

std::vector<double> arclength(const WarpedMetric& m) {
  const int n = m.n();
  std::vector<double> s(n, 0.0);
  for (int i = 1; i < n; ++i)
    s[i] = s[i - 1] + 0.5 * (m.phi[i - 1] + m.phi[i]) * (m.grid.r[i] - m.grid.r[i - 1]);
  return s;
}

CurvatureData curvature(const WarpedMetric& m) {
  const int n = m.n();
  const Stencils& st = m.stencils();
  CurvatureData c;

  std::vector<double> tmp = st.d1(m.psi, m.psi_parity());
  c.psi_s.resize(n);
  par::parallel_for((size_t)n, [&](size_t i) { c.psi_s[i] = tmp[i] / m.phi[i]; });
  st.d1(c.psi_s, flip(m.psi_parity()), tmp);
  c.psi_ss.resize(n);
  par::parallel_for((size_t)n, [&](size_t i) { c.psi_ss[i] = tmp[i] / m.phi[i]; });

  // 1 - psi_s^2. The pointwise difference cancels catastrophically where
  // psi_s ~ 1 with 1 - psi_s^2 ~ 0, i.e. near a smooth center; there we use
  // the accumulated form int -2 psi_s psi_ss ds (exactly 0 at the center) and
  // blend back to the pointwise value outward, which carries no path-
  // accumulated bias in the far field.
  std::vector<double> nf(n);
  par::parallel_for((size_t)n, [&](size_t i) { nf[i] = 1.0 - c.psi_s[i] * c.psi_s[i]; });
  if (m.topology == Topology::center) {
    const double h0 = m.phi[0] * (m.grid.r[1] - m.grid.r[0]);
    double s_max = 0.0;
    for (int i = 1; i < n; ++i)
      s_max += 0.5 * (m.phi[i - 1] + m.phi[i]) * (m.grid.r[i] - m.grid.r[i - 1]);
    const double s_hi = std::min(120.0 * h0, s_max / 3.0), s_lo = 0.5 * s_hi;
    double nf_int = 0.0, s = 0.0, g_prev = 0.0; // psi_s(0) psi_ss(0) = 0 by parity
    for (int i = 1; i < n; ++i) {
      const double ds = 0.5 * (m.phi[i - 1] + m.phi[i]) * (m.grid.r[i] - m.grid.r[i - 1]);
      const double g = -2.0 * c.psi_s[i] * c.psi_ss[i];
      nf_int += 0.5 * (g_prev + g) * ds;
      g_prev = g;
      s += ds;
      if (s >= s_hi) break;
      const double t = (s - s_lo) / (s_hi - s_lo);
      const double w = (t <= 0.0) ? 0.0 : smooth5(t);
      nf[i] = (1.0 - w) * nf_int + w * nf[i];
    }
    nf[0] = 0.0;
  }

  c.k1.resize(n);
  c.k2.resize(n);
  c.ms.resize(n);
  const int i0 = (m.topology == Topology::center) ? 1 : 0;
  for (int i = i0; i < n; ++i) {
    const double p = m.psi[i];
    c.k1[i] = -c.psi_ss[i] / p;
    c.k2[i] = nf[i] / (p * p);
    c.ms[i] = 0.5 * p * nf[i];
  }
  if (m.topology == Topology::center) {
    const double d1 = m.grid.r[1] - m.grid.r[0], d2 = m.grid.r[2] - m.grid.r[0];
    c.k1[0] = even_extrap(c.k1[1], c.k1[2], d1, d2);
    c.k2[0] = even_extrap(c.k2[1], c.k2[2], d1, d2);
    c.ms[0] = 0.0;
  }

  c.scalar.resize(n);
  c.ricci_sq.resize(n);
  par::parallel_for((size_t)n, [&](size_t i) {
    const double k1 = c.k1[i], k2 = c.k2[i], kc = k1 + k2;
    c.scalar[i] = 4.0 * k1 + 2.0 * k2;
    c.ricci_sq[i] = 4.0 * k1 * k1 + 2.0 * kc * kc;
  });
  return c;
}

std::vector<double> laplacian(const WarpedMetric& m, const std::vector<double>& u, Parity inner) {
  const int n = m.n();
  const Stencils& st = m.stencils();
  std::vector<double> u_s = st.d1(u, inner);
  par::parallel_for((size_t)n, [&](size_t i) { u_s[i] /= m.phi[i]; });
  std::vector<double> u_ss = st.d1(u_s, flip(inner));
  par::parallel_for((size_t)n, [&](size_t i) { u_ss[i] /= m.phi[i]; });
  std::vector<double> psi_r = st.d1(m.psi, m.psi_parity());

  std::vector<double> out(n);
  const int i0 = (m.topology == Topology::center) ? 1 : 0;
  par::parallel_for((size_t)(n - i0), [&](size_t k) {
    const size_t i = k + i0;
    out[i] = u_ss[i] + 2.0 * (psi_r[i] / m.phi[i]) / m.psi[i] * u_s[i];
  });
  if (m.topology == Topology::center) out[0] = 3.0 * u_ss[0];
  return out;
}

HessianComponents hessian_components(const WarpedMetric& m, const std::vector<double>& u,
                                     Parity inner) {
  const int n = m.n();
  const Stencils& st = m.stencils();
  HessianComponents h;
  std::vector<double> u_s = st.d1(u, inner);
  for (int i = 0; i < n; ++i) u_s[i] /= m.phi[i];
  h.radial = st.d1(u_s, flip(inner));
  for (int i = 0; i < n; ++i) h.radial[i] /= m.phi[i];

  std::vector<double> psi_r = st.d1(m.psi, m.psi_parity());
  h.tangential.resize(n);
  const int i0 = (m.topology == Topology::center) ? 1 : 0;
  for (int i = i0; i < n; ++i)
    h.tangential[i] = (psi_r[i] / m.phi[i]) * u_s[i] / m.psi[i];
  if (m.topology == Topology::center) h.tangential[0] = h.radial[0]; // common limit
  return h;
}

std::vector<double> misner_sharp(const WarpedMetric& m) { return curvature(m).ms; }

std::vector<double> volume_weights(const WarpedMetric& m) {
  const int n = m.n();
  std::vector<double> w(n);
  auto cell = [&](int i) {
    const double left = (i > 0) ? m.grid.r[i] - m.grid.r[i - 1] : 0.0;
    const double right = (i + 1 < n) ? m.grid.r[i + 1] - m.grid.r[i] : 0.0;
    return 0.5 * (left + right);
  };
  par::parallel_for((size_t)n, [&](size_t i) {
    w[i] = 4.0 * kPi * m.psi[i] * m.psi[i] * m.phi[i] * cell((int)i);
  });
  return w;
}

IntegralResult volume_integral(const WarpedMetric& m, const std::vector<double>& density,
                               bool check_tail) {
  const int n = m.n();
  if ((int)density.size() != n) fail(ErrorCode::InsufficientData, "density size mismatch");
  const std::vector<double> w = volume_weights(m);
  IntegralResult res;
  res.value = par::blocked_sum((size_t)n, [&](size_t i) { return w[i] * density[i]; });

  // Power-law tail over the outermost decade of psi.
  const double psi_max = m.psi[n - 1];
  int j0 = n - 1;
  while (j0 > 0 && m.psi[j0 - 1] >= 0.1 * psi_max) --j0;
  const int win = n - j0;
  if (win < 8) return res;

  double dmax_all = 0.0, dmax_win = 0.0;
  for (int i = 0; i < n; ++i) dmax_all = std::max(dmax_all, std::abs(density[i]));
  for (int i = j0; i < n; ++i) dmax_win = std::max(dmax_win, std::abs(density[i]));
  if (dmax_all == 0.0 || dmax_win <= 1e-10 * dmax_all) return res; // tail is numerically zero

  // Least squares ln|f| = ln C + p ln psi over usable window nodes.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int i = j0; i < n; ++i) {
    const double a = std::abs(density[i]);
    if (a < 1e-3 * dmax_win) continue; // sign flips / noise
    const double x = std::log(m.psi[i]), y = std::log(a);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++cnt;
  }
  if (cnt < 8) return res;
  const double p = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  res.tail_exponent = p;
  res.tail_fitted = true;
  if (p >= -3.0 + 1e-2) {
    if (check_tail)
      fail(ErrorCode::TailDivergence,
           "density tail ~ psi^" + std::to_string(p) + " is not safely integrable");
    return res;
  }
  // int_{psi_max}^inf f 4 pi psi^2 ds, ds ~ dpsi / psi_s at the edge.
  const Stencils& st = m.stencils();
  std::vector<double> psi_r = st.d1(m.psi, Parity::none);
  const double slope = psi_r[n - 1] / m.phi[n - 1];
  if (slope > 0.1) {
    res.tail = 4.0 * kPi * density[n - 1] * psi_max * psi_max * psi_max / (-(p + 3.0)) / slope;
    res.value += res.tail;
  }
  return res;
}

namespace {
// LS fit of y ~ c0 + c1/psi over node range [j0, n); returns c0.
double fit_const_plus_inv(const std::vector<double>& psi, const std::vector<double>& y, int j0,
                          int n) {
  double s11 = 0, s1x = 0, sxx = 0, s1y = 0, sxy = 0;
  for (int i = j0; i < n; ++i) {
    const double x = 1.0 / psi[i];
    s11 += 1; s1x += x; sxx += x * x; s1y += y[i]; sxy += x * y[i];
  }
  const double det = s11 * sxx - s1x * s1x;
  return (s1y * sxx - s1x * sxy) / det;
}
} // namespace

MassEstimate adm_mass(const WarpedMetric& m, double rel_tol, double abs_tol) {
  const int n = m.n();
  if (n < 20) fail(ErrorCode::InsufficientData, "grid too small for mass extrapolation");
  const CurvatureData c = curvature(m);
  const double m20 = fit_const_plus_inv(m.psi, c.ms, n - n / 5, n);
  const double m10 = fit_const_plus_inv(m.psi, c.ms, n - n / 10, n);
  MassEstimate est;
  est.mass = m10;
  est.uncertainty = std::abs(m20 - m10);
  if (est.uncertainty > std::max(rel_tol * std::abs(m10), abs_tol))
    fail(ErrorCode::NonConvergentMass,
         "mass extrapolants disagree: " + std::to_string(m20) + " vs " + std::to_string(m10));
  return est;
}

WarpedMetric conformal_transform(const WarpedMetric& m, const std::vector<double>& w) {
  const int n = m.n();
  if ((int)w.size() != n) fail(ErrorCode::InsufficientData, "conformal factor size mismatch");
  for (int i = 0; i < n; ++i)
    if (!(w[i] > 0.0) || !std::isfinite(w[i]))
      fail(ErrorCode::NonPositiveConformalFactor,
           "conformal factor not positive at node " + std::to_string(i));
  if (std::abs(w[n - 1] - 1.0) > 0.05)
    fail(ErrorCode::NonPositiveConformalFactor,
         "conformal factor does not approach 1 at the outer edge");
  WarpedMetric out = m; // shares the stencil cache; grid is unchanged
  par::parallel_for((size_t)n, [&](size_t i) {
    const double q = w[i] * w[i];
    out.phi[i] = q * m.phi[i];
    out.psi[i] = q * m.psi[i];
  });
  out.validate(false);
  return out;
}

// ---------------------------------------------------------------------------
// Initial data
// ---------------------------------------------------------------------------

namespace {
InitialData finish(WarpedMetric m) {
  InitialData d{std::move(m)};
  const CurvatureData c = curvature(d.metric);
  double mn = c.scalar[0], ric = 0.0;
  for (int i = 0; i < d.metric.n(); ++i) {
    mn = std::min(mn, c.scalar[i]);
    ric = std::max(ric, c.ricci_sq[i]);
  }
  d.min_scalar = mn;
  d.scalar_negative = mn < -(1e-4 * std::sqrt(ric) + 1e-12);
  return d;
}
} // namespace

InitialData make_flat(int n, double r_max) {
  RadialGrid g = RadialGrid::uniform(n, 0.0, r_max);
  std::vector<double> phi(n, 1.0), psi = g.r;
  return finish(WarpedMetric::make(std::move(g), std::move(phi), std::move(psi),
                                   Topology::center));
}

double schw_arclength(double psi, double mass) {
  if (psi < 2.0 * mass) fail(ErrorCode::BadConfig, "areal radius below the throat");
  const double u = std::acosh(std::sqrt(psi / (2.0 * mass)));
  return 2.0 * mass * u + std::sqrt(psi * (psi - 2.0 * mass));
}

double schw_psi_of_arclength(double s, double mass) {
  if (s <= 0.0) return 2.0 * mass;
  // psi = 2M cosh^2 u with M(2u + sinh 2u) = s; Newton in u is smooth and
  // convex, no degeneracy at the throat.
  double u = (s < 4.0 * mass) ? s / (4.0 * mass) : 0.5 * std::asinh(s / mass);
  for (int it = 0; it < 60; ++it) {
    const double f = mass * (2.0 * u + std::sinh(2.0 * u)) - s;
    const double fp = 2.0 * mass * (1.0 + std::cosh(2.0 * u));
    const double du = f / fp;
    u -= du;
    if (std::abs(du) < 1e-16 * (1.0 + std::abs(u))) break;
  }
  return mass * (1.0 + std::cosh(2.0 * u));
}

InitialData make_schwarzschild(int n, double mass, double psi_max, double alpha) {
  if (mass <= 0.0) fail(ErrorCode::BadConfig, "mass must be positive");
  if (psi_max <= 0.0) psi_max = 200.0 * mass;
  if (psi_max < 4.0 * mass) fail(ErrorCode::BadConfig, "psi_max too close to the throat");
  const double s_max = schw_arclength(psi_max, mass);
  RadialGrid g = RadialGrid::sinh_graded(n, 0.0, s_max, alpha);
  std::vector<double> phi(n, 1.0), psi(n);
  for (int i = 0; i < n; ++i) psi[i] = schw_psi_of_arclength(g.r[i], mass);
  psi[0] = 2.0 * mass;
  return finish(WarpedMetric::make(std::move(g), std::move(phi), std::move(psi),
                                   Topology::throat));
}

InitialData make_mass_profile(int n, double mass, double rho0, double rho_max) {
  if (mass <= 0.0) fail(ErrorCode::BadConfig, "mass must be positive");
  if (rho0 <= 0.0) rho0 = 4.0 * mass;
  if (rho_max <= 0.0) rho_max = 100.0 * mass;
  RadialGrid g = RadialGrid::uniform(n, 0.0, rho_max);
  std::vector<double> phi(n), psi = g.r;
  for (int i = 0; i < n; ++i) {
    const double rho = g.r[i];
    const double frac = (i == 0) ? 0.0
                                 : 2.0 * mass * rho * rho / (rho * rho * rho + rho0 * rho0 * rho0);
    if (frac >= 0.98)
      fail(ErrorCode::HorizonInProfile, "2m/rho reaches " + std::to_string(frac));
    phi[i] = 1.0 / std::sqrt(1.0 - frac);
  }
  return finish(WarpedMetric::make(std::move(g), std::move(phi), std::move(psi),
                                   Topology::center));
}

InitialData make_dumbbell(int n, const DumbbellParams& p) {
  if (!(p.theta_max > 1.5707963267948966 && p.theta_max < 3.1))
    fail(ErrorCode::BadConfig, "theta_max must lie in (pi/2, pi)");
  if (!(p.beta_neck > 0.0 && p.beta_neck <= 1.0))
    fail(ErrorCode::BadConfig, "beta_neck must lie in (0, 1]");
  RadialGrid g = RadialGrid::uniform(n, 0.0, p.s_max);
  const double s0 = p.s_flat, s1 = p.s_flat + p.rise_len;

  // Slope angle theta(s): psi' = cos theta. During the rise theta is the
  // prescribed quintic ramp; past s1 it relaxes by theta' = -beta sin
  // theta/(2 psi), which keeps R = (2 sin theta/psi^2)(sin theta + 2 psi
  // theta') >= 0 for beta <= 1 and freezes the quasilocal mass once beta -> 1
  // (the tail is then an exact member of the static family).
  auto theta_rise = [&](double s) { return p.theta_max * smooth5((s - s0) / p.rise_len); };
  auto beta_eff = [&](double s, double theta) {
    const double relax = smooth5((p.theta_relax - theta) / p.blend_width);
    const double on = smooth5((s - s1) / p.ramp_len);
    return on * (p.beta_neck + (1.0 - p.beta_neck) * relax);
  };

  std::vector<double> psi(n, 0.0), phi(n, 1.0);
  double theta = 0.0, psiv = 0.0;
  const int sub = 8;
  for (int i = 0; i < n; ++i) {
    const double s_node = g.r[i];
    if (i > 0) {
      const double h = (g.r[i] - g.r[i - 1]) / sub;
      double s = g.r[i - 1];
      for (int k = 0; k < sub; ++k) {
        auto rhs = [&](double sv, double th, double ps, double& dth, double& dps) {
          if (sv <= s0) {
            dth = 0.0;
            dps = 1.0;
          } else if (sv <= s1) {
            // theta prescribed; carry it along exactly via the ramp value
            dth = 0.0; // handled by direct assignment below
            dps = std::cos(theta_rise(sv));
          } else {
            dth = -beta_eff(sv, th) * std::sin(th) / (2.0 * ps);
            dps = std::cos(th);
          }
        };
        double k1t, k1p, k2t, k2p, k3t, k3p, k4t, k4p;
        rhs(s, theta, psiv, k1t, k1p);
        rhs(s + 0.5 * h, theta + 0.5 * h * k1t, psiv + 0.5 * h * k1p, k2t, k2p);
        rhs(s + 0.5 * h, theta + 0.5 * h * k2t, psiv + 0.5 * h * k2p, k3t, k3p);
        rhs(s + h, theta + h * k3t, psiv + h * k3p, k4t, k4p);
        theta += h / 6.0 * (k1t + 2 * k2t + 2 * k3t + k4t);
        psiv += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
        s += h;
        if (s <= s1) theta = (s <= s0) ? 0.0 : theta_rise(s);
        theta = std::max(theta, 0.0);
        if (psiv <= 0.0 && s > s0)
          fail(ErrorCode::DegeneratePsi, "profile pinched during construction");
      }
    }
    psi[i] = (s_node <= s0) ? s_node : psiv;
    if (s_node <= s0) psiv = s_node;
  }
  return finish(WarpedMetric::make(std::move(g), std::move(phi), std::move(psi),
                                   Topology::center));
}

InitialData make_neck_profile(RadialGrid s_grid, std::vector<double> psi) {
  const int n = s_grid.n();
  std::vector<double> phi(n, 1.0);
  return finish(WarpedMetric::make(std::move(s_grid), std::move(phi), std::move(psi),
                                   Topology::center));
}

} // namespace mdf
