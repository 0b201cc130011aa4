#include "mdf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mdf/elliptic.hpp"
#include "mdf/errors.hpp"
#include "mdf/geometry.hpp"
#include "mdf/parallel.hpp"

namespace mdf {
namespace {

constexpr double kPi = 3.14159265358979323846;

struct StageEval {
  FlowRhs rhs;
  double m_hat = 0.0; // Misner-Sharp mass one node in from the outer edge
};

StageEval eval_stage(const WarpedMetric& m, bool continuum) {
  const size_t n = (size_t)m.n();
  const CurvatureData cur = curvature(m);
  StageEval out;
  out.rhs.phi.resize(n);
  out.rhs.psi.resize(n);
  par::parallel_for(n, [&](size_t i) {
    out.rhs.phi[i] = -2.0 * cur.k1[i] * m.phi[i];
    out.rhs.psi[i] = -(cur.k1[i] + cur.k2[i]) * m.psi[i];
  });
  if (continuum) {
    const std::vector<double> h = poisson_solve(m, cur.ricci_sq);
    for (size_t i = 0; i < n; ++i) {
      out.rhs.phi[i] += 0.5 * h[i] * m.phi[i];
      out.rhs.psi[i] += 0.5 * h[i] * m.psi[i];
    }
  }
  if (m.topology == Topology::center) out.rhs.psi[0] = 0.0;
  out.m_hat = cur.ms[n - 2];
  return out;
}

// One-sided dpsi/dr at the outer edge (3-point, nonuniform).
double psi_r_out(const WarpedMetric& m) {
  const std::vector<double>& r = m.grid.r;
  const size_t n = r.size();
  const std::vector<double> w =
      fd_weights(r[n - 1], {r[n - 3], r[n - 2], r[n - 1]}, 1);
  return w[0] * m.psi[n - 3] + w[1] * m.psi[n - 2] + w[2] * m.psi[n - 1];
}

// Post-stage closure: pin the center radius and re-match the outermost phi so
// the boundary cell carries m_hat, i.e. psi_s = sqrt(1 - 2 m_hat / psi).
// Skipped when the edge is not in the asymptotic regime.
void fix_state(WarpedMetric& m, double m_hat) {
  const size_t n = (size_t)m.n();
  if (m.topology == Topology::center) m.psi[0] = 0.0;
  const double arg = 1.0 - 2.0 * m_hat / m.psi[n - 1];
  if (arg > 0.25) {
    const double pr = psi_r_out(m);
    if (pr > 0.0) m.phi[n - 1] = pr / std::sqrt(arg);
  }
}

void apply_stage(const WarpedMetric& base, const FlowRhs& rhs, double dt, WarpedMetric& out) {
  const size_t n = (size_t)base.n();
  par::parallel_for(n, [&](size_t i) {
    out.phi[i] = base.phi[i] + dt * rhs.phi[i];
    out.psi[i] = base.psi[i] + dt * rhs.psi[i];
  });
}

void check_state(const WarpedMetric& m) {
  const size_t n = (size_t)m.n();
  for (size_t i = 0; i < n; ++i) {
    if (!std::isfinite(m.phi[i]) || !(m.phi[i] > 0.0))
      fail(ErrorCode::BadGrid, "phi lost positivity during the flow");
    const bool axis = (m.topology == Topology::center && i == 0);
    if (!axis && (!std::isfinite(m.psi[i]) || !(m.psi[i] > 0.0)))
      fail(ErrorCode::NegativePsiInterior,
           "psi lost positivity at node " + std::to_string(i) +
               "; the neck pinched through the step");
  }
}

// --- neck refinement -------------------------------------------------------

std::vector<size_t> neck_indices(const WarpedMetric& m, const CurvatureData& cur) {
  const size_t n = (size_t)m.n();
  std::vector<size_t> necks;
  for (size_t i = 1; i + 2 < n; ++i) {
    if (cur.psi_s[i] <= 0.0 && cur.psi_s[i + 1] > 0.0) {
      size_t j = i;
      for (size_t k = (i > 1 ? i - 1 : i); k <= i + 1; ++k)
        if (m.psi[k] < m.psi[j]) j = k;
      if (necks.empty() || necks.back() + 2 < j) necks.push_back(j);
    }
  }
  return necks;
}

double local_spacing(const std::vector<double>& s, size_t i) {
  const size_t n = s.size();
  double h = 0.0;
  if (i > 0) h = std::max(h, s[i] - s[i - 1]);
  if (i + 1 < n) h = std::max(h, s[i + 1] - s[i]);
  return h;
}

bool needs_remesh(const WarpedMetric& m, const CurvatureData& cur, const std::vector<double>& s) {
  for (size_t j : neck_indices(m, cur))
    if (local_spacing(s, j) > m.psi[j] / 8.0) return true;
  return false;
}

// Target spacing near necks: psi_k / 12 at the neck, relaxing linearly with
// distance, never coarser than the current local spacing. Refinement is
// spliced into a window of nodes; everything outside is kept verbatim.
WarpedMetric remesh_necks(const WarpedMetric& m, const CurvatureData& cur,
                          const std::vector<double>& s) {
  const size_t n = (size_t)m.n();
  const std::vector<size_t> necks = neck_indices(m, cur);

  auto fresh = [&](double si) {
    double h = 1e300;
    for (size_t k : necks) h = std::min(h, std::max(m.psi[k], std::abs(si - s[k])) / 12.0);
    return h;
  };

  // Refinement window: contiguous run where the target beats what is there.
  size_t lo = n, hi = 0;
  for (size_t i = 1; i + 1 < n; ++i) {
    if (fresh(s[i]) < 0.9 * local_spacing(s, i)) {
      lo = std::min(lo, i);
      hi = std::max(hi, i);
    }
  }
  if (lo > hi) return m;
  lo = (lo > 1) ? lo - 1 : 1;
  hi = std::min(hi + 1, n - 2);

  // Integrate the node density 1/h over the window on the old nodes.
  std::vector<double> dens(hi - lo + 1);
  for (size_t i = lo; i <= hi; ++i)
    dens[i - lo] = 1.0 / std::min(fresh(s[i]), local_spacing(s, i));
  std::vector<double> cum(dens.size(), 0.0);
  for (size_t k = 1; k < dens.size(); ++k)
    cum[k] = cum[k - 1] + 0.5 * (dens[k] + dens[k - 1]) * (s[lo + k] - s[lo + k - 1]);
  const double total = cum.back();
  const size_t cells = std::max((size_t)std::ceil(total), hi - lo);
  if (cells > 200000)
    fail(ErrorCode::NoConvergence, "neck refinement exceeded the node budget");

  // New interior arclength positions: equal increments of the density integral.
  std::vector<double> s_new(cells + 1);
  s_new.front() = s[lo];
  s_new.back() = s[hi];
  size_t seg = 0;
  for (size_t j = 1; j < cells; ++j) {
    const double target = total * (double)j / (double)cells;
    while (seg + 1 < cum.size() && cum[seg + 1] < target) ++seg;
    const double f = (target - cum[seg]) / (cum[seg + 1] - cum[seg]);
    s_new[j] = s[lo + seg] + f * (s[lo + seg + 1] - s[lo + seg]);
  }

  // Cubic Hermite resample of psi on arclength.
  auto hermite = [&](const std::vector<double>& f, const std::vector<double>& d, double x) {
    size_t a = lo;
    size_t b = hi;
    while (a + 1 < b) {
      const size_t mid = (a + b) / 2;
      (s[mid] <= x ? a : b) = mid;
    }
    const double h = s[a + 1] - s[a];
    const double t = (x - s[a]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * f[a] + (t3 - 2 * t2 + t) * h * d[a] +
           (-2 * t3 + 3 * t2) * f[a + 1] + (t3 - t2) * h * d[a + 1];
  };

  // Relabel r linearly in the density integral and derive phi = ds/dr from
  // face ratios, so the new cells reproduce their arclength positions.
  const double ra = m.grid.r[lo], rb = m.grid.r[hi];
  std::vector<double> r_new(cells + 1), psi_new(cells + 1), phi_new(cells + 1);
  for (size_t j = 0; j <= cells; ++j) {
    r_new[j] = ra + (rb - ra) * (double)j / (double)cells;
    psi_new[j] = hermite(m.psi, cur.psi_s, s_new[j]);
  }
  r_new.back() = rb; // bitwise, so the outer splice is exact
  psi_new.front() = m.psi[lo];
  psi_new.back() = m.psi[hi];
  for (size_t j = 0; j <= cells; ++j) {
    double num, den;
    if (j == 0) {
      num = s_new[1] - s_new[0];
      den = r_new[1] - r_new[0];
    } else if (j == cells) {
      num = s_new[cells] - s_new[cells - 1];
      den = r_new[cells] - r_new[cells - 1];
    } else {
      num = s_new[j + 1] - s_new[j - 1];
      den = r_new[j + 1] - r_new[j - 1];
    }
    phi_new[j] = num / den;
  }

  // Splice: old nodes outside [lo, hi] verbatim, the new window in between.
  const size_t n_out = n - (hi - lo + 1) + (cells + 1);
  std::vector<double> r(n_out), phi(n_out), psi(n_out);
  for (size_t i = 0; i < lo; ++i) {
    r[i] = m.grid.r[i];
    phi[i] = m.phi[i];
    psi[i] = m.psi[i];
  }
  for (size_t j = 0; j <= cells; ++j) {
    r[lo + j] = r_new[j];
    phi[lo + j] = phi_new[j];
    psi[lo + j] = psi_new[j];
  }
  // Keep the boundary nodes of the window bitwise too.
  phi[lo] = m.phi[lo];
  phi[lo + cells] = m.phi[hi];
  for (size_t i = hi + 1; i < n; ++i) {
    const size_t k = lo + cells + (i - hi);
    r[k] = m.grid.r[i];
    phi[k] = m.phi[i];
    psi[k] = m.psi[i];
  }
  for (size_t i = 1; i < n_out; ++i)
    if (!(psi[i] > 0.0))
      fail(ErrorCode::DegeneratePsi, "refinement produced a non-positive radius");

  RadialGrid grid;
  grid.r = std::move(r);
  return WarpedMetric::make(grid, std::move(phi), std::move(psi), m.topology, false);
}

} // namespace

FlowRhs ricci_rhs(const WarpedMetric& m) { return eval_stage(m, false).rhs; }

double cfl_dt(const WarpedMetric& m, double safety) {
  const size_t n = (size_t)m.n();
  const double ds2 = par::min_reduce(n - 1, [&](size_t i) {
    const double ds = 0.5 * (m.phi[i] + m.phi[i + 1]) * (m.grid.r[i + 1] - m.grid.r[i]);
    return ds * ds;
  });
  return 0.5 * safety * ds2;
}

WarpedMetric flow_step(const WarpedMetric& m, double dt, bool continuum) {
  WarpedMetric half = m, out = m;
  const StageEval s1 = eval_stage(m, continuum);
  apply_stage(m, s1.rhs, 0.5 * dt, half);
  fix_state(half, s1.m_hat);
  const StageEval s2 = eval_stage(half, continuum);
  apply_stage(m, s2.rhs, dt, out);
  fix_state(out, s2.m_hat);
  check_state(out);
  return out;
}

std::vector<MinimalSphere> minimal_spheres(const WarpedMetric& m) {
  const CurvatureData cur = curvature(m);
  std::vector<MinimalSphere> out;
  if (m.topology == Topology::throat)
    out.push_back({0, m.psi[0], 4.0 * kPi * m.psi[0] * m.psi[0]});
  for (size_t j : neck_indices(m, cur))
    out.push_back({(int)j, m.psi[j], 4.0 * kPi * m.psi[j] * m.psi[j]});
  return out;
}

SegmentResult evolve(WarpedMetric m, const SegmentOptions& opt) {
  if (opt.duration < 0.0) fail(ErrorCode::BadConfig, "negative flow duration");
  SegmentResult res;
  double t = 0.0;
  while (true) {
    const CurvatureData cur = curvature(m);
    const size_t n = (size_t)m.n();
    res.max_scalar_end = par::max_reduce(n, [&](size_t i) { return cur.scalar[i]; });
    if (opt.stop_max_scalar > 0.0 && res.max_scalar_end >= opt.stop_max_scalar) {
      res.hit_threshold = true;
      break;
    }
    if (t >= opt.duration * (1.0 - 1e-14)) break;
    if (opt.allow_remesh && m.topology != Topology::open_inner) {
      const std::vector<double> s = arclength(m);
      if (needs_remesh(m, cur, s)) {
        m = remesh_necks(m, cur, s);
        ++res.remesh_count;
        if (needs_remesh(m, curvature(m), arclength(m)))
          fail(ErrorCode::NoConvergence, "neck refinement failed to reach its target spacing");
        continue;
      }
    }
    double dt = opt.fixed_dt > 0.0 ? opt.fixed_dt : cfl_dt(m, opt.safety);
    if (dt > cfl_dt(m, 1.0))
      fail(ErrorCode::CflViolation, "step " + std::to_string(dt) + " exceeds the stability bound " +
                                        std::to_string(cfl_dt(m, 1.0)));
    dt = std::min(dt, opt.duration - t);
    m = flow_step(m, dt, opt.continuum);
    t += dt;
    ++res.steps;
  }
  res.metric = std::move(m);
  res.t_end = t;
  return res;
}

} // namespace mdf
