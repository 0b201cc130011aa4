#include "mdf/surgery.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mdf/errors.hpp"
#include "mdf/flow.hpp"
#include "mdf/geometry.hpp"
#include "mdf/parallel.hpp"

namespace mdf {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct CapShape {
  double rho; // sphere radius
  double len; // arclength from the axis to the junction
};

// Round profile psi(s) = rho sin(s/rho) through (psi, psi_s) at its far end.
// Matching value and slope fixes rho = psi / sqrt(1 - psi_s^2) and the arc
// subtends the angle acos(psi_s). Its curvature is K1 = K2 = 1/rho^2.
CapShape cap_through(double psi, double psi_s) {
  const double rho = psi / std::sqrt(1.0 - psi_s * psi_s);
  return {rho, rho * std::acos(psi_s)};
}

double max_scalar(const CurvatureData& cur) {
  return par::max_reduce(cur.scalar.size(), [&](size_t i) { return cur.scalar[i]; });
}

// Capped metric: fresh round cap on [0, len], then the original nodes from
// the junction outward copied verbatim (r, phi, psi all bitwise).
WarpedMetric build_capped(const WarpedMetric& m, const CurvatureData& cur,
                          const std::vector<double>& s, int cut, int& nodes_added) {
  const double psi_c = m.psi[(size_t)cut];
  const double slope_c = cur.psi_s[(size_t)cut];
  const CapShape cap = cap_through(psi_c, slope_c);

  // Resolve the cap's own curvature scale, but never coarser than the grid
  // it joins.
  const double h_loc = s[(size_t)cut + 1] - s[(size_t)cut];
  const double h = std::min(h_loc, cap.rho / 12.0);
  const int n_cap = std::max(8, (int)std::ceil(cap.len / h));
  const double hs = cap.len / n_cap;

  const size_t n_keep = (size_t)m.n() - (size_t)cut;
  const size_t n_new = (size_t)n_cap + n_keep;
  std::vector<double> r(n_new), phi(n_new), psi(n_new);

  // The cap carries unit lapse, so its r is arclength up to the final face,
  // which converts the spacing hs through the average of the lapses it joins.
  const double r_cut = m.grid.r[(size_t)cut];
  const double dr_last = hs / (0.5 * (1.0 + m.phi[(size_t)cut]));
  for (int j = 0; j < n_cap; ++j) {
    r[(size_t)j] = r_cut - dr_last - hs * (n_cap - 1 - j);
    phi[(size_t)j] = 1.0;
    psi[(size_t)j] = cap.rho * std::sin(hs * j / cap.rho);
  }
  for (size_t i = (size_t)cut; i < (size_t)m.n(); ++i) {
    const size_t k = (size_t)n_cap + i - (size_t)cut;
    r[k] = m.grid.r[i];
    phi[k] = m.phi[i];
    psi[k] = m.psi[i];
  }

  nodes_added = n_cap;
  RadialGrid grid;
  grid.r = std::move(r);
  return WarpedMetric::make(grid, std::move(phi), std::move(psi), Topology::center);
}

} // namespace

std::optional<int> detect_neck(const WarpedMetric& m, double theta, double delta) {
  if (!(delta > 0.0) || delta >= 1.0)
    fail(ErrorCode::BadConfig, "neck parameter delta must lie in (0, 1)");

  const CurvatureData cur = curvature(m);
  if (max_scalar(cur) < theta) return std::nullopt;

  const std::vector<MinimalSphere> necks = minimal_spheres(m);
  if (necks.empty()) return std::nullopt;

  const std::vector<double> s = arclength(m);
  const size_t n = (size_t)m.n();
  size_t i_max = 0;
  for (size_t i = 1; i < n; ++i)
    if (cur.scalar[i] > cur.scalar[i_max]) i_max = i;

  // Candidates ordered by distance to the curvature peak; take the first one
  // whose window is delta-cylindrical.
  std::vector<MinimalSphere> byd = necks;
  std::sort(byd.begin(), byd.end(), [&](const MinimalSphere& a, const MinimalSphere& b) {
    return std::abs(s[(size_t)a.index] - s[i_max]) < std::abs(s[(size_t)b.index] - s[i_max]);
  });
  for (const MinimalSphere& nk : byd) {
    const double half = 0.5 * delta * nk.psi;
    bool ok = true;
    for (size_t i = 0; i < n && ok; ++i) {
      if (std::abs(s[i] - s[(size_t)nk.index]) > half) continue;
      const double p = m.psi[i];
      if (std::abs(cur.psi_s[i]) > delta || std::abs(cur.k2[i] * p * p - 1.0) > delta) ok = false;
    }
    if (ok) return nk.index;
  }
  return std::nullopt;
}

SurgeryResult perform_surgery(const WarpedMetric& m, int neck_index) {
  const size_t n = (size_t)m.n();
  if (neck_index < 0 || (size_t)neck_index + 2 >= n)
    fail(ErrorCode::BadConfig, "neck index out of range");
  if (neck_index > 0 && !(m.psi[(size_t)neck_index] <= m.psi[(size_t)neck_index + 1] &&
                          m.psi[(size_t)neck_index] <= m.psi[(size_t)neck_index - 1]))
    fail(ErrorCode::BadConfig, "neck index is not a local minimum of the radius");

  const CurvatureData cur = curvature(m);
  const std::vector<double> s = arclength(m);
  const double pre_max = max_scalar(cur);
  const double psi_n = m.psi[(size_t)neck_index];

  SurgeryEvent ev;
  ev.neck_index = neck_index;
  ev.psi_neck = psi_n;
  ev.pre_max_R = pre_max;

  for (int attempt = 1; attempt <= 4; ++attempt) {
    const double collar = 4.0 * psi_n * std::pow(2.0, attempt - 1);
    // Junction: first node past the collar whose slope admits a round cap.
    int cut = -1;
    for (size_t i = (size_t)neck_index + 1; i + 2 < n; ++i) {
      if (s[i] - s[(size_t)neck_index] < collar) continue;
      const double sl = cur.psi_s[i];
      if (!(sl > 0.0) || sl >= 0.999) continue;
      cut = (int)i;
      break;
    }
    if (cut < 0)
      fail(ErrorCode::CapCurvatureTooHigh,
           "collar of length " + std::to_string(collar) + " ran off the grid");

    int added = 0;
    WarpedMetric capped = build_capped(m, cur, s, cut, added);
    const double post_max = max_scalar(curvature(capped));
    if (post_max <= 0.5 * pre_max) {
      ev.cut_index = cut;
      ev.neck_area = 4.0 * kPi * m.psi[(size_t)cut] * m.psi[(size_t)cut];
      ev.post_max_R = post_max;
      ev.collar_length = s[(size_t)cut] - s[(size_t)neck_index];
      ev.nodes_removed = cut;
      ev.nodes_added = added;
      ev.attempts = attempt;
      double vol = 0.0;
      for (int i = 0; i < cut; ++i)
        vol += 4.0 * kPi * 0.5 *
               (m.psi[(size_t)i] * m.psi[(size_t)i] +
                m.psi[(size_t)i + 1] * m.psi[(size_t)i + 1]) *
               (s[(size_t)i + 1] - s[(size_t)i]);
      ev.discarded_volume = vol;
      return {std::move(capped), ev};
    }
  }
  fail(ErrorCode::CapCurvatureTooHigh,
       "capped curvature stayed above half the pre-surgery maximum");
}

} // namespace mdf
