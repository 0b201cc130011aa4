#include "mdf/metric.hpp"

#include <cmath>

#include "mdf/errors.hpp"

namespace mdf {

const char* to_string(Topology t) {
  switch (t) {
    case Topology::center: return "center";
    case Topology::throat: return "throat";
    case Topology::open_inner: return "open_inner";
  }
  return "?";
}

const Stencils& WarpedMetric::stencils() const {
  if (!sten_) sten_ = std::make_shared<Stencils>(grid);
  return *sten_;
}

void WarpedMetric::refresh_stencils() { sten_ = std::make_shared<Stencils>(grid); }

Parity WarpedMetric::psi_parity() const {
  switch (topology) {
    case Topology::center: return Parity::odd;
    case Topology::throat: return Parity::even;
    default: return Parity::none;
  }
}

void WarpedMetric::validate(bool strict) const {
  grid.validate();
  const int n = grid.n();
  if ((int)phi.size() != n || (int)psi.size() != n)
    fail(ErrorCode::BadGrid, "phi/psi size does not match grid");
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(phi[i]) || !std::isfinite(psi[i]))
      fail(ErrorCode::BadGrid, "non-finite metric data at node " + std::to_string(i));
    if (phi[i] <= 0.0)
      fail(ErrorCode::BadGrid, "lapse must be positive (node " + std::to_string(i) + ")");
  }

  const int first_interior = (topology == Topology::center) ? 1 : 0;
  for (int i = first_interior; i < n; ++i)
    if (psi[i] <= 0.0)
      fail(ErrorCode::DegeneratePsi, "areal radius vanishes at node " + std::to_string(i));

  if (topology == Topology::center && psi[0] != 0.0)
    fail(ErrorCode::NonSmoothCenter, "center requires psi(r0) = 0 exactly");

  if (!strict) return;

  const Stencils& st = stencils();
  const std::vector<double> psi_r = st.d1(psi, Parity::none); // one-sided edges
  if (topology == Topology::center) {
    const double slope0 = (psi[1] - psi[0]) / (grid.r[1] - grid.r[0]) / phi[0];
    if (std::abs(slope0 - 1.0) > 1e-2)
      fail(ErrorCode::NonSmoothCenter,
           "dpsi/ds at the center is " + std::to_string(slope0) + ", expected 1");
  } else if (topology == Topology::throat) {
    // One-sided slope (the even-parity stencil vanishes identically at the
    // edge, so it cannot serve as a check).
    const double slope0 = psi_r[0] / phi[0];
    if (std::abs(slope0) > 2e-2)
      fail(ErrorCode::NonSmoothCenter,
           "inner edge is not a reflection throat (dpsi/ds = " + std::to_string(slope0) + ")");
  }

  const double slope_out = psi_r[n - 1] / phi[n - 1];
  if (slope_out < 0.85 || slope_out > 1.15)
    fail(ErrorCode::NonConvergentMass,
         "outer region not asymptotically flat (dpsi/ds = " + std::to_string(slope_out) + ")");
}

WarpedMetric WarpedMetric::make(RadialGrid g, std::vector<double> phi, std::vector<double> psi,
                                Topology topo, bool strict) {
  WarpedMetric m;
  m.grid = std::move(g);
  m.phi = std::move(phi);
  m.psi = std::move(psi);
  m.topology = topo;
  if (topo == Topology::center && !m.psi.empty()) {
    // Snap a sub-roundoff origin value to an exact zero.
    double scale = 0.0;
    for (double v : m.psi) scale = std::max(scale, std::abs(v));
    if (std::abs(m.psi[0]) <= 1e-12 * scale) m.psi[0] = 0.0;
  }
  m.refresh_stencils();
  m.validate(strict);
  return m;
}

} // namespace mdf
