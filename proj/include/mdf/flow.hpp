#pragma once
#include <vector>

#include "mdf/metric.hpp"

namespace mdf {

/// Curvature-flow right-hand side in the fixed-r gauge:
///   d phi / dt = -2 K1 phi,   d psi / dt = -(K1 + K2) psi,
/// which is the unmodified flow dg/dt = -2 Ric written on the warped product
/// (radial Ricci eigenvalue 2 K1, tangential K1 + K2).
struct FlowRhs {
  std::vector<double> phi, psi;
};
FlowRhs ricci_rhs(const WarpedMetric& m);

/// Largest stable explicit step: safety * min(ds)^2 / 2.
double cfl_dt(const WarpedMetric& m, double safety = 0.4);

/// One RK2 (midpoint) step. After each stage the center radius is re-pinned
/// and the outermost phi is re-matched so the boundary cell carries the
/// Misner-Sharp mass of its neighbour instead of one-sided stencil noise.
/// With continuum = true the nonlocal mass-decreasing term (h/2) g is added,
/// h = lap^{-1} |Ric|^2: the epsilon -> 0 limit of flowing for epsilon and
/// conformally rescaling back to a scalar-flat slice.
WarpedMetric flow_step(const WarpedMetric& m, double dt, bool continuum = false);

/// Cross-sections of vanishing area gradient: interior necks (sign change of
/// psi_s) plus the reflection throat when the topology carries one.
struct MinimalSphere {
  int index = 0;
  double psi = 0.0;
  double area = 0.0;
};
std::vector<MinimalSphere> minimal_spheres(const WarpedMetric& m);

struct SegmentOptions {
  double duration = 0.0;
  double stop_max_scalar = 0.0; // > 0: return early once max R reaches this
  double safety = 0.4;
  double fixed_dt = 0.0; // > 0: fixed step (still bounded by hard stability)
  bool continuum = false;
  bool allow_remesh = true;
};

struct SegmentResult {
  WarpedMetric metric;
  double t_end = 0.0;
  bool hit_threshold = false;
  int steps = 0;
  int remesh_count = 0;
  double max_scalar_end = 0.0;
};

/// March the flow for opt.duration, or until max R crosses the stop
/// threshold. Neck regions are re-gridded in place when their spacing falls
/// behind psi/8; nodes outside the refinement window are left untouched.
SegmentResult evolve(WarpedMetric m, const SegmentOptions& opt);

} // namespace mdf
