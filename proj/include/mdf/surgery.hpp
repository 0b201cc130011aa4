#pragma once
// Neck surgery: when a minimal sphere pinches, cut the profile on a collar
// just outside the neck and close it with a round cap, discarding everything
// inside the cut. The metric outside the cut node is preserved bit for bit;
// the capped manifold is a smooth center-type profile whose peak scalar
// curvature is at most half the pre-surgery peak.

#include <optional>

#include "mdf/metric.hpp"

namespace mdf {

struct SurgeryEvent {
  double t = 0.0;               ///< flow time, stamped by the caller
  int neck_index = -1;          ///< neck node in the pre-surgery grid
  double psi_neck = 0.0;        ///< areal radius of the neck
  int cut_index = -1;           ///< junction node in the pre-surgery grid
  double neck_area = 0.0;       ///< 4 pi psi^2 at the cut
  double pre_max_R = 0.0;       ///< max scalar curvature before surgery
  double post_max_R = 0.0;      ///< max scalar curvature after surgery
  double discarded_volume = 0.0;///< volume of the removed compact piece
  double collar_length = 0.0;   ///< arclength from neck to junction
  int nodes_removed = 0;        ///< nodes discarded inside the cut
  int nodes_added = 0;          ///< cap nodes inserted
  int attempts = 1;             ///< 1 on first-try success; each retry doubles the collar
};

struct SurgeryResult {
  WarpedMetric metric;
  SurgeryEvent event;
};

/// Locate a delta-neck: the interior minimal sphere nearest the scalar
/// curvature maximum whose window of width delta * psi_neck (in arclength)
/// is cylinder-like, |dpsi/ds| <= delta and |K2 psi^2 - 1| <= delta.
/// An inner reflection throat counts as a neck (its compact side is empty).
/// Returns none when max R < theta or when no candidate window qualifies.
std::optional<int> detect_neck(const WarpedMetric& m, double theta, double delta = 0.1);

/// Cut at arclength 4 psi_neck outward of the detected neck and glue a round
/// cap: psi = rho sin(s/rho) through the junction's (psi, psi_s), which
/// matches value and slope with a single sphere radius (the quarter-circle
/// profile in arclength), with phi = 1 so the cap coordinate is arclength.
/// Everything inside the junction is discarded; nodes outside it are kept
/// bitwise. If the capped metric misses post_max_R <= pre_max_R / 2 the
/// collar doubles, up to three retries, then CapCurvatureTooHigh.
SurgeryResult perform_surgery(const WarpedMetric& m, int neck_index);

} // namespace mdf
