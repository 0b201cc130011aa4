#pragma once
// Full runs: alternate curvature-flow segments with conformal rescalings to
// scalar-flat metrics (surgery on pinches), or integrate the continuum
// nonlocal flow directly, collecting mass / lambda / area diagnostics and
// the monotonicity and decay reports built from them.

#include <string>
#include <vector>

#include "mdf/metric.hpp"
#include "mdf/surgery.hpp"

namespace mdf {

struct RunConfig {
  std::string preset = "schwarzschild"; // flat | schwarzschild | mass_profile | dumbbell
  double mass = 1.0;                    // mass parameter where the preset takes one
  int n = 2048;                         // grid nodes
  double r_max = 0.0;                   // outer extent; 0 = preset default
  double epsilon = 0.1;                 // flow segment length (length^2)
  double theta = 100.0;                 // surgery threshold (1/length^2)
  double delta = 0.1;                   // neck recognition parameter
  double t_end = 1.0;                   // total flow time
  double sample_dt = 0.01;              // diagnostics cadence
  double safety = 0.4;                  // CFL fraction
  double rescale_tol = 0.05;            // post-rescaling |R| warning bound
  double negative_R_tol = 1e-3;         // allowed R < 0 ahead of a rescaling
  bool rescale_twice = false;           // optional second elliptic pass
  // Stop once the mass falls below this fraction of its initial value. The
  // default matches the mass-accounting reconciliation budget (1% of the
  // initial mass): a remnant below it is indistinguishable from bookkeeping
  // noise, and the rest of the run is flat space plus discretization error.
  // 0 disables.
  double mass_floor = 1e-2;

  void validate() const;
};

/// One diagnostics row. `event` is "flow" for cadence samples, "rescale" for
/// the state right after a conformal rescaling, "surgery" right after a cap.
struct Sample {
  double t = 0.0;
  double m = 0.0;
  double lambda_af = 0.0;
  double lambda_rate = 0.0;
  double max_R = 0.0;
  double min_R = 0.0;
  double area_outermost = 0.0; // outermost minimal sphere area; 0 when none
  int surgery_count = 0;
  std::string event = "flow";
};

/// Mass bookkeeping of one conformal rescaling.
struct MassJump {
  double t = 0.0;
  double m_before = 0.0;
  double m_after = 0.0;
  double dm_energy = 0.0;          // -(1/16 pi) int (8 |grad w|^2 + R w^2) dV
  double dm_flux = 0.0;            // 2c from the far-field fit
  double lambda_before = 0.0;      // lambda_AF of the pre-rescaling metric
  double max_R_before = 0.0;
  double ricci_energy_after = 0.0; // (1/16 pi) 2 int |Ric|^2 dV, post metric
};

struct DiagnosticsSeries {
  double epsilon = 0.0; // segment length the run used (0 for continuum runs)
  std::vector<Sample> samples;
  std::vector<MassJump> jumps;
  std::vector<SurgeryEvent> surgeries;
  std::vector<std::string> warnings; // online invariant violations, non-fatal
  bool failed = false;               // true when the run aborted early
  std::string failure;               // what stopped it
};

struct RescaleResult {
  WarpedMetric metric;
  MassJump jump;
};

/// Solve the a = 8 conformal problem and rescale to (approximately)
/// scalar-flat, recording both mass-jump forms. Requires R >= -negative_R_tol
/// on the input. With second_pass the elliptic solve runs once more on the
/// result to mop up residual curvature; the jump records the combined change.
RescaleResult rescaling_step(const WarpedMetric& m, double negative_R_tol = 1e-3,
                             bool second_pass = false);

/// Where a run stopped: the metric and flow time, enough to continue later.
/// Filled only when the run finished without failing (on failure the evolving
/// metric is gone mid-step).
struct FlowState {
  WarpedMetric metric;
  double t = 0.0;
};

/// The alternating iteration: flow segments of length epsilon (surgery when
/// the curvature threshold fires mid-segment, which resumes the segment),
/// rescaling at each t_k = k epsilon, until t_end. Errors mark the returned
/// partial series instead of propagating.
DiagnosticsSeries run_mass_decreasing_flow(const RunConfig& cfg, FlowState* state_out = nullptr);

/// The epsilon -> 0 limit: a single segment of the nonlocal flow
/// d/dt g = -2 Ric + (lap^-1 |Ric|^2) g, which holds the metric scalar-flat.
/// Input data that is not scalar-flat gets one rescaling first.
DiagnosticsSeries run_continuum_flow(const RunConfig& cfg, FlowState* state_out = nullptr);

/// Continue an alternating run from a saved state. The series carries the
/// history: its jump count fixes the next rescaling boundary, its surgeries
/// keep counting, new samples append, and re-derived monotonicity warnings
/// are not duplicated. A fresh run is a resume from t = 0 with an empty
/// series.
DiagnosticsSeries resume_mass_decreasing_flow(const RunConfig& cfg, WarpedMetric m, double t_start,
                                              DiagnosticsSeries series,
                                              FlowState* state_out = nullptr);

/// Continuum counterpart of resume_mass_decreasing_flow. The initial
/// projection onto the scalar-flat slice only happens on fresh starts.
DiagnosticsSeries resume_continuum_flow(const RunConfig& cfg, WarpedMetric m, double t_start,
                                        DiagnosticsSeries series, FlowState* state_out = nullptr);

/// Pairwise checks over a finished series. Violations are collected with
/// context; booleans summarize, margins quantify the worst case.
struct MonotonicityReport {
  bool mass_nonincreasing = true;
  double worst_mass_rise = 0.0; // most positive m(t_{i+1}) - m(t_i)
  bool lambda_nondecreasing = true;
  double worst_lambda_drop = 0.0; // most negative within-segment lambda step
  bool mass_dominates_lambda = true;
  double min_mass_lambda_margin = 0.0; // min of m - lambda_AF
  bool gap_nonincreasing = true;       // m - lambda_AF, skipping surgery rows
  double worst_gap_rise = 0.0;
  int rate_samples = 0;             // samples where d lambda/dt was resolved
  double worst_rate_mismatch = 0.0; // |fd/rate - 1| over those
  double worst_post_rescale_rate_mismatch = 0.0; // rate vs 2 int |Ric|^2 / 16 pi
  bool mass_nonnegative = true;
  double min_mass = 0.0;
  double accounting_residual = 0.0; // |m_end - m_0 - sum dm_energy|
  std::vector<std::string> violations;
};

/// noise_floor is in rate units (mass per time): finite-difference slopes and
/// predicted rates below 10x it are not compared. Lambda comparisons pause
/// for a short settling window (0.05 time units) after each surgery while the
/// fresh cap relaxes.
MonotonicityReport check_monotonicity(const DiagnosticsSeries& s, double noise_floor = 1e-3);

/// Decay diagnostics over the rescaling sequence m(t_k).
struct DecayFit {
  double c_est = 0.0;    // min_k lambda_AF(t_k) / m(t_k)^2
  double C_est = 0.0;    // least-squares C in m(t) ~ C/t over the tail
  double residual = 0.0; // RMS relative misfit of the tail fit
  bool recursion_ok = true; // m(t_{k+1}) <= m(t_k) - c_est m(t_k)^2 at every k
  double worst_recursion_margin = 0.0;
  double lambda_ratio_min = 0.0; // range of lambda_AF / (epsilon m^2)
  double lambda_ratio_max = 0.0;
};

/// Requires >= 5 rescalings with positive mass (InsufficientData otherwise).
DecayFit decay_fit(const DiagnosticsSeries& s);

} // namespace mdf
