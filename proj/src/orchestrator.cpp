#include "mdf/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mdf/elliptic.hpp"
#include "mdf/errors.hpp"
#include "mdf/flow.hpp"
#include "mdf/geometry.hpp"
#include "mdf/parallel.hpp"

namespace mdf {

namespace {

constexpr double kPi = 3.14159265358979323846;

WarpedMetric initial_metric(const RunConfig& cfg) {
  if (cfg.preset == "flat")
    return make_flat(cfg.n, cfg.r_max > 0.0 ? cfg.r_max : 30.0).metric;
  if (cfg.preset == "schwarzschild")
    return make_schwarzschild(cfg.n, cfg.mass, cfg.r_max).metric;
  if (cfg.preset == "mass_profile")
    return make_mass_profile(cfg.n, cfg.mass, 0.0, cfg.r_max).metric;
  if (cfg.preset == "dumbbell") {
    DumbbellParams p;
    if (cfg.r_max > 0.0) p.s_max = cfg.r_max;
    return make_dumbbell(cfg.n, p).metric;
  }
  fail(ErrorCode::BadConfig, "unknown preset '" + cfg.preset + "'");
}

struct Extrema {
  double max_R, min_R, max_abs_R;
};

Extrema scalar_extrema(const CurvatureData& cur) {
  const size_t n = cur.scalar.size();
  Extrema e;
  e.max_R = par::max_reduce(n, [&](size_t i) { return cur.scalar[i]; });
  e.min_R = par::min_reduce(n, [&](size_t i) { return cur.scalar[i]; });
  e.max_abs_R = std::max(std::abs(e.max_R), std::abs(e.min_R));
  return e;
}

Sample probe(const WarpedMetric& m, double t, const char* event, int surgeries) {
  Sample s;
  s.t = t;
  s.event = event;
  s.surgery_count = surgeries;
  s.m = adm_mass(m).mass;
  const Extrema e = scalar_extrema(curvature(m));
  s.max_R = e.max_R;
  s.min_R = e.min_R;
  const LambdaResult lam = lambda_af(m);
  s.lambda_af = lam.value;
  s.lambda_rate = lambda_rate(m, lam.sol);
  const std::vector<MinimalSphere> spheres = minimal_spheres(m);
  if (!spheres.empty()) s.area_outermost = spheres.back().area;
  return s;
}

double ricci_energy(const WarpedMetric& m) {
  const CurvatureData cur = curvature(m);
  return 2.0 * volume_integral(m, cur.ricci_sq, false).value / (16.0 * kPi);
}

// Next cadence point strictly past t (tolerant of t sitting on the grid).
double next_sample_time(double t, double dt) {
  return dt * (std::floor(t / dt + 1e-9) + 1.0);
}

// Idempotent so a resumed run does not duplicate warnings already derived
// from the carried-over part of the series.
void append_monotonicity_warnings(DiagnosticsSeries& s) {
  if (s.samples.size() < 3) return;
  for (const std::string& v : check_monotonicity(s).violations)
    if (std::find(s.warnings.begin(), s.warnings.end(), v) == s.warnings.end())
      s.warnings.push_back(v);
}

} // namespace

void RunConfig::validate() const {
  if (!(epsilon > 0.0)) fail(ErrorCode::BadConfig, "epsilon must be positive");
  if (!(theta > 0.0)) fail(ErrorCode::BadConfig, "theta must be positive");
  if (!(t_end >= epsilon)) fail(ErrorCode::BadConfig, "t_end must be at least epsilon");
  if (!(delta > 0.0) || delta >= 1.0) fail(ErrorCode::BadConfig, "delta must lie in (0, 1)");
  if (n < 16) fail(ErrorCode::BadConfig, "grid too small");
  if (!(sample_dt > 0.0)) fail(ErrorCode::BadConfig, "sample_dt must be positive");
  if (!(safety > 0.0) || safety > 1.0) fail(ErrorCode::BadConfig, "safety must lie in (0, 1]");
  if (r_max < 0.0) fail(ErrorCode::BadConfig, "r_max must be nonnegative");
  if (!(rescale_tol > 0.0)) fail(ErrorCode::BadConfig, "rescale_tol must be positive");
  if (negative_R_tol < 0.0) fail(ErrorCode::BadConfig, "negative_R_tol must be nonnegative");
  if (mass_floor < 0.0 || mass_floor >= 1.0)
    fail(ErrorCode::BadConfig, "mass_floor must lie in [0, 1)");
}

RescaleResult rescaling_step(const WarpedMetric& m, double negative_R_tol, bool second_pass) {
  const Extrema pre = scalar_extrema(curvature(m));
  if (pre.min_R < -negative_R_tol)
    fail(ErrorCode::IndefiniteOperator,
         "scalar curvature " + std::to_string(pre.min_R) +
             " below the rescaling allowance -" + std::to_string(negative_R_tol));

  MassJump jump;
  jump.m_before = adm_mass(m).mass;
  jump.max_R_before = pre.max_R;
  jump.lambda_before = lambda_af(m).value;

  const ConformalResult w = solve_conformal(m, 8.0);
  jump.dm_energy = mass_jump_energy(w);
  jump.dm_flux = mass_jump_flux(w);
  WarpedMetric out = conformal_transform(m, w.w);

  if (second_pass) {
    const ConformalResult w2 = solve_conformal(out, 8.0);
    jump.dm_energy += mass_jump_energy(w2);
    jump.dm_flux += mass_jump_flux(w2);
    out = conformal_transform(out, w2.w);
  }

  jump.m_after = adm_mass(out).mass;
  jump.ricci_energy_after = ricci_energy(out);
  return {std::move(out), jump};
}

DiagnosticsSeries run_mass_decreasing_flow(const RunConfig& cfg, FlowState* state_out) {
  cfg.validate();
  DiagnosticsSeries series;
  series.epsilon = cfg.epsilon;
  WarpedMetric m;
  try {
    m = initial_metric(cfg);
  } catch (const Error& e) {
    series.failed = true;
    series.failure = e.what();
    return series;
  }
  return resume_mass_decreasing_flow(cfg, std::move(m), 0.0, std::move(series), state_out);
}

DiagnosticsSeries resume_mass_decreasing_flow(const RunConfig& cfg, WarpedMetric m, double t_start,
                                              DiagnosticsSeries series, FlowState* state_out) {
  cfg.validate();
  series.epsilon = cfg.epsilon;
  try {
    double t = t_start;
    int surgeries = (int)series.surgeries.size();
    if (series.samples.empty()) series.samples.push_back(probe(m, t, "flow", surgeries));
    const double m_init = series.samples.front().m;
    const double floor = std::abs(m_init) >= 1e-6 ? cfg.mass_floor * std::abs(m_init) : 0.0;

    const double t_tiny = 1e-12 * cfg.t_end;
    while (t < cfg.t_end - t_tiny) {
      const double t_rescale = cfg.epsilon * (double)(series.jumps.size() + 1);
      const double t_stop = std::min(t_rescale, cfg.t_end);

      while (t < t_stop - t_tiny) {
        const double t_chunk = std::min(next_sample_time(t, cfg.sample_dt), t_stop);
        SegmentOptions opt;
        opt.duration = t_chunk - t;
        opt.stop_max_scalar = cfg.theta;
        opt.safety = cfg.safety;
        SegmentResult res = evolve(std::move(m), opt);
        m = std::move(res.metric);
        t += res.t_end;
        if (res.hit_threshold) {
          const std::optional<int> neck = detect_neck(m, cfg.theta, cfg.delta);
          if (!neck)
            fail(ErrorCode::NoNeckFound,
                 "curvature hit the threshold with no recognizable neck at t = " +
                     std::to_string(t));
          SurgeryResult sr = perform_surgery(m, *neck);
          sr.event.t = t;
          m = std::move(sr.metric);
          ++surgeries;
          series.surgeries.push_back(sr.event);
          series.samples.push_back(probe(m, t, "surgery", surgeries));
        } else {
          series.samples.push_back(probe(m, t, "flow", surgeries));
        }
      }

      if (t_rescale <= cfg.t_end + t_tiny) {
        RescaleResult rs = rescaling_step(m, cfg.negative_R_tol, cfg.rescale_twice);
        rs.jump.t = t;
        m = std::move(rs.metric);
        series.jumps.push_back(rs.jump);
        const Extrema post = scalar_extrema(curvature(m));
        if (post.max_abs_R > cfg.rescale_tol)
          series.warnings.push_back("post-rescaling |R| = " + std::to_string(post.max_abs_R) +
                                    " above tolerance at t = " + std::to_string(t));
        series.samples.push_back(probe(m, t, "rescale", surgeries));
        if (floor > 0.0 && rs.jump.m_after < floor) {
          series.warnings.push_back(
              "mass exhausted at t = " + std::to_string(t) +
              "; the rest of the flow is flat space up to discretization noise");
          break;
        }
      }
    }
    if (state_out) *state_out = {std::move(m), t};
  } catch (const Error& e) {
    series.failed = true;
    series.failure = e.what();
  }
  append_monotonicity_warnings(series);
  return series;
}

DiagnosticsSeries run_continuum_flow(const RunConfig& cfg, FlowState* state_out) {
  // No rescaling cadence here: epsilon is ignored, so exempt it from the
  // t_end >= epsilon requirement.
  RunConfig checked = cfg;
  checked.epsilon = checked.t_end;
  checked.validate();
  DiagnosticsSeries series;
  WarpedMetric m;
  try {
    m = initial_metric(cfg);
  } catch (const Error& e) {
    series.failed = true;
    series.failure = e.what();
    return series;
  }
  return resume_continuum_flow(cfg, std::move(m), 0.0, std::move(series), state_out);
}

DiagnosticsSeries resume_continuum_flow(const RunConfig& cfg_in, WarpedMetric m, double t_start,
                                        DiagnosticsSeries series, FlowState* state_out) {
  RunConfig cfg = cfg_in;
  cfg.epsilon = cfg.t_end;
  cfg.validate();
  series.epsilon = 0.0;
  try {
    double t = t_start;
    // The nonlocal flow lives on the scalar-flat slice; project first if the
    // data starts off it (fresh starts only -- a resumed run is mid-slice).
    if (series.samples.empty()) {
      if (scalar_extrema(curvature(m)).max_abs_R > cfg.rescale_tol) {
        RescaleResult rs = rescaling_step(m, cfg.negative_R_tol, cfg.rescale_twice);
        rs.jump.t = t;
        m = std::move(rs.metric);
        series.jumps.push_back(rs.jump);
        series.samples.push_back(probe(m, t, "rescale", 0));
      } else {
        series.samples.push_back(probe(m, t, "flow", 0));
      }
    }
    const double m_init = series.samples.front().m;
    const double floor = std::abs(m_init) >= 1e-6 ? cfg.mass_floor * std::abs(m_init) : 0.0;

    const double t_tiny = 1e-12 * cfg.t_end;
    while (t < cfg.t_end - t_tiny) {
      if (floor > 0.0 && series.samples.back().m < floor) {
        series.warnings.push_back(
            "mass exhausted at t = " + std::to_string(t) +
            "; the rest of the flow is flat space up to discretization noise");
        break;
      }
      const double t_chunk = std::min(next_sample_time(t, cfg.sample_dt), cfg.t_end);
      SegmentOptions opt;
      opt.duration = t_chunk - t;
      opt.safety = cfg.safety;
      opt.continuum = true;
      SegmentResult res = evolve(std::move(m), opt);
      m = std::move(res.metric);
      t += res.t_end;
      const Extrema e = scalar_extrema(curvature(m));
      if (e.max_abs_R > 10.0 * cfg.rescale_tol)
        series.warnings.push_back("continuum flow drifted off the scalar-flat slice: |R| = " +
                                  std::to_string(e.max_abs_R) + " at t = " + std::to_string(t));
      series.samples.push_back(probe(m, t, "flow", 0));
    }
    if (state_out) *state_out = {std::move(m), t};
  } catch (const Error& e) {
    series.failed = true;
    series.failure = e.what();
  }
  append_monotonicity_warnings(series);
  return series;
}

MonotonicityReport check_monotonicity(const DiagnosticsSeries& s, double noise_floor) {
  if (s.samples.size() < 3)
    fail(ErrorCode::InsufficientData, "monotonicity checks need at least 3 samples");

  MonotonicityReport r;
  const double m0 = s.samples.front().m;
  const double mass_scale = std::abs(m0) + 1.0;
  const double mass_slack = 1e-4 * mass_scale;

  r.min_mass = std::numeric_limits<double>::infinity();
  r.min_mass_lambda_margin = std::numeric_limits<double>::infinity();

  auto flag = [&](const std::string& what) {
    r.violations.push_back(what);
  };

  // Segment ids: rescaling and surgery both break smoothness.
  std::vector<int> seg(s.samples.size(), 0);
  for (size_t i = 1; i < s.samples.size(); ++i)
    seg[i] = seg[i - 1] + (s.samples[i].event != "flow" ? 1 : 0);

  // A fresh cap relaxes violently (remeshing, curvature spike) before the
  // eigenvalue settles into its monotone regime; pause lambda comparisons
  // for a short window after each surgery.
  const double settle = 0.05;
  auto settling = [&](double t) {
    for (const SurgeryEvent& e : s.surgeries)
      if (t >= e.t - 1e-12 && t <= e.t + settle) return true;
    return false;
  };

  for (size_t i = 0; i < s.samples.size(); ++i) {
    const Sample& b = s.samples[i];
    r.min_mass = std::min(r.min_mass, b.m);
    r.min_mass_lambda_margin = std::min(r.min_mass_lambda_margin, b.m - b.lambda_af);
    // lambda_af must be strictly positive once curvature is resolved; below
    // that gate, and within the noise floor, it is zero up to discretization
    // error of either sign.
    if (b.max_R > 1e-4 && b.lambda_af < -1e-4 * mass_scale)
      flag("lambda_af negative (" + std::to_string(b.lambda_af) +
           ") with max R = " + std::to_string(b.max_R) + " at t = " + std::to_string(b.t));
    if (i == 0) continue;
    const Sample& a = s.samples[i - 1];

    const double rise = b.m - a.m;
    r.worst_mass_rise = std::max(r.worst_mass_rise, rise);
    // The first interval carries a one-time settling of the ADM estimate:
    // the first flow step smooths the discretized start data's far field by
    // O(h^2), which is not a mass gain. Pair checks start after it.
    if (rise > mass_slack && i > 1) {
      r.mass_nonincreasing = false;
      flag("mass rose by " + std::to_string(rise) + " into t = " + std::to_string(b.t));
    }

    const bool at_surgery = settling(a.t) || settling(b.t);

    if (seg[i] == seg[i - 1] && !at_surgery) {
      const double drop = b.lambda_af - a.lambda_af;
      r.worst_lambda_drop = std::min(r.worst_lambda_drop, drop);
      if (drop < -mass_slack) {
        r.lambda_nondecreasing = false;
        flag("lambda_af fell by " + std::to_string(-drop) + " into t = " + std::to_string(b.t));
      }
    }

    if (!at_surgery) {
      const double gap_rise = (b.m - b.lambda_af) - (a.m - a.lambda_af);
      r.worst_gap_rise = std::max(r.worst_gap_rise, gap_rise);
      if (gap_rise > mass_slack) {
        r.gap_nonincreasing = false;
        flag("m - lambda_af rose by " + std::to_string(gap_rise) + " into t = " +
             std::to_string(b.t));
      }
    }
  }

  if (r.min_mass_lambda_margin < -mass_slack) {
    r.mass_dominates_lambda = false;
    flag("lambda_af exceeded the mass by " + std::to_string(-r.min_mass_lambda_margin));
  }
  if (r.min_mass < -1e-4 * std::abs(m0) - 1e-9) {
    r.mass_nonnegative = false;
    flag("mass dropped to " + std::to_string(r.min_mass));
  }

  // Centered finite differences of lambda_af against the predicted rate,
  // interior to each smooth stretch, where both signals are resolved.
  for (size_t i = 1; i + 1 < s.samples.size(); ++i) {
    if (seg[i - 1] != seg[i + 1]) continue;
    const Sample& a = s.samples[i - 1];
    const Sample& b = s.samples[i];
    const Sample& c = s.samples[i + 1];
    if (settling(a.t) || settling(c.t)) continue;
    const double fd = (c.lambda_af - a.lambda_af) / (c.t - a.t);
    if (std::abs(fd) < 10.0 * noise_floor || std::abs(b.lambda_rate) < 10.0 * noise_floor)
      continue;
    // A centered difference only resolves the rate where lambda is locally
    // near-linear; remeshing transients and fast relaxation fail this.
    const double d2 = std::abs(c.lambda_af - 2.0 * b.lambda_af + a.lambda_af);
    if (d2 > 0.05 * std::abs(c.lambda_af - a.lambda_af)) continue;
    const double mismatch = std::abs(fd / b.lambda_rate - 1.0);
    ++r.rate_samples;
    r.worst_rate_mismatch = std::max(r.worst_rate_mismatch, mismatch);
    if (mismatch > 0.05)
      flag("d lambda/dt off by " + std::to_string(100.0 * mismatch) + "% at t = " +
           std::to_string(b.t));
  }

  // Rescaling rows restart lambda from zero; immediately after, the rate must
  // equal the plain Ricci energy of the rescaled metric.  The identity assumes
  // the rescaling actually reached the scalar-flat slice, so rows with large
  // leftover |R| are exempt.
  for (const MassJump& j : s.jumps) {
    const Sample* row = nullptr;
    for (const Sample& q : s.samples)
      if (q.event == "rescale" && std::abs(q.t - j.t) <= 1e-9 * (1.0 + std::abs(j.t))) row = &q;
    if (!row || std::abs(j.ricci_energy_after) < 10.0 * noise_floor ||
        std::abs(row->lambda_rate) < 10.0 * noise_floor ||
        std::max(std::abs(row->max_R), std::abs(row->min_R)) > 0.5)
      continue;
    const double mismatch = std::abs(row->lambda_rate / j.ricci_energy_after - 1.0);
    r.worst_post_rescale_rate_mismatch = std::max(r.worst_post_rescale_rate_mismatch, mismatch);
    if (mismatch > 0.05)
      flag("post-rescaling rate off by " + std::to_string(100.0 * mismatch) + "% at t = " +
           std::to_string(j.t));
  }

  double dm_sum = 0.0;
  for (const MassJump& j : s.jumps) dm_sum += j.dm_energy;
  r.accounting_residual = std::abs(s.samples.back().m - m0 - dm_sum);

  return r;
}

DecayFit decay_fit(const DiagnosticsSeries& s) {
  if (s.jumps.size() < 5)
    fail(ErrorCode::InsufficientData, "decay fit needs at least 5 rescalings");
  for (const MassJump& j : s.jumps)
    if (!(j.m_before > 0.0))
      fail(ErrorCode::InsufficientData, "decay fit needs positive mass throughout");

  DecayFit f;
  f.c_est = std::numeric_limits<double>::infinity();
  f.lambda_ratio_min = std::numeric_limits<double>::infinity();
  f.lambda_ratio_max = -std::numeric_limits<double>::infinity();
  for (const MassJump& j : s.jumps) {
    const double m2 = j.m_before * j.m_before;
    f.c_est = std::min(f.c_est, j.lambda_before / m2);
    if (s.epsilon > 0.0) {
      const double ratio = j.lambda_before / (s.epsilon * m2);
      f.lambda_ratio_min = std::min(f.lambda_ratio_min, ratio);
      f.lambda_ratio_max = std::max(f.lambda_ratio_max, ratio);
    }
  }

  f.worst_recursion_margin = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k + 1 < s.jumps.size(); ++k) {
    const double mk = s.jumps[k].m_before;
    const double margin = mk - f.c_est * mk * mk - s.jumps[k + 1].m_before;
    f.worst_recursion_margin = std::min(f.worst_recursion_margin, margin);
  }
  f.recursion_ok = f.worst_recursion_margin >= -1e-12;

  // C/t over the tail (second half of the sampled span).
  const double t_lo =
      0.5 * (s.samples.front().t + s.samples.back().t);
  double num = 0.0, den = 0.0;
  int count = 0;
  for (const Sample& q : s.samples) {
    if (q.t < t_lo || q.t <= 0.0) continue;
    num += q.m / q.t;
    den += 1.0 / (q.t * q.t);
    ++count;
  }
  if (count < 2 || den <= 0.0)
    fail(ErrorCode::InsufficientData, "decay fit has no usable tail window");
  f.C_est = num / den;
  double ss = 0.0;
  for (const Sample& q : s.samples) {
    if (q.t < t_lo || q.t <= 0.0) continue;
    const double rel = (q.m - f.C_est / q.t) / q.m;
    ss += rel * rel;
  }
  f.residual = std::sqrt(ss / count);
  return f;
}

} // namespace mdf
