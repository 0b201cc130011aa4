// Acceptance suite: ten end-to-end checks of the simulator's quantitative
// contract, each printed as a single [PASS]/[FAIL] line carrying the measured
// values next to the pinned tolerance. Progress notes go to stderr so stdout
// stays a clean verdict transcript. Exit code = number of failed criteria.
//
// Expensive simulations are run once up front and shared:
//   schw  schwarzschild n=2048, eps=0.1, t_end=1       (criteria 3,4,5,9,10)
//   dumb  dumbbell      n=2048, eps=1.0, theta=100     (criteria 3,4,6,7,10)
//   flat  flat          n=2048, eps=0.1, t_end=0.3     (criteria 3,4,10)
//   prof  mass_profile  n=2048, eps=0.1, t_end=0.2     (criteria 3,4,10)
//   cont  continuum     n=1024, t_end=0.4              (criteria 8,10)
//   eps ladder {0.1,0.05,0.025,0.0125}, n=1024, t=0.4  (criteria 8,10)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "mdf/elliptic.hpp"
#include "mdf/errors.hpp"
#include "mdf/flow.hpp"
#include "mdf/geometry.hpp"
#include "mdf/orchestrator.hpp"
#include "mdf/surgery.hpp"

using namespace mdf;

namespace {

constexpr double kPi = 3.14159265358979323846;

int g_failures = 0;

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// Collects the sub-checks of one criterion into a single annotated line.
struct Gate {
  bool ok = true;
  std::string note;
  void req(bool cond, const std::string& desc) {
    if (!note.empty()) note += "; ";
    note += desc;
    if (!cond) {
      note += "  <-- FAIL";
      ok = false;
    }
  }
  void info(const std::string& desc) {
    if (!note.empty()) note += "; ";
    note += desc;
  }
};

void criterion(int id, const char* name, const std::function<Gate()>& body) {
  Gate g;
  try {
    g = body();
  } catch (const std::exception& e) {
    g.ok = false;
    g.note = std::string("exception: ") + e.what();
  }
  std::printf("[%s] %2d %s: %s\n", g.ok ? "PASS" : "FAIL", id, name, g.note.c_str());
  std::fflush(stdout);
  if (!g.ok) ++g_failures;
}

// ---------------------------------------------------------------------------
// Shared simulations
// ---------------------------------------------------------------------------

struct Runs {
  DiagnosticsSeries schw, dumb, flat, prof, cont;
  FlowState cont_state;
  std::vector<double> eps_ladder;
  std::vector<DiagnosticsSeries> eps_runs;
  std::vector<FlowState> eps_states;

  // every cached series, for the all-presets criteria (4 and 10)
  std::vector<std::pair<const char*, const DiagnosticsSeries*>> all() const {
    std::vector<std::pair<const char*, const DiagnosticsSeries*>> v = {
        {"schwarzschild", &schw}, {"dumbbell", &dumb}, {"flat", &flat},
        {"mass_profile", &prof},  {"continuum", &cont}};
    for (size_t k = 0; k < eps_runs.size(); ++k) v.push_back({"eps-ladder", &eps_runs[k]});
    return v;
  }
};

DiagnosticsSeries timed_run(const char* label, const RunConfig& cfg, bool continuum,
                            FlowState* state) {
  std::fprintf(stderr, "  %-46s", label);
  std::fflush(stderr);
  const auto t0 = std::chrono::steady_clock::now();
  DiagnosticsSeries s =
      continuum ? run_continuum_flow(cfg, state) : run_mass_decreasing_flow(cfg, state);
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::fprintf(stderr, "%7.1fs  samples=%-4zu jumps=%-3zu surgeries=%zu%s\n", dt,
               s.samples.size(), s.jumps.size(), s.surgeries.size(),
               s.failed ? "  FAILED" : "");
  return s;
}

Runs make_runs() {
  Runs R;
  std::fprintf(stderr, "shared simulations:\n");

  RunConfig schw; // defaults: schwarzschild, n=2048, eps=0.1, t_end=1, dt=0.01
  R.schw = timed_run("schwarzschild n=2048 eps=0.1 t_end=1.0", schw, false, nullptr);

  RunConfig dumb;
  dumb.preset = "dumbbell";
  dumb.epsilon = 1.0;
  dumb.t_end = 1.0;
  dumb.theta = 100.0;
  R.dumb = timed_run("dumbbell n=2048 eps=1.0 theta=100", dumb, false, nullptr);

  RunConfig flat;
  flat.preset = "flat";
  flat.t_end = 0.3;
  flat.sample_dt = 0.05;
  R.flat = timed_run("flat n=2048 eps=0.1 t_end=0.3", flat, false, nullptr);

  RunConfig prof;
  prof.preset = "mass_profile";
  prof.t_end = 0.2;
  R.prof = timed_run("mass_profile n=2048 eps=0.1 t_end=0.2", prof, false, nullptr);

  RunConfig cont;
  cont.n = 1024;
  cont.t_end = 0.4;
  cont.sample_dt = 0.05;
  R.cont = timed_run("continuum n=1024 t_end=0.4", cont, true, &R.cont_state);

  R.eps_ladder = {0.1, 0.05, 0.025, 0.0125};
  for (double e : R.eps_ladder) {
    RunConfig c;
    c.n = 1024;
    c.epsilon = e;
    c.t_end = 0.4;
    c.sample_dt = 0.1;
    R.eps_states.emplace_back();
    R.eps_runs.push_back(timed_run(fmt("schwarzschild n=1024 eps=%g t_end=0.4", e).c_str(), c,
                                   false, &R.eps_states.back()));
  }
  return R;
}

void require_clean(const DiagnosticsSeries& s, const char* label) {
  if (s.failed) throw std::runtime_error(fmt("%s run failed: %s", label, s.failure.c_str()));
  if (s.samples.size() < 3) throw std::runtime_error(fmt("%s run too short", label));
}

// ---------------------------------------------------------------------------
// Criterion 1: static Schwarzschild fidelity
// ---------------------------------------------------------------------------

Gate c1_schwarzschild_fidelity() {
  Gate g;
  InitialData d = make_schwarzschild(2048, 1.0);
  const double adm_err = std::abs(adm_mass(d.metric).mass - 1.0);
  g.req(adm_err <= 1e-3, fmt("adm err %.1e <= 1e-3", adm_err));

  const CurvatureData c = curvature(d.metric);
  double max_R = 0.0;
  for (double v : c.scalar) max_R = std::max(max_R, std::abs(v));
  g.req(max_R <= 1e-6, fmt("max|R| %.1e <= 1e-6", max_R));

  // |Ric|^2 = 6 M^2 / psi^6 pointwise; the two outermost nodes use one-sided
  // stencils and count as boundary.
  double dev = 0.0;
  const int n = d.metric.n();
  for (int i = 0; i + 2 < n; ++i) {
    const double exact = 6.0 / std::pow(d.metric.psi[(size_t)i], 6);
    dev = std::max(dev, std::abs(c.ricci_sq[(size_t)i] - exact) / exact);
  }
  g.req(dev <= 5e-3, fmt("|Ric|^2 dev %.3f%% <= 0.5%%", 100.0 * dev));

  // R == 0 exactly in the continuum, so rms R under doubling is pure
  // truncation and must shrink at second order.
  auto rms_R = [](int nn) {
    const CurvatureData cc = curvature(make_schwarzschild(nn, 1.0).metric);
    double s = 0.0;
    for (double v : cc.scalar) s += v * v;
    return std::sqrt(s / nn);
  };
  const double e1 = rms_R(512), e2 = rms_R(1024), e3 = rms_R(2048);
  const double order = 0.5 * (std::log2(e1 / e2) + std::log2(e2 / e3));
  g.req(std::abs(order - 2.0) <= 0.3, fmt("R order %.2f in [1.7,2.3]", order));
  return g;
}

// ---------------------------------------------------------------------------
// Criterion 2: mass constancy on smooth segments
// ---------------------------------------------------------------------------

Gate c2_segment_mass_constancy() {
  Gate g;
  auto drift = [](int n) {
    InitialData d = make_schwarzschild(n, 1.0);
    const double m0 = adm_mass(d.metric).mass;
    SegmentOptions o;
    o.duration = 0.1;
    const SegmentResult r = evolve(std::move(d.metric), o);
    return std::abs(adm_mass(r.metric).mass - m0) / std::abs(m0);
  };
  const double e1 = drift(512), e2 = drift(1024), e3 = drift(2048);
  g.req(e3 <= 1e-3, fmt("|dm|/m %.2e <= 1e-3 at n=2048", e3));
  // The drift is a conservation defect, so the refinement gate is one-sided:
  // faster decay than second order (measured ~2.9, the settling of the ADM
  // extrapolant dominates) counts as passing, not as a calibration miss.
  const double order = 0.5 * (std::log2(e1 / e2) + std::log2(e2 / e3));
  g.req(order >= 1.7, fmt("order %.2f >= 1.7 (drifts %.1e/%.1e/%.1e)", order, e1, e2, e3));
  return g;
}

// ---------------------------------------------------------------------------
// Criterion 3: mass-jump identity, energy form vs flux form
// ---------------------------------------------------------------------------

Gate c3_mass_jump_identity(const Runs& R) {
  Gate g;
  require_clean(R.prof, "mass_profile");
  if (R.prof.jumps.empty()) throw std::runtime_error("mass_profile run produced no rescaling");

  double worst = 0.0;
  for (const MassJump& j : R.prof.jumps)
    worst = std::max(worst, std::abs(j.dm_energy - j.dm_flux) /
                                std::max(std::abs(j.dm_energy), 1e-12));
  g.req(worst <= 0.01, fmt("energy/flux mismatch %.3f%% <= 1%% (%zu jumps)", 100.0 * worst,
                           R.prof.jumps.size()));

  // strict mass loss whenever the slice carries real scalar curvature
  int gated = 0, negative = 0;
  double least_loss = -1.0; // smallest |dm| among gated jumps
  for (const auto& [name, s] : R.all()) {
    (void)name;
    for (const MassJump& j : s->jumps) {
      if (j.max_R_before <= 1e-4) continue;
      ++gated;
      if (j.dm_energy < 0.0) ++negative;
      const double loss = -j.dm_energy;
      least_loss = (least_loss < 0.0) ? loss : std::min(least_loss, loss);
    }
  }
  g.req(gated > 0 && negative == gated,
        fmt("dm < 0 at %d/%d jumps with max R > 1e-4 (least loss %.2e)", negative, gated,
            least_loss));
  return g;
}

// ---------------------------------------------------------------------------
// Criterion 4: lambda_AF lower bound m >= lambda_AF
// ---------------------------------------------------------------------------

Gate c4_lambda_lower_bound(const Runs& R) {
  Gate g;
  double min_margin = 1e300;
  const char* where = "";
  double t_at = 0.0;
  bool positivity = true;
  double min_gated_lambda = 1e300;
  int rows = 0;
  for (const auto& [name, s] : R.all()) {
    require_clean(*s, name);
    // Exhausted remnants are O(h^2) grid residue in both m and lambda, so the
    // bound is checked against a noise allowance on the run's mass scale.
    const double slack = 2e-4 * (std::abs(s->samples.front().m) + 1.0);
    for (const Sample& q : s->samples) {
      ++rows;
      const double margin = q.m - q.lambda_af;
      if (margin < min_margin) {
        min_margin = margin;
        where = name;
        t_at = q.t;
      }
      if (margin < -slack) positivity = false; // reuse flag, reported below
      if (q.max_R > 1e-4) min_gated_lambda = std::min(min_gated_lambda, q.lambda_af);
    }
  }
  g.req(positivity, fmt("min m - lambda_AF margin %.2e (%s, t=%.2f) >= -2e-4 noise allowance, "
                        "%d samples",
                        min_margin, where, t_at, rows));
  g.req(min_gated_lambda > 0.0,
        fmt("lambda_AF > 0 where max R > 1e-4 (min %.2e)", min_gated_lambda));
  return g;
}

// ---------------------------------------------------------------------------
// Criterion 5: lambda_AF monotonicity and production rate
// ---------------------------------------------------------------------------

Gate c5_lambda_monotonicity(const Runs& R) {
  Gate g;
  require_clean(R.schw, "schwarzschild");
  const auto& S = R.schw.samples;

  // Centered finite differences over triples of rows inside one smooth
  // segment; a sample is resolved when the second difference is small
  // against the first and the slope clears 10x the probe noise floor.
  double min_fd = 1e300;
  int resolved = 0;
  for (size_t i = 0; i + 2 < S.size(); ++i) {
    if (S[i + 1].event != "flow" || S[i + 2].event != "flow") continue;
    const double dt1 = S[i + 1].t - S[i].t, dt2 = S[i + 2].t - S[i + 1].t;
    if (dt1 <= 1e-12 || dt2 <= 1e-12) continue;
    const double d1 = S[i + 1].lambda_af - S[i].lambda_af;
    const double d2 = S[i + 2].lambda_af - S[i + 1].lambda_af;
    if (std::abs(d2 - d1) > 0.05 * std::max(std::abs(d1), std::abs(d2))) continue;
    const double fd = (S[i + 2].lambda_af - S[i].lambda_af) / (S[i + 2].t - S[i].t);
    if (std::abs(fd) < 10.0 * 1e-3) continue;
    ++resolved;
    min_fd = std::min(min_fd, fd);
  }
  g.req(resolved > 0 && min_fd >= -1e-6,
        fmt("fd d(lambda)/dt >= -1e-6 at %d resolved samples (min %.3e)", resolved, min_fd));

  const MonotonicityReport rep = check_monotonicity(R.schw);
  g.req(rep.rate_samples > 0 && rep.worst_rate_mismatch <= 0.05,
        fmt("fd vs lambda_rate mismatch %.2f%% <= 5%% (%d samples)",
            100.0 * rep.worst_rate_mismatch, rep.rate_samples));
  g.req(rep.worst_post_rescale_rate_mismatch <= 0.05,
        fmt("post-rescaling rate vs 2*int|Ric|^2/16pi mismatch %.2f%% <= 5%%",
            100.0 * rep.worst_post_rescale_rate_mismatch));
  return g;
}

// ---------------------------------------------------------------------------
// Criterion 6: outermost minimal sphere shrinks at >= 4 pi
// ---------------------------------------------------------------------------

Gate c6_minimal_sphere_rate(const Runs& R) {
  Gate g;
  require_clean(R.dumb, "dumbbell");
  const auto& S = R.dumb.samples;
  const double A0 = S.front().area_outermost;
  if (A0 <= 0.0) throw std::runtime_error("dumbbell data carries no initial minimal sphere");

  double max_q = -1e300;
  int pairs = 0;
  for (size_t i = 0; i + 1 < S.size(); ++i) {
    if (S[i].area_outermost <= 0.0 || S[i + 1].area_outermost <= 0.0) continue;
    const double dt = S[i + 1].t - S[i].t;
    if (dt <= 1e-12) continue;
    ++pairs;
    max_q = std::max(max_q, (S[i + 1].area_outermost - S[i].area_outermost) / dt);
  }
  g.req(pairs > 0 && max_q <= -4.0 * kPi + 0.2,
        fmt("dA/dt <= -4pi + 0.2 at all %d pairs (max %.2f vs %.2f)", pairs, max_q,
            -4.0 * kPi + 0.2));

  if (R.dumb.surgeries.empty()) throw std::runtime_error("dumbbell run performed no surgery");
  const double t_s = R.dumb.surgeries.front().t;
  const double budget = 1.1 * A0 / (4.0 * kPi);
  g.req(t_s <= budget, fmt("simplification at t=%.4f <= 1.1*A0/4pi = %.4f", t_s, budget));
  return g;
}

// ---------------------------------------------------------------------------
// Criterion 7: surgery contract
// ---------------------------------------------------------------------------

Gate c7_surgery_contract(const Runs& R) {
  Gate g;
  require_clean(R.dumb, "dumbbell");
  if (R.dumb.surgeries.empty()) throw std::runtime_error("dumbbell run performed no surgery");

  double worst_ratio = 0.0;
  for (const SurgeryEvent& ev : R.dumb.surgeries)
    worst_ratio = std::max(worst_ratio, ev.post_max_R / ev.pre_max_R);
  g.req(worst_ratio <= 0.5, fmt("post/pre max R <= 1/2 for %zu events (worst %.3f)",
                                R.dumb.surgeries.size(), worst_ratio));

  // Direct cut on fresh data: every node from the junction outward must
  // survive bit for bit.
  InitialData d = make_dumbbell(2048);
  SegmentOptions o;
  o.duration = 1.0;
  o.stop_max_scalar = 100.0;
  const SegmentResult r = evolve(std::move(d.metric), o);
  if (!r.hit_threshold) throw std::runtime_error("neck never reached the curvature threshold");
  const auto neck = detect_neck(r.metric, 100.0);
  if (!neck) throw std::runtime_error("no neck detected at threshold");
  const SurgeryResult sr = perform_surgery(r.metric, *neck);
  const int shift = sr.event.nodes_added - sr.event.cut_index;
  bool bitwise = sr.metric.n() == r.metric.n() + shift;
  if (bitwise)
    for (int i = sr.event.cut_index; i < r.metric.n(); ++i) {
      const size_t a = (size_t)(i + shift), b = (size_t)i;
      bitwise = bitwise && sr.metric.grid.r[a] == r.metric.grid.r[b] &&
                sr.metric.phi[a] == r.metric.phi[b] && sr.metric.psi[a] == r.metric.psi[b];
    }
  g.req(bitwise, fmt("outer grid bitwise untouched (%d nodes beyond the cut)",
                     r.metric.n() - sr.event.cut_index));

  int after = 0, clean = 0;
  for (const Sample& q : R.dumb.samples)
    if (q.surgery_count >= 1) {
      ++after;
      if (q.area_outermost == 0.0) ++clean;
    }
  g.req(after > 0 && clean == after,
        fmt("no minimal spheres after surgery (%d/%d rows clean)", clean, after));
  return g;
}

// ---------------------------------------------------------------------------
// Criterion 8: continuum limit of the epsilon-iteration
// ---------------------------------------------------------------------------

// The warped metric is determined by the quasi-local mass profile ms(psi)
// (g_psipsi = 1/(1 - 2 ms/psi)), so the sup distance between profiles on a
// common psi window is a gauge-free metric distance.
double profile_distance(const WarpedMetric& a, const WarpedMetric& b) {
  const std::vector<double> ma = misner_sharp(a), mb = misner_sharp(b);
  auto lookup = [](const WarpedMetric& g, const std::vector<double>& ms, double p) {
    const auto& psi = g.psi;
    size_t lo = 0; // skip any non-monotone throat vicinity
    while (lo + 1 < psi.size() && psi[lo + 1] <= psi[lo]) ++lo;
    const auto it = std::lower_bound(psi.begin() + (long)lo + 1, psi.end(), p);
    const size_t j = (size_t)(it - psi.begin());
    const size_t i = j - 1;
    const double w = (p - psi[i]) / (psi[j] - psi[i]);
    return (1.0 - w) * ms[i] + w * ms[j];
  };
  const double lo = std::max(a.psi[2], b.psi[2]) * 1.001;
  const double hi = std::min(a.psi.back(), b.psi.back()) * 0.999;
  double d = 0.0;
  const int K = 400;
  for (int k = 0; k <= K; ++k) {
    const double p = lo + (hi - lo) * k / K;
    d = std::max(d, std::abs(lookup(a, ma, p) - lookup(b, mb, p)));
  }
  return d;
}

Gate c8_continuum_limit(const Runs& R) {
  Gate g;
  require_clean(R.cont, "continuum");

  // instantaneous rate at t = 0 against the curvature energy of the data
  InitialData d0 = make_schwarzschild(1024, 1.0);
  const CurvatureData c0 = curvature(d0.metric);
  const double energy_rate =
      2.0 * volume_integral(d0.metric, c0.ricci_sq).value / (16.0 * kPi);
  const auto& S = R.cont.samples;
  const double fd = (S[1].m - S[0].m) / (S[1].t - S[0].t);
  const double mis = std::abs(fd / -energy_rate - 1.0);
  g.req(mis <= 0.05, fmt("dm/dt(0) %.4f vs -2E/16pi %.4f: %.2f%% <= 5%%", fd, -energy_rate,
                         100.0 * mis));

  // metric distance to the continuum state at t = 0.4 shrinks like O(eps)
  std::string ds;
  std::vector<double> lx, ly;
  for (size_t k = 0; k < R.eps_ladder.size(); ++k) {
    require_clean(R.eps_runs[k], "eps-ladder");
    const double dist = profile_distance(R.eps_states[k].metric, R.cont_state.metric);
    lx.push_back(std::log(R.eps_ladder[k]));
    ly.push_back(std::log(dist));
    ds += fmt("%s%.2e", k ? ", " : "", dist);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = (double)lx.size();
  for (size_t k = 0; k < lx.size(); ++k) {
    sx += lx[k];
    sy += ly[k];
    sxx += lx[k] * lx[k];
    sxy += lx[k] * ly[k];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  g.req(std::abs(slope - 1.0) <= 0.2,
        fmt("distance(eps) = {%s}, log-log slope %.2f in [0.8,1.2]", ds.c_str(), slope));
  return g;
}

// ---------------------------------------------------------------------------
// Criterion 9: quadratic decay recursion
// ---------------------------------------------------------------------------

Gate c9_decay_recursion(const Runs& R) {
  Gate g;
  require_clean(R.schw, "schwarzschild");
  g.req(R.schw.jumps.size() >= 10, fmt("%zu rescalings >= 10", R.schw.jumps.size()));

  bool strict = true;
  double prev = R.schw.samples.front().m;
  for (const MassJump& j : R.schw.jumps) {
    if (!(j.m_after < prev)) strict = false;
    prev = j.m_after;
  }
  g.req(strict, "m strictly decreasing across rescalings");

  const DecayFit f = decay_fit(R.schw);
  g.req(f.c_est > 0.0, fmt("c_est = min lambda_AF/m^2 = %.4f > 0", f.c_est));
  g.req(f.recursion_ok, fmt("m_{k+1} <= m_k - c_est m_k^2 at every k (margin %.1e)",
                            f.worst_recursion_margin));
  g.info(fmt("C/t tail fit residual %.3f (reported, not bounded)", f.residual));
  return g;
}

// ---------------------------------------------------------------------------
// Criterion 10: mass positivity monitor
// ---------------------------------------------------------------------------

Gate c10_mass_positivity(const Runs& R) {
  Gate g;
  bool ok = true;
  double worst = 1e300; // most negative m relative to its bound
  const char* where = "";
  int rows = 0;
  for (const auto& [name, s] : R.all()) {
    require_clean(*s, name);
    const double m0 = s->samples.front().m;
    const double bound = -1e-4 * std::max(m0, 0.0) - 1e-9;
    for (const Sample& q : s->samples) {
      ++rows;
      if (q.m < bound) ok = false;
      if (q.m < worst) {
        worst = q.m;
        where = name;
      }
    }
  }
  g.req(ok, fmt("m(t) >= -1e-4*m(0) - 1e-9 on %d samples (min m %.2e, %s)", rows, worst,
                where));
  return g;
}

} // namespace

int main() {
  Runs R = make_runs();
  std::fprintf(stderr, "criteria:\n");

  criterion(1, "schwarzschild fidelity", c1_schwarzschild_fidelity);
  criterion(2, "segment mass constancy", c2_segment_mass_constancy);
  criterion(3, "mass-jump identity", [&] { return c3_mass_jump_identity(R); });
  criterion(4, "lambda_AF lower bound", [&] { return c4_lambda_lower_bound(R); });
  criterion(5, "lambda_AF monotonicity", [&] { return c5_lambda_monotonicity(R); });
  criterion(6, "minimal-sphere rate", [&] { return c6_minimal_sphere_rate(R); });
  criterion(7, "surgery contract", [&] { return c7_surgery_contract(R); });
  criterion(8, "continuum limit", [&] { return c8_continuum_limit(R); });
  criterion(9, "decay recursion", [&] { return c9_decay_recursion(R); });
  criterion(10, "mass positivity", [&] { return c10_mass_positivity(R); });

  std::printf("acceptance: %d/10 criteria passed\n", 10 - g_failures);
  return g_failures;
}
