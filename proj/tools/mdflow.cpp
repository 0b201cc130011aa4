// Command-line front end: run the alternating flow or its continuum limit,
// evaluate a stored metric, re-derive the reports from a stored series, or
// resume a checkpoint.
//
// Exit codes: 0 success with every monotonicity check passing, 1 usage or
// file-format error, 2 numerical failure, 3 run completed but a monotonicity
// check failed.

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mdf/elliptic.hpp"
#include "mdf/errors.hpp"
#include "mdf/geometry.hpp"
#include "mdf/io.hpp"
#include "mdf/orchestrator.hpp"

using namespace mdf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitChecksFailed = 3;

struct OutputOptions {
  std::string out;             // file for the series; empty = stdout
  std::string format = "csv";  // csv | json
  std::string checkpoint_path; // save the final state here when set
};

void add_config_flags(CLI::App* cmd, RunConfig& flags) {
  cmd->add_option("--preset", flags.preset, "flat | schwarzschild | mass_profile | dumbbell");
  cmd->add_option("--mass", flags.mass, "mass parameter where the preset takes one");
  cmd->add_option("--n", flags.n, "grid nodes");
  cmd->add_option("--r-max", flags.r_max, "outer extent; 0 = preset default");
  cmd->add_option("--epsilon", flags.epsilon, "flow segment length between rescalings");
  cmd->add_option("--theta", flags.theta, "surgery curvature threshold");
  cmd->add_option("--delta", flags.delta, "neck recognition parameter");
  cmd->add_option("--t-end", flags.t_end, "total flow time");
  cmd->add_option("--sample-dt", flags.sample_dt, "diagnostics cadence");
  cmd->add_option("--safety", flags.safety, "CFL fraction");
  cmd->add_option("--rescale-tol", flags.rescale_tol, "post-rescaling |R| warning bound");
  cmd->add_option("--negative-R-tol", flags.negative_R_tol, "allowed R < 0 ahead of a rescaling");
  cmd->add_flag("--rescale-twice", flags.rescale_twice, "second elliptic pass per rescaling");
  cmd->add_option("--mass-floor", flags.mass_floor,
                  "stop once the mass falls under this fraction of its initial value; 0 disables");
}

void add_output_flags(CLI::App* cmd, OutputOptions& out) {
  cmd->add_option("--out", out.out, "write the series here instead of stdout");
  cmd->add_option("--format", out.format, "series format: csv | json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--checkpoint", out.checkpoint_path, "save the final state for `resume`");
}

// The config file (when given) is the base; flags the user actually passed
// override it field by field.
RunConfig merge_config(const CLI::App* cmd, const std::string& config_path,
                       const RunConfig& flags) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
  if (cmd->count("--preset")) cfg.preset = flags.preset;
  if (cmd->count("--mass")) cfg.mass = flags.mass;
  if (cmd->count("--n")) cfg.n = flags.n;
  if (cmd->count("--r-max")) cfg.r_max = flags.r_max;
  if (cmd->count("--epsilon")) cfg.epsilon = flags.epsilon;
  if (cmd->count("--theta")) cfg.theta = flags.theta;
  if (cmd->count("--delta")) cfg.delta = flags.delta;
  if (cmd->count("--t-end")) cfg.t_end = flags.t_end;
  if (cmd->count("--sample-dt")) cfg.sample_dt = flags.sample_dt;
  if (cmd->count("--safety")) cfg.safety = flags.safety;
  if (cmd->count("--rescale-tol")) cfg.rescale_tol = flags.rescale_tol;
  if (cmd->count("--negative-R-tol")) cfg.negative_R_tol = flags.negative_R_tol;
  if (cmd->count("--rescale-twice")) cfg.rescale_twice = flags.rescale_twice;
  if (cmd->count("--mass-floor")) cfg.mass_floor = flags.mass_floor;
  return cfg;
}

bool core_checks_pass(const MonotonicityReport& r) {
  return r.mass_nonincreasing && r.lambda_nondecreasing && r.mass_dominates_lambda &&
         r.gap_nonincreasing && r.mass_nonnegative;
}

void print_report(FILE* f, const MonotonicityReport& r) {
  fprintf(f, "mass_nonincreasing = %s (worst rise %.3g)\n", r.mass_nonincreasing ? "yes" : "NO",
          r.worst_mass_rise);
  fprintf(f, "lambda_nondecreasing = %s (worst drop %.3g)\n",
          r.lambda_nondecreasing ? "yes" : "NO", r.worst_lambda_drop);
  fprintf(f, "mass_dominates_lambda = %s (min margin %.3g)\n",
          r.mass_dominates_lambda ? "yes" : "NO", r.min_mass_lambda_margin);
  fprintf(f, "gap_nonincreasing = %s (worst rise %.3g)\n", r.gap_nonincreasing ? "yes" : "NO",
          r.worst_gap_rise);
  fprintf(f, "mass_nonnegative = %s (min mass %.3g)\n", r.mass_nonnegative ? "yes" : "NO",
          r.min_mass);
  fprintf(f, "rate check: %d resolved samples, worst mismatch %.2f%%, post-rescale %.2f%%\n",
          r.rate_samples, 100.0 * r.worst_rate_mismatch,
          100.0 * r.worst_post_rescale_rate_mismatch);
  fprintf(f, "accounting residual = %.3g\n", r.accounting_residual);
  if (r.violations.empty()) {
    fprintf(f, "violations: none\n");
  } else {
    for (const std::string& v : r.violations) fprintf(f, "violation: %s\n", v.c_str());
  }
}

void print_decay(FILE* f, const DiagnosticsSeries& s) {
  try {
    const DecayFit d = decay_fit(s);
    fprintf(f,
            "decay: c_est = %.6g, C_est = %.6g, tail residual = %.3g, recursion %s "
            "(worst margin %.3g), lambda ratio in [%.4g, %.4g]\n",
            d.c_est, d.C_est, d.residual, d.recursion_ok ? "ok" : "VIOLATED",
            d.worst_recursion_margin, d.lambda_ratio_min, d.lambda_ratio_max);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientData) throw;
    fprintf(f, "decay: skipped (%s)\n", e.what());
  }
}

// Emit the series, then the checkpoint, then the verdict. Shared by run,
// continuum, and resume.
int finish(const RunConfig& cfg, const DiagnosticsSeries& s, const FlowState* state,
           const OutputOptions& out) {
  const std::string text = emit_series(s, out.format);
  if (out.out.empty())
    fputs(text.c_str(), stdout);
  else
    write_text_file(out.out, text);

  for (const std::string& w : s.warnings) fprintf(stderr, "warning: %s\n", w.c_str());
  if (s.failed) {
    fprintf(stderr, "run failed: %s\n", s.failure.c_str());
    return kExitNumerical;
  }
  if (!out.checkpoint_path.empty() && state) {
    Checkpoint c;
    c.config = cfg;
    c.t = state->t;
    c.metric = state->metric;
    c.series = s;
    save_checkpoint(c, out.checkpoint_path);
  }
  if (s.samples.size() < 3) {
    fprintf(stderr, "series too short for monotonicity checks\n");
    return kExitOk;
  }
  const MonotonicityReport r = check_monotonicity(s);
  print_report(stderr, r);
  print_decay(stderr, s);
  return core_checks_pass(r) ? kExitOk : kExitChecksFailed;
}

std::string eps_tag(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", eps);
  return buf;
}

// --out base.csv + epsilon 0.05 -> base-eps0.05.csv
std::string sweep_out_name(const std::string& base, double eps) {
  const size_t dot = base.find_last_of('.');
  const std::string stem = dot == std::string::npos ? base : base.substr(0, dot);
  const std::string ext = dot == std::string::npos ? "" : base.substr(dot);
  return stem + "-eps" + eps_tag(eps) + ext;
}

// A metric on its own or the one inside a checkpoint, by content.
WarpedMetric load_any_metric(const std::string& path) {
  const std::string text = read_text_file(path);
  if (text.find("\"format_version\"") != std::string::npos)
    return checkpoint_from_json(text).metric;
  return metric_from_json(text);
}

int run_command(bool continuum, const CLI::App* cmd, const std::string& config_path,
                const RunConfig& flags, const OutputOptions& out,
                const std::vector<double>& sweep) {
  const RunConfig cfg = merge_config(cmd, config_path, flags);
  if (sweep.empty()) {
    FlowState state;
    const DiagnosticsSeries s =
        continuum ? run_continuum_flow(cfg, &state) : run_mass_decreasing_flow(cfg, &state);
    return finish(cfg, s, &state, out);
  }

  // fan out over epsilon, one run at a time; worst verdict wins
  if (out.out.empty())
    fail(ErrorCode::BadConfig, "--sweep-epsilon needs --out to name the per-run files");
  int worst = kExitOk;
  for (const double eps : sweep) {
    RunConfig c = cfg;
    c.epsilon = eps;
    OutputOptions o = out;
    o.out = sweep_out_name(out.out, eps);
    if (!out.checkpoint_path.empty()) o.checkpoint_path = sweep_out_name(out.checkpoint_path, eps);
    FlowState state;
    const DiagnosticsSeries s =
        continuum ? run_continuum_flow(c, &state) : run_mass_decreasing_flow(c, &state);
    fprintf(stderr, "epsilon = %s -> %s\n", eps_tag(eps).c_str(), o.out.c_str());
    worst = std::max(worst, finish(c, s, &state, o));
  }
  return worst;
}

int resume_command(const std::string& from, const CLI::App* cmd, const RunConfig& flags,
                   const OutputOptions& out) {
  Checkpoint c = load_checkpoint(from);
  // the stored config is the base; flags passed to `resume` override it
  RunConfig cfg = c.config;
  if (cmd->count("--preset")) cfg.preset = flags.preset;
  if (cmd->count("--mass")) cfg.mass = flags.mass;
  if (cmd->count("--n")) cfg.n = flags.n;
  if (cmd->count("--r-max")) cfg.r_max = flags.r_max;
  if (cmd->count("--epsilon")) cfg.epsilon = flags.epsilon;
  if (cmd->count("--theta")) cfg.theta = flags.theta;
  if (cmd->count("--delta")) cfg.delta = flags.delta;
  if (cmd->count("--t-end")) cfg.t_end = flags.t_end;
  if (cmd->count("--sample-dt")) cfg.sample_dt = flags.sample_dt;
  if (cmd->count("--safety")) cfg.safety = flags.safety;
  if (cmd->count("--rescale-tol")) cfg.rescale_tol = flags.rescale_tol;
  if (cmd->count("--negative-R-tol")) cfg.negative_R_tol = flags.negative_R_tol;
  if (cmd->count("--rescale-twice")) cfg.rescale_twice = flags.rescale_twice;
  if (cmd->count("--mass-floor")) cfg.mass_floor = flags.mass_floor;

  const bool continuum = c.series.epsilon == 0.0;
  FlowState state;
  const DiagnosticsSeries s =
      continuum
          ? resume_continuum_flow(cfg, std::move(c.metric), c.t, std::move(c.series), &state)
          : resume_mass_decreasing_flow(cfg, std::move(c.metric), c.t, std::move(c.series), &state);
  return finish(cfg, s, &state, out);
}

int report_command(const std::string& in, double noise_floor) {
  const DiagnosticsSeries s = series_from_json(read_text_file(in));
  if (s.failed) {
    fprintf(stderr, "stored run failed: %s\n", s.failure.c_str());
    return kExitNumerical;
  }
  if (s.samples.size() < 3) {
    printf("series too short for monotonicity checks\n");
    return kExitOk;
  }
  const MonotonicityReport r = check_monotonicity(s, noise_floor);
  print_report(stdout, r);
  print_decay(stdout, s);
  return core_checks_pass(r) ? kExitOk : kExitChecksFailed;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"rotationally symmetric mass-decreasing flow"};
  app.require_subcommand(1);

  RunConfig flags;
  std::string config_path;
  OutputOptions out;
  std::vector<double> sweep;

  CLI::App* run = app.add_subcommand("run", "alternating flow / rescaling iteration");
  run->add_option("--config", config_path, "config file, one key = value per line");
  add_config_flags(run, flags);
  add_output_flags(run, out);
  run->add_option("--sweep-epsilon", sweep,
                  "comma-separated epsilon list; runs each sequentially (needs --out)")
      ->delimiter(',');

  CLI::App* cont = app.add_subcommand("continuum", "epsilon -> 0 nonlocal flow");
  cont->add_option("--config", config_path, "config file, one key = value per line");
  add_config_flags(cont, flags);
  add_output_flags(cont, out);

  std::string in_path;
  CLI::App* mass = app.add_subcommand("mass", "ADM mass of a stored metric or checkpoint");
  mass->add_option("--in", in_path, "metric JSON or checkpoint file")->required();

  CLI::App* lambda = app.add_subcommand("lambda", "lambda_AF of a stored metric or checkpoint");
  lambda->add_option("--in", in_path, "metric JSON or checkpoint file")->required();

  double noise_floor = 1e-3;
  CLI::App* report = app.add_subcommand("report", "re-derive the checks from a stored series");
  report->add_option("--in", in_path, "series JSON file")->required();
  report->add_option("--noise-floor", noise_floor, "rate noise floor for the rate checks");

  std::string from;
  CLI::App* resume = app.add_subcommand("resume", "continue a checkpointed run");
  resume->add_option("--from", from, "checkpoint file")->required();
  add_config_flags(resume, flags); // overrides on top of the stored config
  add_output_flags(resume, out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed()) return run_command(false, run, config_path, flags, out, sweep);
    if (cont->parsed()) return run_command(true, cont, config_path, flags, out, {});
    if (mass->parsed()) {
      printf("%.12g\n", adm_mass(load_any_metric(in_path)).mass);
      return kExitOk;
    }
    if (lambda->parsed()) {
      printf("%.12g\n", lambda_af(load_any_metric(in_path)).value);
      return kExitOk;
    }
    if (report->parsed()) return report_command(in_path, noise_floor);
    if (resume->parsed()) return resume_command(from, resume, flags, out);
  } catch (const Error& e) {
    fprintf(stderr, "error: %s\n", e.what());
    switch (e.code()) {
      case ErrorCode::BadConfig:
      case ErrorCode::BadCheckpoint:
      case ErrorCode::Io:
        return kExitUsage;
      default:
        return kExitNumerical;
    }
  }
  return kExitUsage; // unreachable: a subcommand is required
}
