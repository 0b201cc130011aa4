#pragma once
// Text formats around the runs: key = value config files, diagnostics series
// as CSV or JSON, single serialized metrics, and JSON checkpoints that
// round-trip a paused run bit for bit.

#include <string>

#include "mdf/orchestrator.hpp"

namespace mdf {

/// Parse `key = value` lines into a RunConfig: one pair per line, `#` starts
/// a comment, blank lines are skipped. Keys are the RunConfig field names;
/// unknown keys, repeated '=' -less lines, or unparseable values are
/// BadConfig. Omitted keys keep their defaults.
RunConfig parse_config(const std::string& text);

/// Inverse of parse_config, emitting every key. Doubles print in shortest
/// round-trip form, so parse / serialize / parse is the identity.
std::string serialize_config(const RunConfig& cfg);

/// parse_config over a file's contents.
RunConfig load_config(const std::string& path);

/// CSV under the fixed header
///   t,m,lambda_af,lambda_rate,max_R,min_R,A_outermost,surgery_count,event
/// with numbers at 12 significant digits. An empty series is just the header
/// line.
std::string series_csv(const DiagnosticsSeries& s);

/// Complete JSON image of a series: samples, mass jumps with both the energy
/// and the flux value of each jump, surgery events, warnings, failure state.
/// Numbers are written in shortest round-trip form, so series_from_json
/// restores every field bit for bit.
std::string series_json(const DiagnosticsSeries& s);
DiagnosticsSeries series_from_json(const std::string& text);

/// series_csv / series_json selected by name ("csv" | "json").
std::string emit_series(const DiagnosticsSeries& s, const std::string& format);

/// One metric as JSON: { topology, r, phi, psi }. Exact like the series.
std::string metric_json(const WarpedMetric& m);
WarpedMetric metric_from_json(const std::string& text);

inline constexpr int kCheckpointVersion = 1;

/// A paused run: everything needed to continue it exactly.
struct Checkpoint {
  int version = kCheckpointVersion;
  RunConfig config;
  double t = 0.0;     // flow time the metric sits at
  WarpedMetric metric;
  DiagnosticsSeries series;
};

std::string checkpoint_json(const Checkpoint& c);
/// BadCheckpoint when the text is not a checkpoint or the format version
/// differs from kCheckpointVersion.
Checkpoint checkpoint_from_json(const std::string& text);

/// File forms. save / load / save is byte-identical.
void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// Whole-file helpers shared by the tools; Io on filesystem trouble.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

} // namespace mdf
