#include "mdf/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "mdf/errors.hpp"

namespace mdf {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Shortest decimal form that parses back to the same double.
std::string fmt_exact(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end)
    fail(ErrorCode::BadConfig, "bad value '" + v + "' for " + key);
  return out;
}

int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end)
    fail(ErrorCode::BadConfig, "bad value '" + v + "' for " + key);
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  fail(ErrorCode::BadConfig, "bad value '" + v + "' for " + key + " (want true or false)");
}

ordered_json sample_to_json(const Sample& q) {
  ordered_json j;
  j["t"] = q.t;
  j["m"] = q.m;
  j["lambda_af"] = q.lambda_af;
  j["lambda_rate"] = q.lambda_rate;
  j["max_R"] = q.max_R;
  j["min_R"] = q.min_R;
  j["area_outermost"] = q.area_outermost;
  j["surgery_count"] = q.surgery_count;
  j["event"] = q.event;
  return j;
}

Sample sample_from_json(const ordered_json& j) {
  Sample q;
  q.t = j.at("t").get<double>();
  q.m = j.at("m").get<double>();
  q.lambda_af = j.at("lambda_af").get<double>();
  q.lambda_rate = j.at("lambda_rate").get<double>();
  q.max_R = j.at("max_R").get<double>();
  q.min_R = j.at("min_R").get<double>();
  q.area_outermost = j.at("area_outermost").get<double>();
  q.surgery_count = j.at("surgery_count").get<int>();
  q.event = j.at("event").get<std::string>();
  return q;
}

ordered_json jump_to_json(const MassJump& x) {
  ordered_json j;
  j["t"] = x.t;
  j["m_before"] = x.m_before;
  j["m_after"] = x.m_after;
  j["dm_energy"] = x.dm_energy;
  j["dm_flux"] = x.dm_flux;
  j["lambda_before"] = x.lambda_before;
  j["max_R_before"] = x.max_R_before;
  j["ricci_energy_after"] = x.ricci_energy_after;
  return j;
}

MassJump jump_from_json(const ordered_json& j) {
  MassJump x;
  x.t = j.at("t").get<double>();
  x.m_before = j.at("m_before").get<double>();
  x.m_after = j.at("m_after").get<double>();
  x.dm_energy = j.at("dm_energy").get<double>();
  x.dm_flux = j.at("dm_flux").get<double>();
  x.lambda_before = j.at("lambda_before").get<double>();
  x.max_R_before = j.at("max_R_before").get<double>();
  x.ricci_energy_after = j.at("ricci_energy_after").get<double>();
  return x;
}

ordered_json surgery_to_json(const SurgeryEvent& e) {
  ordered_json j;
  j["t"] = e.t;
  j["neck_index"] = e.neck_index;
  j["psi_neck"] = e.psi_neck;
  j["cut_index"] = e.cut_index;
  j["neck_area"] = e.neck_area;
  j["pre_max_R"] = e.pre_max_R;
  j["post_max_R"] = e.post_max_R;
  j["discarded_volume"] = e.discarded_volume;
  j["collar_length"] = e.collar_length;
  j["nodes_removed"] = e.nodes_removed;
  j["nodes_added"] = e.nodes_added;
  j["attempts"] = e.attempts;
  return j;
}

SurgeryEvent surgery_from_json(const ordered_json& j) {
  SurgeryEvent e;
  e.t = j.at("t").get<double>();
  e.neck_index = j.at("neck_index").get<int>();
  e.psi_neck = j.at("psi_neck").get<double>();
  e.cut_index = j.at("cut_index").get<int>();
  e.neck_area = j.at("neck_area").get<double>();
  e.pre_max_R = j.at("pre_max_R").get<double>();
  e.post_max_R = j.at("post_max_R").get<double>();
  e.discarded_volume = j.at("discarded_volume").get<double>();
  e.collar_length = j.at("collar_length").get<double>();
  e.nodes_removed = j.at("nodes_removed").get<int>();
  e.nodes_added = j.at("nodes_added").get<int>();
  e.attempts = j.at("attempts").get<int>();
  return e;
}

ordered_json series_to_json_obj(const DiagnosticsSeries& s) {
  ordered_json j;
  j["epsilon"] = s.epsilon;
  j["failed"] = s.failed;
  j["failure"] = s.failure;
  j["warnings"] = s.warnings;
  j["samples"] = ordered_json::array();
  for (const Sample& q : s.samples) j["samples"].push_back(sample_to_json(q));
  j["jumps"] = ordered_json::array();
  for (const MassJump& x : s.jumps) j["jumps"].push_back(jump_to_json(x));
  j["surgeries"] = ordered_json::array();
  for (const SurgeryEvent& e : s.surgeries) j["surgeries"].push_back(surgery_to_json(e));
  return j;
}

DiagnosticsSeries series_from_json_obj(const ordered_json& j) {
  DiagnosticsSeries s;
  s.epsilon = j.at("epsilon").get<double>();
  s.failed = j.at("failed").get<bool>();
  s.failure = j.at("failure").get<std::string>();
  s.warnings = j.at("warnings").get<std::vector<std::string>>();
  for (const ordered_json& q : j.at("samples")) s.samples.push_back(sample_from_json(q));
  for (const ordered_json& x : j.at("jumps")) s.jumps.push_back(jump_from_json(x));
  for (const ordered_json& e : j.at("surgeries")) s.surgeries.push_back(surgery_from_json(e));
  return s;
}

ordered_json config_to_json_obj(const RunConfig& c) {
  ordered_json j;
  j["preset"] = c.preset;
  j["mass"] = c.mass;
  j["n"] = c.n;
  j["r_max"] = c.r_max;
  j["epsilon"] = c.epsilon;
  j["theta"] = c.theta;
  j["delta"] = c.delta;
  j["t_end"] = c.t_end;
  j["sample_dt"] = c.sample_dt;
  j["safety"] = c.safety;
  j["rescale_tol"] = c.rescale_tol;
  j["negative_R_tol"] = c.negative_R_tol;
  j["rescale_twice"] = c.rescale_twice;
  j["mass_floor"] = c.mass_floor;
  return j;
}

RunConfig config_from_json_obj(const ordered_json& j) {
  RunConfig c;
  c.preset = j.at("preset").get<std::string>();
  c.mass = j.at("mass").get<double>();
  c.n = j.at("n").get<int>();
  c.r_max = j.at("r_max").get<double>();
  c.epsilon = j.at("epsilon").get<double>();
  c.theta = j.at("theta").get<double>();
  c.delta = j.at("delta").get<double>();
  c.t_end = j.at("t_end").get<double>();
  c.sample_dt = j.at("sample_dt").get<double>();
  c.safety = j.at("safety").get<double>();
  c.rescale_tol = j.at("rescale_tol").get<double>();
  c.negative_R_tol = j.at("negative_R_tol").get<double>();
  c.rescale_twice = j.at("rescale_twice").get<bool>();
  c.mass_floor = j.at("mass_floor").get<double>();
  return c;
}

Topology topology_from_string(const std::string& s) {
  if (s == "center") return Topology::center;
  if (s == "throat") return Topology::throat;
  if (s == "open_inner") return Topology::open_inner;
  fail(ErrorCode::BadCheckpoint, "unknown topology '" + s + "'");
}

ordered_json metric_to_json_obj(const WarpedMetric& m) {
  ordered_json j;
  j["topology"] = to_string(m.topology);
  j["r"] = m.grid.r;
  j["phi"] = m.phi;
  j["psi"] = m.psi;
  return j;
}

WarpedMetric metric_from_json_obj(const ordered_json& j) {
  RadialGrid g;
  g.r = j.at("r").get<std::vector<double>>();
  std::vector<double> phi = j.at("phi").get<std::vector<double>>();
  std::vector<double> psi = j.at("psi").get<std::vector<double>>();
  const Topology topo = topology_from_string(j.at("topology").get<std::string>());
  // Structural validation only: a mid-run metric need not satisfy the
  // construction-time asymptotic checks.
  return WarpedMetric::make(std::move(g), std::move(phi), std::move(psi), topo, false);
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

} // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::BadConfig,
           "line " + std::to_string(lineno) + ": expected key = value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      fail(ErrorCode::BadConfig, "line " + std::to_string(lineno) + ": empty key or value");

    if (key == "preset") cfg.preset = val;
    else if (key == "mass") cfg.mass = parse_double(key, val);
    else if (key == "n") cfg.n = parse_int(key, val);
    else if (key == "r_max") cfg.r_max = parse_double(key, val);
    else if (key == "epsilon") cfg.epsilon = parse_double(key, val);
    else if (key == "theta") cfg.theta = parse_double(key, val);
    else if (key == "delta") cfg.delta = parse_double(key, val);
    else if (key == "t_end") cfg.t_end = parse_double(key, val);
    else if (key == "sample_dt") cfg.sample_dt = parse_double(key, val);
    else if (key == "safety") cfg.safety = parse_double(key, val);
    else if (key == "rescale_tol") cfg.rescale_tol = parse_double(key, val);
    else if (key == "negative_R_tol") cfg.negative_R_tol = parse_double(key, val);
    else if (key == "rescale_twice") cfg.rescale_twice = parse_bool(key, val);
    else if (key == "mass_floor") cfg.mass_floor = parse_double(key, val);
    else fail(ErrorCode::BadConfig, "unknown config key '" + key + "'");
  }
  return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  out += "preset = " + cfg.preset + "\n";
  out += "mass = " + fmt_exact(cfg.mass) + "\n";
  out += "n = " + std::to_string(cfg.n) + "\n";
  out += "r_max = " + fmt_exact(cfg.r_max) + "\n";
  out += "epsilon = " + fmt_exact(cfg.epsilon) + "\n";
  out += "theta = " + fmt_exact(cfg.theta) + "\n";
  out += "delta = " + fmt_exact(cfg.delta) + "\n";
  out += "t_end = " + fmt_exact(cfg.t_end) + "\n";
  out += "sample_dt = " + fmt_exact(cfg.sample_dt) + "\n";
  out += "safety = " + fmt_exact(cfg.safety) + "\n";
  out += "rescale_tol = " + fmt_exact(cfg.rescale_tol) + "\n";
  out += "negative_R_tol = " + fmt_exact(cfg.negative_R_tol) + "\n";
  out += std::string("rescale_twice = ") + (cfg.rescale_twice ? "true" : "false") + "\n";
  out += "mass_floor = " + fmt_exact(cfg.mass_floor) + "\n";
  return out;
}

RunConfig load_config(const std::string& path) { return parse_config(read_text_file(path)); }

std::string series_csv(const DiagnosticsSeries& s) {
  std::string out = "t,m,lambda_af,lambda_rate,max_R,min_R,A_outermost,surgery_count,event\n";
  for (const Sample& q : s.samples) {
    out += fmt12(q.t) + "," + fmt12(q.m) + "," + fmt12(q.lambda_af) + "," + fmt12(q.lambda_rate) +
           "," + fmt12(q.max_R) + "," + fmt12(q.min_R) + "," + fmt12(q.area_outermost) + "," +
           std::to_string(q.surgery_count) + "," + q.event + "\n";
  }
  return out;
}

std::string series_json(const DiagnosticsSeries& s) { return dump(series_to_json_obj(s)); }

DiagnosticsSeries series_from_json(const std::string& text) {
  try {
    return series_from_json_obj(ordered_json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Io, std::string("malformed series JSON: ") + e.what());
  }
}

std::string emit_series(const DiagnosticsSeries& s, const std::string& format) {
  if (format == "csv") return series_csv(s);
  if (format == "json") return series_json(s);
  fail(ErrorCode::BadConfig, "unknown series format '" + format + "' (want csv or json)");
}

std::string metric_json(const WarpedMetric& m) { return dump(metric_to_json_obj(m)); }

WarpedMetric metric_from_json(const std::string& text) {
  try {
    return metric_from_json_obj(ordered_json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Io, std::string("malformed metric JSON: ") + e.what());
  }
}

std::string checkpoint_json(const Checkpoint& c) {
  ordered_json j;
  j["format_version"] = c.version;
  j["config"] = config_to_json_obj(c.config);
  j["t"] = c.t;
  j["metric"] = metric_to_json_obj(c.metric);
  j["series"] = series_to_json_obj(c.series);
  return dump(j);
}

Checkpoint checkpoint_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::BadCheckpoint, std::string("malformed checkpoint: ") + e.what());
  }
  Checkpoint c;
  try {
    c.version = j.at("format_version").get<int>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::BadCheckpoint, std::string("malformed checkpoint: ") + e.what());
  }
  if (c.version != kCheckpointVersion)
    fail(ErrorCode::BadCheckpoint, "format version " + std::to_string(c.version) +
                                       ", this build reads " + std::to_string(kCheckpointVersion));
  try {
    c.config = config_from_json_obj(j.at("config"));
    c.t = j.at("t").get<double>();
    c.metric = metric_from_json_obj(j.at("metric"));
    c.series = series_from_json_obj(j.at("series"));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::BadCheckpoint, std::string("malformed checkpoint: ") + e.what());
  } catch (const Error& e) {
    // a structurally broken metric payload is a checkpoint problem, not a
    // numerical one
    if (e.code() == ErrorCode::BadCheckpoint) throw;
    fail(ErrorCode::BadCheckpoint, std::string("malformed checkpoint: ") + e.what());
  }
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::string& path) {
  write_text_file(path, checkpoint_json(c));
}

Checkpoint load_checkpoint(const std::string& path) {
  return checkpoint_from_json(read_text_file(path));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(ErrorCode::Io, "read error on '" + path + "'");
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path + "'");
  out << text;
  out.flush();
  if (!out) fail(ErrorCode::Io, "write error on '" + path + "'");
}

} // namespace mdf
