#pragma once

// Command implementations behind the pvangle tool. Each command turns a
// RunConfig into a set of named output files; nothing here touches the
// filesystem except read_config_file and write_files.

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pvangle/estimators.hpp"
#include "pvangle/experiments.hpp"
#include "pvangle/panel_swap.hpp"

namespace pvangle::cli {

inline constexpr const char* toolkit_name = "pvangle";
inline constexpr const char* toolkit_version = "0.1.0";

/// Usage or configuration problem; maps to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum ExitCode : int { exit_ok = 0, exit_validation_failed = 1, exit_config = 2, exit_degenerate = 3 };

using Files = std::map<std::string, std::string>;
using Json = nlohmann::ordered_json;

struct RunConfig {
  std::string command;
  int dim = 2;
  double lambda = 1.0;
  std::vector<double> thetas;      // empty: command default
  double window = 0.0;             // side length; 0: command default
  double margin_factor = 0.0;      // 0: 4 for psi, 5 otherwise
  double segment_length = 0.0;     // 0: 200 in the plane, 100 in space
  std::size_t reps = 0;            // 0: command default
  std::size_t bins = 0;            // 0: 24 in the plane, 18 in space
  std::uint64_t seed = 42;
  std::vector<int> panels;         // panel exponents m; empty: 1..4
  std::string out = ".";
  unsigned workers = 0;            // 0: available cores
  bool json = false;
  // validate only
  std::vector<int> criteria;       // empty: all
  bool inject_wrong_oracle = false;
};

inline std::string trim(std::string s) {
  auto sp = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && sp(s.back())) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && sp(s[i])) ++i;
  return s.substr(i);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_real(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a number: '" + text + "'");
  }
  if (used != t.size() || !std::isfinite(v)) throw ConfigError(key + ": not a number: '" + text + "'");
  return v;
}

inline long long parse_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(t, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not an integer: '" + text + "'");
  }
  if (used != t.size()) throw ConfigError(key + ": not an integer: '" + text + "'");
  return v;
}

/// Angle in radians: a plain number, or a multiple of pi such as "pi",
/// "pi/3", "2pi/3", "2*pi/3", "0.5pi".
inline double parse_theta(const std::string& text) {
  std::string t;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) t += static_cast<char>(std::tolower(c));
  const auto at = t.find("pi");
  if (at == std::string::npos) return parse_real("theta", t);

  std::string coef = t.substr(0, at);
  if (!coef.empty() && coef.back() == '*') coef.pop_back();
  const double a = coef.empty() ? 1.0 : parse_real("theta", coef);
  std::string rest = t.substr(at + 2);
  double b = 1.0;
  if (!rest.empty()) {
    if (rest.front() != '/') throw ConfigError("theta: cannot parse '" + text + "'");
    b = parse_real("theta", rest.substr(1));
    if (b == 0.0) throw ConfigError("theta: division by zero in '" + text + "'");
  }
  return a * pi / b;
}

/// Applies one key=value setting; list-valued keys append.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "dim") {
    cfg.dim = static_cast<int>(parse_integer(key, value));
  } else if (key == "lambda") {
    cfg.lambda = parse_real(key, value);
  } else if (key == "theta") {
    for (const auto& item : split_list(value)) cfg.thetas.push_back(parse_theta(item));
  } else if (key == "window") {
    cfg.window = parse_real(key, value);
  } else if (key == "margin-factor") {
    cfg.margin_factor = parse_real(key, value);
  } else if (key == "segment-length") {
    cfg.segment_length = parse_real(key, value);
  } else if (key == "reps") {
    const auto v = parse_integer(key, value);
    if (v < 2) throw ConfigError("reps: at least two replications are required");
    cfg.reps = static_cast<std::size_t>(v);
  } else if (key == "bins") {
    const auto v = parse_integer(key, value);
    if (v < 2) throw ConfigError("bins: at least two bins are required");
    cfg.bins = static_cast<std::size_t>(v);
  } else if (key == "seed") {
    const auto v = parse_integer(key, value);
    if (v < 0) throw ConfigError("seed: must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(v);
  } else if (key == "panels") {
    for (const auto& item : split_list(value)) cfg.panels.push_back(static_cast<int>(parse_integer(key, item)));
  } else if (key == "out") {
    cfg.out = trim(value);
  } else if (key == "workers") {
    const auto v = parse_integer(key, value);
    if (v < 0) throw ConfigError("workers: must be non-negative");
    cfg.workers = static_cast<unsigned>(v);
  } else {
    throw ConfigError("unknown setting '" + key + "'");
  }
}

/// Flat key=value file; '#' starts a comment.
inline std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    out.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return out;
}

inline std::string read_config_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void validate(const RunConfig& cfg) {
  if (cfg.dim != 2 && cfg.dim != 3) throw ConfigError("dim must be 2 or 3");
  if (!(cfg.lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (cfg.window < 0.0) throw ConfigError("window must be positive");
  if (cfg.margin_factor != 0.0 && cfg.margin_factor < 3.0)
    throw ConfigError("margin-factor must be at least 3");
  if (cfg.segment_length < 0.0) throw ConfigError("segment-length must be positive");
  for (double t : cfg.thetas)
    if (!(t > 0.0 && t < two_pi)) throw ConfigError("theta must lie in (0, 2pi)");
  for (int m : cfg.panels)
    if (m < 1 || m > 30) throw ConfigError("panels: m must be in [1, 30]");
}

// ---- serialization ----

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Csv {
 public:
  explicit Csv(std::initializer_list<const char*> header) {
    bool first = true;
    for (const char* h : header) {
      if (!first) out_ += ',';
      out_ += h;
      first = false;
    }
    out_ += '\n';
  }
  Csv& cell(const std::string& s) {
    if (!row_start_) out_ += ',';
    out_ += s;
    row_start_ = false;
    return *this;
  }
  Csv& cell(double v) { return cell(fmt(v)); }
  Csv& cell(long long v) { return cell(std::to_string(v)); }
  Csv& cell(std::size_t v) { return cell(std::to_string(v)); }
  Csv& cell(long v) { return cell(static_cast<long long>(v)); }
  void end_row() {
    out_ += '\n';
    row_start_ = true;
  }
  const std::string& str() const { return out_; }

 private:
  std::string out_;
  bool row_start_ = true;
};

inline Json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

inline Json to_json(const oracles::OracleValue& o) {
  Json inputs = Json::object();
  for (const auto& [k, v] : o.inputs) inputs[k] = number(v);
  return Json{{"value", number(o.value)}, {"formula_id", o.formula_id}, {"inputs", inputs}};
}

inline Json to_json(const EstimateReport& r) {
  Json j;
  j["statistic_id"] = r.statistic_id;
  j["n_replications"] = r.n_replications;
  j["mean"] = number(r.mean);
  j["stderr"] = number(r.std_error);
  j["ci95"] = {number(r.ci95.lo), number(r.ci95.hi)};
  j["oracle"] = r.oracle ? to_json(*r.oracle) : Json(nullptr);
  j["z_score"] = r.z_score ? number(*r.z_score) : Json(nullptr);
  j["aborted_replications"] = r.aborted_replications;
  j["contamination_flags"] = r.contamination_flags;
  return j;
}

inline Json to_json(const DensityReport& d) {
  Json j;
  j["bin_edges"] = Json::array();
  for (double e : d.bin_edges) j["bin_edges"].push_back(number(e));
  j["observed_counts"] = d.observed_counts;
  j["expected_counts"] = Json::array();
  for (double e : d.expected_counts) j["expected_counts"].push_back(number(e));
  j["chi_square"] = number(d.chi_square);
  j["dof"] = d.dof;
  j["p_value"] = number(d.p_value);
  return j;
}

inline Json to_json(const SymmetryReport& s) {
  return Json{{"chi_square", number(s.chi_square)}, {"dof", s.dof}, {"p_value", number(s.p_value)}};
}

/// Settings that shape results; the worker count and output path are left
/// out so outputs do not depend on them.
inline Json config_echo(const RunConfig& cfg) {
  Json j;
  j["command"] = cfg.command;
  j["dim"] = cfg.dim;
  j["lambda"] = number(cfg.lambda);
  j["theta"] = Json::array();
  for (double t : cfg.thetas) j["theta"].push_back(number(t));
  j["window"] = number(cfg.window);
  j["margin_factor"] = number(cfg.margin_factor);
  j["segment_length"] = number(cfg.segment_length);
  j["reps"] = cfg.reps;
  j["bins"] = cfg.bins;
  j["seed"] = cfg.seed;
  j["panels"] = cfg.panels;
  return j;
}

inline Json envelope(const RunConfig& cfg) {
  Json j;
  j["toolkit"] = toolkit_name;
  j["version"] = toolkit_version;
  j["seed"] = cfg.seed;
  j["config"] = config_echo(cfg);
  return j;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---- commands ----

inline ReplicationConfig replication_of(const RunConfig& cfg, std::size_t default_reps) {
  return {cfg.reps ? cfg.reps : default_reps, cfg.seed, cfg.workers ? cfg.workers : default_workers()};
}

/// Fills the command defaults into cfg so that the echo shows what ran.
inline RunConfig resolved(RunConfig cfg) {
  validate(cfg);
  const bool plane = cfg.dim == 2;
  if (cfg.command == "psi") {
    if (cfg.thetas.empty()) cfg.thetas = {pi};
    if (!cfg.window) cfg.window = 40.0 / std::sqrt(cfg.lambda);
    if (!cfg.margin_factor) cfg.margin_factor = 4.0;
    if (!cfg.reps) cfg.reps = 200;
  } else if (cfg.command == "crossings") {
    if (!cfg.segment_length) cfg.segment_length = plane ? 200.0 : 100.0;
    if (!cfg.margin_factor) cfg.margin_factor = 5.0;
    if (!cfg.bins) cfg.bins = plane ? 24 : 18;
    if (!cfg.reps) cfg.reps = 200;
  } else if (cfg.command == "typical-cell") {
    if (cfg.thetas.empty()) cfg.thetas = plane ? std::vector<double>{pi / 2, pi}
                                               : std::vector<double>{pi / 3, pi / 2, 2 * pi / 3};
    if (!cfg.window) cfg.window = plane ? 16.0 / std::sqrt(cfg.lambda) : 12.0 / std::cbrt(cfg.lambda);
    if (!cfg.reps) cfg.reps = 400;
  } else if (cfg.command == "panel-swap") {
    if (cfg.panels.empty()) cfg.panels = {1, 2, 3, 4};
    if (!cfg.segment_length) cfg.segment_length = 200.0;
    if (!cfg.margin_factor) cfg.margin_factor = 5.0;
    if (!cfg.reps) cfg.reps = 1000;
  }
  return cfg;
}

inline Files cmd_psi(RunConfig cfg) {
  cfg.command = "psi";
  cfg = resolved(cfg);
  if (cfg.dim != 2) throw ConfigError("psi requires dim 2");
  PsiConfig pc;
  pc.lambda = cfg.lambda;
  pc.window_side = cfg.window;
  pc.margin_factor = cfg.margin_factor;
  pc.thetas = cfg.thetas;
  pc.replication = replication_of(cfg, 200);
  PsiRun run;
  try {
    run = run_psi(pc);
  } catch (const DegenerateConfiguration&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  Csv csv({"rep", "zx", "zy", "theta", "ball_radius"});
  for (std::size_t rep = 0; rep < run.records.size(); ++rep)
    for (std::size_t j = 0; j < cfg.thetas.size(); ++j)
      for (const auto& p : run.records[rep][j].points) {
        csv.cell(rep).cell(p.location[0]).cell(p.location[1]).cell(cfg.thetas[j]).cell(p.ball_radius);
        csv.end_row();
      }

  Json j = envelope(cfg);
  j["reports"] = Json::array();
  for (const auto& r : run.reports) j["reports"].push_back(to_json(r));
  return {{"psi_points.csv", csv.str()}, {"psi_report.json", dump(j)}};
}

inline Files cmd_crossings(RunConfig cfg) {
  cfg.command = "crossings";
  cfg = resolved(cfg);
  CrossingConfig cc;
  cc.dim = cfg.dim;
  cc.lambda = cfg.lambda;
  cc.segment_length = cfg.segment_length;
  cc.margin_factor = cfg.margin_factor;
  cc.bins = cfg.bins;
  cc.replication = replication_of(cfg, 200);
  CrossingRun run;
  try {
    run = run_crossings(cc);
  } catch (const DegenerateConfiguration&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  Csv csv({"rep", "x", "theta_oriented", "beta", "r", "R"});
  for (std::size_t rep = 0; rep < run.records.size(); ++rep)
    for (const auto& c : run.records[rep].crossings) {
      csv.cell(rep).cell(c.x).cell(c.theta ? fmt(*c.theta) : std::string()).cell(c.beta).cell(c.r).cell(c.R);
      csv.end_row();
    }

  Json intensity = envelope(cfg);
  intensity["report"] = to_json(run.intensity);
  Json gof = envelope(cfg);
  gof["density"] = cfg.dim == 2 ? "angle_density_2d" : "folded_density_3d";
  gof["marks"] = run.marks.size();
  if (run.gof) {
    gof["report"] = to_json(*run.gof);
  } else {
    gof["report"] = nullptr;
    gof["note"] = "fewer than 20 marks per bin; goodness of fit skipped";
  }
  if (run.symmetry) gof["mirror_symmetry"] = to_json(*run.symmetry);
  return {{"crossings.csv", csv.str()},
          {"intensity_report.json", dump(intensity)},
          {"angle_gof.json", dump(gof)}};
}

inline Files cmd_typical_cell(RunConfig cfg) {
  cfg.command = "typical-cell";
  cfg = resolved(cfg);
  TypicalCellConfig tc;
  tc.dim = cfg.dim;
  tc.lambda = cfg.lambda;
  tc.window_side = cfg.window;
  tc.thetas = cfg.thetas;
  tc.replication = replication_of(cfg, 400);
  TypicalCellRun run;
  try {
    run = run_typical_cell(tc);
  } catch (const DegenerateConfiguration&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  Csv csv({"rep", "theta", "psi_count_ordered", "psi_count_closed", "midpoint_facets",
           "total_facets", "arc_length_total", "xi_count"});
  for (std::size_t rep = 0; rep < run.records.size(); ++rep)
    for (std::size_t j = 0; j < cfg.thetas.size(); ++j) {
      const auto& s = run.records[rep].per_theta[j];
      csv.cell(rep).cell(cfg.thetas[j]).cell(s.psi_count_ordered).cell(s.psi_count_closed)
          .cell(s.midpoint_facets).cell(s.total_facets).cell(s.arc_length_total).cell(s.xi_count);
      csv.end_row();
    }

  Json j = envelope(cfg);
  j["total_facets"] = to_json(run.total_facets);
  j[cfg.dim == 2 ? "midpoint_facets" : "xi_count"] = to_json(run.midpoint_facets);
  j["non_midpoint_facets"] = to_json(run.non_midpoint_facets);
  if (cfg.dim == 2) {
    j["psi_count_ordered"] = Json::array();
    j["psi_count_closed"] = Json::array();
    for (const auto& r : run.psi_ordered) j["psi_count_ordered"].push_back(to_json(r));
    for (const auto& r : run.psi_closed) j["psi_count_closed"].push_back(to_json(r));
  } else {
    j["arc_length"] = Json::array();
    for (const auto& r : run.arc_length) j["arc_length"].push_back(to_json(r));
    j["arc_factor_fits"] = Json::array();
    for (const auto& f : run.arc_factor_fits) {
      Json z = Json::array();
      for (double v : f.z) z.push_back(number(v));
      j["arc_factor_fits"].push_back({{"factor", f.factor}, {"z_scores", z}, {"consistent", f.consistent}});
    }
  }
  return {{"typical_cell.csv", csv.str()}, {"typical_cell_report.json", dump(j)}};
}

inline Files cmd_panel_swap(RunConfig cfg) {
  cfg.command = "panel-swap";
  cfg = resolved(cfg);
  if (cfg.dim != 2) throw ConfigError("panel-swap requires dim 2");
  PanelSimConfig ps;
  ps.lambda = cfg.lambda;
  ps.segment_length = cfg.segment_length;
  ps.margin_factor = cfg.margin_factor;
  ps.replication = replication_of(cfg, 1000);
  PanelSwapRun run;
  try {
    run = estimate_swap_probabilities(ps, cfg.panels);
  } catch (const DegenerateConfiguration&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  Csv csv({"rep", "chi", "m", "handovers", "swaps"});
  for (std::size_t rep = 0; rep < run.per_replication.size(); ++rep)
    for (std::size_t k = 0; k < run.per_replication[rep].size(); ++k) {
      const auto& s = run.per_replication[rep][k];
      csv.cell(rep).cell(run.chis[rep]).cell(static_cast<long long>(run.ms[k])).cell(s.handovers).cell(s.swaps);
      csv.end_row();
    }

  Json j = envelope(cfg);
  j["reports"] = Json::array();
  for (std::size_t k = 0; k < run.ms.size(); ++k) {
    Json r = to_json(run.reports[k]);
    r["m"] = run.ms[k];
    long handovers = 0, swaps = 0;
    for (const auto& row : run.per_replication)
      if (!row.empty()) {
        handovers += row[k].handovers;
        swaps += row[k].swaps;
      }
    r["handovers"] = handovers;
    r["swaps"] = swaps;
    j["reports"].push_back(r);
  }
  return {{"panel_swap.csv", csv.str()}, {"panel_swap_report.json", dump(j)}};
}

inline void write_files(const std::string& dir, const Files& files) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "'");
  for (const auto& [name, content] : files) {
    std::ofstream f(fs::path(dir) / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + (fs::path(dir) / name).string() + "'");
    f << content;
  }
}

}  // namespace pvangle::cli
