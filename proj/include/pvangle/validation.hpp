#pragma once

// The acceptance suite: twelve criteria at desk scale (λ = 1, seed 42 by
// default). Runs are shared between criteria that read the same experiment.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pvangle/brute_force.hpp"
#include "pvangle/commands.hpp"
#include "pvangle/experiments.hpp"
#include "pvangle/oracles.hpp"
#include "pvangle/panel_swap.hpp"

namespace pvangle::cli {

struct ValidationOptions {
  std::uint64_t seed = 42;
  unsigned workers = 1;
  /// Scales every closed-form oracle by 1.05, to show the suite can fail.
  bool inject_wrong_oracle = false;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string summary;
  Json detail;
};

inline constexpr int criterion_count = 12;

class Validator {
 public:
  explicit Validator(ValidationOptions opt) : opt_(opt) {}

  CriterionResult run(int id) {
    CriterionResult r;
    r.id = id;
    try {
      switch (id) {
        case 1: psi_intensity(r); break;
        case 2: crossing_intensity(r, 2); break;
        case 3: angle_marks_2d(r); break;
        case 4: crossing_intensity(r, 3); break;
        case 5: angle_marks_3d(r); break;
        case 6: facet_constants(r); break;
        case 7: psi_conventions(r); break;
        case 8: midpoint_count_3d(r); break;
        case 9: arc_length_3d(r); break;
        case 10: panel_swap(r); break;
        case 11: oracle_consistency(r); break;
        case 12: engineering(r); break;
        default: throw ConfigError("no criterion " + std::to_string(id));
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      r.pass = false;
      r.summary = std::string("error: ") + e.what();
    }
    return r;
  }

 private:
  double oracle_scale() const { return opt_.inject_wrong_oracle ? 1.05 : 1.0; }
  ReplicationConfig reps(std::size_t n) const { return {n, opt_.seed, opt_.workers}; }

  /// |z| < 3 and relative error below `rel` against `oracle` (possibly rescaled).
  Json check(const EstimateReport& rep, double oracle, double rel, bool& pass) const {
    const double z = (rep.mean - oracle) / rep.std_error;
    const double re = std::abs(rep.mean - oracle) / std::abs(oracle);
    const bool ok = std::abs(z) < 3.0 && (rel <= 0.0 || re < rel);
    pass = pass && ok;
    return Json{{"statistic", rep.statistic_id}, {"mean", number(rep.mean)},
                {"stderr", number(rep.std_error)}, {"oracle", number(oracle)},
                {"z_score", number(z)}, {"relative_error", number(re)}, {"pass", ok}};
  }

  static std::string fixed(double v, int digits = 5) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
  }

  const CrossingRun& crossings(int dim) {
    auto& slot = dim == 2 ? cross2_ : cross3_;
    if (!slot) {
      CrossingConfig c;
      c.dim = dim;
      c.segment_length = dim == 2 ? 200.0 : 100.0;
      c.bins = dim == 2 ? 24 : 18;
      c.replication = reps(200);
      slot = run_crossings(c);
    }
    return *slot;
  }

  const TypicalCellRun& cells(int dim) {
    auto& slot = dim == 2 ? cell2_ : cell3_;
    if (!slot) {
      TypicalCellConfig c;
      c.dim = dim;
      c.thetas = dim == 2 ? std::vector<double>{pi / 2, pi} : std::vector<double>{pi / 3, pi / 2, 2 * pi / 3};
      c.replication = reps(400);
      slot = run_typical_cell(c);
    }
    return *slot;
  }

  void psi_intensity(CriterionResult& r) {
    r.title = "psi_theta intensity 2 lambda sin^2(theta/2)";
    PsiConfig c;
    c.thetas = {pi / 3, pi / 2, 2 * pi / 3, pi, 4 * pi / 3};
    c.replication = reps(200);
    const PsiRun run = run_psi(c);
    r.pass = true;
    r.detail = Json::array();
    for (std::size_t j = 0; j < c.thetas.size(); ++j) {
      Json d = check(run.reports[j], oracles::gamma_theta(1.0, c.thetas[j]) * oracle_scale(), 0.03, r.pass);
      d["theta"] = number(c.thetas[j]);
      r.detail.push_back(d);
    }
    r.summary = "5 angles, 200 reps, max |z| " + fixed(max_abs(r.detail, "z_score"), 2);
  }

  void crossing_intensity(CriterionResult& r, int dim) {
    r.title = dim == 2 ? "crossing intensity 2D 4 sqrt(lambda)/pi" : "crossing intensity 3D";
    const CrossingRun& run = crossings(dim);
    r.pass = true;
    const double oracle = oracles::crossing_intensity(1.0, dim) * oracle_scale();
    r.detail = check(run.intensity, oracle, dim == 2 ? 0.02 : 0.03, r.pass);
    r.detail["aborted_replications"] = run.intensity.aborted_replications;
    r.summary = "mean " + fixed(run.intensity.mean) + " vs " + fixed(oracle) + ", z " +
                fixed(r.detail["z_score"].get<double>(), 2);
  }

  void angle_marks_2d(CriterionResult& r) {
    r.title = "angle mark density 2D sin(t/2)/4";
    const CrossingRun& run = crossings(2);
    const auto gof = density_gof(run.marks, oracles::angle_density_2d, 24, 0.0, two_pi);
    const auto sym = mirror_symmetry_test(gof.observed_counts);
    r.pass = run.marks.size() >= 20000 && gof.p_value > 0.01 && sym.p_value > 0.01;
    r.detail = Json{{"marks", run.marks.size()}, {"gof", to_json(gof)}, {"mirror_symmetry", to_json(sym)}};
    r.summary = std::to_string(run.marks.size()) + " marks, p " + fixed(gof.p_value, 4) +
                ", symmetry p " + fixed(sym.p_value, 4);
  }

  void angle_marks_3d(CriterionResult& r) {
    r.title = "folded angle mark density 3D";
    const CrossingRun& run = crossings(3);
    const auto gof = density_gof(run.marks, oracles::folded_density_3d, 18, 0.0, pi);
    const double n = static_cast<double>(run.marks.size());
    const double last_freq = gof.observed_counts.back() / n;
    const double last_mass = gof.expected_counts.back() / n;
    r.pass = run.marks.size() >= 20000 && gof.p_value > 0.01 && last_freq < 2.0 * last_mass;
    r.detail = Json{{"marks", run.marks.size()}, {"gof", to_json(gof)},
                    {"last_bin_frequency", number(last_freq)}, {"last_bin_mass", number(last_mass)}};
    r.summary = std::to_string(run.marks.size()) + " marks, p " + fixed(gof.p_value, 4) +
                ", last bin " + fixed(last_freq, 5) + " vs mass " + fixed(last_mass, 5);
  }

  void facet_constants(CriterionResult& r) {
    r.title = "typical cell facets 6 = 4 + 2";
    const TypicalCellRun& run = cells(2);
    const auto k = oracles::constants();
    r.pass = true;
    r.detail = Json::array();
    r.detail.push_back(check(run.total_facets, k.mean_facets_2d * oracle_scale(), 0.0, r.pass));
    r.detail.push_back(check(run.midpoint_facets, k.midpoint_facets_2d * oracle_scale(), 0.0, r.pass));
    r.detail.push_back(check(run.non_midpoint_facets, k.non_midpoint_facets_2d * oracle_scale(), 0.0, r.pass));
    r.summary = "means " + fixed(run.total_facets.mean, 3) + ", " + fixed(run.midpoint_facets.mean, 3) +
                ", " + fixed(run.non_midpoint_facets.mean, 3);
  }

  void psi_conventions(CriterionResult& r) {
    r.title = "psi count conventions vs 2 sin^2 and 4 sin^2";
    const TypicalCellRun& run = cells(2);
    // pairing A: ordered ~ 2 sin², closed ~ 4 sin²; pairing B swaps them
    bool a_ok = true, b_ok = true;
    Json rows = Json::array();
    const std::vector<double> thetas{pi / 2, pi};
    for (std::size_t j = 0; j < thetas.size(); ++j) {
      const double s2 = std::pow(std::sin(0.5 * thetas[j]), 2);
      auto z = [](const EstimateReport& e, double o) { return (e.mean - o) / e.std_error; };
      const double za1 = z(run.psi_ordered[j], 2 * s2), za2 = z(run.psi_closed[j], 4 * s2);
      const double zb1 = z(run.psi_ordered[j], 4 * s2), zb2 = z(run.psi_closed[j], 2 * s2);
      a_ok = a_ok && std::abs(za1) < 3 && std::abs(za2) < 3;
      b_ok = b_ok && std::abs(zb1) < 3 && std::abs(zb2) < 3;
      rows.push_back({{"theta", number(thetas[j])},
                      {"psi_count_ordered", number(run.psi_ordered[j].mean)},
                      {"psi_count_closed", number(run.psi_closed[j].mean)},
                      {"z_ordered_vs_2sin2", number(za1)}, {"z_closed_vs_4sin2", number(za2)},
                      {"z_ordered_vs_4sin2", number(zb1)}, {"z_closed_vs_2sin2", number(zb2)}});
    }
    r.pass = a_ok != b_ok;
    std::string finding = a_ok && !b_ok   ? "psi_count_ordered matches 2 sin^2(theta/2); psi_count_closed matches 4 sin^2(theta/2)"
                          : b_ok && !a_ok ? "psi_count_closed matches 2 sin^2(theta/2); psi_count_ordered matches 4 sin^2(theta/2)"
                                          : "no unique pairing";
    r.detail = Json{{"rows", rows}, {"finding", finding}};
    r.summary = finding;
  }

  void midpoint_count_3d(CriterionResult& r) {
    r.title = "3D midpoint-containing facets N_pi = 8";
    const TypicalCellRun& run = cells(3);
    r.pass = true;
    r.detail = check(run.midpoint_facets, oracles::constants().n_pi * oracle_scale(), 0.05, r.pass);
    r.summary = "mean " + fixed(run.midpoint_facets.mean, 4) + ", z " +
                fixed(r.detail["z_score"].get<double>(), 2);
  }

  void arc_length_3d(CriterionResult& r) {
    r.title = "3D arc length shape and factor";
    const TypicalCellRun& run = cells(3);
    const std::vector<double> thetas{pi / 3, pi / 2, 2 * pi / 3};
    auto shape = [](double t) { return std::abs(std::cos(0.5 * t)) * std::pow(std::sin(0.5 * t), 3); };
    bool shape_ok = true;
    Json ratios = Json::array();
    for (std::size_t j = 1; j < thetas.size(); ++j) {
      const double observed = run.arc_length[j].mean / run.arc_length[0].mean;
      const double expected = shape(thetas[j]) / shape(thetas[0]);
      const bool ok = std::abs(observed / expected - 1.0) < 0.05;
      shape_ok = shape_ok && ok;
      ratios.push_back({{"theta", number(thetas[j])}, {"observed_ratio", number(observed)},
                        {"expected_ratio", number(expected)}, {"pass", ok}});
    }
    std::vector<double> consistent;
    Json fits = Json::array();
    for (double c : {0.5, 1.0, 2.0}) {
      bool ok = true;
      Json z = Json::array();
      for (std::size_t j = 0; j < thetas.size(); ++j) {
        const double oracle = c * oracles::arc_length_L(1.0, thetas[j]) * oracle_scale();
        const double zj = (run.arc_length[j].mean - oracle) / run.arc_length[j].std_error;
        z.push_back(number(zj));
        ok = ok && std::abs(zj) < 3.0;
      }
      if (ok) consistent.push_back(c);
      fits.push_back({{"factor", c}, {"z_scores", z}, {"consistent", ok}});
    }
    r.pass = shape_ok && consistent.size() == 1;
    r.detail = Json{{"ratios", ratios}, {"factor_fits", fits},
                    {"factor", consistent.size() == 1 ? Json(consistent[0]) : Json(nullptr)}};
    r.summary = std::string("shape ") + (shape_ok ? "ok" : "off") + ", factor " +
                (consistent.size() == 1 ? fixed(consistent[0], 1) : std::string("unresolved"));
  }

  void panel_swap(CriterionResult& r) {
    r.title = "panel swap probability (2^m/pi) sin(pi/2^m)";
    PanelSimConfig c;
    c.replication = reps(1000);
    const PanelSwapRun run = estimate_swap_probabilities(c, {1, 2, 3, 4});
    r.pass = true;
    r.detail = Json::array();
    std::string s;
    for (std::size_t k = 0; k < run.ms.size(); ++k) {
      const double oracle = oracles::panel_swap_probability(run.ms[k]) * oracle_scale();
      const auto& rep = run.reports[k];
      long handovers = 0;
      for (const auto& row : run.per_replication)
        if (!row.empty()) handovers += row[k].handovers;
      const double z = (rep.mean - oracle) / rep.std_error;
      const bool ok = std::abs(z) < 3.0 && std::abs(rep.mean - oracle) < 0.01 && handovers >= 20000;
      r.pass = r.pass && ok;
      r.detail.push_back({{"m", run.ms[k]}, {"handovers", handovers}, {"mean", number(rep.mean)},
                          {"stderr", number(rep.std_error)}, {"oracle", number(oracle)},
                          {"z_score", number(z)}, {"pass", ok}});
      s += (k ? ", " : "") + fixed(rep.mean, 4);
    }
    r.summary = "m=1..4: " + s;
  }

  void oracle_consistency(CriterionResult& r) {
    r.title = "oracle self-consistency";
    using namespace oracles;
    r.pass = true;
    Json rows = Json::array();
    auto item = [&](const std::string& name, double got, double want, double tol) {
      const bool ok = std::abs(got - want) <= tol;
      r.pass = r.pass && ok;
      rows.push_back({{"check", name}, {"value", number(got)}, {"expected", number(want)},
                      {"tolerance", tol}, {"pass", ok}});
    };
    const double sc = oracle_scale();
    item("angle_density_2d normalization", integrate(angle_density_2d, 0, two_pi), 1.0 * sc, 1e-10);
    item("folded_density_2d normalization", integrate(folded_density_2d, 0, pi), 1.0 * sc, 1e-10);
    item("angle_density_3d normalization",
         integrate(angle_density_3d, 0, pi) + integrate(angle_density_3d, pi, two_pi), 1.0 * sc, 1e-10);
    item("folded_density_3d normalization", integrate(folded_density_3d, 0, pi), 1.0 * sc, 1e-10);
    for (double t : {0.3, 1.0, 2.0, 3.0}) {
      item("angle_ccdf_2d at " + fixed(t, 1), integrate(angle_density_2d, t, pi), angle_ccdf_2d(t) * sc, 1e-8);
      item("angle_ccdf_3d at " + fixed(t, 1), integrate(angle_density_3d, t, pi), angle_ccdf_3d(t) * sc, 1e-8);
    }
    for (int m = 1; m <= 6; ++m)
      item("panel_swap_integral m=" + std::to_string(m), panel_swap_integral(m),
           panel_swap_probability(m) * sc, 1e-8);
    r.detail = rows;
    std::size_t failed = 0;
    for (const auto& row : rows) failed += !row["pass"].get<bool>();
    r.summary = std::to_string(rows.size() - failed) + "/" + std::to_string(rows.size()) + " identities hold";
  }

  void engineering(CriterionResult& r) {
    r.title = "brute-force equivalence and worker determinism";
    Json rows = Json::array();
    r.pass = true;
    auto item = [&](const std::string& name, bool ok, const std::string& note = {}) {
      r.pass = r.pass && ok;
      rows.push_back({{"check", name}, {"pass", ok}, {"note", note}});
    };

    for (std::uint64_t trial = 0; trial < 3; ++trial) {
      RandomStream s = derive_stream(opt_.seed + 1000, trial);
      const auto s2 = sample_poisson(1.0, Window<2>::centered(6.0), s);
      const auto s3 = sample_poisson(1.0, Window<3>::centered(4.0), s);
      item("index queries 2D trial " + std::to_string(trial), index_matches(s2, s));
      item("index queries 3D trial " + std::to_string(trial), index_matches(s3, s));

      const GridIndex<2> i2(s2);
      for (double t : {pi / 3, pi, 5 * pi / 3}) {
        const auto inner = s2.window.shrunk(2.0);
        const auto fast = extract_psi_theta(s2, i2, OrientedAngle(t), inner);
        const auto slow = brute::psi_locations(s2, OrientedAngle(t), inner);
        bool same = fast.points.size() == slow.size();
        for (std::size_t k = 0; same && k < slow.size(); ++k)
          same = distance(fast.points[k].location, slow[k]) < 1e-9;
        item("psi extraction trial " + std::to_string(trial) + " theta " + fixed(t, 3), same,
             std::to_string(fast.points.size()) + " vs " + std::to_string(slow.size()));
      }
      item("crossings 2D trial " + std::to_string(trial), crossings_match(s2));
      item("crossings 3D trial " + std::to_string(trial), crossings_match(s3));

      const auto p2 = palm_augment(sample_poisson(1.0, Window<2>::centered(5.0), s));
      const auto st2 = typical_cell_stats(p2, GridIndex<2>(p2), std::span<const double>(std::vector<double>{pi}));
      const auto nb = brute::voronoi_neighbour_count_2d(p2.points, 0, 5.0);
      item("typical cell facets 2D trial " + std::to_string(trial),
           st2.per_theta[0].total_facets == static_cast<long>(nb),
           std::to_string(st2.per_theta[0].total_facets) + " vs " + std::to_string(nb));

      const auto p3 = palm_augment(sample_poisson(1.0, Window<3>::centered(4.0), s));
      const auto st3 = typical_cell_stats(p3, GridIndex<3>(p3), std::span<const double>(std::vector<double>{pi}));
      long mids = 0;
      for (std::size_t k = 1; k < p3.points.size(); ++k) {
        const Point3 c = midpoint(p3.points[0], p3.points[k]);
        const std::size_t ex[2] = {0, k};
        if (p3.window.contains(c) && brute::ball_empty(p3.points, c, 0.5 * norm(p3.points[k]), ex)) ++mids;
      }
      item("midpoint facets 3D trial " + std::to_string(trial), st3.per_theta[0].xi_count == mids,
           std::to_string(st3.per_theta[0].xi_count) + " vs " + std::to_string(mids));
    }

    for (const char* cmd : {"psi", "crossings", "crossings3", "typical-cell", "typical-cell3", "panel-swap"}) {
      const Files a = small_run(cmd, 1), b = small_run(cmd, 4);
      item(std::string("byte-identical outputs, workers 1 vs 4: ") + cmd, a == b);
    }
    r.detail = rows;
    std::size_t failed = 0;
    for (const auto& row : rows) failed += !row["pass"].get<bool>();
    r.summary = std::to_string(rows.size() - failed) + "/" + std::to_string(rows.size()) + " checks pass";
  }

  template <std::size_t D>
  static bool index_matches(const PointSample<D>& sample, RandomStream& s) {
    const GridIndex<D> index(sample);
    for (int q = 0; q < 200; ++q) {
      Point<D> p;
      for (std::size_t i = 0; i < D; ++i)
        p[i] = s.uniform(sample.window.lo[i] - 1.0, sample.window.hi[i] + 1.0);
      const auto fast = index.nearest(p);
      if (fast.ties != brute::nearest_ties(sample.points, p)) return false;
      const double rad = 3.0 * s.uniform();
      if (index.within(p, rad) != brute::within(sample.points, p, rad)) return false;
      if (index.ball_empty(p, rad) != brute::ball_empty(sample.points, p, rad)) return false;
    }
    return true;
  }

  template <std::size_t D>
  static bool crossings_match(const PointSample<D>& sample) {
    const double lo = sample.window.lo[0] + 1.0, hi = sample.window.hi[0] - 1.0;
    const auto fast = scan_crossings(sample, GridIndex<D>(sample), lo, hi);
    const auto slow = brute::crossing_positions(sample, lo, hi);
    if (fast.degenerate || fast.crossings.size() != slow.size()) return false;
    for (std::size_t k = 0; k < slow.size(); ++k)
      if (std::abs(fast.crossings[k].x - slow[k]) > 1e-9) return false;
    return true;
  }

  Files small_run(const std::string& which, unsigned workers) const {
    RunConfig c;
    c.seed = opt_.seed;
    c.workers = workers;
    c.reps = 8;
    if (which == "psi") {
      c.window = 24.0;
      c.thetas = {pi / 2, pi};
      return cmd_psi(c);
    }
    if (which == "crossings" || which == "crossings3") {
      c.dim = which == "crossings" ? 2 : 3;
      c.segment_length = 30.0;
      c.bins = 4;
      return cmd_crossings(c);
    }
    if (which == "typical-cell" || which == "typical-cell3") {
      c.dim = which == "typical-cell" ? 2 : 3;
      return cmd_typical_cell(c);
    }
    c.segment_length = 40.0;
    return cmd_panel_swap(c);
  }

  static double max_abs(const Json& rows, const char* key) {
    double m = 0.0;
    for (const auto& row : rows)
      if (row[key].is_number()) m = std::max(m, std::abs(row[key].get<double>()));
    return m;
  }

  ValidationOptions opt_;
  std::optional<CrossingRun> cross2_, cross3_;
  std::optional<TypicalCellRun> cell2_, cell3_;
};

struct ValidationOutcome {
  std::vector<CriterionResult> results;
  bool all_pass = true;
  Files files;
};

inline std::string criterion_line(const CriterionResult& r) {
  char head[32];
  std::snprintf(head, sizeof head, "criterion %2d: %s", r.id, r.pass ? "PASS" : "FAIL");
  return std::string(head) + "  " + r.title + "  [" + r.summary + "]";
}

/// Runs the selected criteria (all when empty); reports each through `progress`.
inline ValidationOutcome cmd_validate(const RunConfig& cfg,
                                      const std::function<void(const CriterionResult&)>& progress = {}) {
  std::vector<int> ids = cfg.criteria;
  if (ids.empty())
    for (int i = 1; i <= criterion_count; ++i) ids.push_back(i);
  for (int id : ids)
    if (id < 1 || id > criterion_count) throw ConfigError("no criterion " + std::to_string(id));

  Validator v({cfg.seed, cfg.workers ? cfg.workers : default_workers(), cfg.inject_wrong_oracle});
  ValidationOutcome out;
  Json report;
  report["toolkit"] = toolkit_name;
  report["version"] = toolkit_version;
  report["seed"] = cfg.seed;
  report["config"] = {{"command", "validate"}, {"lambda", 1.0}, {"criteria", ids},
                      {"inject_wrong_oracle", cfg.inject_wrong_oracle}};
  report["criteria"] = Json::array();
  for (int id : ids) {
    CriterionResult r = v.run(id);
    out.all_pass = out.all_pass && r.pass;
    if (progress) progress(r);
    report["criteria"].push_back({{"id", r.id}, {"title", r.title}, {"pass", r.pass},
                                  {"summary", r.summary}, {"detail", r.detail}});
    out.results.push_back(std::move(r));
  }
  report["all_pass"] = out.all_pass;
  out.files["validation_report.json"] = dump(report);
  return out;
}

}  // namespace pvangle::cli
