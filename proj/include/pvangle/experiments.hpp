#pragma once

// Replicated experiments: each returns per-replication records (for CSV
// output) together with the aggregated reports.

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pvangle/estimators.hpp"
#include "pvangle/geometry.hpp"
#include "pvangle/oracles.hpp"
#include "pvangle/processes.hpp"
#include "pvangle/sampling.hpp"
#include "pvangle/spatial_index.hpp"

namespace pvangle {

// ---- Ψ_θ intensity ----

struct PsiConfig {
  double lambda = 1.0;
  double window_side = 40.0;
  double margin_factor = 4.0;
  std::vector<double> thetas{pi};
  ReplicationConfig replication{200, 42, 1};
};

/// 4 λ^{-1/2} / sin(θ/2) with the given factor in place of 4.
inline double psi_margin(double lambda, double theta, double factor) {
  return factor / std::sqrt(lambda) / std::sin(0.5 * OrientedAngle(theta).radians());
}

struct PsiRepRecord {
  std::vector<PsiPoint> points;
  double inner_area = 0.0;
  bool contaminated = false;
};

struct PsiRun {
  /// records[rep][theta]
  std::vector<std::vector<PsiRepRecord>> records;
  std::vector<EstimateReport> reports;  // one per θ
};

inline PsiRun run_psi(const PsiConfig& cfg) {
  if (cfg.thetas.empty()) throw Error("no theta given");
  oracles::require_positive(cfg.lambda);
  const Window<2> window = Window<2>::centered(0.5 * cfg.window_side);
  for (double t : cfg.thetas) {
    if (!(2.0 * psi_margin(cfg.lambda, t, cfg.margin_factor) < cfg.window_side))
      throw Error("window too small for the guard margin");
  }

  PsiRun run;
  run.records = parallel_replications(cfg.replication, [&](RandomStream& s, std::size_t) {
    const PointSample<2> sample = sample_poisson(cfg.lambda, window, s);
    const GridIndex<2> index(sample);
    std::vector<PsiRepRecord> out;
    for (double t : cfg.thetas) {
      double margin = psi_margin(cfg.lambda, t, cfg.margin_factor);
      PsiRepRecord rec;
      for (int attempt = 0; attempt <= max_margin_retries; ++attempt) {
        if (!(2.0 * margin < cfg.window_side)) break;
        const Window<2> inner = window.shrunk(margin);
        PsiResult r = extract_psi_theta(sample, index, OrientedAngle(t), inner);
        rec = {std::move(r.points), inner.volume(), r.contaminated};
        if (!rec.contaminated) break;
        margin *= 1.5;
      }
      out.push_back(std::move(rec));
    }
    return out;
  });

  for (std::size_t j = 0; j < cfg.thetas.size(); ++j) {
    std::vector<double> values;
    std::size_t contaminated = 0;
    for (const auto& rep : run.records) {
      values.push_back(static_cast<double>(rep[j].points.size()) / rep[j].inner_area);
      contaminated += rep[j].contaminated;
    }
    const double t = cfg.thetas[j];
    run.reports.push_back(summarize(
        "psi_intensity", values,
        oracles::make("gamma_theta", oracles::gamma_theta(cfg.lambda, t),
                      {{"lambda", cfg.lambda}, {"theta", t}}),
        0, contaminated));
  }
  return run;
}

// ---- crossings of a line ----

struct CrossingConfig {
  int dim = 2;
  double lambda = 1.0;
  double segment_length = 200.0;
  double margin_factor = 5.0;
  std::size_t bins = 24;
  ReplicationConfig replication{200, 42, 1};
};

struct CrossingRecord {
  double x, beta, r, R;
  std::optional<double> theta;
};

struct CrossingRepRecord {
  std::vector<CrossingRecord> crossings;
  bool aborted = false;
  bool contaminated = false;
};

struct CrossingRun {
  std::vector<CrossingRepRecord> records;
  EstimateReport intensity;
  /// Marks used for the fit: oriented angles in the plane, β in space.
  std::vector<double> marks;
  std::optional<DensityReport> gof;
  std::optional<SymmetryReport> symmetry;
};

template <std::size_t D>
std::vector<CrossingRepRecord> crossing_records(const CrossingConfig& cfg) {
  const double margin = default_margin(cfg.lambda, D, cfg.margin_factor);
  return parallel_replications(cfg.replication, [&](RandomStream& s, std::size_t) {
    const ScanResult<D> scan = simulate_line_crossings<D>(cfg.lambda, cfg.segment_length, margin, s);
    CrossingRepRecord rec;
    rec.aborted = scan.degenerate;
    rec.contaminated = scan.contaminated;
    if (rec.aborted) return rec;
    for (const auto& c : scan.crossings) rec.crossings.push_back({c.x, c.beta, c.r, c.R, c.theta_oriented});
    return rec;
  });
}

/// Mark density used for the fit, with its domain.
struct MarkDensity {
  std::function<double(double)> density;
  double lo, hi;
};

inline MarkDensity mark_density(int dim) {
  if (dim == 2) return {oracles::angle_density_2d, 0.0, two_pi};
  return {oracles::folded_density_3d, 0.0, pi};
}

inline CrossingRun run_crossings(const CrossingConfig& cfg) {
  if (cfg.dim != 2 && cfg.dim != 3) throw Error("dimension must be 2 or 3");
  CrossingRun run;
  run.records = cfg.dim == 2 ? crossing_records<2>(cfg) : crossing_records<3>(cfg);

  std::vector<double> counts;
  std::size_t aborted = 0, contaminated = 0;
  for (const auto& rec : run.records) {
    contaminated += rec.contaminated;
    if (rec.aborted) {
      ++aborted;
      continue;
    }
    counts.push_back(static_cast<double>(rec.crossings.size()));
    for (const auto& c : rec.crossings) run.marks.push_back(cfg.dim == 2 ? *c.theta : c.beta);
  }
  check_abort_rate(aborted, run.records.size());
  run.intensity = intensity_estimate(
      "crossing_intensity", counts, cfg.segment_length,
      oracles::make("crossing_intensity", oracles::crossing_intensity(cfg.lambda, cfg.dim),
                    {{"lambda", cfg.lambda}, {"dim", static_cast<double>(cfg.dim)}}),
      aborted, contaminated);

  if (run.marks.size() >= 20 * cfg.bins) {
    const MarkDensity md = mark_density(cfg.dim);
    run.gof = density_gof(run.marks, md.density, cfg.bins, md.lo, md.hi);
    if (cfg.dim == 2) run.symmetry = mirror_symmetry_test(run.gof->observed_counts);
  }
  return run;
}

// ---- typical cell ----

struct TypicalCellConfig {
  int dim = 2;
  double lambda = 1.0;
  /// Side of the Palm window; 0 picks 16 λ^{-1/2} in the plane, 12 λ^{-1/3} in space.
  double window_side = 0.0;
  std::vector<double> thetas{pi / 2, pi};
  ReplicationConfig replication{400, 42, 1};
};

inline double palm_window_side(const TypicalCellConfig& cfg) {
  if (cfg.window_side > 0.0) return cfg.window_side;
  return cfg.dim == 2 ? 16.0 / std::sqrt(cfg.lambda) : 12.0 / std::cbrt(cfg.lambda);
}

struct TypicalCellRepRecord {
  std::vector<TypicalCellStats> per_theta;
  bool contaminated = false;
};

struct CellFactorFit {
  double factor;             // candidate c in {1/2, 1, 2}
  std::vector<double> z;     // per θ
  bool consistent;           // all |z| < 3
};

struct TypicalCellRun {
  std::vector<TypicalCellRepRecord> records;
  EstimateReport total_facets;
  EstimateReport midpoint_facets;
  EstimateReport non_midpoint_facets;
  /// Plane: per θ, psi_count_ordered and psi_count_closed against 2 sin² and 4 sin².
  std::vector<EstimateReport> psi_ordered;
  std::vector<EstimateReport> psi_closed;
  /// Space: per θ (θ ≠ π), arc_length_total against L_θ.
  std::vector<EstimateReport> arc_length;
  std::vector<CellFactorFit> arc_factor_fits;
};

template <std::size_t D>
std::vector<TypicalCellRepRecord> typical_cell_records(const TypicalCellConfig& cfg) {
  const double side = palm_window_side(cfg);
  return parallel_replications(cfg.replication, [&](RandomStream& s, std::size_t) {
    double half = 0.5 * side;
    TypicalCellRepRecord rec;
    for (int attempt = 0; attempt <= max_margin_retries; ++attempt) {
      RandomStream local = s;
      const PointSample<D> sample =
          palm_augment(sample_poisson(cfg.lambda, Window<D>::centered(half), local));
      const GridIndex<D> index(sample);
      TypicalCellResult r = typical_cell_stats(sample, index, std::span<const double>(cfg.thetas));
      rec = {std::move(r.per_theta), r.contaminated};
      if (!rec.contaminated) break;
      half *= 1.5;
    }
    return rec;
  });
}

inline TypicalCellRun run_typical_cell(const TypicalCellConfig& cfg) {
  if (cfg.dim != 2 && cfg.dim != 3) throw Error("dimension must be 2 or 3");
  if (cfg.thetas.empty()) throw Error("no theta given");
  for (double t : cfg.thetas) (void)OrientedAngle(t);
  oracles::require_positive(cfg.lambda);

  TypicalCellRun run;
  run.records = cfg.dim == 2 ? typical_cell_records<2>(cfg) : typical_cell_records<3>(cfg);
  std::size_t contaminated = 0;
  for (const auto& r : run.records) contaminated += r.contaminated;

  auto column = [&](std::size_t j, auto get) {
    std::vector<double> v;
    for (const auto& r : run.records) v.push_back(static_cast<double>(get(r.per_theta[j])));
    return v;
  };
  const auto k = oracles::constants();
  const auto in = std::map<std::string, double>{{"lambda", cfg.lambda},
                                                {"dim", static_cast<double>(cfg.dim)}};

  const auto total = column(0, [](const TypicalCellStats& s) { return s.total_facets; });
  const auto mid = column(0, [](const TypicalCellStats& s) { return s.midpoint_facets; });
  std::vector<double> rest(total.size());
  for (std::size_t i = 0; i < total.size(); ++i) rest[i] = total[i] - mid[i];

  if (cfg.dim == 2) {
    run.total_facets = summarize("total_facets", total,
                                 oracles::make("mean_facets_2d", k.mean_facets_2d, in), 0, contaminated);
    run.midpoint_facets = summarize(
        "midpoint_facets", mid, oracles::make("midpoint_facets_2d", k.midpoint_facets_2d, in), 0,
        contaminated);
    run.non_midpoint_facets = summarize(
        "non_midpoint_facets", rest,
        oracles::make("non_midpoint_facets_2d", k.non_midpoint_facets_2d, in), 0, contaminated);
    for (std::size_t j = 0; j < cfg.thetas.size(); ++j) {
      const double t = cfg.thetas[j];
      const double s = std::sin(0.5 * t);
      auto th = in;
      th["theta"] = t;
      run.psi_ordered.push_back(summarize(
          "psi_count_ordered",
          column(j, [](const TypicalCellStats& x) { return x.psi_count_ordered; }),
          oracles::make("two_sin_sq", 2.0 * s * s, th), 0, contaminated));
      run.psi_closed.push_back(summarize(
          "psi_count_closed",
          column(j, [](const TypicalCellStats& x) { return x.psi_count_closed; }),
          oracles::make("four_sin_sq", 4.0 * s * s, th), 0, contaminated));
    }
  } else {
    run.total_facets = summarize("total_facets", total, std::nullopt, 0, contaminated);
    run.midpoint_facets = summarize(
        "xi_count", column(0, [](const TypicalCellStats& s) { return s.xi_count; }),
        oracles::make("n_pi", k.n_pi, in), 0, contaminated);
    run.non_midpoint_facets = summarize("non_midpoint_facets", rest, std::nullopt, 0, contaminated);

    std::vector<double> thetas_arc;
    for (std::size_t j = 0; j < cfg.thetas.size(); ++j) {
      const double t = cfg.thetas[j];
      if (std::abs(t - pi) < 1e-12) continue;
      auto th = in;
      th["theta"] = t;
      run.arc_length.push_back(summarize(
          "arc_length_total",
          column(j, [](const TypicalCellStats& x) { return x.arc_length_total; }),
          oracles::make("arc_length_L", oracles::arc_length_L(cfg.lambda, t), th), 0, contaminated));
      thetas_arc.push_back(t);
    }
    for (double c : {0.5, 1.0, 2.0}) {
      CellFactorFit fit{c, {}, !run.arc_length.empty()};
      for (const auto& rep : run.arc_length) {
        const double z = (rep.mean - c * rep.oracle->value) / rep.std_error;
        fit.z.push_back(z);
        if (!(std::abs(z) < 3.0)) fit.consistent = false;
      }
      run.arc_factor_fits.push_back(fit);
    }
  }
  return run;
}

}  // namespace pvangle
