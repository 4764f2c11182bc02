#pragma once

// Handover simulation for a handset with 2^m equal directional panels moving
// along the first axis. A handover happens at each crossing of a cell
// boundary; it needs a panel swap when the two base stations sharing that
// boundary are seen in different beams.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pvangle/estimators.hpp"
#include "pvangle/geometry.hpp"
#include "pvangle/oracles.hpp"
#include "pvangle/processes.hpp"
#include "pvangle/sampling.hpp"

namespace pvangle {

struct PanelConfig {
  int m = 1;
  double chi = 0.0;

  PanelConfig(int m_, double chi_) : m(m_), chi(chi_) {
    if (m < 1 || m > 30) throw Error("panel exponent m must be in [1, 30]");
    if (!(chi >= 0.0 && chi < pi)) throw Error("panel offset chi must be in [0, pi)");
  }

  long panels() const { return 1L << m; }
  double beam_width() const { return two_pi / static_cast<double>(panels()); }
};

/// Azimuth of v in [0, 2π), counterclockwise from the first axis.
inline double azimuth(const Point2& v) {
  double a = std::atan2(v[1], v[0]);
  if (a < 0.0) a += two_pi;
  return a >= two_pi ? 0.0 : a;
}

/// Beam k with azimuth(p − z) in [χ + k w, χ + (k + 1) w), w = 2π / 2^m.
inline long sector_index(const Point2& p, const Point2& z, const PanelConfig& cfg) {
  if (p == z) throw Error("sector of a coincident point is undefined");
  double a = std::fmod(azimuth(p - z) - cfg.chi, two_pi);
  if (a < 0.0) a += two_pi;
  const long k = static_cast<long>(std::floor(a / cfg.beam_width()));
  return std::clamp(k, 0L, cfg.panels() - 1);
}

inline bool crossing_swap(const Crossing<2>& c, const PanelConfig& cfg) {
  const Point2 z{c.x, 0.0};
  return sector_index(c.pair.first, z, cfg) != sector_index(c.pair.second, z, cfg);
}

struct SwapStats {
  long handovers = 0;
  long swaps = 0;
};

inline SwapStats count_swaps(const std::vector<Crossing<2>>& crossings, const PanelConfig& cfg) {
  SwapStats st;
  for (const auto& c : crossings) {
    ++st.handovers;
    if (crossing_swap(c, cfg)) ++st.swaps;
  }
  return st;
}

struct PanelSimConfig {
  double lambda = 1.0;
  double segment_length = 200.0;
  double margin_factor = 5.0;
  ReplicationConfig replication{100, 42, 1};
  /// Replaces the per-replication random offset when set.
  std::optional<double> fixed_chi;
};

struct PanelSwapRun {
  std::vector<int> ms;
  std::vector<EstimateReport> reports;  // one per m
  /// Per replication and m (row-major, rep first); empty rows for aborted reps.
  std::vector<std::vector<SwapStats>> per_replication;
  std::vector<double> chis;
};

/// All m share the same replications: each draws χ first, then the sample.
inline PanelSwapRun estimate_swap_probabilities(const PanelSimConfig& sim,
                                                const std::vector<int>& ms) {
  if (ms.empty()) throw Error("no panel exponents given");
  for (int m : ms) PanelConfig(m, 0.0);
  if (sim.replication.replications < 2) throw Error("at least two replications are required");
  const double margin = default_margin(sim.lambda, 2, sim.margin_factor);

  struct Rep {
    std::vector<SwapStats> stats;
    double chi;
    bool aborted;
    bool contaminated;
  };
  const auto reps = parallel_replications(sim.replication, [&](RandomStream& s, std::size_t) {
    const double drawn = pi * s.uniform();
    const double chi = sim.fixed_chi.value_or(drawn);
    const ScanResult<2> scan = simulate_line_crossings<2>(sim.lambda, sim.segment_length, margin, s);
    Rep r{{}, chi, scan.degenerate, scan.contaminated};
    if (!r.aborted)
      for (int m : ms) r.stats.push_back(count_swaps(scan.crossings, PanelConfig(m, chi)));
    return r;
  });

  PanelSwapRun run;
  run.ms = ms;
  std::size_t aborted = 0, contaminated = 0;
  for (const auto& r : reps) {
    aborted += r.aborted;
    contaminated += r.contaminated;
    run.per_replication.push_back(r.stats);
    run.chis.push_back(r.chi);
  }
  check_abort_rate(aborted, reps.size());

  for (std::size_t j = 0; j < ms.size(); ++j) {
    std::vector<double> num, den;
    for (const auto& r : reps) {
      if (r.aborted) continue;
      num.push_back(static_cast<double>(r.stats[j].swaps));
      den.push_back(static_cast<double>(r.stats[j].handovers));
    }
    double total = 0.0;
    for (double d : den) total += d;
    if (total == 0.0) throw Error("no handovers observed");
    const int m = ms[j];
    run.reports.push_back(ratio_estimate(
        "panel_swap_m" + std::to_string(m), num, den,
        oracles::make("panel_swap_probability", oracles::panel_swap_probability(m),
                      {{"m", static_cast<double>(m)}}),
        aborted, contaminated));
  }
  return run;
}

inline EstimateReport estimate_swap_probability(const PanelSimConfig& sim, int m) {
  return estimate_swap_probabilities(sim, {m}).reports.front();
}

}  // namespace pvangle
