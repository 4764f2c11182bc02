#pragma once

// Monte Carlo harness: replications run in parallel on per-replication
// streams and are aggregated in replication order, so reports depend only on
// (master seed, replication count).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "pvangle/geometry.hpp"
#include "pvangle/oracles.hpp"
#include "pvangle/sampling.hpp"

namespace pvangle {

class DegenerateConfiguration : public Error {
 public:
  using Error::Error;
};

struct ReplicationConfig {
  std::size_t replications = 100;
  std::uint64_t master_seed = 42;
  unsigned workers = 1;
};

inline unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Runs fn(stream, i) for i in [0, n) on `workers` threads; results are
/// returned in index order.
template <class F>
auto parallel_replications(const ReplicationConfig& cfg, F&& fn) {
  using Result = std::invoke_result_t<F&, RandomStream&, std::size_t>;
  std::vector<std::optional<Result>> slots(cfg.replications);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cfg.replications) return;
      try {
        RandomStream stream = derive_stream(cfg.master_seed, i);
        slots[i].emplace(fn(stream, i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = cfg.replications;
      }
    }
  };

  const unsigned n_workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, cfg.workers), cfg.replications));
  if (n_workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<Result> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct EstimateReport {
  std::string statistic_id;
  std::size_t n_replications = 0;
  double mean = 0.0;
  double std_error = 0.0;
  Interval ci95;
  std::optional<oracles::OracleValue> oracle;
  std::optional<double> z_score;
  std::size_t aborted_replications = 0;
  std::size_t contamination_flags = 0;

  bool within_sigmas(double k) const { return z_score && std::abs(*z_score) < k; }
  double relative_error() const {
    return oracle && oracle->value != 0.0 ? std::abs(mean - oracle->value) / std::abs(oracle->value)
                                          : std::abs(mean);
  }
};

inline constexpr double z95 = 1.959963984540054;

inline void attach_oracle(EstimateReport& rep, std::optional<oracles::OracleValue> oracle) {
  rep.oracle = std::move(oracle);
  rep.z_score.reset();
  if (!rep.oracle) return;
  const double diff = rep.mean - rep.oracle->value;
  if (rep.std_error > 0.0) {
    rep.z_score = diff / rep.std_error;
  } else {
    rep.z_score = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
}

/// Mean with standard error sd/√n over the completed replications.
inline EstimateReport summarize(std::string id, std::span<const double> values,
                                std::optional<oracles::OracleValue> oracle = {},
                                std::size_t aborted = 0, std::size_t contaminated = 0) {
  EstimateReport rep;
  rep.statistic_id = std::move(id);
  rep.n_replications = values.size();
  rep.aborted_replications = aborted;
  rep.contamination_flags = contaminated;
  const auto n = static_cast<double>(values.size());
  if (values.empty()) throw Error("no completed replications");
  double sum = 0.0;
  for (double v : values) sum += v;
  rep.mean = sum / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - rep.mean) * (v - rep.mean);
    rep.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  rep.ci95 = {rep.mean - z95 * rep.std_error, rep.mean + z95 * rep.std_error};
  attach_oracle(rep, std::move(oracle));
  return rep;
}

/// Outcome of one replication of a scalar statistic; an empty value marks
/// an aborted (degenerate) replication.
struct Outcome {
  std::optional<double> value;
  bool contaminated = false;
};

inline void check_abort_rate(std::size_t aborted, std::size_t total) {
  if (5 * aborted > total) throw DegenerateConfiguration("degenerate configuration");
}

template <class F>
EstimateReport run_replications(const ReplicationConfig& cfg, std::string id, F&& statistic,
                                std::optional<oracles::OracleValue> oracle = {}) {
  if (cfg.replications < 2) throw Error("at least two replications are required");
  const std::vector<Outcome> outcomes = parallel_replications(cfg, std::forward<F>(statistic));
  std::vector<double> values;
  std::size_t aborted = 0;
  std::size_t contaminated = 0;
  for (const auto& o : outcomes) {
    if (o.contaminated) ++contaminated;
    if (o.value)
      values.push_back(*o.value);
    else
      ++aborted;
  }
  check_abort_rate(aborted, outcomes.size());
  return summarize(std::move(id), values, std::move(oracle), aborted, contaminated);
}

/// Per-replication counts divided by the observation measure, then averaged.
inline EstimateReport intensity_estimate(std::string id, std::span<const double> counts,
                                         double measure,
                                         std::optional<oracles::OracleValue> oracle = {},
                                         std::size_t aborted = 0, std::size_t contaminated = 0) {
  if (!(measure > 0.0)) throw Error("observation measure must be positive");
  std::vector<double> values;
  values.reserve(counts.size());
  for (double c : counts) values.push_back(c / measure);
  return summarize(std::move(id), values, std::move(oracle), aborted, contaminated);
}

/// Ratio of totals Σ num / Σ den with a delta-method standard error.
inline EstimateReport ratio_estimate(std::string id, std::span<const double> num,
                                     std::span<const double> den,
                                     std::optional<oracles::OracleValue> oracle = {},
                                     std::size_t aborted = 0, std::size_t contaminated = 0) {
  if (num.size() != den.size() || num.empty()) throw Error("ratio estimate needs paired samples");
  double sn = 0.0, sd = 0.0;
  for (std::size_t i = 0; i < num.size(); ++i) {
    sn += num[i];
    sd += den[i];
  }
  if (!(sd > 0.0)) throw Error("ratio estimate with zero denominator total");
  EstimateReport rep;
  rep.statistic_id = std::move(id);
  rep.n_replications = num.size();
  rep.aborted_replications = aborted;
  rep.contamination_flags = contaminated;
  rep.mean = sn / sd;
  const auto n = static_cast<double>(num.size());
  if (num.size() > 1) {
    double ss = 0.0;
    for (std::size_t i = 0; i < num.size(); ++i) {
      const double e = num[i] - rep.mean * den[i];
      ss += e * e;
    }
    rep.std_error = std::sqrt(ss / (n * (n - 1.0))) / (sd / n);
  }
  rep.ci95 = {rep.mean - z95 * rep.std_error, rep.mean + z95 * rep.std_error};
  attach_oracle(rep, std::move(oracle));
  return rep;
}

struct DensityReport {
  std::vector<double> bin_edges;
  std::vector<double> observed_counts;
  std::vector<double> expected_counts;
  double chi_square = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

/// Equal-width histogram of `marks` on [lo, hi] against the given density,
/// Pearson chi-square with bins − 1 degrees of freedom.
inline DensityReport density_gof(std::span<const double> marks,
                                 const std::function<double(double)>& density, std::size_t bins,
                                 double lo, double hi) {
  if (bins < 2) throw Error("at least two bins are required");
  if (marks.size() < 20 * bins) throw Error("too few marks for the requested bins");
  DensityReport rep;
  rep.bin_edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) rep.bin_edges[b] = lo + width * static_cast<double>(b);
  rep.bin_edges[bins] = hi;

  rep.observed_counts.assign(bins, 0.0);
  for (double m : marks) {
    if (!(m >= lo && m <= hi)) throw Error("mark outside the density domain");
    auto b = static_cast<std::size_t>((m - lo) / width);
    rep.observed_counts[std::min(b, bins - 1)] += 1.0;
  }

  std::vector<double> mass(bins);
  double total_mass = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    mass[b] = oracles::integrate(density, rep.bin_edges[b], rep.bin_edges[b + 1]);
    total_mass += mass[b];
  }
  const auto n = static_cast<double>(marks.size());
  rep.expected_counts.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    rep.expected_counts[b] = n * mass[b] / total_mass;
    if (rep.expected_counts[b] < 5.0) throw Error("rebin");
    const double d = rep.observed_counts[b] - rep.expected_counts[b];
    rep.chi_square += d * d / rep.expected_counts[b];
  }
  rep.dof = bins - 1;
  rep.p_value = oracles::chi_square_sf(rep.chi_square, static_cast<double>(rep.dof));
  return rep;
}

struct SymmetryReport {
  double chi_square = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

/// Tests that bin b and its mirror bins − 1 − b have equal expectations:
/// Σ (a − b)² / (a + b) over mirrored pairs, chi-square with one degree of
/// freedom per informative pair.
inline SymmetryReport mirror_symmetry_test(std::span<const double> counts) {
  SymmetryReport rep;
  const std::size_t n = counts.size();
  for (std::size_t b = 0; b < n / 2; ++b) {
    const double a = counts[b];
    const double c = counts[n - 1 - b];
    if (a + c <= 0.0) continue;
    rep.chi_square += (a - c) * (a - c) / (a + c);
    ++rep.dof;
  }
  rep.p_value = rep.dof ? oracles::chi_square_sf(rep.chi_square, static_cast<double>(rep.dof)) : 1.0;
  return rep;
}

}  // namespace pvangle
