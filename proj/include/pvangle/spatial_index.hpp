#pragma once

// Uniform bucket grid over a PointSample. Nearest-neighbour search grows
// rings of cells until no closer point can remain.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pvangle/geometry.hpp"
#include "pvangle/sampling.hpp"

namespace pvangle {

struct NearestResult {
  std::size_t index = no_id;
  double distance = 0.0;
  /// All indices within relative 1e-12 of the minimal distance, ascending.
  std::vector<std::size_t> ties;

  bool tied() const { return ties.size() > 1; }
};

template <std::size_t D>
class GridIndex {
 public:
  using Cell = std::array<long, D>;

  explicit GridIndex(const PointSample<D>& sample)
      : GridIndex(sample, std::pow(sample.lambda, -1.0 / static_cast<double>(D))) {}

  GridIndex(const PointSample<D>& sample, double cell_size) : sample_(&sample), cell_(cell_size) {
    if (!(cell_size > 0.0) || !std::isfinite(cell_size)) throw Error("cell size must be positive");
    Cell hi_cell{};
    for (std::size_t i = 0; i < D; ++i) {
      lo_cell_[i] = static_cast<long>(std::floor(sample.window.lo[i] / cell_));
      hi_cell[i] = static_cast<long>(std::floor(sample.window.hi[i] / cell_));
    }
    for (const auto& p : sample.points) {
      const Cell c = cell_of(p);
      for (std::size_t i = 0; i < D; ++i) {
        lo_cell_[i] = std::min(lo_cell_[i], c[i]);
        hi_cell[i] = std::max(hi_cell[i], c[i]);
      }
    }
    std::size_t total = 1;
    for (std::size_t i = 0; i < D; ++i) {
      extent_[i] = hi_cell[i] - lo_cell_[i] + 1;
      total *= static_cast<std::size_t>(extent_[i]);
    }

    // counting sort into CSR buckets
    offsets_.assign(total + 1, 0);
    std::vector<std::size_t> slot(sample.points.size());
    for (std::size_t k = 0; k < sample.points.size(); ++k) {
      slot[k] = flat(cell_of(sample.points[k]));
      ++offsets_[slot[k] + 1];
    }
    for (std::size_t b = 0; b < total; ++b) offsets_[b + 1] += offsets_[b];
    items_.resize(sample.points.size());
    std::vector<std::uint32_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t k = 0; k < sample.points.size(); ++k)
      items_[fill[slot[k]]++] = static_cast<std::uint32_t>(k);
  }

  const PointSample<D>& sample() const { return *sample_; }
  const Point<D>& point(std::size_t k) const { return sample_->points[k]; }
  double cell_size() const { return cell_; }

  Cell cell_of(const Point<D>& p) const {
    Cell c{};
    for (std::size_t i = 0; i < D; ++i) c[i] = to_cell(p[i]);
    return c;
  }

  /// Point indices stored in the bucket of grid cell `c` (empty outside the grid).
  std::span<const std::uint32_t> bucket(const Cell& c) const {
    if (!in_grid(c)) return {};
    const std::size_t b = flat(c);
    return {items_.data() + offsets_[b], items_.data() + offsets_[b + 1]};
  }

  NearestResult nearest(const Point<D>& q, std::span<const std::size_t> exclude = {}) const {
    const Cell center = cell_of(q);
    double best2 = std::numeric_limits<double>::infinity();
    for (long ring = 0;; ++ring) {
      bool any_cell = false;
      for_each_cell_in_ring(center, ring, [&](const Cell& c) {
        any_cell = true;
        for (std::uint32_t k : bucket(c)) {
          if (excluded(k, exclude)) continue;
          best2 = std::min(best2, squared_distance(q, point(k)));
        }
      });
      const double reach = static_cast<double>(ring) * cell_;
      if (std::isfinite(best2) && std::sqrt(best2) * (1.0 + degeneracy_tol) <= reach) break;
      if (!any_cell && ring > max_ring(center)) break;
    }
    if (!std::isfinite(best2)) throw Error("no eligible point for nearest query");

    NearestResult res;
    res.distance = std::sqrt(best2);
    const double cutoff = res.distance * (1.0 + degeneracy_tol);
    for_each_in_box(q, cutoff, [&](std::uint32_t k) {
      if (excluded(k, exclude)) return;
      if (distance(q, point(k)) <= cutoff) res.ties.push_back(k);
    });
    std::sort(res.ties.begin(), res.ties.end(), [&](std::size_t a, std::size_t b) {
      const double da = squared_distance(q, point(a));
      const double db = squared_distance(q, point(b));
      return da != db ? da < db : a < b;
    });
    res.index = res.ties.front();
    std::sort(res.ties.begin(), res.ties.end());
    return res;
  }

  /// True iff no non-excluded point lies strictly inside the open ball.
  bool ball_empty(const Point<D>& center, double radius,
                  std::span<const std::size_t> exclude = {}) const {
    const double limit2 = radius * radius * (1.0 - 2.0 * degeneracy_tol);
    bool empty = true;
    for_each_in_box(center, radius, [&](std::uint32_t k) {
      if (!empty || excluded(k, exclude)) return;
      if (squared_distance(center, point(k)) < limit2) empty = false;
    });
    return empty;
  }

  /// Indices of points at distance <= d from q, by ascending distance then index.
  std::vector<std::size_t> within(const Point<D>& q, double d) const {
    std::vector<std::pair<double, std::size_t>> hits;
    const double d2 = d * d;
    for_each_in_box(q, d, [&](std::uint32_t k) {
      const double s = squared_distance(q, point(k));
      if (s <= d2) hits.emplace_back(s, k);
    });
    std::sort(hits.begin(), hits.end());
    std::vector<std::size_t> out;
    out.reserve(hits.size());
    for (const auto& h : hits) out.push_back(h.second);
    return out;
  }

  /// Upper bound on the radius of any point-free ball centred in the window.
  double largest_empty_ball_bound() const {
    if (sample_->points.empty()) throw Error("largest empty ball of an empty sample");
    const double half_diag = 0.5 * cell_ * std::sqrt(static_cast<double>(D));
    double bound = 0.0;
    Cell c{};
    const std::size_t total = offsets_.size() - 1;
    for (std::size_t b = 0; b < total; ++b) {
      std::size_t rest = b;
      for (std::size_t i = D; i-- > 0;) {
        c[i] = lo_cell_[i] + static_cast<long>(rest % static_cast<std::size_t>(extent_[i]));
        rest /= static_cast<std::size_t>(extent_[i]);
      }
      Point<D> center;
      for (std::size_t i = 0; i < D; ++i) center[i] = (static_cast<double>(c[i]) + 0.5) * cell_;
      bound = std::max(bound, nearest(center).distance + half_diag);
    }
    return bound;
  }

  /// Calls f(k) for every point whose bucket meets the box of half-side r around q.
  template <class F>
  void for_each_in_box(const Point<D>& q, double r, F&& f) const {
    Cell lo{}, hi{};
    for (std::size_t i = 0; i < D; ++i) {
      lo[i] = std::max(lo_cell_[i], to_cell(q[i] - r));
      hi[i] = std::min(lo_cell_[i] + extent_[i] - 1, to_cell(q[i] + r));
      if (lo[i] > hi[i]) return;
    }
    Cell c = lo;
    while (true) {
      for (std::uint32_t k : bucket(c)) f(k);
      std::size_t i = 0;
      for (; i < D; ++i) {
        if (++c[i] <= hi[i]) break;
        c[i] = lo[i];
      }
      if (i == D) break;
    }
  }

 private:
  static bool excluded(std::size_t k, std::span<const std::size_t> exclude) {
    return std::find(exclude.begin(), exclude.end(), k) != exclude.end();
  }

  /// floor(v / cell) saturated to a range safely around the grid.
  long to_cell(double v) const {
    const double lim = 1e15;
    return static_cast<long>(std::clamp(std::floor(v / cell_), -lim, lim));
  }

  bool in_grid(const Cell& c) const {
    for (std::size_t i = 0; i < D; ++i)
      if (c[i] < lo_cell_[i] || c[i] >= lo_cell_[i] + extent_[i]) return false;
    return true;
  }

  std::size_t flat(const Cell& c) const {
    std::size_t b = 0;
    for (std::size_t i = 0; i < D; ++i)
      b = b * static_cast<std::size_t>(extent_[i]) + static_cast<std::size_t>(c[i] - lo_cell_[i]);
    return b;
  }

  /// Largest Chebyshev ring around `center` that still meets the grid.
  long max_ring(const Cell& center) const {
    long m = 0;
    for (std::size_t i = 0; i < D; ++i) {
      m = std::max(m, std::abs(center[i] - lo_cell_[i]));
      m = std::max(m, std::abs(center[i] - (lo_cell_[i] + extent_[i] - 1)));
    }
    return m;
  }

  /// Visits grid cells at Chebyshev distance exactly `ring` from `center`.
  template <class F>
  void for_each_cell_in_ring(const Cell& center, long ring, F&& f) const {
    Cell lo{}, hi{};
    for (std::size_t i = 0; i < D; ++i) {
      lo[i] = std::max(center[i] - ring, lo_cell_[i]);
      hi[i] = std::min(center[i] + ring, lo_cell_[i] + extent_[i] - 1);
      if (lo[i] > hi[i]) return;
    }
    Cell c = lo;
    while (true) {
      long cheb = 0;
      for (std::size_t i = 0; i < D; ++i) cheb = std::max(cheb, std::abs(c[i] - center[i]));
      if (cheb == ring) f(c);
      std::size_t i = 0;
      for (; i < D; ++i) {
        if (++c[i] <= hi[i]) break;
        c[i] = lo[i];
      }
      if (i == D) break;
    }
  }

  const PointSample<D>* sample_;
  double cell_;
  Cell lo_cell_{};
  Cell extent_{};
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> items_;
};

}  // namespace pvangle
