#pragma once

// Reproducible homogeneous Poisson sampling in rectangular windows.
//
// Every replication draws from its own counter-based stream keyed by the
// master seed, so results depend only on (seed, replication index) and never
// on scheduling.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "pvangle/geometry.hpp"

namespace pvangle {

/// Philox4x32-10 block function (Salmon et al., Random123).
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t m0 = 0xD2511F53u;
  constexpr std::uint32_t m1 = 0xCD9E8D57u;
  constexpr std::uint32_t w0 = 0x9E3779B9u;
  constexpr std::uint32_t w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += w0;
      key[1] += w1;
    }
    const std::uint64_t p0 = std::uint64_t{m0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{m1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

/// Counter-based random stream. Draw k of stream (seed, rep) is the Philox
/// block of counter (k, rep) under key seed: distinct triples never share a
/// block, identical triples reproduce it.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t master_seed, std::uint64_t replication_index,
               std::uint64_t draw_counter = 0)
      : seed_(master_seed), replication_(replication_index), counter_(draw_counter) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::array<std::uint32_t, 4> ctr{
        static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
        static_cast<std::uint32_t>(replication_), static_cast<std::uint32_t>(replication_ >> 32)};
    const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_),
                                           static_cast<std::uint32_t>(seed_ >> 32)};
    ++counter_;
    const auto out = philox4x32_10(ctr, key);
    return (std::uint64_t{out[1]} << 32) | out[0];
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t replication_index() const { return replication_; }
  std::uint64_t draw_counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t replication_;
  std::uint64_t counter_;
};

inline RandomStream derive_stream(std::uint64_t master_seed, std::uint64_t replication_index) {
  return RandomStream(master_seed, replication_index, 0);
}

template <std::size_t D>
struct Window {
  Point<D> lo;
  Point<D> hi;

  bool valid() const {
    for (std::size_t i = 0; i < D; ++i)
      if (!(std::isfinite(lo[i]) && std::isfinite(hi[i]) && lo[i] < hi[i])) return false;
    return true;
  }
  double volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < D; ++i) v *= hi[i] - lo[i];
    return v;
  }
  double diameter() const { return distance(lo, hi); }
  bool contains(const Point<D>& p) const {
    for (std::size_t i = 0; i < D; ++i)
      if (p[i] < lo[i] || p[i] > hi[i]) return false;
    return true;
  }
  bool strictly_contains(const Point<D>& p) const {
    for (std::size_t i = 0; i < D; ++i)
      if (!(p[i] > lo[i] && p[i] < hi[i])) return false;
    return true;
  }
  bool contains(const Window& w) const { return contains(w.lo) && contains(w.hi); }
  bool contains_ball(const Point<D>& c, double r) const {
    for (std::size_t i = 0; i < D; ++i)
      if (c[i] - r < lo[i] || c[i] + r > hi[i]) return false;
    return true;
  }
  /// Distance from p to the window (0 inside).
  double distance_to(const Point<D>& p) const {
    double s = 0.0;
    for (std::size_t i = 0; i < D; ++i) {
      const double d = std::max({lo[i] - p[i], 0.0, p[i] - hi[i]});
      s += d * d;
    }
    return std::sqrt(s);
  }
  Window shrunk(double margin) const {
    Window w = *this;
    for (std::size_t i = 0; i < D; ++i) {
      w.lo[i] += margin;
      w.hi[i] -= margin;
    }
    return w;
  }

  /// Centered cube [-half, half]^D.
  static Window centered(double half) {
    Window w;
    for (std::size_t i = 0; i < D; ++i) {
      w.lo[i] = -half;
      w.hi[i] = half;
    }
    return w;
  }
};

template <std::size_t D>
struct PointSample {
  std::vector<Point<D>> points;
  Window<D> window;
  double lambda = 1.0;
  bool palm = false;  // points[0] is the added origin

  static constexpr std::size_t dim = D;
  std::size_t size() const { return points.size(); }
};

inline constexpr double max_expected_points = 1e8;

template <std::size_t D>
PointSample<D> sample_poisson(double lambda, const Window<D>& window, RandomStream& stream) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw Error("intensity must be positive");
  if (!window.valid()) throw Error("invalid window");
  const double mean = lambda * window.volume();
  if (mean > max_expected_points) throw Error("sample too large");

  PointSample<D> sample;
  sample.window = window;
  sample.lambda = lambda;
  std::poisson_distribution<std::uint64_t> count_dist(mean);
  const std::uint64_t n = count_dist(stream);
  sample.points.resize(n);
  for (auto& p : sample.points)
    for (std::size_t i = 0; i < D; ++i) p[i] = stream.uniform(window.lo[i], window.hi[i]);
  return sample;
}

/// Slivnyak: the Palm version of a Poisson sample is the sample plus the origin.
template <std::size_t D>
PointSample<D> palm_augment(PointSample<D> sample) {
  if (sample.palm) throw Error("already palm-augmented");
  const Point<D> origin{};
  if (!sample.window.strictly_contains(origin)) throw Error("origin outside window");
  sample.points.insert(sample.points.begin(), origin);
  sample.palm = true;
  return sample;
}

/// Sample wrapping explicit points, mostly for tests and fixtures.
template <std::size_t D>
PointSample<D> make_sample(std::vector<Point<D>> points, const Window<D>& window,
                           double lambda = 1.0) {
  PointSample<D> s;
  s.points = std::move(points);
  s.window = window;
  s.lambda = lambda;
  return s;
}

}  // namespace pvangle
