#pragma once

// Geometric primitives: points, the intrinsic pair order, Delaunay angles,
// the point of a bisector that sees a pair under a prescribed angle, and
// the bisector/axis intersection used by the line scans.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace pvangle {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Relative tolerance used to detect probability-zero degeneracies.
inline constexpr double degeneracy_tol = 1e-12;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <std::size_t D>
struct Point {
  static_assert(D == 2 || D == 3, "only planar and spatial points are supported");
  static constexpr std::size_t dim = D;

  std::array<double, D> x{};

  constexpr double& operator[](std::size_t i) { return x[i]; }
  constexpr double operator[](std::size_t i) const { return x[i]; }

  friend constexpr Point operator+(Point a, const Point& b) {
    for (std::size_t i = 0; i < D; ++i) a.x[i] += b.x[i];
    return a;
  }
  friend constexpr Point operator-(Point a, const Point& b) {
    for (std::size_t i = 0; i < D; ++i) a.x[i] -= b.x[i];
    return a;
  }
  friend constexpr Point operator*(double s, Point a) {
    for (auto& v : a.x) v *= s;
    return a;
  }
  friend constexpr bool operator==(const Point&, const Point&) = default;
};

using Point2 = Point<2>;
using Point3 = Point<3>;

template <std::size_t D>
constexpr double dot(const Point<D>& a, const Point<D>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < D; ++i) s += a[i] * b[i];
  return s;
}

template <std::size_t D>
constexpr double squared_norm(const Point<D>& a) {
  return dot(a, a);
}

template <std::size_t D>
double norm(const Point<D>& a) {
  return std::sqrt(squared_norm(a));
}

template <std::size_t D>
constexpr double squared_distance(const Point<D>& a, const Point<D>& b) {
  return squared_norm(a - b);
}

template <std::size_t D>
double distance(const Point<D>& a, const Point<D>& b) {
  return std::sqrt(squared_distance(a, b));
}

template <std::size_t D>
constexpr Point<D> midpoint(const Point<D>& a, const Point<D>& b) {
  return 0.5 * (a + b);
}

/// The point of the first coordinate axis at abscissa `x`.
template <std::size_t D>
constexpr Point<D> axis_point(double x) {
  Point<D> p{};
  p[0] = x;
  return p;
}

template <std::size_t D>
bool is_finite(const Point<D>& p) {
  for (double v : p.x)
    if (!std::isfinite(v)) return false;
  return true;
}

/// Lexicographic order on coordinates; the intrinsic order on pairs.
template <std::size_t D>
constexpr bool lex_less(const Point<D>& a, const Point<D>& b) {
  return a.x < b.x;
}

/// Angle in (0, 2π) measured clockwise.
class OrientedAngle {
 public:
  explicit OrientedAngle(double radians) : value_(radians) {
    if (!(radians > 0.0 && radians < two_pi))
      throw Error("oriented angle must lie in (0, 2pi), got " + std::to_string(radians));
  }
  double radians() const { return value_; }
  /// min(θ, 2π − θ)
  double folded() const { return value_ <= pi ? value_ : two_pi - value_; }

 private:
  double value_;
};

/// Angle in (0, π].
class UnorientedAngle {
 public:
  explicit UnorientedAngle(double radians) : value_(radians) {
    if (!(radians > 0.0 && radians <= pi))
      throw Error("unoriented angle must lie in (0, pi], got " + std::to_string(radians));
  }
  double radians() const { return value_; }

 private:
  double value_;
};

inline constexpr std::size_t no_id = std::numeric_limits<std::size_t>::max();

/// A pair with first < second in the intrinsic order. The ids optionally
/// record the sample indices the points were taken from.
template <std::size_t D>
struct OrderedPair {
  Point<D> first;
  Point<D> second;
  std::size_t first_id = no_id;
  std::size_t second_id = no_id;

  double separation() const { return distance(first, second); }
  Point<D> center() const { return midpoint(first, second); }
};

template <std::size_t D>
OrderedPair<D> lex_order(const Point<D>& p, const Point<D>& q,
                         std::size_t p_id = no_id, std::size_t q_id = no_id) {
  if (p == q) throw Error("degenerate pair");
  if (lex_less(p, q)) return {p, q, p_id, q_id};
  return {q, p, q_id, p_id};
}

/// Unit normal of the pair's bisector line: the first→second direction
/// rotated clockwise by a quarter turn.
inline Point2 bisector_direction_2d(const OrderedPair<2>& pair) {
  const Point2 d = pair.second - pair.first;
  const double r = norm(d);
  return Point2{d[1] / r, -d[0] / r};
}

/// Clockwise angle at `z` from the ray towards pair.first to the ray
/// towards pair.second.
inline OrientedAngle oriented_angle_2d(const OrderedPair<2>& pair, const Point2& z) {
  const Point2 a = pair.first - z;
  const Point2 b = pair.second - z;
  if (squared_norm(a) == 0.0 || squared_norm(b) == 0.0) throw Error("angle undefined");
  double t = std::atan2(a[1], a[0]) - std::atan2(b[1], b[0]);
  t = std::fmod(t, two_pi);
  if (t < 0.0) t += two_pi;
  if (!(t > 0.0 && t < two_pi)) throw Error("angle undefined");
  return OrientedAngle(t);
}

/// Angle at z between the rays towards x1 and x2, in the plane they span.
template <std::size_t D>
UnorientedAngle unoriented_angle(const Point<D>& x1, const Point<D>& x2, const Point<D>& z) {
  const Point<D> a = x1 - z;
  const Point<D> b = x2 - z;
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) throw Error("angle undefined");
  const Point<D> ua = (1.0 / na) * a;
  const Point<D> ub = (1.0 / nb) * b;
  // 2·atan2(|ua − ub|, |ua + ub|) stays accurate near 0 and π
  const double t = 2.0 * std::atan2(norm(ua - ub), norm(ua + ub));
  if (!(t > 0.0)) throw Error("angle undefined");
  return UnorientedAngle(std::min(t, pi));
}

/// The point of the bisector line of `pair` seeing it under oriented angle θ.
inline Point2 z_theta_2d(const OrderedPair<2>& pair, OrientedAngle theta) {
  const double r = pair.separation();
  const double half = 0.5 * theta.radians();
  const double offset = 0.5 * r * std::cos(half) / std::sin(half);
  return pair.center() + offset * bisector_direction_2d(pair);
}

struct ChordGeometry {
  double R;    // distance from the viewing point to either pair member
  double rho;  // distance from the viewing point to the pair midpoint
};

inline ChordGeometry chord_geometry(double r, OrientedAngle theta) {
  if (!(r > 0.0)) throw Error("pair separation must be positive");
  const double half = 0.5 * theta.radians();
  const double s = std::abs(std::sin(half));
  const double c = std::abs(std::cos(half));
  return {r / (2.0 * s), 0.5 * r * c / s};
}

/// First coordinate of the intersection of the bisector of [u1, u2] with the
/// first axis; empty when the bisector is parallel to it.
template <std::size_t D>
std::optional<double> axis_crossing_point(const Point<D>& u1, const Point<D>& u2) {
  const double dx = u2[0] - u1[0];
  if (dx == 0.0) return std::nullopt;
  double num = 0.0;
  for (std::size_t i = 0; i < D; ++i) num += (u2[i] - u1[i]) * (u2[i] + u1[i]);
  return num / (2.0 * dx);
}

}  // namespace pvangle
