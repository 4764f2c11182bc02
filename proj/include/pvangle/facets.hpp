#pragma once

// Exact Voronoi facets of a single pair, computed on the pair's bisector by
// half-space clipping against the other sample points, restricted to the
// sample window. A pair has a nonempty facet iff it is a Delaunay pair.
//
// Third points are consumed by increasing distance from the pair midpoint C.
// A point Y that cuts the facet at P satisfies |Y - C| < |Y - P| + |P - C|
// < 2 R(P), so consumption stops once the candidate distance exceeds twice
// the largest nucleus distance R over the current facet.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "pvangle/geometry.hpp"
#include "pvangle/spatial_index.hpp"

namespace pvangle {

namespace detail {

template <std::size_t D>
bool is_pair_member(const OrderedPair<D>& pair, std::size_t k, const Point<D>& p) {
  return k == pair.first_id || k == pair.second_id || p == pair.first || p == pair.second;
}

/// Visits non-member points by increasing distance from `center` until
/// `visit` returns a stopping radius smaller than the next candidate distance.
/// `visit(k, dist)` returns the current stopping radius.
template <std::size_t D, class Visit>
void consume_by_distance(const GridIndex<D>& index, const OrderedPair<D>& pair,
                         const Point<D>& center, double initial_radius, Visit&& visit,
                         double current_stop) {
  double searched = -1.0;
  double radius = std::min(initial_radius, current_stop);
  while (true) {
    for (std::size_t k : index.within(center, radius)) {
      const Point<D>& y = index.point(k);
      const double d = distance(center, y);
      if (d <= searched) continue;
      if (d > current_stop) break;
      if (is_pair_member(pair, k, y)) continue;
      current_stop = visit(k, d);
      if (current_stop < 0.0) return;  // facet became empty
    }
    searched = radius;
    if (current_stop <= searched) return;
    radius = std::min(current_stop, std::max(2.0 * searched, searched + index.cell_size()));
  }
}

}  // namespace detail

/// One-dimensional facet {C + s·n : lo <= s <= hi} of a planar pair.
struct FacetInterval {
  OrderedPair<2> pair;
  Point2 center;
  Point2 direction;  // n, see bisector_direction_2d
  double lo = 0.0;
  double hi = 0.0;
  bool lo_at_window = false;  // the bound comes from the window, not a point
  bool hi_at_window = false;

  bool empty() const { return lo > hi; }
  bool contains(double s) const { return !empty() && lo <= s && s <= hi; }
  bool contains_center() const { return contains(0.0); }
  Point2 at(double s) const { return center + s * direction; }
  /// Nucleus distance at offset s.
  double nucleus_distance(double s) const {
    const double h = 0.5 * pair.separation();
    return std::sqrt(s * s + h * h);
  }
};

inline FacetInterval facet_interval_2d(const OrderedPair<2>& pair, const GridIndex<2>& index) {
  FacetInterval f;
  f.pair = pair;
  f.center = pair.center();
  f.direction = bisector_direction_2d(pair);
  const double r = pair.separation();
  const double h2 = 0.25 * r * r;

  // clamp the bisector line to the window
  const Window<2>& w = index.sample().window;
  f.lo = -std::numeric_limits<double>::infinity();
  f.hi = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 2; ++i) {
    const double n = f.direction[i];
    if (n == 0.0) continue;
    const double a = (w.lo[i] - f.center[i]) / n;
    const double b = (w.hi[i] - f.center[i]) / n;
    f.lo = std::max(f.lo, std::min(a, b));
    f.hi = std::min(f.hi, std::max(a, b));
  }
  f.lo_at_window = f.hi_at_window = true;

  auto stop_radius = [&] {
    if (f.empty()) return -1.0;
    const double s = std::max(std::abs(f.lo), std::abs(f.hi));
    return 2.0 * std::sqrt(s * s + h2);
  };

  detail::consume_by_distance<2>(
      index, pair, f.center, std::max(2.0 * r, 2.0 * index.cell_size()),
      [&](std::size_t k, double dist) {
        const Point2 rel = index.point(k) - f.center;
        const double slope = -2.0 * dot(f.direction, rel);
        const double rhs = h2 - dist * dist;
        // the point Y constrains s by slope·s >= rhs
        if (std::abs(slope) <= degeneracy_tol * std::max(r, dist)) {
          if (rhs > 0.0) f.lo = std::numeric_limits<double>::infinity();
        } else if (slope > 0.0) {
          const double b = rhs / slope;
          if (b > f.lo) {
            f.lo = b;
            f.lo_at_window = false;
          }
        } else {
          const double b = rhs / slope;
          if (b < f.hi) {
            f.hi = b;
            f.hi_at_window = false;
          }
        }
        return stop_radius();
      },
      stop_radius());
  return f;
}

/// Half-plane {w : normal·w <= offset} in the coordinates of a bisector plane.
struct HalfPlane {
  Point2 normal;
  double offset = 0.0;
  bool from_window = false;
};

/// Clips a convex polygon by a half-plane (Sutherland–Hodgman, single edge).
inline std::vector<Point2> clip_convex(const std::vector<Point2>& poly, const HalfPlane& hp) {
  std::vector<Point2> out;
  const std::size_t n = poly.size();
  out.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % n];
    const double fp = dot(hp.normal, p) - hp.offset;
    const double fq = dot(hp.normal, q) - hp.offset;
    if (fp <= 0.0) out.push_back(p);
    if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0))
      out.push_back(p + (fp / (fp - fq)) * (q - p));
  }
  return out;
}

inline double polygon_area(const std::vector<Point2>& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % poly.size()];
    a += p[0] * q[1] - p[1] * q[0];
  }
  return 0.5 * std::abs(a);
}

/// Two-dimensional facet of a spatial pair, as a convex polygon in an
/// orthonormal frame of the bisector plane centred at the pair midpoint.
struct FacetPolygon {
  OrderedPair<3> pair;
  Point3 center;
  std::array<Point3, 2> basis{};
  std::vector<Point2> vertices;
  std::vector<HalfPlane> constraints;

  bool empty() const { return vertices.size() < 3; }
  Point3 to_space(const Point2& w) const { return center + w[0] * basis[0] + w[1] * basis[1]; }
  bool contains_center() const {
    if (empty()) return false;
    for (const auto& hp : constraints)
      if (hp.offset < 0.0) return false;
    return true;
  }
  bool touches_window() const {
    if (empty()) return false;
    for (const auto& hp : constraints) {
      if (!hp.from_window) continue;
      for (const auto& v : vertices)
        if (dot(hp.normal, v) - hp.offset >= -degeneracy_tol * (1.0 + std::abs(hp.offset)))
          return true;
    }
    return false;
  }
  double max_vertex_radius() const {
    double m = 0.0;
    for (const auto& v : vertices) m = std::max(m, norm(v));
    return m;
  }

  /// Polygon cut out of a plane by explicit half-planes, starting from the
  /// square of the given half side. Used to build fixtures.
  static FacetPolygon from_halfplanes(std::vector<HalfPlane> hps, double half_side) {
    FacetPolygon f;
    f.basis = {Point3{1.0, 0.0, 0.0}, Point3{0.0, 1.0, 0.0}};
    f.vertices = {Point2{-half_side, -half_side}, Point2{half_side, -half_side},
                  Point2{half_side, half_side}, Point2{-half_side, half_side}};
    for (const auto& hp : hps) {
      f.vertices = clip_convex(f.vertices, hp);
      f.constraints.push_back(hp);
    }
    if (f.vertices.size() < 3) f.vertices.clear();
    return f;
  }
};

/// Orthonormal basis of the plane orthogonal to `axis` (a unit vector).
inline std::array<Point3, 2> plane_basis(const Point3& axis) {
  std::size_t smallest = 0;
  for (std::size_t i = 1; i < 3; ++i)
    if (std::abs(axis[i]) < std::abs(axis[smallest])) smallest = i;
  Point3 helper{};
  helper[smallest] = 1.0;
  auto cross = [](const Point3& a, const Point3& b) {
    return Point3{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
  };
  Point3 e1 = cross(axis, helper);
  e1 = (1.0 / norm(e1)) * e1;
  const Point3 e2 = cross(axis, e1);
  return {e1, e2};
}

inline FacetPolygon facet_polygon_3d(const OrderedPair<3>& pair, const GridIndex<3>& index) {
  FacetPolygon f;
  f.pair = pair;
  f.center = pair.center();
  const double r = pair.separation();
  const double h2 = 0.25 * r * r;
  const Point3 axis = (1.0 / r) * (pair.second - pair.first);
  f.basis = plane_basis(axis);

  const Window<3>& w = index.sample().window;
  const double half = w.diameter();
  f.vertices = {Point2{-half, -half}, Point2{half, -half}, Point2{half, half}, Point2{-half, half}};

  auto add = [&](const HalfPlane& hp) {
    f.constraints.push_back(hp);
    f.vertices = clip_convex(f.vertices, hp);
    const double scale = std::max(h2, 1e-300);
    if (f.vertices.size() < 3 || polygon_area(f.vertices) <= degeneracy_tol * scale)
      f.vertices.clear();
  };

  // plane ∩ window
  for (std::size_t i = 0; i < 3 && !f.empty(); ++i) {
    const Point2 g{f.basis[0][i], f.basis[1][i]};
    add({g, w.hi[i] - f.center[i], true});
    if (!f.empty()) add({-1.0 * g, f.center[i] - w.lo[i], true});
  }

  auto stop_radius = [&] {
    if (f.empty()) return -1.0;
    const double s = f.max_vertex_radius();
    return 2.0 * std::sqrt(s * s + h2);
  };

  detail::consume_by_distance<3>(
      index, pair, f.center, std::max(2.0 * r, 2.0 * index.cell_size()),
      [&](std::size_t k, double dist) {
        const Point3 rel = index.point(k) - f.center;
        const Point2 g{dot(f.basis[0], rel), dot(f.basis[1], rel)};
        const double offset = 0.5 * (dist * dist - h2);
        // the point Y keeps plane points w with 2 g·w <= |Y - C|² - r²/4
        if (norm(g) <= degeneracy_tol * std::max(r, dist)) {
          if (offset < 0.0) f.vertices.clear();
        } else {
          add({g, offset, false});
        }
        return stop_radius();
      },
      stop_radius());
  if (f.empty()) f.vertices.clear();
  return f;
}

/// Length of the part of the circle of radius rho around the frame origin
/// that lies inside every constraint of the polygon.
inline double circle_polygon_arclength(const FacetPolygon& poly, double rho) {
  if (!(rho > 0.0)) throw Error("circle radius must be positive");
  if (poly.empty()) return 0.0;

  struct Arc {
    double a, b;
  };
  std::vector<Arc> arcs{{0.0, two_pi}};
  for (const auto& hp : poly.constraints) {
    const double g = norm(hp.normal);
    if (g == 0.0) {
      if (hp.offset < 0.0) return 0.0;
      continue;
    }
    const double ratio = hp.offset / (rho * g);
    if (ratio >= 1.0) continue;
    if (ratio <= -1.0) return 0.0;
    // rho·g·cos(t − phi) <= offset keeps |t − phi| >= alpha
    const double alpha = std::acos(ratio);
    const double phi = std::atan2(hp.normal[1], hp.normal[0]);
    double start = std::fmod(phi + alpha, two_pi);
    if (start < 0.0) start += two_pi;
    const double end = start + two_pi - 2.0 * alpha;
    std::array<Arc, 2> pieces{};
    std::size_t n_pieces = 0;
    if (end <= two_pi) {
      pieces[n_pieces++] = {start, end};
    } else {
      pieces[n_pieces++] = {start, two_pi};
      pieces[n_pieces++] = {0.0, end - two_pi};
    }
    std::vector<Arc> next;
    for (const auto& arc : arcs)
      for (std::size_t p = 0; p < n_pieces; ++p) {
        const double a = std::max(arc.a, pieces[p].a);
        const double b = std::min(arc.b, pieces[p].b);
        if (a < b) next.push_back({a, b});
      }
    arcs = std::move(next);
    if (arcs.empty()) return 0.0;
  }
  double total = 0.0;
  for (const auto& arc : arcs) total += arc.b - arc.a;
  return rho * total;
}

}  // namespace pvangle
