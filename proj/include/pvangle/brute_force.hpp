#pragma once

// Quadratic and cubic reference implementations, used to cross-check the
// grid index and the process extractors on small samples.

#include <algorithm>
#include <cmath>
#include <vector>

#include "pvangle/facets.hpp"
#include "pvangle/geometry.hpp"
#include "pvangle/sampling.hpp"

namespace pvangle::brute {

/// Indices within relative 1e-12 of the minimal distance, ascending.
template <std::size_t D>
std::vector<std::size_t> nearest_ties(const std::vector<Point<D>>& pts, const Point<D>& q,
                                      std::span<const std::size_t> exclude = {}) {
  auto skip = [&](std::size_t k) { return std::find(exclude.begin(), exclude.end(), k) != exclude.end(); };
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < pts.size(); ++k)
    if (!skip(k)) best = std::min(best, distance(q, pts[k]));
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < pts.size(); ++k)
    if (!skip(k) && distance(q, pts[k]) <= best * (1.0 + degeneracy_tol)) out.push_back(k);
  return out;
}

template <std::size_t D>
bool ball_empty(const std::vector<Point<D>>& pts, const Point<D>& c, double r,
                std::span<const std::size_t> exclude = {}) {
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (std::find(exclude.begin(), exclude.end(), k) != exclude.end()) continue;
    if (squared_distance(c, pts[k]) < r * r * (1.0 - 2.0 * degeneracy_tol)) return false;
  }
  return true;
}

template <std::size_t D>
std::vector<std::size_t> within(const std::vector<Point<D>>& pts, const Point<D>& q, double d) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < pts.size(); ++k)
    if (squared_distance(q, pts[k]) <= d * d) out.push_back(k);
  std::sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
    const double da = squared_distance(q, pts[a]), db = squared_distance(q, pts[b]);
    return da != db ? da < db : a < b;
  });
  return out;
}

/// Ψ_θ locations in `inner`, trying every pair, lexicographically sorted.
inline std::vector<Point2> psi_locations(const PointSample<2>& s, OrientedAngle theta,
                                         const Window<2>& inner) {
  std::vector<Point2> out;
  const auto& p = s.points;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (i == j || !lex_less(p[i], p[j])) continue;
      const OrderedPair<2> pair{p[i], p[j], i, j};
      const Point2 z = z_theta_2d(pair, theta);
      if (!inner.contains(z)) continue;
      const std::size_t ex[2] = {i, j};
      if (ball_empty(p, z, distance(z, p[i]), ex)) out.push_back(z);
    }
  }
  std::sort(out.begin(), out.end(), [](const Point2& a, const Point2& b) { return lex_less(a, b); });
  return out;
}

/// Axis crossings in [lo, hi]: every pair whose bisector meets the axis at a
/// point where exactly that pair is nearest. Returns sorted abscissae.
template <std::size_t D>
std::vector<double> crossing_positions(const PointSample<D>& s, double lo, double hi) {
  std::vector<double> out;
  const auto& p = s.points;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      const auto x = axis_crossing_point(p[i], p[j]);
      if (!x || *x < lo || *x > hi) continue;
      const auto ties = nearest_ties(p, axis_point<D>(*x));
      if (ties.size() == 2 && ties[0] == i && ties[1] == j) out.push_back(*x);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Voronoi cell of point k clipped to a square of half-side `half`, by
/// successive half-plane clipping against every other point.
inline std::vector<Point2> voronoi_cell_2d(const std::vector<Point2>& pts, std::size_t k,
                                           double half, std::vector<std::size_t>* edge_owner = nullptr) {
  const Point2 c = pts[k];
  std::vector<Point2> poly{{c[0] - half, c[1] - half}, {c[0] + half, c[1] - half},
                           {c[0] + half, c[1] + half}, {c[0] - half, c[1] + half}};
  std::vector<std::size_t> owner(4, no_id);
  for (std::size_t j = 0; j < pts.size() && !poly.empty(); ++j) {
    if (j == k) continue;
    // keep points y with |y − c|² <= |y − pj|²  <=>  (pj − c)·y <= (|pj|² − |c|²)/2
    const Point2 n = pts[j] - c;
    const double off = 0.5 * (squared_norm(pts[j]) - squared_norm(c));
    const std::size_t m = poly.size();
    std::vector<Point2> next;
    std::vector<std::size_t> next_owner;
    for (std::size_t a = 0; a < m; ++a) {
      const Point2& u = poly[a];
      const Point2& v = poly[(a + 1) % m];
      const double fu = off - dot(n, u), fv = off - dot(n, v);
      if (fu >= 0.0) {
        next.push_back(u);
        next_owner.push_back(owner[a]);
      }
      if ((fu >= 0.0) != (fv >= 0.0)) {
        const double t = fu / (fu - fv);
        next.push_back(u + t * (v - u));
        // the new vertex starts an edge on the bisector when leaving, else keeps the old edge
        next_owner.push_back(fu >= 0.0 ? j : owner[a]);
      }
    }
    poly = std::move(next);
    owner = std::move(next_owner);
  }
  if (edge_owner) *edge_owner = owner;
  return poly;
}

/// Number of distinct Voronoi neighbours of point k with an edge of positive length.
inline std::size_t voronoi_neighbour_count_2d(const std::vector<Point2>& pts, std::size_t k,
                                              double half) {
  std::vector<std::size_t> owner;
  const auto poly = voronoi_cell_2d(pts, k, half, &owner);
  std::vector<std::size_t> ids;
  for (std::size_t a = 0; a < poly.size(); ++a) {
    if (owner[a] == no_id) continue;
    if (distance(poly[a], poly[(a + 1) % poly.size()]) <= 1e-12) continue;
    ids.push_back(owner[a]);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids.size();
}

}  // namespace pvangle::brute
