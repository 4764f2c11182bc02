#pragma once

// The angle-conditioned point processes extracted from a sample:
//  - Ψ_θ, the facet points seeing their Delaunay pair under oriented angle θ;
//  - Υ, the crossings of the first axis with the tessellation, with their
//    angle marks;
//  - per-cell statistics of the typical (Palm) cell.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "pvangle/facets.hpp"
#include "pvangle/geometry.hpp"
#include "pvangle/sampling.hpp"
#include "pvangle/spatial_index.hpp"

namespace pvangle {

struct PsiPoint {
  Point2 location;
  OrderedPair<2> pair;
  OrientedAngle theta;
  double ball_radius;
};

struct PsiResult {
  std::vector<PsiPoint> points;
  /// Some accepted empty ball leaves the sample window.
  bool contaminated = false;
};

/// Points of Ψ_θ located in `inner`.
///
/// A lex-ordered pair at separation r contributes Z_θ iff the open ball at
/// Z_θ of radius R = r / (2 sin(θ/2)) holds no other point. Such a ball is
/// empty and centred in the window, so R is at most the largest empty ball
/// bound B and only pairs with r <= 2 sin(θ/2) B are tried.
inline PsiResult extract_psi_theta(const PointSample<2>& sample, const GridIndex<2>& index,
                                   OrientedAngle theta, const Window<2>& inner) {
  if (!inner.valid() || !sample.window.contains(inner))
    throw Error("inner window not contained in sample window");
  PsiResult out;
  if (sample.points.size() < 2) return out;

  const double half = 0.5 * theta.radians();
  const double sin_half = std::sin(half);
  const double cot_half = std::cos(half) / sin_half;
  const double bound = index.largest_empty_ball_bound();
  const double max_sep = 2.0 * sin_half * bound;

  for (std::size_t i = 0; i < sample.points.size(); ++i) {
    const Point2& p = sample.points[i];
    // |Z − p| = R <= bound and Z must fall in the inner window
    if (inner.distance_to(p) > bound) continue;
    for (std::size_t j : index.within(p, max_sep)) {
      const Point2& q = sample.points[j];
      if (j == i || !lex_less(p, q)) continue;
      const OrderedPair<2> pair{p, q, i, j};
      const double r = distance(p, q);
      const Point2 z = pair.center() + (0.5 * r * cot_half) * bisector_direction_2d(pair);
      if (!inner.contains(z)) continue;
      const double radius = r / (2.0 * sin_half);
      const std::array<std::size_t, 2> members{i, j};
      if (!index.ball_empty(z, radius, members)) continue;
      if (!sample.window.contains_ball(z, radius)) out.contaminated = true;
      out.points.push_back({z, pair, theta, radius});
    }
  }
  std::sort(out.points.begin(), out.points.end(),
            [](const PsiPoint& a, const PsiPoint& b) { return lex_less(a.location, b.location); });
  return out;
}

inline PsiResult extract_psi_theta(const PointSample<2>& sample, OrientedAngle theta,
                                   const Window<2>& inner) {
  const GridIndex<2> index(sample);
  return extract_psi_theta(sample, index, theta, inner);
}

template <std::size_t D>
struct Crossing {
  double x = 0.0;
  OrderedPair<D> pair;
  std::optional<double> theta_oriented;  // planar only
  double beta = 0.0;
  double R = 0.0;  // distance from the crossing to either nucleus
  double r = 0.0;  // nucleus separation
};

template <std::size_t D>
struct ScanResult {
  std::vector<Crossing<D>> crossings;
  /// A tessellation vertex on the line; the replication must be discarded.
  bool degenerate = false;
  bool contaminated = false;
  std::size_t restarts = 0;
};

/// Walks the first axis from x_lo to x_hi through the tessellation.
///
/// From position x with nearest nucleus N, only points Q with Q_0 > N_0 can
/// take over further right, at the bisector crossing x_Q. The next crossing
/// is the smallest such x_Q. Any Q crossing at y in (x, x*] satisfies
/// |Q − x| <= |N − y| + (y − x) <= max(|N − x|, |N − x*|) + (x* − x), so
/// the candidate radius is grown until it covers that bound.
template <std::size_t D>
ScanResult<D> scan_crossings(const PointSample<D>& sample, const GridIndex<D>& index,
                             double x_lo, double x_hi) {
  if (!(x_lo < x_hi)) throw Error("scan segment must have positive length");
  ScanResult<D> out;
  if (sample.points.size() < 2) return out;
  const Window<D>& w = sample.window;

  double pos = x_lo;
  std::size_t current = index.nearest(axis_point<D>(pos)).index;
  if (!w.contains_ball(axis_point<D>(pos), distance(index.point(current), axis_point<D>(pos))))
    out.contaminated = true;

  constexpr std::size_t max_restarts = 64;
  while (true) {
    const Point<D>& n = index.point(current);
    const Point<D> here = axis_point<D>(pos);
    const double d_here = distance(n, here);

    double radius = 2.0 * d_here + index.cell_size();
    double next_x = std::numeric_limits<double>::infinity();
    std::size_t next = no_id;
    bool near_tie = false;
    while (true) {
      next_x = std::numeric_limits<double>::infinity();
      next = no_id;
      near_tie = false;
      for (std::size_t k : index.within(here, radius)) {
        const Point<D>& q = index.point(k);
        if (k == current || !(q[0] > n[0])) continue;
        const auto xq = axis_crossing_point(n, q);
        if (!xq || !(*xq > pos)) continue;
        const double tol = degeneracy_tol * (1.0 + std::abs(*xq));
        if (*xq < next_x - tol) {
          next_x = *xq;
          next = k;
          near_tie = false;
        } else if (std::abs(*xq - next_x) <= tol) {
          near_tie = true;
        }
      }
      const double reach_x = std::min(next_x, x_hi);
      const double needed =
          std::max(d_here, distance(n, axis_point<D>(reach_x))) + (reach_x - pos);
      if (needed <= radius) break;
      radius = needed;
    }

    if (next == no_id || next_x > x_hi) {
      const Point<D> end = axis_point<D>(x_hi);
      if (!w.contains_ball(end, distance(n, end))) out.contaminated = true;
      break;
    }
    if (near_tie) {
      out.degenerate = true;
      break;
    }

    // certify with a fresh nearest query at the crossing
    const Point<D> z = axis_point<D>(next_x);
    const NearestResult check = index.nearest(z);
    const bool has_n = std::binary_search(check.ties.begin(), check.ties.end(), current);
    const bool has_q = std::binary_search(check.ties.begin(), check.ties.end(), next);
    if (check.ties.size() > 2 && has_n && has_q) {
      out.degenerate = true;
      break;
    }
    if (!has_n || !has_q) {
      if (++out.restarts > max_restarts) {
        out.degenerate = true;
        break;
      }
      current = check.index;
      pos = next_x;
      continue;
    }

    const Point<D>& q = index.point(next);
    Crossing<D> c;
    c.x = next_x;
    c.pair = lex_order(n, q, current, next);
    c.R = distance(n, z);
    c.r = distance(n, q);
    c.beta = unoriented_angle(c.pair.first, c.pair.second, z).radians();
    if constexpr (D == 2) c.theta_oriented = oriented_angle_2d(c.pair, z).radians();
    if (!w.contains_ball(z, c.R)) out.contaminated = true;
    if (next_x >= x_lo) out.crossings.push_back(c);

    pos = next_x;
    current = next;
  }
  return out;
}

template <std::size_t D>
ScanResult<D> scan_crossings(const PointSample<D>& sample, double x_lo, double x_hi) {
  const GridIndex<D> index(sample);
  return scan_crossings(sample, index, x_lo, x_hi);
}

/// Default guard margin for line scans and typical-cell statistics.
inline double default_margin(double lambda, std::size_t dim, double factor = 5.0) {
  return factor * std::pow(lambda, -1.0 / static_cast<double>(dim));
}

inline constexpr int max_margin_retries = 3;

/// Crossings of the segment [0, length] x {0}, sampled in the box
/// [-M, length + M] x [-M, M]^(D-1). A contaminated scan is redrawn on the
/// same stream with the margin enlarged by 1.5, at most three times.
template <std::size_t D>
ScanResult<D> simulate_line_crossings(double lambda, double length, double margin,
                                      const RandomStream& stream) {
  if (!(length > 0.0)) throw Error("segment length must be positive");
  if (!(margin > 0.0)) throw Error("margin must be positive");
  ScanResult<D> res;
  for (int attempt = 0; attempt <= max_margin_retries; ++attempt) {
    Window<D> w;
    for (std::size_t i = 0; i < D; ++i) {
      w.lo[i] = -margin;
      w.hi[i] = margin;
    }
    w.hi[0] = length + margin;
    RandomStream s = stream;
    const PointSample<D> sample = sample_poisson(lambda, w, s);
    const GridIndex<D> index(sample);
    res = scan_crossings(sample, index, 0.0, length);
    if (!res.contaminated || res.degenerate) break;
    margin *= 1.5;
  }
  return res;
}

struct TypicalCellStats {
  long psi_count_ordered = 0;  // Ψ_θ points charged to the origin as lex-first nucleus
  long psi_count_closed = 0;   // all Ψ_θ points on the boundary of the origin's cell
  long midpoint_facets = 0;
  long total_facets = 0;
  double arc_length_total = 0.0;
  long xi_count = 0;
};

struct TypicalCellResult {
  std::vector<TypicalCellStats> per_theta;
  bool contaminated = false;
};

/// Statistics of the cell of the origin in a Palm sample, one record per θ.
///
/// The Delaunay neighbours of the origin are the points X whose pair with
/// the origin has a nonempty facet. A cell vertex v is the centre of an
/// empty ball of radius |v| that lies in the window, hence |v| <= B and every
/// neighbour lies within 2B of the origin.
template <std::size_t D>
TypicalCellResult typical_cell_stats(const PointSample<D>& sample, const GridIndex<D>& index,
                                     std::span<const double> thetas) {
  if (!sample.palm) throw Error("sample is not palm-augmented");
  TypicalCellResult out;
  out.per_theta.resize(thetas.size());
  if (sample.points.size() < 2) return out;

  const Point<D> origin = sample.points[0];
  const double bound = index.largest_empty_ball_bound();
  const Window<D>& w = sample.window;

  std::vector<double> cot_half;
  for (double t : thetas) {
    const OrientedAngle theta(t);
    cot_half.push_back(std::cos(0.5 * theta.radians()) / std::sin(0.5 * theta.radians()));
  }

  for (std::size_t k : index.within(origin, 2.0 * bound)) {
    if (k == 0) continue;
    const OrderedPair<D> pair = lex_order(origin, index.point(k), std::size_t{0}, k);
    const bool origin_first = pair.first_id == 0;
    const double r = pair.separation();

    if constexpr (D == 2) {
      const FacetInterval f = facet_interval_2d(pair, index);
      if (f.empty()) continue;
      if (f.lo_at_window || f.hi_at_window ||
          !w.contains_ball(f.at(f.lo), f.nucleus_distance(f.lo)) ||
          !w.contains_ball(f.at(f.hi), f.nucleus_distance(f.hi)))
        out.contaminated = true;
      const bool mid = f.contains_center();
      for (std::size_t t = 0; t < thetas.size(); ++t) {
        auto& st = out.per_theta[t];
        ++st.total_facets;
        if (mid) {
          ++st.midpoint_facets;
          ++st.xi_count;
        }
        if (f.contains(0.5 * r * cot_half[t])) {
          ++st.psi_count_closed;
          if (origin_first) ++st.psi_count_ordered;
        }
      }
    } else {
      const FacetPolygon f = facet_polygon_3d(pair, index);
      if (f.empty()) continue;
      if (f.touches_window()) out.contaminated = true;
      for (const auto& v : f.vertices) {
        const double s = norm(v);
        if (!w.contains_ball(f.to_space(v), std::sqrt(s * s + 0.25 * r * r))) out.contaminated = true;
      }
      const bool mid = f.contains_center();
      for (std::size_t t = 0; t < thetas.size(); ++t) {
        auto& st = out.per_theta[t];
        ++st.total_facets;
        if (mid) {
          ++st.midpoint_facets;
          ++st.xi_count;
        }
        const double rho = 0.5 * r * std::abs(cot_half[t]);
        if (rho > 0.0) st.arc_length_total += circle_polygon_arclength(f, rho);
      }
    }
  }
  return out;
}

template <std::size_t D>
TypicalCellStats typical_cell_stats(const PointSample<D>& sample, OrientedAngle theta) {
  const GridIndex<D> index(sample);
  const double t = theta.radians();
  return typical_cell_stats(sample, index, std::span<const double>(&t, 1)).per_theta.front();
}

}  // namespace pvangle
