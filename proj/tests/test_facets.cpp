#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pvangle/facets.hpp"

using namespace pvangle;

namespace {

const OrderedPair<2> flat_pair{Point2{-1, 0}, Point2{1, 0}, 0, 1};
const OrderedPair<3> flat_pair3{Point3{-1, 0, 0}, Point3{1, 0, 0}, 0, 1};

PointSample<2> with_pair(std::vector<Point2> others, double half) {
  std::vector<Point2> pts{flat_pair.first, flat_pair.second};
  pts.insert(pts.end(), others.begin(), others.end());
  return make_sample(pts, Window<2>::centered(half));
}

PointSample<3> with_pair3(std::vector<Point3> others, double half) {
  std::vector<Point3> pts{flat_pair3.first, flat_pair3.second};
  pts.insert(pts.end(), others.begin(), others.end());
  return make_sample(pts, Window<3>::centered(half));
}

// Facet interval using every point with no early stop, clamped to the window.
FacetInterval brute_interval(const PointSample<2>& s, const OrderedPair<2>& pair) {
  FacetInterval f;
  f.pair = pair;
  f.center = pair.center();
  f.direction = bisector_direction_2d(pair);
  f.lo = -1e300;
  f.hi = 1e300;
  for (std::size_t i = 0; i < 2; ++i) {
    if (f.direction[i] == 0) continue;
    double a = (s.window.lo[i] - f.center[i]) / f.direction[i];
    double b = (s.window.hi[i] - f.center[i]) / f.direction[i];
    f.lo = std::max(f.lo, std::min(a, b));
    f.hi = std::min(f.hi, std::max(a, b));
  }
  for (std::size_t k = 0; k < s.points.size(); ++k) {
    if (k == pair.first_id || k == pair.second_id) continue;
    // |C + s n − A|² <= |C + s n − Y|²  reduces to  g·s <= b
    const Point2 a = pair.first - f.center, y = s.points[k] - f.center;
    const double g = 2 * (dot(f.direction, y) - dot(f.direction, a));
    const double b = squared_norm(y) - squared_norm(a);
    if (g > 0) f.hi = std::min(f.hi, b / g);
    else if (g < 0) f.lo = std::max(f.lo, b / g);
    else if (b < 0) f.lo = 1e300;
  }
  return f;
}

}  // namespace

TEST(FacetInterval, NoOtherPointsGivesWindowChord) {
  const auto s = with_pair({}, 5.0);
  const GridIndex<2> index(s);
  const auto f = facet_interval_2d(flat_pair, index);
  EXPECT_DOUBLE_EQ(f.lo, -5.0);
  EXPECT_DOUBLE_EQ(f.hi, 5.0);
  EXPECT_TRUE(f.lo_at_window && f.hi_at_window);
}

TEST(FacetInterval, SinglePointCutsAtThreeQuarters) {
  const auto s = with_pair({Point2{0, 2}}, 5.0);
  const GridIndex<2> index(s);
  const auto f = facet_interval_2d(flat_pair, index);
  // the bisector direction points down, so the side toward (0,2) is s < 0
  EXPECT_EQ(f.direction, (Point2{0, -1}));
  EXPECT_NEAR(f.lo, -0.75, 1e-12);
  EXPECT_FALSE(f.lo_at_window);
  EXPECT_DOUBLE_EQ(f.hi, 5.0);
  EXPECT_NEAR(f.at(f.lo)[1], 0.75, 1e-12);
}

TEST(FacetInterval, NearbyPointEmptiesTheWindowedFacet) {
  const auto s = with_pair({Point2{0, 0.1}}, 2.0);
  const GridIndex<2> index(s);
  const auto f = facet_interval_2d(flat_pair, index);
  EXPECT_TRUE(f.empty());
  // brute-force sampling of the bisector inside the window
  for (double y = -2; y <= 2; y += 1e-3) {
    const Point2 p{0, y};
    EXPECT_LT(distance(p, Point2{0, 0.1}), distance(p, flat_pair.first));
  }
}

TEST(FacetInterval, MatchesAllPointsVersionOnRandomConfigurations) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Point2> pts(20);
    for (auto& p : pts) p = Point2{u(gen), u(gen)};
    const auto s = make_sample(pts, Window<2>::centered(3.0));
    const GridIndex<2> index(s);
    const auto pair = lex_order(pts[0], pts[1], std::size_t{0}, std::size_t{1});
    const auto fast = facet_interval_2d(pair, index);
    const auto slow = brute_interval(s, pair);
    ASSERT_EQ(fast.empty(), slow.empty()) << "trial " << trial;
    if (fast.empty()) continue;
    EXPECT_NEAR(fast.lo, slow.lo, 1e-9);
    EXPECT_NEAR(fast.hi, slow.hi, 1e-9);
    // interior points pass the empty-ball test
    for (int k = 1; k < 10; ++k) {
      const double t = fast.lo + (fast.hi - fast.lo) * k / 10.0;
      const Point2 z = fast.at(t);
      const double R = distance(z, pair.first);
      for (std::size_t j = 2; j < pts.size(); ++j) EXPECT_GE(distance(z, pts[j]), R * (1 - 1e-9));
    }
  }
}

TEST(FacetPolygon, NoOtherPointsGivesWindowSlice) {
  const auto s = with_pair3({}, 4.0);
  const GridIndex<3> index(s);
  const auto f = facet_polygon_3d(flat_pair3, index);
  ASSERT_FALSE(f.empty());
  EXPECT_NEAR(polygon_area(f.vertices), 64.0, 1e-9);
  EXPECT_TRUE(f.contains_center());
  EXPECT_TRUE(f.touches_window());
  for (const auto& v : f.vertices) {
    const Point3 p = f.to_space(v);
    EXPECT_NEAR(distance(p, flat_pair3.first), distance(p, flat_pair3.second), 1e-9);
  }
}

TEST(FacetPolygon, SinglePointCutsAtThreeQuarters) {
  const auto s = with_pair3({Point3{0, 2, 0}}, 4.0);
  const GridIndex<3> index(s);
  const auto f = facet_polygon_3d(flat_pair3, index);
  ASSERT_FALSE(f.empty());
  double max_y = -1e9;
  for (const auto& v : f.vertices) max_y = std::max(max_y, f.to_space(v)[1]);
  EXPECT_NEAR(max_y, 0.75, 1e-9);
  // square [-4, 4]² in (y, z) cut at y = 3/4
  EXPECT_NEAR(polygon_area(f.vertices), 8.0 * 4.75, 1e-9);
}

TEST(FacetPolygon, NearbyPointEmptiesTheWindowedFacet) {
  const auto s = with_pair3({Point3{0, 0.1, 0}}, 2.0);
  const GridIndex<3> index(s);
  EXPECT_TRUE(facet_polygon_3d(flat_pair3, index).empty());
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 10000; ++i) {
    const Point3 p{0, u(gen), u(gen)};
    EXPECT_LT(distance(p, Point3{0, 0.1, 0}), distance(p, flat_pair3.first));
  }
}

TEST(FacetPolygon, IsConvexAndEquidistantOnRandomConfigurations) {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> u(-2, 2);
  int nonempty = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Point3> pts(30);
    for (auto& p : pts) p = Point3{u(gen), u(gen), u(gen)};
    const auto s = make_sample(pts, Window<3>::centered(2.0));
    const GridIndex<3> index(s);
    const auto pair = lex_order(pts[0], pts[1], std::size_t{0}, std::size_t{1});
    const auto f = facet_polygon_3d(pair, index);
    if (f.empty()) continue;
    ++nonempty;
    const std::size_t n = f.vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 a = f.vertices[i], b = f.vertices[(i + 1) % n], c = f.vertices[(i + 2) % n];
      const double turn = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
      EXPECT_GE(turn, -1e-9);
      const Point3 p = f.to_space(a);
      const double R = distance(p, pair.first);
      EXPECT_NEAR(R, distance(p, pair.second), 1e-9);
      for (std::size_t j = 2; j < pts.size(); ++j) EXPECT_GE(distance(p, pts[j]), R - 1e-9);
    }
  }
  EXPECT_GT(nonempty, 20);
}

TEST(CircleArc, FullCircleInsideSquare) {
  const auto f = FacetPolygon::from_halfplanes({}, 2.0);
  EXPECT_NEAR(circle_polygon_arclength(f, 1.0), two_pi, 1e-12);
}

TEST(CircleArc, HalfCircle) {
  const auto f = FacetPolygon::from_halfplanes({{Point2{1, 0}, 0.0}}, 2.0);
  EXPECT_NEAR(circle_polygon_arclength(f, 1.0), pi, 1e-12);
}

TEST(CircleArc, QuarterCircleAgainstAngularSampling) {
  const auto f = FacetPolygon::from_halfplanes({{Point2{1, 0}, 0.0}, {Point2{0, 1}, 0.0}}, 2.0);
  EXPECT_NEAR(circle_polygon_arclength(f, 1.0), pi / 2, 1e-12);
  long inside = 0;
  const long n = 1000000;
  for (long k = 0; k < n; ++k) {
    const double t = two_pi * (k + 0.5) / n;
    if (std::cos(t) <= 0 && std::sin(t) <= 0) ++inside;
  }
  EXPECT_NEAR(two_pi * inside / n, pi / 2, 1e-5);
}

TEST(CircleArc, EmptyPolygonAndBadRadius) {
  const auto f = FacetPolygon::from_halfplanes({{Point2{1, 0}, -5.0}}, 2.0);
  EXPECT_TRUE(f.empty());
  EXPECT_EQ(circle_polygon_arclength(f, 1.0), 0.0);
  EXPECT_THROW(circle_polygon_arclength(FacetPolygon::from_halfplanes({}, 1.0), 0.0), Error);
}

TEST(CircleArc, AgreesWithMonteCarloOnRandomPolygons) {
  std::mt19937_64 gen(29);
  std::uniform_real_distribution<double> u(-1, 1), ang(0, two_pi);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<HalfPlane> hps;
    for (int k = 0; k < 4; ++k) {
      const double a = ang(gen);
      hps.push_back({Point2{std::cos(a), std::sin(a)}, 0.8 + 0.5 * u(gen)});
    }
    const auto f = FacetPolygon::from_halfplanes(hps, 3.0);
    const double rho = 1.0;
    const double exact = circle_polygon_arclength(f, rho);
    const int n = 100000;
    int hit = 0;
    for (int k = 0; k < n; ++k) {
      const double t = ang(gen);
      const Point2 p{rho * std::cos(t), rho * std::sin(t)};
      bool ok = !f.empty();
      for (const auto& hp : hps) ok = ok && dot(hp.normal, p) <= hp.offset;
      hit += ok;
    }
    const double frac = static_cast<double>(hit) / n;
    const double se = std::sqrt(frac * (1 - frac) / n) * two_pi * rho;
    EXPECT_LE(std::abs(exact - two_pi * rho * frac), 3 * se + 1e-9) << "trial " << trial;
  }
}
