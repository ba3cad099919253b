#include <catch2/catch_amalgamated.hpp>

#include "rotset/geometry.hpp"
#include "rotset/sampling.hpp"
#include "test_support.hpp"

using namespace rotset;
using Catch::Approx;

namespace {

// Builds a tiny RotationApprox directly from a box list.
RotationApprox approx_from_boxes(int k, int n,
                                 const std::vector<BoxIndex>& boxes) {
  RotationApprox a;
  a.map_label = "test";
  a.k = k;
  a.n = n;
  a.m = 2;
  std::int64_t ulo = 0, uhi = 0, vlo = 0, vhi = 0;
  bool first = true;
  for (BoxIndex b : boxes) {
    const std::int64_t u = detail::floor_div(b.i, k);
    const std::int64_t v = detail::floor_div(b.j, k);
    if (first) {
      ulo = uhi = u;
      vlo = vhi = v;
      first = false;
    } else {
      ulo = std::min(ulo, u);
      uhi = std::max(uhi, u);
      vlo = std::min(vlo, v);
      vhi = std::max(vhi, v);
    }
  }
  a.boxes = BoxSet(k, ulo, vlo, uhi - ulo + 1, vhi - vlo + 1);
  for (BoxIndex b : boxes) a.boxes.insert(b.i, b.j);
  return a;
}

}  // namespace

TEST_CASE("convex hull of a square with an interior point") {
  const Polygon h =
      convex_hull({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}});
  REQUIRE(h.vertices.size() == 4);
  CHECK_FALSE(h.degenerate);
  // counter-clockwise from the lexicographic minimum
  CHECK(h.vertices[0] == Vec2{0, 0});
  CHECK(h.vertices[1] == Vec2{1, 0});
  CHECK(h.vertices[2] == Vec2{1, 1});
  CHECK(h.vertices[3] == Vec2{0, 1});
}

TEST_CASE("convex hull degenerate cases") {
  const Polygon point = convex_hull({{2, 3}});
  CHECK(point.degenerate);
  REQUIRE(point.vertices.size() == 1);

  const Polygon seg = convex_hull({{0, 0}, {1, 1}, {2, 2}, {0.5, 0.5}});
  CHECK(seg.degenerate);
  REQUIRE(seg.vertices.size() == 2);

  CHECK_THROWS_AS(convex_hull({}), std::domain_error);
}

TEST_CASE("convex hull of random disc points: containment oracle") {
  auto g = testsup::rng(21);
  std::vector<Vec2> pts;
  for (int i = 0; i < 1000; ++i) {
    const double r = std::sqrt(testsup::uniform(g, 0, 1));
    const double t = testsup::uniform(g, 0, 2 * std::numbers::pi);
    pts.push_back({r * std::cos(t), r * std::sin(t)});
  }
  const Polygon h = convex_hull(pts);
  REQUIRE(h.vertices.size() >= 3);
  for (const Vec2& v : h.vertices)
    CHECK(std::count(pts.begin(), pts.end(), v) == 1);
  for (const Vec2& p : pts)
    CHECK(distance_to_polygon(p, h) <= 1e-12);
  // strict convexity: all consecutive cross products positive
  const auto& v = h.vertices;
  for (std::size_t i = 0; i < v.size(); ++i)
    CHECK(cross(v[i], v[(i + 1) % v.size()], v[(i + 2) % v.size()]) > 0.0);
}

TEST_CASE("convex hull is idempotent") {
  auto g = testsup::rng(22);
  std::vector<Vec2> pts;
  for (int i = 0; i < 300; ++i)
    pts.push_back({testsup::uniform(g, -2, 2), testsup::uniform(g, -2, 2)});
  const Polygon h = convex_hull(pts);
  const Polygon h2 = convex_hull(h.vertices);
  CHECK(h2.vertices == h.vertices);
}

TEST_CASE("hausdorff_points basics") {
  const std::vector<Vec2> a = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(hausdorff_points(a, a) == 0.0);
  CHECK(hausdorff_points({{0, 0}}, {{3, 4}}) == 5.0);
  std::vector<Vec2> b = a;
  b.push_back({0.5, 0.5});
  CHECK(hausdorff_points(a, b) ==
        Approx(std::numbers::sqrt2 / 2).margin(1e-15));
  CHECK_THROWS_AS(hausdorff_points({}, a), std::domain_error);
}

TEST_CASE("hausdorff_points properties") {
  auto g = testsup::rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec2> a, b;
    for (int i = 0; i < 20; ++i) {
      a.push_back({testsup::uniform(g, -1, 1), testsup::uniform(g, -1, 1)});
      b.push_back({testsup::uniform(g, -1, 1), testsup::uniform(g, -1, 1)});
    }
    const double d = hausdorff_points(a, b);
    CHECK(d >= 0.0);
    CHECK(hausdorff_points(b, a) == d);
    CHECK(hausdorff_points(a, a) == 0.0);
    CHECK(d > 0.0);  // independent random sets differ as point sets
  }
}

TEST_CASE("hausdorff_to_polygon on exact squares") {
  const RotationApprox unit = approx_from_boxes(1, 1, {{0, 0}});
  CHECK(hausdorff_to_polygon(unit, make_rect(0, 1, 0, 1), 1e-2) == 0.0);
  CHECK(hausdorff_to_polygon(unit, make_rect(0, 2, 0, 1), 1e-3) ==
        Approx(1.0).margin(1e-3));
}

TEST_CASE("hausdorff_to_polygon decreases when boxes fill the envelope") {
  const Polygon p = make_rect(0, 2, 0, 1);
  const RotationApprox q1 = approx_from_boxes(1, 1, {{0, 0}});
  const RotationApprox q2 = approx_from_boxes(1, 1, {{0, 0}, {1, 0}});
  const double d1 = hausdorff_to_polygon(q1, p, 1e-3);
  const double d2 = hausdorff_to_polygon(q2, p, 1e-3);
  CHECK(d2 <= d1 + 1e-3);
  CHECK(d2 == 0.0);
}

TEST_CASE("covered_by_neighborhood") {
  const RotationApprox unit = approx_from_boxes(1, 1, {{0, 0}});
  CHECK(covered_by_neighborhood({{0.5, 0.5}}, unit, 0.0));
  CHECK(covered_by_neighborhood({{0.0, 1.0}, {1.0, 0.0}}, unit, 0.0));
  CHECK_FALSE(covered_by_neighborhood({{2.0, 0.5}}, unit, 0.5));
  CHECK(covered_by_neighborhood({{2.0, 0.5}}, unit, 1.0));
}

TEST_CASE("distance_to_approx matches brute force") {
  auto g = testsup::rng(29);
  std::vector<BoxIndex> boxes;
  for (int i = 0; i < 40; ++i)
    boxes.push_back({static_cast<std::int64_t>(g() % 17) - 8,
                     static_cast<std::int64_t>(g() % 17) - 8});
  const RotationApprox a = approx_from_boxes(4, 2, boxes);
  for (int trial = 0; trial < 500; ++trial) {
    const Vec2 p{testsup::uniform(g, -2, 2), testsup::uniform(g, -2, 2)};
    double expect = 1e300;
    for (BoxIndex b : boxes) {
      const double dx = std::max({b.i / 8.0 - p.x, p.x - (b.i + 1) / 8.0, 0.0});
      const double dy = std::max({b.j / 8.0 - p.y, p.y - (b.j + 1) / 8.0, 0.0});
      expect = std::min(expect, std::hypot(dx, dy));
    }
    CHECK(distance_to_approx(a, p) == Approx(expect).margin(1e-12));
  }
}

TEST_CASE("hull of K_n stays within 3*sqrt(2)/n of the sample set") {
  const MapSpec f11 = skew_product_map(1.0, 1.0);
  for (long n : {5L, 10L, 25L}) {
    const auto kn = sample_Kn(f11, n, 200);
    const Polygon hull = convex_hull(kn);
    const double bound = 3.0 * std::numbers::sqrt2 / static_cast<double>(n);
    for (const Vec2& v : hull.vertices) {
      double best = 1e300;
      for (const Vec2& s : kn) best = std::min(best, dist(v, s));
      CHECK(best <= bound);
    }
  }
}

TEST_CASE("degenerate polygon distances") {
  const Polygon point = convex_hull({{1, 1}});
  CHECK(distance_to_polygon({1, 2}, point) == 1.0);
  const Polygon seg = convex_hull({{0, 0}, {2, 0}});
  CHECK(distance_to_polygon({1, 1}, seg) == 1.0);
  CHECK(distance_to_polygon({3, 0}, seg) == 1.0);
  const auto samples = polygon_boundary_samples(seg, 0.5);
  CHECK(samples.size() >= 5);
}
