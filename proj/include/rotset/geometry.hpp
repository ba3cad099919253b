#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rotset/evolve.hpp"
#include "rotset/vec.hpp"

namespace rotset {

// Comparison slack absorbing floating-point rounding in distance tests.
inline constexpr double kGeomSlack = 1e-12;

// Convex polygon, counter-clockwise, no duplicate or collinear interior
// vertices. Degenerate inputs (a point, a segment) keep 1 or 2 vertices and
// are flagged.
struct Polygon {
  std::vector<Vec2> vertices;
  bool degenerate = false;
};

// Andrew's monotone chain.
inline Polygon convex_hull(std::vector<Vec2> pts) {
  if (pts.empty()) throw std::domain_error("convex_hull: empty input");
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  Polygon poly;
  if (pts.size() == 1) {
    poly.vertices = pts;
    poly.degenerate = true;
    return poly;
  }

  const std::size_t n = pts.size();
  std::vector<Vec2> hull(2 * n);
  std::size_t h = 0;
  for (std::size_t i = 0; i < n; ++i) {  // lower chain
    while (h >= 2 && cross(hull[h - 2], hull[h - 1], pts[i]) <= 0.0) --h;
    hull[h++] = pts[i];
  }
  const std::size_t lower = h + 1;
  for (std::size_t i = n - 1; i-- > 0;) {  // upper chain
    while (h >= lower && cross(hull[h - 2], hull[h - 1], pts[i]) <= 0.0) --h;
    hull[h++] = pts[i];
  }
  hull.resize(h - 1);  // last point repeats the first

  if (hull.size() == 2) {
    poly.vertices = {hull[0], hull[1]};
    poly.degenerate = true;
    return poly;
  }
  poly.vertices = std::move(hull);
  return poly;
}

inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = ab.x * ab.x + ab.y * ab.y;
  if (len2 == 0.0) return dist(p, a);
  double t = ((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return dist(p, {a.x + t * ab.x, a.y + t * ab.y});
}

// Distance from p to the polygon as a region: 0 inside.
inline double distance_to_polygon(Vec2 p, const Polygon& poly) {
  const auto& v = poly.vertices;
  if (v.empty()) throw std::domain_error("distance_to_polygon: empty polygon");
  if (v.size() == 1) return dist(p, v[0]);
  if (v.size() == 2) return point_segment_distance(p, v[0], v[1]);
  bool inside = true;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2 a = v[i];
    const Vec2 b = v[(i + 1) % v.size()];
    if (cross(a, b, p) < 0.0) inside = false;
    best = std::min(best, point_segment_distance(p, a, b));
  }
  return inside ? 0.0 : best;
}

// Hausdorff distance between two finite point sets (max of the two directed
// sup-min distances).
inline double hausdorff_points(const std::vector<Vec2>& a,
                               const std::vector<Vec2>& b) {
  if (a.empty() || b.empty())
    throw std::domain_error("hausdorff_points: empty input");
  auto directed = [](const std::vector<Vec2>& from,
                     const std::vector<Vec2>& to) {
    double worst = 0.0;
    for (Vec2 p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (Vec2 q : to) best = std::min(best, dist(p, q));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

// Vertices plus points spaced at most `step` apart along every edge.
inline std::vector<Vec2> polygon_boundary_samples(const Polygon& poly,
                                                  double step) {
  if (!(step > 0.0))
    throw std::invalid_argument("polygon_boundary_samples: step must be > 0");
  const auto& v = poly.vertices;
  if (v.empty())
    throw std::domain_error("polygon_boundary_samples: empty polygon");
  if (v.size() == 1) return {v[0]};
  std::vector<Vec2> out;
  const std::size_t nedges = v.size() == 2 ? 1 : v.size();
  for (std::size_t i = 0; i < nedges; ++i) {
    const Vec2 a = v[i];
    const Vec2 b = v[(i + 1) % v.size()];
    const double len = dist(a, b);
    const long pieces = std::max(1L, static_cast<long>(std::ceil(len / step)));
    for (long s = 0; s < pieces; ++s) {
      const double t = static_cast<double>(s) / pieces;
      out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
    }
  }
  if (v.size() == 2) out.push_back(v[1]);
  return out;
}

// Exact Euclidean distance from p to the occupied boxes of Q_n*, by an
// expanding ring scan in normalised index space. Stops as soon as the ring
// lower bound exceeds the best hit (or `cap`, when given); returns +inf if
// nothing lies within cap.
inline double distance_to_approx(const RotationApprox& approx, Vec2 p,
                                 double cap
                                 = std::numeric_limits<double>::infinity()) {
  const BoxSet& q = approx.boxes;
  const double denom = approx.norm_denom();
  const double qx = p.x * denom;
  const double qy = p.y * denom;
  if (!std::isfinite(qx) || !std::isfinite(qy))
    throw std::domain_error("distance_to_approx: non-finite point");
  auto cell_distance = [&](std::int64_t i, std::int64_t j) {
    const double dx = std::max({static_cast<double>(i) - qx,
                                qx - static_cast<double>(i + 1), 0.0});
    const double dy = std::max({static_cast<double>(j) - qy,
                                qy - static_cast<double>(j + 1), 0.0});
    return std::hypot(dx, dy);
  };
  const std::int64_t ci = detail::floor_to_index(qx);
  const std::int64_t cj = detail::floor_to_index(qy);
  // Never scan further than the window itself requires.
  const std::int64_t span =
      std::max({ci - q.min_i(), q.max_i() - ci, cj - q.min_j(),
                q.max_j() - cj, std::int64_t{1}}) + 1;
  double best = std::numeric_limits<double>::infinity();
  const double cap_scaled = cap * denom;
  for (std::int64_t r = 0; r <= span; ++r) {
    const double ring_lower = static_cast<double>(r - 1);
    if (ring_lower > best || ring_lower > cap_scaled) break;
    const std::int64_t ilo = ci - r, ihi = ci + r;
    const std::int64_t jlo = cj - r, jhi = cj + r;
    auto probe = [&](std::int64_t i, std::int64_t j) {
      if (q.contains(i, j)) best = std::min(best, cell_distance(i, j));
    };
    for (std::int64_t i = ilo; i <= ihi; ++i) {
      probe(i, jlo);
      if (jhi != jlo) probe(i, jhi);
    }
    for (std::int64_t j = jlo + 1; j < jhi; ++j) {
      probe(ilo, j);
      if (ihi != ilo) probe(ihi, j);
    }
  }
  return best / denom;
}

// True iff every point is within delta of some occupied box of Q_n*
// (exact box distance, no sampling).
inline bool covered_by_neighborhood(const std::vector<Vec2>& points,
                                    const RotationApprox& approx,
                                    double delta) {
  if (!(delta >= 0.0))
    throw std::invalid_argument("covered_by_neighborhood: delta must be >= 0");
  for (Vec2 p : points)
    if (!(distance_to_approx(approx, p, delta * 2 + 1e-9) <=
          delta + kGeomSlack))
      return false;
  return true;
}

// Estimates dH(Q_n*, P) as the maximum of (a) the exact directed distance
// from Q_n* to the region P (a convex function, so its supremum over Q_n* is
// attained at hull vertices, all of which are extreme corners) and (b) the
// directed distance sampled on the delta-spaced boundary of P. The reported
// value carries additive uncertainty at most delta from the sampling side.
inline double hausdorff_to_polygon(const RotationApprox& approx,
                                   const Polygon& poly, double boundary_step) {
  if (!(boundary_step > 0.0))
    throw std::invalid_argument("hausdorff_to_polygon: step must be > 0");
  double a_side = 0.0;
  for (Vec2 c : extreme_corners(approx))
    a_side = std::max(a_side, distance_to_polygon(c, poly));
  double b_side = 0.0;
  for (Vec2 s : polygon_boundary_samples(poly, boundary_step))
    b_side = std::max(b_side, distance_to_approx(approx, s));
  return std::max(a_side, b_side);
}

inline Polygon make_rect(double x0, double x1, double y0, double y1) {
  if (!(x0 <= x1) || !(y0 <= y1))
    throw std::invalid_argument("make_rect: need x0<=x1, y0<=y1");
  Polygon p;
  if (x0 == x1 && y0 == y1) {
    p.vertices = {{x0, y0}};
    p.degenerate = true;
  } else if (x0 == x1 || y0 == y1) {
    p.vertices = {{x0, y0}, {x1, y1}};
    p.degenerate = true;
  } else {
    p.vertices = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  }
  return p;
}

}  // namespace rotset
