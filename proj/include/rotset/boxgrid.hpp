#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rotset/vec.hpp"

namespace rotset {

// Geometry of the lifted box covering at resolution k: index (i,j) denotes
// the closed square [i/k,(i+1)/k] x [j/k,(j+1)/k]. Boxes overlap on their
// boundaries; box_of picks the floor-convention representative, containment
// tests always use distance <= 0 semantics.

struct BoxIndex {
  std::int64_t i = 0;
  std::int64_t j = 0;

  friend bool operator==(BoxIndex a, BoxIndex b) {
    return a.i == b.i && a.j == b.j;
  }
  friend bool operator<(BoxIndex a, BoxIndex b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  }
  friend BoxIndex operator+(BoxIndex a, BoxIndex b) {
    return {a.i + b.i, a.j + b.j};
  }
};

namespace detail {

inline std::int64_t floor_to_index(double v) {
  double f = std::floor(v);
  if (!(std::abs(f) < 9.0e15))
    throw std::overflow_error("box index out of range");
  return static_cast<std::int64_t>(f);
}

}  // namespace detail

inline BoxIndex box_of(Vec2 p, int k) {
  if (k < 1) throw std::invalid_argument("box_of: k must be >= 1");
  if (!std::isfinite(p.x) || !std::isfinite(p.y))
    throw std::domain_error("box_of: non-finite point");
  return {detail::floor_to_index(k * p.x), detail::floor_to_index(k * p.y)};
}

// Uniform m x m grid on box B, spacing 1/(k(m-1)), all four corners included,
// row-major (y outer). Grid points are computed as fl(i/k) + offset with a
// shared offset table, so test_points(B + d) == test_points(B) + (d/k)
// bit-exactly for integer index shifts d.
inline std::vector<Vec2> test_points(BoxIndex b, int k, int m) {
  if (k < 1) throw std::invalid_argument("test_points: k must be >= 1");
  if (m < 2) throw std::invalid_argument("test_points: m must be >= 2");
  std::vector<double> off(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a)
    off[a] = (static_cast<double>(a) / (m - 1)) / k;
  const double bx = static_cast<double>(b.i) / k;
  const double by = static_cast<double>(b.j) / k;
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(m) * m);
  for (int r = 0; r < m; ++r)
    for (int cidx = 0; cidx < m; ++cidx)
      pts.push_back({bx + off[cidx], by + off[r]});
  return pts;
}

// Euclidean distance from p to the closed box. Computed in k-scaled
// coordinates (where boxes are unit squares at integer corners) and divided
// by k at the end, so integer-translated queries reduce to identical
// arithmetic.
inline double point_box_distance(Vec2 p, BoxIndex b, int k) {
  const double qx = k * p.x;
  const double qy = k * p.y;
  const double bi = static_cast<double>(b.i);
  const double bj = static_cast<double>(b.j);
  const double dx = std::max({bi - qx, qx - (bi + 1.0), 0.0});
  const double dy = std::max({bj - qy, qy - (bj + 1.0), 0.0});
  return std::hypot(dx, dy) / k;
}

// Visits every box within distance R of p (non-strict). The scan rectangle
// is widened by one cell beyond the floor bounds so boxes touching at
// exactly distance R are never lost to rounding; the exact distance filter
// decides membership.
template <typename Fn>
inline void boxes_near_visit(Vec2 p, double R, int k, Fn&& fn) {
  if (k < 1) throw std::invalid_argument("boxes_near: k must be >= 1");
  if (!(R >= 0.0) || !std::isfinite(R))
    throw std::invalid_argument("boxes_near: R must be finite and >= 0");
  if (!std::isfinite(p.x) || !std::isfinite(p.y))
    throw std::domain_error("boxes_near: non-finite point");
  const double rs = k * R;
  const std::int64_t i0 = detail::floor_to_index(k * p.x - rs) - 1;
  const std::int64_t i1 = detail::floor_to_index(k * p.x + rs) + 1;
  const std::int64_t j0 = detail::floor_to_index(k * p.y - rs) - 1;
  const std::int64_t j1 = detail::floor_to_index(k * p.y + rs) + 1;
  for (std::int64_t i = i0; i <= i1; ++i)
    for (std::int64_t j = j0; j <= j1; ++j) {
      BoxIndex b{i, j};
      if (point_box_distance(p, b, k) <= R) fn(b);
    }
}

inline std::vector<BoxIndex> boxes_near(Vec2 p, double R, int k) {
  std::vector<BoxIndex> out;
  boxes_near_visit(p, R, k, [&](BoxIndex b) { out.push_back(b); });
  return out;
}

// Default test-grid size: m = ceil(L) + 1 gives eta = sqrt(2)/(k(m-1))
// <= eps/L, so the hypothesis L*eta <= R <= eps holds with R = eps =
// sqrt(2)/k.
inline int default_test_grid_size(double lipschitz) {
  double c = std::ceil(lipschitz);
  if (!(c >= 1.0) || c > 1e6)
    throw std::invalid_argument("default_test_grid_size: bad Lipschitz bound");
  return static_cast<int>(c) + 1;
}

}  // namespace rotset
