#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "rotset/dynamics.hpp"
#include "rotset/parallel.hpp"

namespace rotset {

// Reproducibility contract: all randomness comes from std::mt19937_64 with
// SplitMix64-derived stream seeds, uniform doubles are built as
// (x >> 11) * 2^-53, and disc points are drawn by rejection from the square.
// Identical seeds give identical outputs on any platform with the same
// floating-point conformance, independent of thread count.

namespace rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed;
  (void)splitmix64(s);
  s ^= 0x6a09e667f3bcc909ULL * (index + 1);
  return std::mt19937_64(splitmix64(s));
}

inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform in the closed unit disc, by rejection.
inline Vec2 unit_disc(std::mt19937_64& g) {
  while (true) {
    const double x = 2.0 * uniform01(g) - 1.0;
    const double y = 2.0 * uniform01(g) - 1.0;
    if (x * x + y * y <= 1.0) return {x, y};
  }
}

}  // namespace rng

// K_n sample on the uniform N x N torus grid {(i/N, j/N)}: normalised
// displacement vectors (F^n(x) - x)/n, row-major (y outer). Doubles as the
// direct method: plot these to approximate the rotation set pointwise.
// Since F^n(x) - x is Z^2-periodic, grid points with coordinate 1 would
// duplicate coordinate 0 and are not sampled.
inline std::vector<Vec2> sample_Kn(const MapSpec& map, long n, int N,
                                   int threads = 1) {
  if (n < 1) throw std::invalid_argument("sample_Kn: n must be >= 1");
  if (N < 2) throw std::invalid_argument("sample_Kn: N must be >= 2");
  std::vector<Vec2> out(static_cast<std::size_t>(N) * N);
  parallel_for_chunks(
      static_cast<std::size_t>(N), threads,
      [&](std::size_t rlo, std::size_t rhi) {
        for (std::size_t r = rlo; r < rhi; ++r) {
          const double y0 = static_cast<double>(r) / N;
          for (int c = 0; c < N; ++c) {
            const Vec2 x0{static_cast<double>(c) / N, y0};
            Vec2 p = x0;
            for (long s = 0; s < n; ++s) p = eval(map, p);
            out[r * N + c] = (p - x0) / static_cast<double>(n);
          }
        }
      });
  return out;
}

// eps-pseudo-orbit xi_0..xi_n with cached per-step defects
// ||F(xi_j) - xi_{j+1}|| <= eps (non-strict).
struct PseudoOrbit {
  std::vector<Vec2> points;
  double eps = 0.0;
  std::vector<double> defects;
};

struct PseudoOrbitCheck {
  bool ok = false;
  double max_defect = 0.0;
};

inline PseudoOrbitCheck is_pseudo_orbit(const MapSpec& map,
                                        const std::vector<Vec2>& seq,
                                        double eps) {
  if (seq.size() < 2)
    throw std::invalid_argument("is_pseudo_orbit: need at least 2 points");
  if (!(eps >= 0.0))
    throw std::invalid_argument("is_pseudo_orbit: eps must be >= 0");
  double worst = 0.0;
  for (std::size_t j = 0; j + 1 < seq.size(); ++j)
    worst = std::max(worst, dist(eval(map, seq[j]), seq[j + 1]));
  return {worst <= eps, worst};
}

namespace detail {

inline PseudoOrbit orbit_from_engine(const MapSpec& map, Vec2 x0, long n,
                                     double eps, std::mt19937_64& g) {
  PseudoOrbit orbit;
  orbit.eps = eps;
  orbit.points.reserve(static_cast<std::size_t>(n) + 1);
  orbit.defects.reserve(static_cast<std::size_t>(n));
  orbit.points.push_back(x0);
  Vec2 cur = x0;
  for (long j = 0; j < n; ++j) {
    const Vec2 fx = eval(map, cur);
    Vec2 next = fx;
    double defect = 0.0;
    if (eps > 0.0) {
      Vec2 u = eps * rng::unit_disc(g);
      next = fx + u;
      defect = dist(fx, next);
      // Guard against the last-bit case where rounding of fx + u pushes the
      // recomputed defect just past eps.
      while (defect > eps) {
        u = (1.0 - 0x1.0p-40) * u;
        next = fx + u;
        defect = dist(fx, next);
      }
    }
    orbit.points.push_back(next);
    orbit.defects.push_back(defect);
    cur = next;
  }
  return orbit;
}

}  // namespace detail

// xi_0 = x0, xi_{j+1} = F(xi_j) + u_j with u_j uniform in the closed
// eps-disc; deterministic given the seed.
inline PseudoOrbit random_pseudo_orbit(const MapSpec& map, Vec2 x0, long n,
                                       double eps, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("random_pseudo_orbit: n must be >= 1");
  if (!(eps >= 0.0) || !std::isfinite(eps))
    throw std::invalid_argument("random_pseudo_orbit: eps must be >= 0");
  auto g = rng::stream(seed, 0);
  return detail::orbit_from_engine(map, x0, n, eps, g);
}

// `count` vectors (xi_n - xi_0)/n from independent random pseudo-orbits with
// xi_0 uniform in the unit square: an inner approximation of K_n^eps (every
// emitted vector is a member; the set is not exhausted).
inline std::vector<Vec2> sample_Kn_eps(const MapSpec& map, long n, double eps,
                                       std::size_t count, std::uint64_t seed,
                                       int threads = 1) {
  if (n < 1) throw std::invalid_argument("sample_Kn_eps: n must be >= 1");
  if (count < 1) throw std::invalid_argument("sample_Kn_eps: count must be >= 1");
  if (!(eps >= 0.0) || !std::isfinite(eps))
    throw std::invalid_argument("sample_Kn_eps: eps must be >= 0");
  std::vector<Vec2> out(count);
  parallel_for_chunks(count, threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      auto g = rng::stream(seed, i + 1);
      const Vec2 x0{rng::uniform01(g), rng::uniform01(g)};
      const PseudoOrbit orbit = detail::orbit_from_engine(map, x0, n, eps, g);
      out[i] = (orbit.points.back() - x0) / static_cast<double>(n);
    }
  });
  return out;
}

// For an orbit of length seg*k + 1: the full rotation vector equals the
// average of the k segment vectors (telescoping, checked to 1e-12), and
// every length-(seg+1) segment is itself an eps-pseudo-orbit.
inline bool segment_average_check(const PseudoOrbit& orbit, long seg) {
  if (seg < 1)
    throw std::invalid_argument("segment_average_check: segment length >= 1");
  const std::size_t steps = orbit.points.size() - 1;
  if (orbit.points.size() < 2 || steps % static_cast<std::size_t>(seg) != 0)
    throw std::domain_error(
        "segment_average_check: orbit length must be seg*k + 1");
  const std::size_t k = steps / static_cast<std::size_t>(seg);

  for (double d : orbit.defects)
    if (!(d <= orbit.eps)) return false;

  const Vec2 full = (orbit.points.back() - orbit.points.front()) /
                    static_cast<double>(steps);
  Vec2 acc{0.0, 0.0};
  for (std::size_t i = 0; i < k; ++i) {
    const Vec2 seg_vec =
        (orbit.points[(i + 1) * seg] - orbit.points[i * seg]) /
        static_cast<double>(seg);
    acc = acc + seg_vec;
  }
  const Vec2 avg = acc / static_cast<double>(k);
  return std::abs(avg.x - full.x) <= 1e-12 && std::abs(avg.y - full.y) <= 1e-12;
}

}  // namespace rotset
