#pragma once

#include <algorithm>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "rotset/boxgrid.hpp"
#include "rotset/dynamics.hpp"
#include "rotset/parallel.hpp"

namespace rotset {

struct UnsoundParams : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One over-approximated image box of a base box: the lifted target is
// (base_i + k*shift_s, base_j + k*shift_t) with (base_i, base_j) in [0,k)^2.
// Stored relative to the box class, the same record serves every integer
// translate of the source box.
struct TransitionTarget {
  std::int32_t base_i = 0;
  std::int32_t base_j = 0;
  std::int32_t shift_s = 0;
  std::int32_t shift_t = 0;

  friend bool operator==(const TransitionTarget&,
                         const TransitionTarget&) = default;
  friend auto operator<=>(const TransitionTarget&,
                          const TransitionTarget&) = default;
};

// Same arc seen from the destination class; advance() partitions work by
// destination so concurrent layer updates never share output words.
struct IncomingArc {
  std::int32_t src_i = 0;
  std::int32_t src_j = 0;
  std::int32_t shift_s = 0;
  std::int32_t shift_t = 0;
};

struct TransitionTable {
  int k = 0;
  int m = 0;
  double reach = 0.0;  // R in the box-image definition
  double eta = 0.0;
  double lipschitz = 0.0;
  bool sound = false;  // reach >= lipschitz * eta
  std::string map_label;

  // outgoing[j*k + i]: canonical (sorted, deduplicated) target list of base
  // box (i,j); incoming[j*k + i]: arcs whose destination class is (i,j).
  std::vector<std::vector<TransitionTarget>> outgoing;
  std::vector<std::vector<IncomingArc>> incoming;

  // envelope of per-step class-coordinate shifts, for window growth
  std::int32_t shift_s_min = 0, shift_s_max = 0;
  std::int32_t shift_t_min = 0, shift_t_max = 0;

  const std::vector<TransitionTarget>& targets(int i, int j) const {
    return outgoing[static_cast<std::size_t>(j) * k + i];
  }

  std::size_t total_targets() const {
    std::size_t n = 0;
    for (const auto& v : outgoing) n += v.size();
    return n;
  }
};

struct BuildOptions {
  int threads = 1;
  bool allow_unsound = false;  // skip the R >= L*eta safety check
};

namespace detail {

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b) != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}

inline std::int64_t floor_mod(std::int64_t a, std::int64_t b) {
  return a - floor_div(a, b) * b;
}

inline std::uint64_t pack_target(std::int64_t bi, std::int64_t bj,
                                 std::int64_t s, std::int64_t t) {
  return (static_cast<std::uint64_t>(bi) << 48) |
         (static_cast<std::uint64_t>(bj) << 32) |
         (static_cast<std::uint64_t>(static_cast<std::uint16_t>(s + 0x8000))
          << 16) |
         static_cast<std::uint64_t>(static_cast<std::uint16_t>(t + 0x8000));
}

inline TransitionTarget unpack_target(std::uint64_t v) {
  TransitionTarget t;
  t.base_i = static_cast<std::int32_t>((v >> 48) & 0xffff);
  t.base_j = static_cast<std::int32_t>((v >> 32) & 0xffff);
  t.shift_s = static_cast<std::int32_t>((v >> 16) & 0xffff) - 0x8000;
  t.shift_t = static_cast<std::int32_t>(v & 0xffff) - 0x8000;
  return t;
}

}  // namespace detail

namespace detail {

// Derives the destination-partitioned arc lists and the shift envelope from
// the outgoing lists.
template <typename Table>
inline void rebuild_incoming(Table& table) {
  const int k = table.k;
  table.incoming.assign(table.outgoing.size(), {});
  bool first = true;
  for (std::size_t idx = 0; idx < table.outgoing.size(); ++idx) {
    const int bi = static_cast<int>(idx % k);
    const int bj = static_cast<int>(idx / k);
    for (const auto& t : table.outgoing[idx]) {
      table.incoming[static_cast<std::size_t>(t.base_j) * k + t.base_i]
          .push_back({bi, bj, t.shift_s, t.shift_t});
      if (first) {
        table.shift_s_min = table.shift_s_max = t.shift_s;
        table.shift_t_min = table.shift_t_max = t.shift_t;
        first = false;
      } else {
        table.shift_s_min = std::min(table.shift_s_min, t.shift_s);
        table.shift_s_max = std::max(table.shift_s_max, t.shift_s);
        table.shift_t_min = std::min(table.shift_t_min, t.shift_t);
        table.shift_t_max = std::max(table.shift_t_max, t.shift_t);
      }
    }
  }
}

}  // namespace detail

// Box images I(B) = { B' : exists x in the test grid of B with
// d(F(x), B') <= R }, computed once per base box in [0,k)^2.
inline TransitionTable build_table(const MapSpec& map, int k, int m, double R,
                                   const BuildOptions& opts = {}) {
  if (k < 1 || k > 30000)
    throw std::invalid_argument("build_table: k out of range");
  if (m < 2) throw std::invalid_argument("build_table: m must be >= 2");
  if (!(R >= 0.0) || !std::isfinite(R))
    throw std::invalid_argument("build_table: R must be finite and >= 0");
  const double evals = static_cast<double>(k) * k * m * m;
  if (evals > 4e9)
    throw std::invalid_argument("build_table: k^2 m^2 evaluation count too large");

  TransitionTable table;
  table.k = k;
  table.m = m;
  table.reach = R;
  table.map_label = map.label;
  table.lipschitz = lipschitz_bound(map);
  table.eta = std::numbers::sqrt2 / (static_cast<double>(k) * (m - 1));
  table.sound = R >= table.lipschitz * table.eta;
  if (!table.sound && !opts.allow_unsound)
    throw UnsoundParams("build_table: R < L*eta; box images may miss true "
                        "image boxes (pass allow_unsound to override)");

  const std::size_t nboxes = static_cast<std::size_t>(k) * k;
  table.outgoing.resize(nboxes);

  parallel_for_chunks(nboxes, opts.threads, [&](std::size_t lo, std::size_t hi) {
    std::vector<std::uint64_t> hits;
    for (std::size_t idx = lo; idx < hi; ++idx) {
      const int bi = static_cast<int>(idx % k);
      const int bj = static_cast<int>(idx / k);
      hits.clear();
      for (const Vec2& x : test_points({bi, bj}, k, m)) {
        const Vec2 y = eval(map, x);
        boxes_near_visit(y, R, k, [&](BoxIndex b) {
          const std::int64_t s = detail::floor_div(b.i, k);
          const std::int64_t t = detail::floor_div(b.j, k);
          if (std::abs(s) > 30000 || std::abs(t) > 30000)
            throw std::invalid_argument(
                "build_table: per-step box displacement too large");
          hits.push_back(
              detail::pack_target(b.i - s * k, b.j - t * k, s, t));
        });
      }
      std::sort(hits.begin(), hits.end());
      hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
      auto& out = table.outgoing[idx];
      out.reserve(hits.size());
      for (std::uint64_t h : hits) out.push_back(detail::unpack_target(h));
      std::sort(out.begin(), out.end());
    }
  });

  detail::rebuild_incoming(table);
  return table;
}

// Image of an arbitrary lifted box, read off the stored base-box entry:
// I(B + t) = I(B) + t.
inline std::vector<BoxIndex> image_of(const TransitionTable& table,
                                      BoxIndex box) {
  const int k = table.k;
  if (k < 1) throw std::invalid_argument("image_of: empty table");
  const std::int64_t s = detail::floor_div(box.i, k);
  const std::int64_t t = detail::floor_div(box.j, k);
  const std::int64_t bi = box.i - s * k;
  const std::int64_t bj = box.j - t * k;
  const auto& targets =
      table.outgoing[static_cast<std::size_t>(bj) * k + bi];
  std::vector<BoxIndex> out;
  out.reserve(targets.size());
  for (const TransitionTarget& tg : targets)
    out.push_back({tg.base_i + k * (tg.shift_s + s),
                   tg.base_j + k * (tg.shift_t + t)});
  return out;
}

}  // namespace rotset
