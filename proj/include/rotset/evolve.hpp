#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rotset/transition.hpp"

namespace rotset {

// Occupancy set of lifted boxes at fixed resolution k.
//
// Layout: boxes are grouped by class c = (i mod k, j mod k); within a class
// the remaining coordinates (u,v) = (i div k, j div k) live on a common
// rectangular window [u0,u0+w) x [v0,v0+h), one bit each, rows padded to
// whole 64-bit words plus one spare word so shifted row blits never write
// out of bounds. Because a transition target maps class coordinates (u,v)
// to (u+shift_s, v+shift_t) with a class-independent shift, one layer update
// is a word-level shift-and-OR per (class, target) pair.
inline constexpr std::int64_t kDefaultMaxWindowBits = 16'000'000'000;

class BoxSet {
 public:
  BoxSet() = default;

  BoxSet(int k, std::int64_t u0, std::int64_t v0, std::int64_t w,
         std::int64_t h, std::int64_t max_bits = kDefaultMaxWindowBits)
      : k_(k), u0_(u0), v0_(v0), w_(w), h_(h) {
    if (k < 1) throw std::invalid_argument("BoxSet: k must be >= 1");
    if (w < 1 || h < 1) throw std::invalid_argument("BoxSet: empty window");
    const double bits = static_cast<double>(k) * k * w * h;
    if (bits > static_cast<double>(max_bits))
      throw std::overflow_error("BoxSet: window too large");
    if (std::abs(u0) + w > (std::int64_t{1} << 52) / k ||
        std::abs(v0) + h > (std::int64_t{1} << 52) / k)
      throw std::overflow_error("BoxSet: index magnitude out of range");
    wpr_ = static_cast<std::size_t>((w + 63) / 64) + 1;
    bits_.assign(static_cast<std::size_t>(k) * k * h * wpr_, 0);
  }

  int resolution() const { return k_; }
  std::int64_t class_u0() const { return u0_; }
  std::int64_t class_v0() const { return v0_; }
  std::int64_t class_width() const { return w_; }
  std::int64_t class_height() const { return h_; }

  // Bounding window of the occupied boxes (half-open; empty set gives an
  // empty range). The internal allocation is class-aligned and can be wider.
  std::int64_t min_i() const { return occ_min_i_; }
  std::int64_t max_i() const { return occ_max_i_ + 1; }
  std::int64_t min_j() const { return occ_min_j_; }
  std::int64_t max_j() const { return occ_max_j_ + 1; }

  bool contains(std::int64_t i, std::int64_t j) const {
    const std::int64_t u = detail::floor_div(i, k_) - u0_;
    const std::int64_t v = detail::floor_div(j, k_) - v0_;
    if (u < 0 || u >= w_ || v < 0 || v >= h_) return false;
    const std::int64_t a = i - (u + u0_) * k_;
    const std::int64_t b = j - (v + v0_) * k_;
    const std::uint64_t word =
        bits_[row_offset(a, b, v) + static_cast<std::size_t>(u >> 6)];
    return (word >> (u & 63)) & 1u;
  }

  void insert(std::int64_t i, std::int64_t j) {
    const std::int64_t u = detail::floor_div(i, k_) - u0_;
    const std::int64_t v = detail::floor_div(j, k_) - v0_;
    if (u < 0 || u >= w_ || v < 0 || v >= h_)
      throw std::out_of_range("BoxSet::insert: index outside window");
    const std::int64_t a = i - (u + u0_) * k_;
    const std::int64_t b = j - (v + v0_) * k_;
    bits_[row_offset(a, b, v) + static_cast<std::size_t>(u >> 6)] |=
        std::uint64_t{1} << (u & 63);
    note_occupied(i, j);
  }

  std::uint64_t count() const {
    std::uint64_t n = 0;
    for (std::uint64_t w : bits_) n += std::popcount(w);
    return n;
  }

  bool class_empty(int a, int b) const {
    const std::size_t base = class_offset(a, b);
    for (std::size_t idx = 0; idx < static_cast<std::size_t>(h_) * wpr_; ++idx)
      if (bits_[base + idx]) return false;
    return true;
  }

  // Canonical enumeration: j ascending, then i ascending.
  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::int64_t j = min_j(); j < max_j(); ++j)
      for (std::int64_t i = min_i(); i < max_i(); ++i)
        if (contains(i, j)) fn(BoxIndex{i, j});
  }

  std::vector<BoxIndex> sorted_indices() const {
    std::vector<BoxIndex> out;
    out.reserve(count());
    for (std::int64_t i = min_i(); i < max_i(); ++i)
      for (std::int64_t j = min_j(); j < max_j(); ++j)
        if (contains(i, j)) out.push_back({i, j});
    return out;
  }

  friend bool operator==(const BoxSet& a, const BoxSet& b) {
    if (a.k_ != b.k_ || a.count() != b.count()) return false;
    bool same = true;
    a.for_each([&](BoxIndex x) { same = same && b.contains(x.i, x.j); });
    return same;
  }

  const std::uint64_t* class_rows(int a, int b) const {
    return bits_.data() + class_offset(a, b);
  }
  std::uint64_t* class_rows(int a, int b) {
    return bits_.data() + class_offset(a, b);
  }
  std::size_t words_per_row() const { return wpr_; }

  // Rescans the bitmap for the occupied bounding window; required after
  // writing through class_rows() directly, as advance() does.
  void recompute_occupied_bounds() {
    occ_min_i_ = occ_min_j_ = 0;
    occ_max_i_ = occ_max_j_ = -1;
    bool any = false;
    for (int b = 0; b < k_; ++b)
      for (int a = 0; a < k_; ++a) {
        const std::uint64_t* rows = class_rows(a, b);
        for (std::int64_t v = 0; v < h_; ++v) {
          const std::uint64_t* row = rows + static_cast<std::size_t>(v) * wpr_;
          for (std::size_t wi = 0; wi + 1 < wpr_; ++wi) {
            std::uint64_t word = row[wi];
            if (!word) continue;
            const int lo = std::countr_zero(word);
            const int hi = 63 - std::countl_zero(word);
            const std::int64_t base = u0_ + static_cast<std::int64_t>(wi) * 64;
            const std::int64_t j = (v0_ + v) * k_ + b;
            const std::int64_t ilo = (base + lo) * k_ + a;
            const std::int64_t ihi = (base + hi) * k_ + a;
            if (!any) {
              occ_min_i_ = ilo;
              occ_max_i_ = ihi;
              occ_min_j_ = occ_max_j_ = j;
              any = true;
            } else {
              occ_min_i_ = std::min(occ_min_i_, ilo);
              occ_max_i_ = std::max(occ_max_i_, ihi);
              occ_min_j_ = std::min(occ_min_j_, j);
              occ_max_j_ = std::max(occ_max_j_, j);
            }
          }
        }
      }
  }

 private:
  void note_occupied(std::int64_t i, std::int64_t j) {
    if (occ_max_i_ < occ_min_i_) {
      occ_min_i_ = occ_max_i_ = i;
      occ_min_j_ = occ_max_j_ = j;
    } else {
      occ_min_i_ = std::min(occ_min_i_, i);
      occ_max_i_ = std::max(occ_max_i_, i);
      occ_min_j_ = std::min(occ_min_j_, j);
      occ_max_j_ = std::max(occ_max_j_, j);
    }
  }
  std::size_t class_offset(std::int64_t a, std::int64_t b) const {
    return (static_cast<std::size_t>(b) * k_ + static_cast<std::size_t>(a)) *
           static_cast<std::size_t>(h_) * wpr_;
  }
  std::size_t row_offset(std::int64_t a, std::int64_t b,
                         std::int64_t v) const {
    return class_offset(a, b) + static_cast<std::size_t>(v) * wpr_;
  }

  int k_ = 0;
  std::int64_t u0_ = 0, v0_ = 0, w_ = 0, h_ = 0;
  std::size_t wpr_ = 0;
  std::int64_t occ_min_i_ = 0, occ_max_i_ = -1;
  std::int64_t occ_min_j_ = 0, occ_max_j_ = -1;
  std::vector<std::uint64_t> bits_;
};

// Q_0: the k^2 boxes covering the unit square.
inline BoxSet initial_set(int k) {
  BoxSet s(k, 0, 0, 1, 1);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i) s.insert(i, j);
  return s;
}

namespace detail {

// OR all rows of one source class into a destination class, shifted by
// `bit_shift` bits within rows and `row_shift` whole rows. Source tail bits
// past the valid width are zero by construction, and bit_shift is bounded by
// the destination widening, so nothing spills.
inline void blit_class(const std::uint64_t* src, std::size_t src_wpr,
                       std::int64_t src_h, std::uint64_t* dst,
                       std::size_t dst_wpr, std::int64_t bit_shift,
                       std::int64_t row_shift) {
  const std::size_t word_off = static_cast<std::size_t>(bit_shift >> 6);
  const int sub = static_cast<int>(bit_shift & 63);
  for (std::int64_t v = 0; v < src_h; ++v) {
    const std::uint64_t* srow = src + static_cast<std::size_t>(v) * src_wpr;
    std::uint64_t* drow =
        dst + static_cast<std::size_t>(v + row_shift) * dst_wpr + word_off;
    if (sub == 0) {
      for (std::size_t w = 0; w + 1 < src_wpr; ++w) drow[w] |= srow[w];
    } else {
      for (std::size_t w = 0; w + 1 < src_wpr; ++w) {
        const std::uint64_t x = srow[w];
        drow[w] |= x << sub;
        drow[w + 1] |= x >> (64 - sub);
      }
    }
  }
}

}  // namespace detail

struct AdvanceOptions {
  int threads = 1;
  std::int64_t max_window_bits = kDefaultMaxWindowBits;
};

// One layer step: the union of image_of(B) over all occupied B, per the
// covering iteration (not cumulative; a layer may lose boxes).
inline BoxSet advance(const TransitionTable& table, const BoxSet& s,
                      const AdvanceOptions& opts = {}) {
  const int k = table.k;
  if (k != s.resolution())
    throw std::invalid_argument("advance: table/set resolution mismatch");
  BoxSet out(k, s.class_u0() + table.shift_s_min,
             s.class_v0() + table.shift_t_min,
             s.class_width() + (table.shift_s_max - table.shift_s_min),
             s.class_height() + (table.shift_t_max - table.shift_t_min),
             opts.max_window_bits);

  std::vector<bool> src_empty(static_cast<std::size_t>(k) * k);
  for (int b = 0; b < k; ++b)
    for (int a = 0; a < k; ++a)
      src_empty[static_cast<std::size_t>(b) * k + a] = s.class_empty(a, b);

  // Partitioned by destination class: no two tasks write the same words.
  parallel_for_chunks(
      static_cast<std::size_t>(k) * k, opts.threads,
      [&](std::size_t lo, std::size_t hi) {
        for (std::size_t dest = lo; dest < hi; ++dest) {
          const int di = static_cast<int>(dest % k);
          const int dj = static_cast<int>(dest / k);
          std::uint64_t* drows = out.class_rows(di, dj);
          for (const IncomingArc& arc : table.incoming[dest]) {
            if (src_empty[static_cast<std::size_t>(arc.src_j) * k +
                          arc.src_i])
              continue;
            detail::blit_class(
                s.class_rows(arc.src_i, arc.src_j), s.words_per_row(),
                s.class_height(), drows, out.words_per_row(),
                arc.shift_s - table.shift_s_min,
                arc.shift_t - table.shift_t_min);
          }
        }
      });
  out.recompute_occupied_bounds();
  return out;
}

struct RunOptions {
  double reach = -1.0;  // R; default sqrt(2)/k
  int m = -1;           // default ceil(L) + 1
  int threads = 1;
  bool allow_unsound = false;
  std::int64_t max_window_bits = kDefaultMaxWindowBits;
};

struct RotationApprox {
  std::string map_label;
  int k = 0;
  int n = 0;
  int m = 0;
  double reach = 0.0;
  double eta = 0.0;
  double lipschitz = 0.0;
  bool sound = true;
  BoxSet boxes;                             // Q_n, unnormalised
  std::vector<std::uint64_t> layer_counts;  // occupied count per layer, 0..n

  // Q_n* = Q_n / n: boxes of side exactly 1/(n*k).
  double norm_denom() const {
    return static_cast<double>(k) * static_cast<double>(n);
  }
};

// Runs the full iteration: Q_0 = unit square covering, n layer steps,
// recording per-layer occupied counts.
inline RotationApprox run(const MapSpec& map, int k, int n,
                          const RunOptions& opts = {}) {
  if (n < 1) throw std::invalid_argument("run: n must be >= 1");
  const double L = lipschitz_bound(map);
  const int m = opts.m > 0 ? opts.m : default_test_grid_size(L);
  const double R = opts.reach >= 0.0 ? opts.reach : std::numbers::sqrt2 / k;
  BuildOptions bopts;
  bopts.threads = opts.threads;
  bopts.allow_unsound = opts.allow_unsound;
  TransitionTable table = build_table(map, k, m, R, bopts);

  RotationApprox result;
  result.map_label = map.label;
  result.k = k;
  result.n = n;
  result.m = m;
  result.reach = R;
  result.eta = table.eta;
  result.lipschitz = table.lipschitz;
  result.sound = table.sound;

  BoxSet s = initial_set(k);
  result.layer_counts.push_back(s.count());
  AdvanceOptions aopts{opts.threads, opts.max_window_bits};
  for (int layer = 1; layer <= n; ++layer) {
    try {
      s = advance(table, s, aopts);
    } catch (const std::overflow_error& e) {
      throw std::overflow_error("run: layer " + std::to_string(layer) + ": " +
                                e.what());
    }
    result.layer_counts.push_back(s.count());
  }
  result.boxes = std::move(s);
  return result;
}

// All corners of the lowest and highest occupied box in every column of Q_n,
// scaled by 1/n. The convex hull of this list equals the hull of all box
// corners of Q_n*: any directional maximiser with a vertical component is a
// top/bottom corner of a column-extreme box, and purely horizontal support
// is realised by the extreme columns, which are present too.
inline std::vector<Vec2> extreme_corners(const RotationApprox& approx) {
  if (approx.n < 1 || approx.boxes.count() == 0)
    throw std::domain_error("extreme_corners: empty approximation");
  const double denom = approx.norm_denom();
  std::vector<Vec2> out;
  const BoxSet& q = approx.boxes;
  for (std::int64_t i = q.min_i(); i < q.max_i(); ++i) {
    std::int64_t jmin = 0, jmax = 0;
    bool any = false;
    for (std::int64_t j = q.min_j(); j < q.max_j(); ++j) {
      if (!q.contains(i, j)) continue;
      if (!any) {
        jmin = jmax = j;
        any = true;
      } else {
        jmax = j;
      }
    }
    if (!any) continue;
    const double x0 = static_cast<double>(i) / denom;
    const double x1 = static_cast<double>(i + 1) / denom;
    auto emit_box = [&](std::int64_t j) {
      const double y0 = static_cast<double>(j) / denom;
      const double y1 = static_cast<double>(j + 1) / denom;
      out.push_back({x0, y0});
      out.push_back({x1, y0});
      out.push_back({x0, y1});
      out.push_back({x1, y1});
    };
    emit_box(jmin);
    if (jmax != jmin) emit_box(jmax);
  }
  return out;
}

}  // namespace rotset
