#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "rotset/vec.hpp"

namespace rotset {

// Lifts of torus maps homotopic to the identity, represented as ordered
// compositions of primitive factors (applied left to right):
//
//   hshear(alpha, a):  (x,y) -> (x + alpha*sin(2*pi*a*y), y)
//   vshear(beta,  b):  (x,y) -> (x, y + beta*sin(2*pi*b*x))
//   trans(r1, r2):     (x,y) -> (x + r1, y + r2)
//
// Every sine argument is taken on the coordinate reduced modulo 1, and eval
// splits its input into integer and fractional parts up front, so that
// eval(p + t) == eval(p) + t holds bit-exactly for integer vectors t
// (whenever p + t itself is exactly representable). The transition table
// shares one stored image per box class across all integer translates, which
// silently assumes exactly this.

enum class FactorKind { HorizontalShear, VerticalShear, Translation };

struct Factor {
  FactorKind kind = FactorKind::Translation;
  double amplitude = 0.0;  // shear strength
  int frequency = 1;       // integer wave number, >= 1
  double shift_x = 0.0;    // translation offsets
  double shift_y = 0.0;

  static Factor hshear(double amplitude, int frequency) {
    check_shear(amplitude, frequency);
    Factor f;
    f.kind = FactorKind::HorizontalShear;
    f.amplitude = amplitude;
    f.frequency = frequency;
    return f;
  }

  static Factor vshear(double amplitude, int frequency) {
    check_shear(amplitude, frequency);
    Factor f;
    f.kind = FactorKind::VerticalShear;
    f.amplitude = amplitude;
    f.frequency = frequency;
    return f;
  }

  static Factor translation(double r1, double r2) {
    if (!std::isfinite(r1) || !std::isfinite(r2))
      throw std::invalid_argument("Factor: non-finite translation");
    Factor f;
    f.kind = FactorKind::Translation;
    f.shift_x = r1;
    f.shift_y = r2;
    return f;
  }

 private:
  static void check_shear(double amplitude, int frequency) {
    if (!std::isfinite(amplitude))
      throw std::invalid_argument("Factor: non-finite shear amplitude");
    if (frequency < 1)
      throw std::invalid_argument("Factor: shear frequency must be >= 1");
  }
};

struct MapSpec {
  std::vector<Factor> factors;  // applied left to right; empty = identity
  std::string label = "id";
};

namespace detail {

inline double frac(double c) { return c - std::floor(c); }

// sin(2*pi*freq*c) evaluated on c mod 1. The multiplication order is part of
// the reproducibility contract; do not reorder.
inline double sin_turn(int freq, double c) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return std::sin(two_pi * static_cast<double>(freq) * frac(c));
}

inline void apply_factor(const Factor& f, Vec2& p) {
  switch (f.kind) {
    case FactorKind::HorizontalShear:
      p.x += f.amplitude * sin_turn(f.frequency, p.y);
      break;
    case FactorKind::VerticalShear:
      p.y += f.amplitude * sin_turn(f.frequency, p.x);
      break;
    case FactorKind::Translation:
      p.x += f.shift_x;
      p.y += f.shift_y;
      break;
  }
}

}  // namespace detail

inline Vec2 eval(const MapSpec& map, Vec2 p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y))
    throw std::domain_error("eval: non-finite point");
  const double ix = std::floor(p.x);
  const double iy = std::floor(p.y);
  Vec2 u{p.x - ix, p.y - iy};
  for (const Factor& f : map.factors) detail::apply_factor(f, u);
  return {u.x + ix, u.y + iy};
}

inline Vec2 iterate(const MapSpec& map, Vec2 p, long n) {
  if (n < 1) throw std::invalid_argument("iterate: n must be >= 1");
  for (long i = 0; i < n; ++i) p = eval(map, p);
  return p;
}

// Upper bound for max over the unit square of ||F(x) - x||. Componentwise:
// total horizontal amplitude, total vertical amplitude, combined by hypot.
// Never underestimates.
inline double displacement_bound(const MapSpec& map) {
  double ax = 0.0, ay = 0.0;
  for (const Factor& f : map.factors) {
    switch (f.kind) {
      case FactorKind::HorizontalShear:
        ax += std::abs(f.amplitude);
        break;
      case FactorKind::VerticalShear:
        ay += std::abs(f.amplitude);
        break;
      case FactorKind::Translation:
        ax += std::abs(f.shift_x);
        ay += std::abs(f.shift_y);
        break;
    }
  }
  return std::hypot(ax, ay);
}

// Product of per-factor operator-norm bounds: 1 + 2*pi*freq*|amp| for a
// shear, 1 for a translation. Kept strictly above 1, as the error-bound
// formulas require L > 1.
inline double lipschitz_bound(const MapSpec& map) {
  constexpr double floor_above_one = 1.0 + 1e-6;
  double prod = 1.0;
  for (const Factor& f : map.factors) {
    if (f.kind == FactorKind::Translation) continue;
    prod *= 1.0 + 2.0 * std::numbers::pi * f.frequency * std::abs(f.amplitude);
  }
  return std::max(floor_above_one, prod);
}

// --- map parsing -----------------------------------------------------------
//
// Accepted forms:
//   "id"                          identity
//   "fab:<alpha>:<beta>"          F_{alpha,beta} (vshear(beta,1) then
//   "fab(<alpha>,<beta>)"         hshear(alpha,1))
//   "g"                           vshear:0.125:5; hshear:0.4:8; trans:-0.2:0.25
//   "<factor>;<factor>;..."       with factor one of
//       hshear:<amp>:<freq> | vshear:<amp>:<freq> | trans:<r1>:<r2>

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline double parse_real(const std::string& tok) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("map spec: bad number '" + tok + "'");
  }
  if (used != tok.size())
    throw std::invalid_argument("map spec: bad number '" + tok + "'");
  return v;
}

inline int parse_freq(const std::string& tok) {
  std::size_t used = 0;
  long v;
  try {
    v = std::stol(tok, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("map spec: bad frequency '" + tok + "'");
  }
  if (used != tok.size() || v < 1 || v > 1000000)
    throw std::invalid_argument("map spec: bad frequency '" + tok + "'");
  return static_cast<int>(v);
}

}  // namespace detail

inline MapSpec skew_product_map(double alpha, double beta) {
  MapSpec m;
  m.factors = {Factor::vshear(beta, 1), Factor::hshear(alpha, 1)};
  m.label = "fab:" + std::to_string(alpha) + ":" + std::to_string(beta);
  return m;
}

inline MapSpec high_period_map() {
  MapSpec m;
  m.factors = {Factor::vshear(0.125, 5), Factor::hshear(0.4, 8),
               Factor::translation(-0.2, 0.25)};
  m.label = "g";
  return m;
}

inline MapSpec parse_map(const std::string& spec) {
  std::string s = spec;
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(0, 1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
  if (s.empty() || s == "id") {
    MapSpec m;
    m.label = "id";
    return m;
  }
  if (s == "g") return high_period_map();
  if (s.rfind("fab(", 0) == 0 && s.back() == ')') {
    auto args = detail::split(s.substr(4, s.size() - 5), ',');
    if (args.size() != 2)
      throw std::invalid_argument("map spec: expected fab(alpha,beta)");
    MapSpec m = skew_product_map(detail::parse_real(args[0]),
                                 detail::parse_real(args[1]));
    m.label = s;
    return m;
  }
  if (s.rfind("fab:", 0) == 0) {
    auto args = detail::split(s.substr(4), ':');
    if (args.size() != 2)
      throw std::invalid_argument("map spec: expected fab:alpha:beta");
    MapSpec m = skew_product_map(detail::parse_real(args[0]),
                                 detail::parse_real(args[1]));
    m.label = s;
    return m;
  }
  MapSpec m;
  m.label = s;
  for (const std::string& part : detail::split(s, ';')) {
    auto f = detail::split(part, ':');
    if (f.size() != 3)
      throw std::invalid_argument("map spec: bad factor '" + part + "'");
    if (f[0] == "hshear")
      m.factors.push_back(
          Factor::hshear(detail::parse_real(f[1]), detail::parse_freq(f[2])));
    else if (f[0] == "vshear")
      m.factors.push_back(
          Factor::vshear(detail::parse_real(f[1]), detail::parse_freq(f[2])));
    else if (f[0] == "trans")
      m.factors.push_back(Factor::translation(detail::parse_real(f[1]),
                                              detail::parse_real(f[2])));
    else
      throw std::invalid_argument("map spec: unknown factor '" + f[0] + "'");
  }
  return m;
}

// Composes a small extra rotation after the map (the "perturbed" variants).
inline void append_perturbation(MapSpec& map, double r1, double r2) {
  map.factors.push_back(Factor::translation(r1, r2));
  char buf[64];
  std::snprintf(buf, sizeof buf, ";trans:%g:%g", r1, r2);
  map.label += buf;
}

}  // namespace rotset
