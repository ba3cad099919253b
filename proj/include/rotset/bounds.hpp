#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace rotset {

namespace detail {

inline void check_bound_args(double eps, std::int64_t n, double L) {
  if (!(L > 1.0))
    throw std::domain_error("error bounds require a Lipschitz constant L > 1");
  if (n < 1) throw std::invalid_argument("error bounds require n >= 1");
  if (!(eps >= 0.0) || !std::isfinite(eps))
    throw std::invalid_argument("error bounds require finite eps >= 0");
}

}  // namespace detail

// kappa_{eps,n} = 2 eps (L^n - 1) / (n (L - 1)): the Hausdorff gap between
// the 2eps-pseudo-orbit displacement set and the true one. Saturates to +inf
// on overflow.
inline double kappa(double eps, std::int64_t n, double L) {
  detail::check_bound_args(eps, n, L);
  if (eps == 0.0) return 0.0;
  if (n == 1) return 2.0 * eps;
  const double pow_term = std::expm1(static_cast<double>(n) * std::log(L));
  return 2.0 * eps * pow_term / (static_cast<double>(n) * (L - 1.0));
}

// The bracket (1/k)(c + 2 eps (L^k - 1)/(L - 1)) minimised inside the gamma
// formula. O(k) geometric-sum recurrence; saturates to +inf.
inline double gamma_bracket(double eps, std::int64_t k, double L, double c) {
  detail::check_bound_args(eps, k, L);
  if (!(c >= 0.0)) throw std::invalid_argument("gamma_bracket: c must be >= 0");
  double geo = 0.0;  // (L^k - 1)/(L - 1) = sum_{i<k} L^i
  for (std::int64_t i = 0; i < k; ++i) {
    geo = geo * L + 1.0;
    if (std::isinf(geo)) break;
  }
  const double noise = eps == 0.0 ? 0.0 : 2.0 * eps * geo;
  return (c + noise) / static_cast<double>(k);
}

struct GammaResult {
  double gamma = 0.0;
  std::int64_t k_n = 1;    // minimising segment length (smallest on ties)
  std::int64_t r_n = 0;    // n mod k_n
  double min_bracket = 0;  // value of the minimised bracket term
};

// gamma_{eps,n} per the quantitative error theorem:
//   (2 r_n / n)(M + eps) + (1 - r_n/n) min_{1<=k<=n} (1/k)(c + 2 eps S_k),
// with S_k = (L^k-1)/(L-1), k_n the minimising k and r_n = n mod k_n. The
// scan first fixes the minimising k of the bracket alone, then assembles
// gamma; the leading coefficient is the common value of the two equivalent
// spellings 2(r/n)(M+eps) and (r/n)(2M+2eps).
inline GammaResult gamma(double eps, std::int64_t n, double M, double L,
                         double c) {
  detail::check_bound_args(eps, n, L);
  if (!(M >= 0.0)) throw std::invalid_argument("gamma: M must be >= 0");
  if (!(c >= 0.0)) throw std::invalid_argument("gamma: c must be >= 0");
  double best = std::numeric_limits<double>::infinity();
  std::int64_t best_k = 1;
  double geo = 0.0;
  for (std::int64_t k = 1; k <= n; ++k) {
    geo = geo * L + 1.0;
    const double noise = eps == 0.0 ? 0.0 : 2.0 * eps * geo;
    const double bracket = (c + noise) / static_cast<double>(k);
    if (bracket < best) {
      best = bracket;
      best_k = k;
    }
  }
  GammaResult res;
  res.k_n = best_k;
  res.r_n = n % best_k;
  res.min_bracket = best;
  const double ratio = static_cast<double>(res.r_n) / static_cast<double>(n);
  res.gamma = 2.0 * ratio * (M + eps) + (1.0 - ratio) * best;
  return res;
}

// Total bound of the quantitative error theorem:
// max{ 2 sqrt(2)/n, sqrt(2)/n + gamma_{eps,n} }.
inline double total_error(double eps, std::int64_t n, double M, double L,
                          double c) {
  const double g = gamma(eps, n, M, L, c).gamma;
  const double base = std::numbers::sqrt2 / static_cast<double>(n);
  return std::max(2.0 * base, base + g);
}

// Under the shadowing property the exponential term drops out:
// dH(Q_n*, rho(F)) <= (sqrt(2) + 1 + c)/n.
inline double shadowing_error(double c, std::int64_t n) {
  if (!(c >= 0.0)) throw std::invalid_argument("shadowing_error: c >= 0");
  if (n < 1) throw std::invalid_argument("shadowing_error: n >= 1");
  return (std::numbers::sqrt2 + 1.0 + c) / static_cast<double>(n);
}

// Every derived bound for one parameter set. The bounded-deviation constant
// c is never guessed: without it only the eps-side quantities exist.
struct ErrorBudget {
  double eps = 0.0;
  std::int64_t n = 1;
  double M = 0.0;
  double L = 0.0;
  std::optional<double> c;

  double kappa_value = 0.0;
  std::optional<GammaResult> gamma_value;
  std::optional<double> total;
  std::optional<double> shadow;
};

inline ErrorBudget make_error_budget(double eps, std::int64_t n, double M,
                                     double L, std::optional<double> c) {
  ErrorBudget b;
  b.eps = eps;
  b.n = n;
  b.M = M;
  b.L = L;
  b.c = c;
  b.kappa_value = kappa(eps, n, L);
  if (c) {
    b.gamma_value = gamma(eps, n, M, L, *c);
    b.total = total_error(eps, n, M, L, *c);
    b.shadow = shadowing_error(*c, n);
  }
  return b;
}

}  // namespace rotset
