#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace prosocial::stats {

namespace detail {

inline double gamma_prefactor(double a, double x) { return std::exp(-x + a * std::log(x) - std::lgamma(a)); }

// P(a, x) by its power series; converges fast for x < a + 1.
inline double gamma_p_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int n = 0; n < 10000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  return sum * gamma_prefactor(a, x);
}

// Q(a, x) by its continued fraction (modified Lentz); used for x >= a + 1.
inline double gamma_q_continued_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return gamma_prefactor(a, x) * h;
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a, x). Series below x = a + 1,
/// continued fraction above.
inline double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::domain_error("regularized_gamma_p: need a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_continued_fraction(a, x);
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
inline double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::domain_error("regularized_gamma_q: need a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_continued_fraction(a, x);
}

/// Upper tail of the chi-square distribution with df degrees of freedom.
inline double chi_square_sf(double statistic, double df) {
  if (statistic <= 0.0) return 1.0;
  return regularized_gamma_q(0.5 * df, 0.5 * statistic);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

inline double logistic(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// log(1 + exp(eta)) without overflow.
inline double softplus(double eta) {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

}  // namespace prosocial::stats
