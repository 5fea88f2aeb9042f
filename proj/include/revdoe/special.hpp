#pragma once

// Distribution functions needed for effect confidence intervals and the
// chi-square goodness-of-fit test. Quantiles are found by bisection on the
// CDF, so they are deterministic and need no tables.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "revdoe/error.hpp"

namespace revdoe::special {

namespace detail {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int max_iterations = 1000;
  constexpr double eps = 1e-16;
  constexpr double tiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge");
}

// Bisection for a monotone increasing cdf on [lo, hi].
template <typename Cdf>
double bisect(Cdf&& cdf, double target, double lo, double hi) {
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (cdf(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  revdoe::detail::require(a > 0.0 && b > 0.0, "incomplete beta needs a, b > 0");
  revdoe::detail::require(x >= 0.0 && x <= 1.0, "incomplete beta needs x in [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Inverse of I_x(a, b) in x.
inline double inverse_incomplete_beta(double a, double b, double p) {
  revdoe::detail::require(p >= 0.0 && p <= 1.0, "probability must lie in [0, 1]");
  if (p == 0.0 || p == 1.0) return p;
  return detail::bisect([&](double x) { return incomplete_beta(a, b, x); }, p, 0.0, 1.0);
}

/// Regularized lower incomplete gamma P(a, x).
inline double incomplete_gamma(double a, double x) {
  revdoe::detail::require(a > 0.0, "incomplete gamma needs a > 0");
  revdoe::detail::require(x >= 0.0, "incomplete gamma needs x >= 0");
  if (x == 0.0) return 0.0;
  const double log_front = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 10000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-17) break;
    }
    return sum * std::exp(log_front);
  }
  // Continued fraction for Q(a, x).
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
  return 1.0 - std::exp(log_front) * h;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double normal_quantile(double p) {
  revdoe::detail::require(p > 0.0 && p < 1.0, "normal quantile needs p in (0, 1)");
  return detail::bisect(normal_cdf, p, -40.0, 40.0);
}

inline double student_t_cdf(double t, double dof) {
  revdoe::detail::require(dof > 0.0, "degrees of freedom must be positive");
  const double x = dof / (dof + t * t);
  const double tail = 0.5 * incomplete_beta(0.5 * dof, 0.5, x);
  return t > 0.0 ? 1.0 - tail : tail;
}

/// Quantile of Student's t: inverts the tail relation
/// P(|T| > t) = I_{ν/(ν+t²)}(ν/2, 1/2).
inline double student_t_quantile(double p, double dof) {
  revdoe::detail::require(dof > 0.0, "degrees of freedom must be positive");
  revdoe::detail::require(p > 0.0 && p < 1.0, "t quantile needs p in (0, 1)");
  if (p == 0.5) return 0.0;
  const double two_tail = 2.0 * std::min(p, 1.0 - p);
  const double x = inverse_incomplete_beta(0.5 * dof, 0.5, two_tail);
  const double t = std::sqrt(dof * (1.0 / x - 1.0));
  return p > 0.5 ? t : -t;
}

inline double chi_square_cdf(double x, double dof) {
  revdoe::detail::require(dof > 0.0, "degrees of freedom must be positive");
  if (x <= 0.0) return 0.0;
  return incomplete_gamma(0.5 * dof, 0.5 * x);
}

inline double chi_square_quantile(double p, double dof) {
  revdoe::detail::require(dof > 0.0, "degrees of freedom must be positive");
  revdoe::detail::require(p > 0.0 && p < 1.0, "chi-square quantile needs p in (0, 1)");
  double hi = std::max(1.0, dof);
  while (chi_square_cdf(hi, dof) < p) hi *= 2.0;
  return detail::bisect([&](double x) { return chi_square_cdf(x, dof); }, p, 0.0, hi);
}

}  // namespace revdoe::special
