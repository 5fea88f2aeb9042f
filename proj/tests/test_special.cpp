#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "revdoe/special.hpp"
#include "test_support.hpp"

namespace sp = revdoe::special;
using revdoe::testing::simpson;

namespace {

double t_density(double x, double df) {
  const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * std::numbers::pi);
  return c * std::pow(1 + x * x / df, -(df + 1) / 2);
}

// Chi-square density after the substitution v = u²: 2u·f(u²), smooth at 0.
double chi2_density_sq(double u, double k) {
  return 2 * std::pow(u, k - 1) * std::exp(-u * u / 2 - (k / 2) * std::log(2.0) - std::lgamma(k / 2));
}

}  // namespace

TEST(Special, StudentTQuantileMatchesIntegratedDensity) {
  // CDF by integrating the density from 0, then bisection on it.
  auto cdf = [](double t, double df) { return 0.5 + simpson([df](double x) { return t_density(x, df); }, 0.0, t); };
  double lo = 0, hi = 10;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid, 4) < 0.95 ? lo : hi) = mid;
  }
  EXPECT_NEAR(lo, 2.1318, 1e-3);
  EXPECT_NEAR(sp::student_t_quantile(0.95, 4), lo, 1e-8);
}

TEST(Special, StudentTCdfAgreesWithQuadrature) {
  for (double df : {1.0, 2.5, 4.0, 12.0, 40.0})
    for (double t : {-3.0, -0.7, 0.0, 0.4, 1.9, 5.0}) {
      const double oracle = 0.5 + (t >= 0 ? 1 : -1) *
                                      simpson([df](double x) { return t_density(x, df); }, 0.0, std::abs(t));
      EXPECT_NEAR(sp::student_t_cdf(t, df), oracle, 1e-9) << "df=" << df << " t=" << t;
    }
}

TEST(Special, StudentTQuantileInvertsCdf) {
  for (double df : {1.0, 3.0, 8.0, 30.0})
    for (double p : {0.01, 0.2, 0.5, 0.9, 0.975, 0.999})
      EXPECT_NEAR(sp::student_t_cdf(sp::student_t_quantile(p, df), df), p, 1e-10);
}

TEST(Special, ChiSquareTwoDegreesHasClosedForm) {
  for (double x : {0.1, 1.0, 3.0, 7.5}) EXPECT_NEAR(sp::chi_square_cdf(x, 2), 1 - std::exp(-x / 2), 1e-12);
  EXPECT_NEAR(sp::chi_square_quantile(0.95, 2), -2 * std::log(0.05), 1e-9);
}

TEST(Special, ChiSquareCdfAgreesWithQuadrature) {
  for (double k : {1.0, 3.0, 5.0, 9.0})
    for (double x : {0.5, 2.0, 6.0, 15.0}) {
      const double oracle = simpson([k](double u) { return chi2_density_sq(u, k); }, 0.0, std::sqrt(x), 200000);
      EXPECT_NEAR(sp::chi_square_cdf(x, k), oracle, 1e-9) << "k=" << k << " x=" << x;
    }
}

TEST(Special, NormalQuantileInvertsErfc) {
  for (double p : {1e-6, 0.025, 0.3, 0.5, 0.8, 0.975})
    EXPECT_NEAR(0.5 * std::erfc(-sp::normal_quantile(p) / std::numbers::sqrt2), p, 1e-12);
}

TEST(Special, IncompleteBetaIdentities) {
  for (double x : {0.05, 0.3, 0.77}) {
    EXPECT_NEAR(sp::incomplete_beta(1, 1, x), x, 1e-13);
    EXPECT_NEAR(sp::incomplete_beta(2.5, 1, x), std::pow(x, 2.5), 1e-13);
    EXPECT_NEAR(sp::incomplete_beta(3.2, 0.7, x), 1 - sp::incomplete_beta(0.7, 3.2, 1 - x), 1e-13);
    EXPECT_NEAR(sp::inverse_incomplete_beta(2, 5, sp::incomplete_beta(2, 5, x)), x, 1e-10);
  }
  EXPECT_EQ(sp::incomplete_beta(2, 3, 0), 0.0);
  EXPECT_EQ(sp::incomplete_beta(2, 3, 1), 1.0);
}

TEST(Special, IncompleteGammaOfOneIsExponentialCdf) {
  for (double x : {0.01, 0.5, 2.0, 20.0}) EXPECT_NEAR(sp::incomplete_gamma(1, x), 1 - std::exp(-x), 1e-13);
}
