#pragma once

/**
 * @file stats.hpp
 * @brief Data synthesis and diagnostics: Gaussian fitting and seeded
 * generation, chi-square goodness of fit, principal-component variance split
 * of the two cost factors, and interaction-plot cell means.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "revdoe/error.hpp"
#include "revdoe/factorial.hpp"
#include "revdoe/linalg.hpp"
#include "revdoe/special.hpp"

namespace revdoe {

/**
 * xoshiro256** 1.0 (Blackman & Vigna), state seeded by four SplitMix64 draws
 * from the 64-bit seed.
 *
 * SplitMix64:  x += 0x9e3779b97f4a7c15;
 *              z = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9;
 *              z = (z ^ (z >> 27)) * 0x94d049bb133111eb;  return z ^ (z >> 31)
 * xoshiro256**: out = rotl(s1 * 5, 7) * 9;  t = s1 << 17;
 *               s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3; s2 ^= t; s3 = rotl(s3, 45)
 *
 * Uniform doubles take the top 53 bits: (next() >> 11) · 2⁻⁵³ ∈ [0, 1).
 * Satisfies std::uniform_random_bit_generator.
 */
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) noexcept {
    std::uint64_t x = seed;
    for (auto& s : state_) s = splitmix64(x);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  static std::uint64_t splitmix64(std::uint64_t& x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> state_{};
};

struct GaussianSpec {
  double mean = 0.0;
  double std_dev = 1.0;

  void validate() const {
    detail::require(std::isfinite(mean), "Gaussian mean must be finite");
    detail::require(std::isfinite(std_dev) && std_dev > 0.0, "Gaussian standard deviation must be positive");
  }
};

/// Sample mean and (n − 1) standard deviation.
inline GaussianSpec fit_gaussian(std::span<const double> samples) {
  detail::require(samples.size() >= 2, "fitting a Gaussian needs at least 2 samples");
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(samples.size());
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(samples.size() - 1));
  detail::require(sd > 0.0, "samples have zero variance: degenerate Gaussian");
  GaussianSpec spec{mean, sd};
  spec.validate();
  return spec;
}

/// n draws via basic Box-Muller using both variates of each pair:
/// u1 = 1 − U, u2 = U', r = √(−2 ln u1), emits r·cos(2πu2) then r·sin(2πu2).
inline std::vector<double> generate_gaussian(const GaussianSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  detail::require(n >= 1, "sample count must be positive");
  Xoshiro256 rng(seed);
  std::vector<double> out;
  out.reserve(n + 1);
  while (out.size() < n) {
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out.push_back(spec.mean + spec.std_dev * r * std::cos(angle));
    out.push_back(spec.mean + spec.std_dev * r * std::sin(angle));
  }
  out.resize(n);
  return out;
}

struct GofReport {
  double statistic = 0.0;
  std::size_t degrees_of_freedom = 0;
  double significance = 0.0;
  double critical_value = 0.0;
  bool h0_rejected = false;
  std::vector<double> bin_edges;  ///< interior edges, bins − 1 of them
  std::vector<std::size_t> counts;
  double expected_per_bin = 0.0;
};

/// The null hypothesis is rejected only when the statistic strictly exceeds
/// the critical value.
inline bool reject_null(double statistic, double critical_value) noexcept { return statistic > critical_value; }

/// Number of equal-probability bins used for n samples: ⌊n/5⌋ within [5, 10].
inline std::size_t gof_bin_count(std::size_t n) noexcept { return std::clamp<std::size_t>(n / 5, 5, 10); }

/**
 * Chi-square goodness of fit of `samples` against `spec` with
 * equal-probability bins under the null. Two parameters are taken as fitted,
 * so df = bins − 3.
 */
inline GofReport chi_square_gof(std::span<const double> samples, const GaussianSpec& spec, double significance = 0.05) {
  spec.validate();
  detail::require(significance > 0.0 && significance < 1.0, "significance must lie strictly between 0 and 1");
  const std::size_t n = samples.size();
  const std::size_t bins = gof_bin_count(n);
  const double expected = static_cast<double>(n) / static_cast<double>(bins);
  if (expected < 1.0) {
    throw ValidationError("too few samples for a chi-square test: " + std::to_string(n) + " samples give " +
                          std::to_string(expected) + " expected per bin (< 1)");
  }

  GofReport report;
  report.significance = significance;
  report.expected_per_bin = expected;
  for (std::size_t k = 1; k < bins; ++k) {
    const double z = special::normal_quantile(static_cast<double>(k) / static_cast<double>(bins));
    report.bin_edges.push_back(spec.mean + spec.std_dev * z);
  }
  report.counts.assign(bins, 0);
  for (double v : samples) {
    detail::require(std::isfinite(v), "samples must be finite");
    const auto bin = static_cast<std::size_t>(
        std::upper_bound(report.bin_edges.begin(), report.bin_edges.end(), v) - report.bin_edges.begin());
    ++report.counts[bin];
  }
  for (std::size_t c : report.counts) {
    const double diff = static_cast<double>(c) - expected;
    report.statistic += diff * diff / expected;
  }
  report.degrees_of_freedom = bins - 3;
  report.critical_value =
      special::chi_square_quantile(1.0 - significance, static_cast<double>(report.degrees_of_freedom));
  report.h0_rejected = reject_null(report.statistic, report.critical_value);
  return report;
}

struct PrfReport {
  std::array<double, 2> fractions{};                 ///< descending, sum to 1
  std::array<double, 2> variances{};                 ///< covariance eigenvalues
  std::array<std::array<double, 2>, 2> directions{};  ///< unit principal directions
  std::array<double, 3> covariance{};                ///< (var server, cov, var power)
};

/// Principal-component split of the 2×2 sample covariance of
/// (server, power-and-cooling) rows.
inline PrfReport prf(std::span<const std::array<double, 2>> rows) {
  detail::require(rows.size() >= 3, "principal component split needs at least 3 rows");
  std::array<double, 2> mean{};
  for (const auto& r : rows) {
    detail::require(std::isfinite(r[0]) && std::isfinite(r[1]), "rows must be finite");
    mean[0] += r[0];
    mean[1] += r[1];
  }
  mean[0] /= static_cast<double>(rows.size());
  mean[1] /= static_cast<double>(rows.size());
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& r : rows) {
    sxx += (r[0] - mean[0]) * (r[0] - mean[0]);
    sxy += (r[0] - mean[0]) * (r[1] - mean[1]);
    syy += (r[1] - mean[1]) * (r[1] - mean[1]);
  }
  const double denom = static_cast<double>(rows.size() - 1);
  sxx /= denom;
  sxy /= denom;
  syy /= denom;
  if (!(sxx + syy > 0.0)) throw ValidationError("covariance matrix is zero: no variance to split");

  const auto eig = linalg::symmetric_eigen(linalg::Matrix{{sxx, sxy}, {sxy, syy}});
  PrfReport report;
  report.covariance = {sxx, sxy, syy};
  const double trace = sxx + syy;
  for (std::size_t k = 0; k < 2; ++k) {
    report.variances[k] = std::max(0.0, eig.values[k]);
    report.directions[k] = {eig.vectors(0, k), eig.vectors(1, k)};
  }
  report.fractions = {report.variances[0] / trace, report.variances[1] / trace};
  const double total = report.fractions[0] + report.fractions[1];
  report.fractions[0] /= total;
  report.fractions[1] /= total;
  return report;
}

/// Overload for a cost dataset (server, power-and-cooling columns).
inline PrfReport prf(const CostDataset& data) {
  std::vector<std::array<double, 2>> rows;
  rows.reserve(data.size());
  for (const auto& r : data.rows()) rows.push_back({r.server_cost, r.power_cooling_cost});
  return prf(rows);
}

/// Cell means arranged for an interaction plot: one series per factor-2
/// level, each running over factor 1 low → high.
struct InteractionSeries {
  struct Point {
    int factor1_level = 0;
    double mean = 0.0;
  };
  struct Series {
    int factor2_level = 0;
    std::array<Point, 2> points{};
  };
  std::array<Series, 2> series{};
  /// |ΔA at B=+1 − ΔA at B=−1|; zero for parallel lines, equal to 4·|qAB|.
  double deviation = 0.0;
};

inline InteractionSeries interaction_cell_means(const Design22& design) {
  InteractionSeries out;
  for (std::size_t s = 0; s < 2; ++s) {
    const int b = s == 0 ? -1 : 1;
    out.series[s].factor2_level = b;
    out.series[s].points = {{{-1, design.cell_mean(-1, b)}, {1, design.cell_mean(1, b)}}};
  }
  const double delta_low = out.series[0].points[1].mean - out.series[0].points[0].mean;
  const double delta_high = out.series[1].points[1].mean - out.series[1].points[0].mean;
  out.deviation = std::abs(delta_high - delta_low);
  return out;
}

}  // namespace revdoe
