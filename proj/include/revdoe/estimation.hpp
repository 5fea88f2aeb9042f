#pragma once

/**
 * @file estimation.hpp
 * @brief Elasticity recovery from cost/revenue data.
 *
 * Taking logs of R = K·S^α·P^β gives the linear model
 *
 *     ln R = K' + α ln S + β ln P,    K' = ln K
 *
 * which is fitted three ways: unconstrained least squares on the normal
 * equations, a constrained least-squares QP (α, β > 0, α + β ≤ 1 by default)
 * solved with the active-set method, and multiple linear regression with a
 * train/test split and the usual sum-of-squares diagnostics.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "revdoe/dataset.hpp"
#include "revdoe/error.hpp"
#include "revdoe/linalg.hpp"
#include "revdoe/model.hpp"
#include "revdoe/qp.hpp"

namespace revdoe {

/// Strict inequalities α > 0, β > 0 are enforced as α, β ≥ epsilon_strict.
inline constexpr double epsilon_strict = 1e-9;

struct DesignMatrix {
  linalg::Matrix x;
  linalg::Vector response;
  std::vector<std::string> columns;
  bool has_intercept = false;
};

namespace detail {

inline DesignMatrix build_design(const CostDataset& data, bool with_intercept, bool logs) {
  detail::require(!data.empty(), "dataset is empty");
  DesignMatrix dm;
  dm.has_intercept = with_intercept;
  if (with_intercept) dm.columns.emplace_back("intercept");
  dm.columns.emplace_back(logs ? "log_server" : "server");
  dm.columns.emplace_back(logs ? "log_power_cooling" : "power_cooling");
  dm.x = linalg::Matrix(data.size(), dm.columns.size());
  dm.response.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& row = data[i];
    if (!row.revenue) throw ValidationError("row " + std::to_string(i + 1) + ": revenue is missing");
    std::size_t c = 0;
    if (with_intercept) dm.x(i, c++) = 1.0;
    dm.x(i, c++) = logs ? std::log(row.server_cost) : row.server_cost;
    dm.x(i, c++) = logs ? std::log(row.power_cooling_cost) : row.power_cooling_cost;
    dm.response[i] = logs ? std::log(*row.revenue) : *row.revenue;
  }
  return dm;
}

}  // namespace detail

/// Response ln(revenue); columns [1], ln(server), ln(power and cooling).
inline DesignMatrix log_linearize(const CostDataset& data, bool with_intercept) {
  return detail::build_design(data, with_intercept, true);
}

/// Same layout on the raw values.
inline DesignMatrix linear_design(const CostDataset& data, bool with_intercept) {
  return detail::build_design(data, with_intercept, false);
}

/// Sum-of-squares diagnostics of a regression:
/// SSY = Σy², SS0 = n·ȳ², SST = SSY − SS0, SSR = SST − SSE, R² = SSR/SST.
struct RegressionDiagnostics {
  double ssy = 0.0;
  double ss0 = 0.0;
  double sst = 0.0;
  double sse = 0.0;
  double ssr = 0.0;
  double r_squared = 0.0;
  double r_multiple = 0.0;  ///< √R², taken as 0 when R² < 0
  bool degenerate = false;  ///< SST = 0: the response is constant and R² is undefined
};

/// Diagnostics with a caller-supplied SSE.
inline RegressionDiagnostics regression_diagnostics(std::span<const double> y, double sse) {
  RegressionDiagnostics d;
  const double n = static_cast<double>(y.size());
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= n;
  d.ssy = linalg::dot(y, y);
  d.ss0 = n * mean * mean;
  d.sst = d.ssy - d.ss0;
  d.sse = sse;
  d.ssr = d.sst - d.sse;
  double centered = 0.0;
  for (double v : y) centered += (v - mean) * (v - mean);
  if (centered <= 1e-15 * std::max(d.ssy, 1e-300)) {
    d.degenerate = true;
    d.sst = 0.0;
    d.ssr = -d.sse;
    return d;
  }
  d.r_squared = d.ssr / d.sst;
  d.r_multiple = std::sqrt(std::max(0.0, d.r_squared));
  return d;
}

struct FitResult {
  std::vector<std::string> columns;
  linalg::Vector coefficients;
  double intercept = 0.0;  ///< K' (0 when the design has no intercept)
  double alpha = 0.0;      ///< server elasticity
  double beta = 0.0;       ///< power-and-cooling elasticity
  double rss = 0.0;        ///< ‖y − Xb‖²
  RegressionDiagnostics diagnostics;
  // Filled by constrained fits only.
  std::vector<std::size_t> active_set;
  linalg::Vector multipliers;
  std::optional<KktResiduals> kkt;
  std::size_t iterations = 0;

  [[nodiscard]] ReturnsRegime regime(double crs_tolerance = default_crs_tolerance) const {
    return {classify_elasticity_sum(alpha + beta, crs_tolerance), alpha + beta};
  }
};

namespace detail {

inline double residual_sum_of_squares(const DesignMatrix& dm, std::span<const double> b) {
  const auto fitted = linalg::multiply(dm.x, b);
  double rss = 0.0;
  for (std::size_t i = 0; i < fitted.size(); ++i) rss += (dm.response[i] - fitted[i]) * (dm.response[i] - fitted[i]);
  return rss;
}

inline FitResult make_fit(const DesignMatrix& dm, linalg::Vector b) {
  FitResult fit;
  fit.columns = dm.columns;
  const std::size_t offset = dm.has_intercept ? 1 : 0;
  fit.intercept = dm.has_intercept ? b[0] : 0.0;
  fit.alpha = b[offset];
  fit.beta = b[offset + 1];
  fit.rss = residual_sum_of_squares(dm, b);
  fit.coefficients = std::move(b);
  return fit;
}

}  // namespace detail

/// Least squares via the normal equations AᵀA·x = Aᵀy (Cholesky).
inline FitResult ols(const DesignMatrix& dm) {
  const std::size_t p = dm.x.cols();
  detail::require(dm.x.rows() == dm.response.size(), "design matrix and response disagree on row count");
  detail::require(dm.x.rows() >= p, "under-determined fit: " + std::to_string(dm.x.rows()) + " rows for " +
                                        std::to_string(p) + " coefficients");
  const linalg::Matrix ata = linalg::gram(dm.x);
  const auto aty = linalg::multiply_transposed(dm.x, dm.response);
  linalg::Vector b;
  try {
    b = linalg::Cholesky(ata, 1e-12).solve(aty);
  } catch (const linalg::SingularMatrixError& e) {
    const std::string column = e.pivot() < dm.columns.size() ? dm.columns[e.pivot()] : std::to_string(e.pivot());
    throw NumericalError("rank-deficient design: normal equations are singular at pivot " +
                         std::to_string(e.pivot()) + " (column '" + column + "')");
  }
  FitResult fit = detail::make_fit(dm, b);
  // SSE = yᵀy − bᵀAᵀy for the least-squares solution.
  fit.diagnostics = regression_diagnostics(dm.response, linalg::dot(dm.response, dm.response) - linalg::dot(b, aty));
  return fit;
}

/// Inequality constraints C·[K', α, β] ≤ b and a feasible seed for the QP.
struct FitConstraints {
  linalg::Matrix c;
  linalg::Vector b;
  linalg::Vector seed;
};

/// α ≥ ε, β ≥ ε, α + β ≤ 1 seeded at K' = 0, α = 0.4, β = 0.1.
inline FitConstraints default_elasticity_constraints() {
  return {linalg::Matrix{{0.0, -1.0, 0.0}, {0.0, 0.0, -1.0}, {0.0, 1.0, 1.0}},
          {-epsilon_strict, -epsilon_strict, 1.0},
          {0.0, 0.4, 0.1}};
}

/// The least-squares objective as a QP:  xᵀ(AᵀA)x − 2yᵀAx.
inline QPProblem least_squares_qp(const DesignMatrix& dm, const FitConstraints& constraints) {
  QPProblem qp;
  qp.h = linalg::gram(dm.x);
  qp.f = linalg::multiply_transposed(dm.x, dm.response);
  for (double& v : qp.f) v *= -2.0;
  qp.c = constraints.c;
  qp.b = constraints.b;
  return qp;
}

/// Constrained log-linear fit with an intercept column.
inline FitResult constrained_fit(const CostDataset& data,
                                 const FitConstraints& constraints = default_elasticity_constraints(),
                                 QpOptions options = {}) {
  const DesignMatrix dm = log_linearize(data, true);
  detail::require(constraints.c.rows() == 0 || constraints.c.cols() == dm.x.cols(),
                  "constraint matrix must have " + std::to_string(dm.x.cols()) + " columns (K', alpha, beta)");
  detail::require(constraints.seed.size() == dm.x.cols(), "constraint seed must have 3 entries (K', alpha, beta)");
  const QPProblem qp = least_squares_qp(dm, constraints);
  const QpSolution sol = solve_qp(qp, constraints.seed, options);
  FitResult fit = detail::make_fit(dm, sol.x);
  fit.diagnostics = regression_diagnostics(dm.response, fit.rss);
  fit.active_set = sol.active_set;
  fit.multipliers = sol.multipliers;
  fit.kkt = kkt_residuals(qp, sol);
  fit.iterations = sol.iterations;
  return fit;
}

struct MlrOptions {
  bool log_space = true;
  bool zero_intercept = false;
  double train_fraction = 1.0;  ///< leading rows train, trailing rows test
};

struct Prediction {
  std::size_t row = 0;     ///< zero-based row in the input dataset
  double actual = 0.0;     ///< revenue, million USD
  double predicted = 0.0;  ///< revenue, million USD
};

struct MlrResult {
  FitResult fit;
  std::size_t train_rows = 0;
  std::vector<Prediction> held_out;
};

/// Rows used for training: ⌊fraction · n⌋, clamped to [1, n].
inline std::size_t training_rows(std::size_t n, double train_fraction) {
  detail::require(train_fraction > 0.0 && train_fraction <= 1.0, "train fraction must lie in (0, 1]");
  const auto k = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 1e-9));
  return std::clamp<std::size_t>(k, 1, n);
}

/// Multiple linear regression  y = b0 + b1·x1 + b2·x2  (x1 server, x2 power and
/// cooling, optionally all in logs), without an interaction term.
inline MlrResult mlr(const CostDataset& data, const MlrOptions& options = {}) {
  detail::require(!data.empty(), "dataset is empty");
  data.require_revenue();
  const std::size_t n_train = training_rows(data.size(), options.train_fraction);
  std::vector<CostRow> train(data.rows().begin(), data.rows().begin() + static_cast<std::ptrdiff_t>(n_train));
  const DesignMatrix dm =
      options.log_space ? log_linearize(CostDataset(train), !options.zero_intercept)
                        : linear_design(CostDataset(train), !options.zero_intercept);
  MlrResult out;
  out.fit = ols(dm);
  out.train_rows = n_train;
  for (std::size_t i = n_train; i < data.size(); ++i) {
    const auto& row = data[i];
    const double x1 = options.log_space ? std::log(row.server_cost) : row.server_cost;
    const double x2 = options.log_space ? std::log(row.power_cooling_cost) : row.power_cooling_cost;
    const double y = out.fit.intercept + out.fit.alpha * x1 + out.fit.beta * x2;
    out.held_out.push_back({i, *row.revenue, options.log_space ? std::exp(y) : y});
  }
  return out;
}

}  // namespace revdoe
