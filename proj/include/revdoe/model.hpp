#pragma once

/**
 * @file model.hpp
 * @brief Cobb-Douglas revenue model: evaluation, returns-to-scale
 * classification, budget-constrained production maximization, profit
 * maximization and revenue surfaces over elasticity grids.
 *
 * Revenue is modelled as  R = A · Π xᵢ^αᵢ  where the xᵢ are cost inputs in
 * million USD (servers, infrastructure, power, network; or the two grouped
 * factors server and power-and-cooling) and the αᵢ are output elasticities.
 */

#include <cctype>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "revdoe/error.hpp"

namespace revdoe {

inline constexpr double default_crs_tolerance = 1e-9;

enum class Regime { increasing, constant, decreasing };

inline std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::increasing: return "IRS";
    case Regime::constant: return "CRS";
    case Regime::decreasing: return "DRS";
  }
  return "?";
}

/// Accepts IRS/CRS/DRS in any letter case.
inline Regime parse_regime(std::string_view text) {
  std::string upper(text);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "IRS") return Regime::increasing;
  if (upper == "CRS") return Regime::constant;
  if (upper == "DRS") return Regime::decreasing;
  throw ValidationError("unknown returns-to-scale label '" + std::string(text) + "' (expected irs, crs or drs)");
}

/// Classifies an elasticity sum. The constant band is |sum - 1| <= tolerance.
inline Regime classify_elasticity_sum(double sum, double crs_tolerance = default_crs_tolerance) {
  if (std::abs(sum - 1.0) <= crs_tolerance) return Regime::constant;
  return sum > 1.0 ? Regime::increasing : Regime::decreasing;
}

struct ReturnsRegime {
  Regime regime;
  double elasticity_sum;
};

/// Scale constant plus one non-negative elasticity per input factor.
class CobbDouglasModel {
 public:
  CobbDouglasModel(double scale, std::vector<double> elasticities)
      : scale_(scale), elasticities_(std::move(elasticities)) {
    detail::require(std::isfinite(scale_) && scale_ > 0.0, "model scale must be positive");
    detail::require(!elasticities_.empty(), "model needs at least one elasticity");
    for (std::size_t i = 0; i < elasticities_.size(); ++i) {
      detail::require(std::isfinite(elasticities_[i]) && elasticities_[i] >= 0.0,
                      "elasticity " + std::to_string(i) + " must be non-negative");
    }
  }

  [[nodiscard]] double scale() const noexcept { return scale_; }
  [[nodiscard]] std::span<const double> elasticities() const noexcept { return elasticities_; }
  [[nodiscard]] std::size_t dimension() const noexcept { return elasticities_.size(); }
  [[nodiscard]] double elasticity_sum() const noexcept {
    return std::accumulate(elasticities_.begin(), elasticities_.end(), 0.0);
  }

 private:
  double scale_;
  std::vector<double> elasticities_;
};

/// Strictly positive input quantities, million USD.
class FactorBundle {
 public:
  explicit FactorBundle(std::vector<double> quantities) : quantities_(std::move(quantities)) {
    detail::require(!quantities_.empty(), "factor bundle is empty");
    for (std::size_t i = 0; i < quantities_.size(); ++i) {
      detail::require(std::isfinite(quantities_[i]) && quantities_[i] > 0.0,
                      "factor quantity " + std::to_string(i) + " must be positive");
    }
  }
  FactorBundle(std::initializer_list<double> quantities)
      : FactorBundle(std::vector<double>(quantities)) {}

  [[nodiscard]] std::span<const double> quantities() const noexcept { return quantities_; }
  [[nodiscard]] std::size_t size() const noexcept { return quantities_.size(); }
  double operator[](std::size_t i) const noexcept { return quantities_[i]; }

 private:
  std::vector<double> quantities_;
};

/// Unit prices wᵢ and total budget m for  Σ wᵢxᵢ = m.
struct BudgetSpec {
  std::vector<double> unit_costs;
  double budget = 0.0;

  void validate() const {
    detail::require(!unit_costs.empty(), "budget needs unit costs");
    for (double w : unit_costs) detail::require(std::isfinite(w) && w > 0.0, "unit costs must be positive");
    detail::require(std::isfinite(budget) && budget > 0.0, "budget must be positive");
  }
};

/// scale · Π xᵢ^αᵢ, evaluated in log space.
inline double evaluate(const CobbDouglasModel& model, const FactorBundle& bundle) {
  if (bundle.size() != model.dimension()) {
    throw ValidationError("bundle has " + std::to_string(bundle.size()) + " factors, model expects " +
                          std::to_string(model.dimension()));
  }
  double log_revenue = std::log(model.scale());
  for (std::size_t i = 0; i < bundle.size(); ++i)
    log_revenue += model.elasticities()[i] * std::log(bundle[i]);
  return std::exp(log_revenue);
}

inline ReturnsRegime returns_regime(const CobbDouglasModel& model,
                                    double crs_tolerance = default_crs_tolerance) {
  const double sum = model.elasticity_sum();
  return {classify_elasticity_sum(sum, crs_tolerance), sum};
}

/// Budget-constrained production maximum: xᵢ = m·αᵢ / (wᵢ·Σⱼαⱼ).
inline FactorBundle maximize_production(const CobbDouglasModel& model, const BudgetSpec& budget) {
  budget.validate();
  detail::require(budget.unit_costs.size() == model.dimension(),
                  "budget has " + std::to_string(budget.unit_costs.size()) + " unit costs, model expects " +
                      std::to_string(model.dimension()));
  for (std::size_t i = 0; i < model.dimension(); ++i) {
    detail::require(model.elasticities()[i] > 0.0,
                    "elasticity " + std::to_string(i) +
                        " is zero: the optimal demand for that factor would be zero, which is not a valid bundle");
  }
  const double sum = model.elasticity_sum();
  std::vector<double> x(model.dimension());
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = budget.budget * model.elasticities()[i] / (budget.unit_costs[i] * sum);
  return FactorBundle(std::move(x));
}

struct ProfitOptimum {
  FactorBundle bundle;
  double output;  ///< revenue f(x*) before multiplying by the price
  double profit;  ///< p·f(x*) − Σ wᵢxᵢ
};

/**
 * Interior profit maximum of  π = p·f(x) − Σ wᵢxᵢ.
 *
 * The first-order conditions p·αᵢ·f/xᵢ = wᵢ give xᵢ = p·αᵢ·f/wᵢ; substituting
 * back, ln f = (ln A + Σ αᵢ ln(p·αᵢ/wᵢ)) / (1 − Σαᵢ). Only defined under
 * decreasing returns (Σαᵢ < 1).
 */
inline ProfitOptimum maximize_profit(const CobbDouglasModel& model, double output_price,
                                     std::span<const double> unit_costs) {
  detail::require(std::isfinite(output_price) && output_price > 0.0, "output price must be positive");
  detail::require(unit_costs.size() == model.dimension(),
                  "got " + std::to_string(unit_costs.size()) + " unit costs, model expects " +
                      std::to_string(model.dimension()));
  for (double w : unit_costs) detail::require(std::isfinite(w) && w > 0.0, "unit costs must be positive");
  const double sum = model.elasticity_sum();
  if (!(sum < 1.0)) {
    std::ostringstream msg;
    msg << "no interior profit maximum: elasticities sum to " << sum
        << " (>= 1, regime " << to_string(classify_elasticity_sum(sum)) << ")";
    throw ValidationError(msg.str());
  }
  for (std::size_t i = 0; i < model.dimension(); ++i) {
    detail::require(model.elasticities()[i] > 0.0,
                    "elasticity " + std::to_string(i) + " is zero: profit-maximizing demand would be zero");
  }

  double log_output = std::log(model.scale());
  for (std::size_t i = 0; i < model.dimension(); ++i) {
    const double a = model.elasticities()[i];
    log_output += a * std::log(output_price * a / unit_costs[i]);
  }
  log_output /= (1.0 - sum);
  const double output = std::exp(log_output);

  std::vector<double> x(model.dimension());
  double cost = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = output_price * model.elasticities()[i] * output / unit_costs[i];
    cost += unit_costs[i] * x[i];
  }
  return {FactorBundle(std::move(x)), output, output_price * output - cost};
}

/// Revenue over an (α, β) grid for a fixed two-factor cost bundle.
struct RevenueSurface {
  std::vector<double> alpha_grid;
  std::vector<double> beta_grid;
  std::optional<Regime> filter;
  /// Row-major by alpha index; empty where the regime filter excluded the cell.
  std::vector<std::optional<double>> revenue;
  std::size_t argmax_alpha = 0;
  std::size_t argmax_beta = 0;

  [[nodiscard]] const std::optional<double>& at(std::size_t i, std::size_t j) const {
    return revenue[i * beta_grid.size() + j];
  }
  [[nodiscard]] double max_revenue() const { return *at(argmax_alpha, argmax_beta); }
  [[nodiscard]] std::size_t present_cells() const {
    std::size_t n = 0;
    for (const auto& r : revenue) n += r.has_value() ? 1 : 0;
    return n;
  }
};

/// Evenly spaced grid from `lo` to `hi` inclusive; the point count is rounded
/// so that floating step drift cannot drop the upper end.
inline std::vector<double> make_grid(double lo, double hi, double step) {
  detail::require(std::isfinite(lo) && std::isfinite(hi) && std::isfinite(step), "grid bounds must be finite");
  detail::require(step > 0.0, "grid step must be positive");
  detail::require(hi >= lo, "grid upper bound is below its lower bound");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t k = 0; k < count; ++k) grid[k] = lo + static_cast<double>(k) * step;
  return grid;
}

/**
 * Evaluates {scale = 1, [α, β]} at `costs` on every grid cell. Cells whose
 * α + β falls outside `filter` (classified with the same CRS band as
 * returns_regime) are left empty. The argmax over present cells breaks ties
 * by the lowest (alpha, beta) index.
 */
inline RevenueSurface revenue_surface(const FactorBundle& costs, std::span<const double> alpha_grid,
                                      std::span<const double> beta_grid, std::optional<Regime> filter = std::nullopt,
                                      double crs_tolerance = default_crs_tolerance) {
  detail::require(costs.size() == 2, "revenue surface needs a two-factor cost bundle");
  detail::require(!alpha_grid.empty() && !beta_grid.empty(), "revenue surface grid is empty");
  auto check_grid = [](std::span<const double> grid, const char* name) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      detail::require(std::isfinite(grid[k]) && grid[k] >= 0.0, std::string(name) + " grid values must be non-negative");
      if (k > 0) detail::require(grid[k] > grid[k - 1], std::string(name) + " grid must be strictly increasing");
    }
  };
  check_grid(alpha_grid, "alpha");
  check_grid(beta_grid, "beta");

  RevenueSurface surface{{alpha_grid.begin(), alpha_grid.end()},
                         {beta_grid.begin(), beta_grid.end()},
                         filter,
                         std::vector<std::optional<double>>(alpha_grid.size() * beta_grid.size()),
                         0,
                         0};
  const double log_s = std::log(costs[0]);
  const double log_p = std::log(costs[1]);
  bool found = false;
  double best = 0.0;
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    for (std::size_t j = 0; j < beta_grid.size(); ++j) {
      const double a = alpha_grid[i];
      const double b = beta_grid[j];
      if (filter && classify_elasticity_sum(a + b, crs_tolerance) != *filter) continue;
      const double r = std::exp(a * log_s + b * log_p);
      surface.revenue[i * beta_grid.size() + j] = r;
      if (!found || r > best) {
        found = true;
        best = r;
        surface.argmax_alpha = i;
        surface.argmax_beta = j;
      }
    }
  }
  if (!found) throw ValidationError("all cells filtered: no grid cell matches the requested regime");
  return surface;
}

}  // namespace revdoe
