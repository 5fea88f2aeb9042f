#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "revdoe/error.hpp"
#include "revdoe/model.hpp"

namespace revdoe {

/// One observation of a data centre's cost split, million USD.
struct CostRow {
  double server_cost = 0.0;
  double power_cooling_cost = 0.0;
  std::optional<double> revenue;
};

/// Rows of (server, power-and-cooling[, revenue]). Every present value is
/// strictly positive so that the log-linear model is defined.
class CostDataset {
 public:
  CostDataset() = default;
  explicit CostDataset(std::vector<CostRow> rows, std::optional<Regime> label = std::nullopt)
      : rows_(std::move(rows)), label_(label) {
    for (std::size_t i = 0; i < rows_.size(); ++i) validate_row(rows_[i], i);
  }

  void push_back(const CostRow& row) {
    validate_row(row, rows_.size());
    rows_.push_back(row);
  }

  [[nodiscard]] const std::vector<CostRow>& rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t size() const noexcept { return rows_.size(); }
  [[nodiscard]] bool empty() const noexcept { return rows_.empty(); }
  const CostRow& operator[](std::size_t i) const noexcept { return rows_[i]; }

  [[nodiscard]] std::optional<Regime> label() const noexcept { return label_; }
  void set_label(std::optional<Regime> label) noexcept { label_ = label; }

  [[nodiscard]] bool has_revenue() const noexcept {
    for (const auto& r : rows_)
      if (!r.revenue) return false;
    return !rows_.empty();
  }

  [[nodiscard]] std::vector<double> server_costs() const {
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(r.server_cost);
    return out;
  }
  [[nodiscard]] std::vector<double> power_cooling_costs() const {
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(r.power_cooling_cost);
    return out;
  }
  [[nodiscard]] std::vector<double> revenues() const {
    require_revenue();
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(*r.revenue);
    return out;
  }

  void require_revenue() const {
    for (std::size_t i = 0; i < rows_.size(); ++i)
      if (!rows_[i].revenue) throw ValidationError("row " + std::to_string(i + 1) + " has no revenue");
  }

 private:
  static void validate_row(const CostRow& row, std::size_t index) {
    const std::string where = "row " + std::to_string(index + 1) + ": ";
    detail::require(std::isfinite(row.server_cost) && row.server_cost > 0.0, where + "server_cost must be positive");
    detail::require(std::isfinite(row.power_cooling_cost) && row.power_cooling_cost > 0.0,
                    where + "power_cooling_cost must be positive");
    if (row.revenue) detail::require(std::isfinite(*row.revenue) && *row.revenue > 0.0, where + "revenue must be positive");
  }

  std::vector<CostRow> rows_;
  std::optional<Regime> label_;
};

/// Fills in revenue for every row from a two-factor model (server, power).
inline CostDataset with_model_revenue(const CostDataset& data, const CobbDouglasModel& model) {
  detail::require(model.dimension() == 2, "revenue synthesis needs a two-factor model");
  std::vector<CostRow> rows = data.rows();
  for (auto& r : rows) r.revenue = evaluate(model, FactorBundle{r.server_cost, r.power_cooling_cost});
  return CostDataset(std::move(rows), returns_regime(model).regime);
}

}  // namespace revdoe
