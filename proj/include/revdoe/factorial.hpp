#pragma once

/**
 * @file factorial.hpp
 * @brief 2² full factorial analysis of revenue against two cost factors.
 *
 * Factor A (factor 1) is the power-and-cooling cost, factor B (factor 2) the
 * server type. Each is coded to ±1 and revenue is regressed on
 *
 *     y = q0 + qA·xA + qB·xB + qAB·xA·xB
 *
 * Cells are stored in standard order (−,−), (+,−), (−,+), (+,+).
 */

#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "revdoe/dataset.hpp"
#include "revdoe/error.hpp"
#include "revdoe/special.hpp"

namespace revdoe {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] bool contains(double v) const noexcept { return v >= lo && v <= hi; }
  [[nodiscard]] bool overlaps(const Interval& o) const noexcept { return lo <= o.hi && o.lo <= hi; }
};

/// Cost ranges (million USD) that define each factor's two levels. The
/// defaults are the data-centre levels: power and cooling low 5–15 / high
/// 16–40, server Type 1 45–55 / Type 2 56–65.
struct LevelCoding {
  Interval factor1_low{5.0, 15.0};
  Interval factor1_high{16.0, 40.0};
  Interval factor2_type1{45.0, 55.0};
  Interval factor2_type2{56.0, 65.0};

  void validate() const {
    for (const Interval* i : {&factor1_low, &factor1_high, &factor2_type1, &factor2_type2})
      detail::require(i->lo <= i->hi, "level interval has lo > hi");
    detail::require(!factor1_low.overlaps(factor1_high), "factor 1 level intervals overlap");
    detail::require(!factor2_type1.overlaps(factor2_type2), "factor 2 level intervals overlap");
  }
};

struct CodedLevels {
  int x_a = 0;
  int x_b = 0;
  friend bool operator==(const CodedLevels&, const CodedLevels&) = default;
};

namespace detail {

inline std::string format_interval(const Interval& i) {
  std::ostringstream os;
  os << '[' << i.lo << ',' << i.hi << ']';
  return os.str();
}

inline int code_one(double cost, const Interval& minus, const Interval& plus, int factor) {
  if (minus.contains(cost)) return -1;
  if (plus.contains(cost)) return 1;
  std::ostringstream os;
  os << "factor " << factor << " cost " << cost << " outside " << format_interval(minus) << " ∪ "
     << format_interval(plus);
  throw ValidationError(os.str());
}

constexpr std::size_t cell_index(int x_a, int x_b) noexcept {
  return static_cast<std::size_t>((x_a > 0 ? 1 : 0) + (x_b > 0 ? 2 : 0));
}

}  // namespace detail

/// Standard-order level codes; position k matches the k-th cell.
inline constexpr std::array<CodedLevels, 4> kCellLevels{{{-1, -1}, {1, -1}, {-1, 1}, {1, 1}}};

/// Maps raw (factor 1, factor 2) costs to ±1 codes.
inline CodedLevels code_levels(double factor1_cost, double factor2_cost, const LevelCoding& coding = {}) {
  coding.validate();
  return {detail::code_one(factor1_cost, coding.factor1_low, coding.factor1_high, 1),
          detail::code_one(factor2_cost, coding.factor2_type1, coding.factor2_type2, 2)};
}

/// Four cells of revenue observations with a common replicate count r ≥ 1.
class Design22 {
 public:
  using Cells = std::array<std::vector<double>, 4>;

  explicit Design22(Cells cells) : cells_(std::move(cells)) {
    const std::size_t r = cells_[0].size();
    detail::require(r >= 1, "every design cell needs at least one observation");
    for (std::size_t k = 0; k < 4; ++k) {
      detail::require(cells_[k].size() == r, "design cells have unequal replicate counts");
      for (double y : cells_[k]) detail::require(std::isfinite(y), "design observations must be finite");
    }
  }

  /// Single-replicate design from the four cell responses.
  static Design22 from_cells(double minus_minus, double plus_minus, double minus_plus, double plus_plus) {
    return Design22(Cells{{{minus_minus}, {plus_minus}, {minus_plus}, {plus_plus}}});
  }

  [[nodiscard]] std::span<const double> cell(int x_a, int x_b) const {
    return cells_[detail::cell_index(x_a, x_b)];
  }
  [[nodiscard]] std::span<const double> cell(std::size_t standard_index) const { return cells_.at(standard_index); }
  [[nodiscard]] std::size_t replicates() const noexcept { return cells_[0].size(); }
  [[nodiscard]] std::size_t observation_count() const noexcept { return 4 * replicates(); }

  [[nodiscard]] double cell_mean(std::size_t standard_index) const {
    const auto& c = cells_.at(standard_index);
    return std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
  }
  [[nodiscard]] double cell_mean(int x_a, int x_b) const { return cell_mean(detail::cell_index(x_a, x_b)); }
  [[nodiscard]] std::array<double, 4> cell_means() const {
    return {cell_mean(std::size_t{0}), cell_mean(std::size_t{1}), cell_mean(std::size_t{2}), cell_mean(std::size_t{3})};
  }

  [[nodiscard]] const Cells& cells() const noexcept { return cells_; }

 private:
  Cells cells_;
};

/// Concatenates replicate runs cell by cell (run 1 first).
inline Design22 stack_replicates(std::span<const Design22> runs) {
  detail::require(!runs.empty(), "no replicate runs to stack");
  Design22::Cells cells;
  for (const auto& run : runs)
    for (std::size_t k = 0; k < 4; ++k) cells[k].insert(cells[k].end(), run.cells()[k].begin(), run.cells()[k].end());
  return Design22(std::move(cells));
}

struct CodedDataset {
  Design22 design;                      ///< one replicate: the per-cell mean revenue
  std::array<std::size_t, 4> counts{};  ///< rows aggregated into each cell
  std::vector<std::size_t> skipped_rows;  ///< zero-based rows outside every level
};

/**
 * Level-codes every row (power-and-cooling as factor 1, server as factor 2)
 * and collapses each cell to its mean revenue. Rows outside the declared
 * ranges are skipped and reported. All four cells must receive a row.
 */
inline CodedDataset code_dataset(const CostDataset& data, const LevelCoding& coding = {}) {
  coding.validate();
  data.require_revenue();
  std::array<double, 4> sums{};
  std::array<std::size_t, 4> counts{};
  std::vector<std::size_t> skipped;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& row = data[i];
    CodedLevels levels;
    try {
      levels = code_levels(row.power_cooling_cost, row.server_cost, coding);
    } catch (const ValidationError&) {
      skipped.push_back(i);
      continue;
    }
    const std::size_t k = detail::cell_index(levels.x_a, levels.x_b);
    sums[k] += *row.revenue;
    ++counts[k];
  }
  Design22::Cells cells;
  for (std::size_t k = 0; k < 4; ++k) {
    if (counts[k] == 0) {
      throw ValidationError("no rows fall into design cell (xA=" + std::to_string(kCellLevels[k].x_a) +
                            ", xB=" + std::to_string(kCellLevels[k].x_b) + ")");
    }
    cells[k] = {sums[k] / static_cast<double>(counts[k])};
  }
  return {Design22(std::move(cells)), counts, std::move(skipped)};
}

struct EffectEstimates {
  double q0 = 0.0;
  double qA = 0.0;
  double qB = 0.0;
  double qAB = 0.0;

  /// Model response at coded levels.
  [[nodiscard]] double predict(int x_a, int x_b) const noexcept {
    return q0 + qA * x_a + qB * x_b + qAB * x_a * x_b;
  }
};

/// Sign-table quarter sums over the cell means.
inline EffectEstimates estimate_effects(const Design22& design) {
  const auto m = design.cell_means();
  EffectEstimates e;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto [xa, xb] = kCellLevels[k];
    e.q0 += m[k];
    e.qA += xa * m[k];
    e.qB += xb * m[k];
    e.qAB += xa * xb * m[k];
  }
  e.q0 /= 4.0;
  e.qA /= 4.0;
  e.qB /= 4.0;
  e.qAB /= 4.0;
  return e;
}

/// Sum-of-squares decomposition SST = SSA + SSB + SSAB + SSE and the
/// fraction of SST carried by each term. When SST is zero the fractions are
/// all zero and `degenerate` is set.
struct VariationAllocation {
  double ssa = 0.0;
  double ssb = 0.0;
  double ssab = 0.0;
  double sse = 0.0;
  double sst = 0.0;
  double fa = 0.0;
  double fb = 0.0;
  double fab = 0.0;
  double fe = 0.0;
  bool degenerate = false;
};

inline VariationAllocation allocate_variation(const EffectEstimates& effects, const Design22& design) {
  const double n = 4.0 * static_cast<double>(design.replicates());
  VariationAllocation v;
  v.ssa = n * effects.qA * effects.qA;
  v.ssb = n * effects.qB * effects.qB;
  v.ssab = n * effects.qAB * effects.qAB;
  double scale = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto [xa, xb] = kCellLevels[k];
    const double fitted = effects.predict(xa, xb);
    for (double y : design.cell(k)) {
      v.sse += (y - fitted) * (y - fitted);
      v.sst += (y - effects.q0) * (y - effects.q0);
      scale += y * y;
    }
  }
  if (v.sst <= 1e-15 * scale) {
    v.degenerate = true;
    return v;
  }
  v.fa = v.ssa / v.sst;
  v.fb = v.ssb / v.sst;
  v.fab = v.ssab / v.sst;
  v.fe = v.sse / v.sst;
  return v;
}

struct ReplicatedAnalysis {
  EffectEstimates effects;
  VariationAllocation allocation;
  std::size_t degrees_of_freedom = 0;  ///< 2²(r − 1)
  double mse = 0.0;                    ///< SSE / 2²(r − 1)
};

inline ReplicatedAnalysis analyze_replicated(const Design22& design) {
  if (design.replicates() < 2) {
    throw ValidationError("replicated analysis needs r >= 2 (got r = " + std::to_string(design.replicates()) +
                          "); the error mean square is undefined otherwise");
  }
  ReplicatedAnalysis out;
  out.effects = estimate_effects(design);
  out.allocation = allocate_variation(out.effects, design);
  out.degrees_of_freedom = 4 * (design.replicates() - 1);
  out.mse = out.allocation.sse / static_cast<double>(out.degrees_of_freedom);
  return out;
}

struct EffectInterval {
  std::string name;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;

  [[nodiscard]] bool includes_zero() const noexcept { return lower <= 0.0 && upper >= 0.0; }
};

struct EffectConfidenceIntervals {
  double confidence = 0.0;
  std::size_t degrees_of_freedom = 0;
  double mse = 0.0;
  double std_error = 0.0;   ///< s_q = s_e / √(2²r), shared by every effect
  double t_quantile = 0.0;  ///< t[1 − (1−confidence)/2; 2²(r−1)]
  std::array<EffectInterval, 4> intervals;  ///< q0, qA, qB, qAB
};

/// Two-sided intervals  qᵢ ∓ t·s_q  for every effect.
inline EffectConfidenceIntervals effect_confidence_intervals(const Design22& design, double confidence) {
  detail::require(confidence > 0.0 && confidence < 1.0, "confidence level must lie strictly between 0 and 1");
  const auto analysis = analyze_replicated(design);
  EffectConfidenceIntervals ci;
  ci.confidence = confidence;
  ci.degrees_of_freedom = analysis.degrees_of_freedom;
  ci.mse = analysis.mse;
  ci.std_error = std::sqrt(analysis.mse) / std::sqrt(static_cast<double>(design.observation_count()));
  ci.t_quantile = special::student_t_quantile(1.0 - (1.0 - confidence) / 2.0,
                                              static_cast<double>(analysis.degrees_of_freedom));
  const double half = ci.t_quantile * ci.std_error;
  const auto& e = analysis.effects;
  const std::array<std::pair<const char*, double>, 4> named{{{"q0", e.q0}, {"qA", e.qA}, {"qB", e.qB}, {"qAB", e.qAB}}};
  for (std::size_t k = 0; k < 4; ++k)
    ci.intervals[k] = {named[k].first, named[k].second, named[k].second - half, named[k].second + half};
  return ci;
}

}  // namespace revdoe
