#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "revdoe/model.hpp"

using namespace revdoe;

namespace {

double production_at_shares(const CobbDouglasModel& model, const BudgetSpec& b, const std::vector<double>& shares) {
  std::vector<double> x(shares.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = shares[i] * b.budget / b.unit_costs[i];
  for (double v : x)
    if (!(v > 0)) return -std::numeric_limits<double>::infinity();
  return evaluate(model, FactorBundle(x));
}

// Brute-force oracle over budget shares of a 4-factor model: a grid at step
// 1e-2 over the simplex, then repeated 10x zooms around the best point.
std::vector<double> grid_search_production(const CobbDouglasModel& model, const BudgetSpec& b) {
  std::vector<double> best{0.25, 0.25, 0.25, 0.25};
  double best_value = production_at_shares(model, b, best);
  double step = 1e-2;
  std::array<double, 3> lo{0, 0, 0}, hi{1, 1, 1};
  for (int level = 0; level < 7; ++level) {
    const std::vector<double> center = best;
    for (double s0 = lo[0]; s0 <= hi[0] + 1e-15; s0 += step)
      for (double s1 = lo[1]; s1 <= hi[1] + 1e-15; s1 += step)
        for (double s2 = lo[2]; s2 <= hi[2] + 1e-15; s2 += step) {
          const double s3 = 1 - s0 - s1 - s2;
          if (s3 < 0) continue;
          const std::vector<double> s{s0, s1, s2, s3};
          const double v = production_at_shares(model, b, s);
          if (v > best_value) {
            best_value = v;
            best = s;
          }
        }
    for (std::size_t i = 0; i < 3; ++i) {
      lo[i] = std::max(0.0, best[i] - 2 * step);
      hi[i] = std::min(1.0, best[i] + 2 * step);
    }
    step /= 10;
  }
  std::vector<double> x(4);
  for (std::size_t i = 0; i < 4; ++i) x[i] = best[i] * b.budget / b.unit_costs[i];
  return x;
}

double profit(const CobbDouglasModel& model, double price, const std::vector<double>& w, const std::vector<double>& x) {
  double cost = 0;
  for (std::size_t i = 0; i < x.size(); ++i) cost += w[i] * x[i];
  return price * evaluate(model, FactorBundle(x)) - cost;
}

// Gradient ascent in log quantities with Armijo backtracking.
std::vector<double> ascend_profit(const CobbDouglasModel& model, double price, const std::vector<double>& w,
                                  std::vector<double> y) {
  auto value = [&](const std::vector<double>& yy) {
    std::vector<double> x(yy.size());
    for (std::size_t i = 0; i < yy.size(); ++i) x[i] = std::exp(yy[i]);
    return profit(model, price, w, x);
  };
  double step = 1e-2;
  for (int it = 0; it < 200000; ++it) {
    std::vector<double> x(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) x[i] = std::exp(y[i]);
    const double f = evaluate(model, FactorBundle(x));
    std::vector<double> g(y.size());
    double gnorm = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      g[i] = price * model.elasticities()[i] * f - w[i] * x[i];
      gnorm += g[i] * g[i];
    }
    if (std::sqrt(gnorm) < 1e-12) break;
    const double current = value(y);
    step *= 2;
    while (true) {
      std::vector<double> trial(y);
      for (std::size_t i = 0; i < y.size(); ++i) trial[i] += step * g[i];
      if (value(trial) >= current + 1e-4 * step * gnorm || step < 1e-18) {
        y = trial;
        break;
      }
      step /= 2;
    }
  }
  for (double& v : y) v = std::exp(v);
  return y;
}

}  // namespace

TEST(Model, EvaluateMatchesDirectProduct) {
  const CobbDouglasModel m(2.0, {0.5, 0.5});
  EXPECT_NEAR(evaluate(m, {4.0, 9.0}), 12.0, 1e-12);
  const CobbDouglasModel irs(1.0, {1.8, 0.1});
  EXPECT_NEAR(evaluate(irs, {68, 38}), std::pow(68.0, 1.8) * std::pow(38.0, 0.1), 1e-9);
}

TEST(Model, EvaluateRejectsDimensionMismatch) {
  const CobbDouglasModel m(1.0, {0.5, 0.5});
  EXPECT_THROW(evaluate(m, {1.0, 2.0, 3.0}), ValidationError);
  EXPECT_THROW(FactorBundle({1.0, -2.0}), ValidationError);
  EXPECT_THROW(CobbDouglasModel(0.0, {0.5}), ValidationError);
}

TEST(Model, HomogeneityOfDegreeElasticitySum) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const CobbDouglasModel m(u(rng), {u(rng) / 2, u(rng) / 2, u(rng) / 2});
    const double lambda = u(rng);
    const FactorBundle x{u(rng), u(rng), u(rng)};
    const FactorBundle scaled{lambda * x[0], lambda * x[1], lambda * x[2]};
    EXPECT_NEAR(evaluate(m, scaled) / evaluate(m, x), std::pow(lambda, m.elasticity_sum()), 1e-10);
  }
}

TEST(Model, RegimeClassification) {
  EXPECT_EQ(classify_elasticity_sum(1.9), Regime::increasing);
  EXPECT_EQ(classify_elasticity_sum(1.0), Regime::constant);
  EXPECT_EQ(classify_elasticity_sum(1.0 + 5e-10), Regime::constant);
  EXPECT_EQ(classify_elasticity_sum(1.0 + 2e-9), Regime::increasing);
  EXPECT_EQ(classify_elasticity_sum(0.9), Regime::decreasing);
  EXPECT_EQ(classify_elasticity_sum(1.05, 0.1), Regime::constant);
  EXPECT_EQ(returns_regime(CobbDouglasModel(1.0, {0.9, 0.1})).regime, Regime::constant);
  EXPECT_EQ(parse_regime("DrS"), Regime::decreasing);
  EXPECT_EQ(to_string(Regime::increasing), "IRS");
  EXPECT_THROW(parse_regime("xrs"), ValidationError);
}

TEST(Model, ProductionMaximumSpendsBudgetExactly) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const CobbDouglasModel m(u(rng), {u(rng), u(rng), u(rng)});
    const BudgetSpec b{{u(rng), u(rng), u(rng)}, 10 * u(rng)};
    const auto x = maximize_production(m, b);
    double spend = 0;
    for (std::size_t i = 0; i < 3; ++i) spend += b.unit_costs[i] * x[i];
    EXPECT_NEAR(spend, b.budget, 1e-12 * b.budget);
  }
}

TEST(Model, ProductionMaximumMatchesGridOracle) {
  const CobbDouglasModel m(1.0, {0.9, 0.1, 0.3, 0.2});
  const BudgetSpec b{{2, 1, 1, 4}, 30};
  const auto x = maximize_production(m, b);
  const auto oracle = grid_search_production(m, b);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(x[i], oracle[i], 1e-6 * oracle[i]) << "factor " << i;
}

TEST(Model, SymmetricTwoFactorSplitsBudgetEvenly) {
  const CobbDouglasModel m(3.0, {0.4, 0.4});
  const auto x = maximize_production(m, {{5, 5}, 40});
  EXPECT_NEAR(x[0], 40.0 / (2 * 5), 1e-12);
  EXPECT_NEAR(x[1], 40.0 / (2 * 5), 1e-12);
}

TEST(Model, ProductionRejectsZeroElasticityAndBadBudget) {
  EXPECT_THROW(maximize_production(CobbDouglasModel(1.0, {0.5, 0.0}), {{1, 1}, 10}), ValidationError);
  EXPECT_THROW(maximize_production(CobbDouglasModel(1.0, {0.5, 0.5}), {{1, 0}, 10}), ValidationError);
  EXPECT_THROW(maximize_production(CobbDouglasModel(1.0, {0.5, 0.5}), {{1, 1}, -1}), ValidationError);
  EXPECT_THROW(maximize_production(CobbDouglasModel(1.0, {0.5, 0.5}), {{1, 1, 1}, 10}), ValidationError);
}

TEST(Model, ProfitMaximumSatisfiesFirstOrderConditions) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.05, 0.45);
  std::uniform_real_distribution<double> w(0.5, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const CobbDouglasModel m(w(rng), {u(rng), u(rng)});
    const std::vector<double> costs{w(rng), w(rng)};
    const double price = w(rng);
    const auto opt = maximize_profit(m, price, costs);
    for (std::size_t i = 0; i < 2; ++i) {
      const double marginal = price * m.elasticities()[i] * opt.output / opt.bundle[i];
      EXPECT_NEAR(marginal, costs[i], 1e-9 * costs[i]);
    }
    EXPECT_NEAR(opt.profit, price * opt.output * (1 - m.elasticity_sum()), 1e-9 * std::abs(opt.profit) + 1e-12);
  }
}

TEST(Model, ProfitMaximumMatchesMultistartAscent) {
  const CobbDouglasModel m(2.0, {0.3, 0.4});
  const std::vector<double> costs{1.5, 0.8};
  const double price = 3.0;
  const auto opt = maximize_profit(m, price, costs);
  const double best = profit(m, price, costs, {opt.bundle[0], opt.bundle[1]});
  for (const auto& start : std::vector<std::vector<double>>{{-2, -2}, {0, 3}, {3, 0}, {1, 1}}) {
    const auto x = ascend_profit(m, price, costs, start);
    EXPECT_NEAR(profit(m, price, costs, x), best, 1e-9 * best);
    EXPECT_LE(profit(m, price, costs, x), best * (1 + 1e-12));
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(x[i], opt.bundle[i], 1e-5 * opt.bundle[i]);
  }
}

TEST(Model, ProfitUndefinedWithoutDecreasingReturns) {
  EXPECT_THROW(maximize_profit(CobbDouglasModel(1.0, {0.9, 0.1}), 2.0, std::vector<double>{1, 1}), ValidationError);
  EXPECT_THROW(maximize_profit(CobbDouglasModel(1.0, {1.8, 0.1}), 2.0, std::vector<double>{1, 1}), ValidationError);
}

TEST(Model, SurfaceArgmaxUnderDecreasingFilter) {
  const auto grid = make_grid(0.1, 0.9, 0.1);
  ASSERT_EQ(grid.size(), 9u);
  const auto s = revenue_surface({12.5, 11.0}, grid, grid, Regime::decreasing);
  EXPECT_EQ(s.present_cells(), 36u);
  EXPECT_NEAR(s.alpha_grid[s.argmax_alpha], 0.8, 1e-12);
  EXPECT_NEAR(s.beta_grid[s.argmax_beta], 0.1, 1e-12);
  EXPECT_NEAR(s.max_revenue(), std::pow(12.5, 0.8) * std::pow(11.0, 0.1), 1e-9);
}

TEST(Model, SurfaceCountOracle) {
  // Cells with α + β < 1 on the {0.1, ..., 0.9} grid: i + j < 10 for i, j in 1..9.
  std::size_t expected = 0;
  for (int i = 1; i <= 9; ++i)
    for (int j = 1; j <= 9; ++j) expected += (i + j < 10) ? 1 : 0;
  const auto grid = make_grid(0.1, 0.9, 0.1);
  EXPECT_EQ(revenue_surface({12.5, 11.0}, grid, grid, Regime::decreasing).present_cells(), expected);
  EXPECT_EQ(revenue_surface({12.5, 11.0}, grid, grid, std::nullopt).present_cells(), 81u);
  EXPECT_EQ(revenue_surface({12.5, 11.0}, grid, grid, Regime::constant).present_cells(), 9u);
}

TEST(Model, SurfaceTiesGoToLowestIndex) {
  const std::vector<double> alphas{0.2, 0.4};
  const std::vector<double> betas{0.3, 0.5};
  const auto s = revenue_surface({1.0, 1.0}, alphas, betas, std::nullopt);
  EXPECT_EQ(s.argmax_alpha, 0u);
  EXPECT_EQ(s.argmax_beta, 0u);
}

TEST(Model, SurfaceAllFilteredIsAnError) {
  const std::vector<double> alphas{1.2, 1.5};
  const std::vector<double> betas{0.5};
  try {
    revenue_surface({2.0, 3.0}, alphas, betas, Regime::decreasing);
    FAIL() << "expected an error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("all cells filtered"), std::string::npos);
  }
}
