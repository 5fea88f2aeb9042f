#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "revdoe/qp.hpp"

using namespace revdoe;
using linalg::Matrix;
using linalg::Vector;

namespace {

QPProblem box_qp(const Matrix& h, const Vector& f, const Vector& lo, const Vector& hi) {
  const std::size_t n = f.size();
  QPProblem qp{h, f, Matrix(2 * n, n), Vector(2 * n), {}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    qp.c(2 * i, i) = 1;
    qp.b[2 * i] = hi[i];
    qp.c(2 * i + 1, i) = -1;
    qp.b[2 * i + 1] = -lo[i];
  }
  return qp;
}

// Projected gradient descent on a box with step 1/L, L = 2·λmax(H).
Vector projected_gradient(const Matrix& h, const Vector& f, const Vector& lo, const Vector& hi) {
  const std::size_t n = f.size();
  const double lmax = linalg::symmetric_eigen(h).values.front();
  const double step = 1.0 / (2.0 * lmax);
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 0.5 * (lo[i] + hi[i]);
  for (int it = 0; it < 200000; ++it) {
    auto g = linalg::multiply(h, x);
    double moved = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double next = std::clamp(x[i] - step * (2 * g[i] + f[i]), lo[i], hi[i]);
      moved = std::max(moved, std::abs(next - x[i]));
      x[i] = next;
    }
    if (moved < 1e-15) break;
  }
  return x;
}

// Dense grid over the box, as a coarse independent check on the optimum value.
double grid_minimum(const QPProblem& qp, const Vector& lo, const Vector& hi, int steps) {
  double best = INFINITY;
  Vector x(3);
  for (int i = 0; i <= steps; ++i)
    for (int j = 0; j <= steps; ++j)
      for (int k = 0; k <= steps; ++k) {
        x[0] = lo[0] + (hi[0] - lo[0]) * i / steps;
        x[1] = lo[1] + (hi[1] - lo[1]) * j / steps;
        x[2] = lo[2] + (hi[2] - lo[2]) * k / steps;
        best = std::min(best, qp_objective(qp, x));
      }
  return best;
}

}  // namespace

TEST(ActiveSetQp, UnconstrainedInteriorOptimum) {
  QPProblem qp{Matrix::identity(2), {-2, -4}, {}, {}, {}, {}};
  const auto s = solve_qp(qp, Vector{0, 0});
  EXPECT_NEAR(s.x[0], 1, 1e-12);
  EXPECT_NEAR(s.x[1], 2, 1e-12);
  EXPECT_TRUE(s.active_set.empty());
}

TEST(ActiveSetQp, ClippedParabola) {
  QPProblem qp{Matrix{{1}}, {-2}, Matrix{{1}}, {0}, {}, {}};
  const auto s = solve_qp(qp, Vector{-3});
  EXPECT_NEAR(s.x[0], 0, 1e-12);
  ASSERT_EQ(s.active_set.size(), 1u);
  EXPECT_NEAR(s.multipliers[0], 2, 1e-12);
}

TEST(ActiveSetQp, EqualityConstraint) {
  // min x² + y² s.t. x + y = 2  →  (1, 1), ν = −2.
  QPProblem qp{Matrix::identity(2), {0, 0}, {}, {}, Matrix{{1, 1}}, {2}};
  const auto s = solve_qp(qp, Vector{2, 0});
  EXPECT_NEAR(s.x[0], 1, 1e-12);
  EXPECT_NEAR(s.x[1], 1, 1e-12);
  EXPECT_NEAR(s.equality_multipliers[0], -2, 1e-12);
}

TEST(ActiveSetQp, RandomBoxProblemsMatchOracles) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 40; ++trial) {
    Matrix m(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) m(i, j) = u(rng);
    Matrix h = linalg::gram(m);
    for (std::size_t i = 0; i < 3; ++i) h(i, i) += 0.1;
    const Vector f{4 * u(rng), 4 * u(rng), 4 * u(rng)};
    const Vector lo{-1, -0.5, -2}, hi{1, 1.5, 0.5};
    const auto qp = box_qp(h, f, lo, hi);
    const auto s = solve_qp(qp, Vector{0, 0, 0});
    const auto oracle = projected_gradient(h, f, lo, hi);
    EXPECT_NEAR(s.objective, qp_objective(qp, oracle), 1e-6) << "trial " << trial;
    EXPECT_LE(s.objective, grid_minimum(qp, lo, hi, 30) + 1e-12);
    const auto k = kkt_residuals(qp, s);
    EXPECT_LE(k.primal, 1e-9);
    EXPECT_LE(k.stationarity, 1e-9);
    EXPECT_LE(k.dual, 1e-9);
    EXPECT_LE(k.complementarity, 1e-9);
    EXPECT_LE(s.iterations, 729u);  // 3^m with m = 6
  }
}

TEST(ActiveSetQp, SemidefiniteHessianWithBoundedFeasibleSet) {
  // H is singular along (1, −1); the box keeps the problem bounded.
  QPProblem qp = box_qp(Matrix{{1, 1}, {1, 1}}, {-1, 0.5}, {-1, -1}, {1, 1});
  const auto s = solve_qp(qp, Vector{0, 0});
  const auto k = kkt_residuals(qp, s);
  EXPECT_LE(k.stationarity, 1e-9);
  EXPECT_LE(k.dual, 1e-9);
  double best = INFINITY;
  for (int i = 0; i <= 400; ++i)
    for (int j = 0; j <= 400; ++j) best = std::min(best, qp_objective(qp, Vector{-1 + i / 200.0, -1 + j / 200.0}));
  EXPECT_LE(s.objective, best + 1e-12);
}

TEST(ActiveSetQp, InfeasibleStartIsRejected) {
  QPProblem qp{Matrix{{1}}, {-2}, Matrix{{1}}, {0}, {}, {}};
  EXPECT_THROW(solve_qp(qp, Vector{1}), ValidationError);
}

TEST(ActiveSetQp, UnboundedProblemIsReported) {
  // Linear objective with nothing stopping x → −∞.
  QPProblem qp{Matrix{{0}}, {1}, Matrix{{1}}, {5}, {}, {}};
  EXPECT_THROW(solve_qp(qp, Vector{0}), NumericalError);
}

TEST(ActiveSetQp, MalformedProblemIsRejected) {
  QPProblem qp{Matrix{{1, 2}, {0, 1}}, {0, 0}, {}, {}, {}, {}};
  EXPECT_THROW(solve_qp(qp, Vector{0, 0}), ValidationError);
  QPProblem wrong_b{Matrix::identity(2), {0, 0}, Matrix{{1, 0}}, {1, 2}, {}, {}};
  EXPECT_THROW(solve_qp(wrong_b, Vector{0, 0}), ValidationError);
}
