#pragma once

/**
 * @file qp.hpp
 * @brief Primal active-set solver for convex quadratic programs
 *
 *     minimize   xᵀHx + fᵀx
 *     subject to C x ≤ b,   C_eq x = b_eq
 *
 * with H symmetric positive semidefinite. Note the objective has no ½, so
 * the gradient is 2Hx + f and the KKT stationarity condition reads
 * 2Hx + f + Cᵀλ + C_eqᵀν = 0 with λ ≥ 0.
 *
 * Each iteration solves the equality-constrained subproblem on the current
 * working set in the null space of the working constraints. A blocking
 * constraint is added when the step hits it; when the step vanishes, the
 * constraint with the most negative multiplier is dropped. A zero-curvature
 * descent direction with nothing blocking it means the problem is unbounded.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "revdoe/error.hpp"
#include "revdoe/linalg.hpp"

namespace revdoe {

struct QPProblem {
  linalg::Matrix h;
  linalg::Vector f;
  linalg::Matrix c;  ///< m × n, may have zero rows
  linalg::Vector b;
  linalg::Matrix c_eq;  ///< optional equality rows
  linalg::Vector b_eq;

  [[nodiscard]] std::size_t dimension() const noexcept { return f.size(); }
  [[nodiscard]] std::size_t inequality_count() const noexcept { return b.size(); }
  [[nodiscard]] std::size_t equality_count() const noexcept { return b_eq.size(); }

  void validate() const {
    const std::size_t n = f.size();
    detail::require(n > 0, "QP has no variables");
    detail::require(h.rows() == n && h.cols() == n, "H must be n x n with n = length of f");
    double scale = 1.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(h(i, j)));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        detail::require(std::abs(h(i, j) - h(j, i)) <= 1e-12 * scale, "H is not symmetric");
    detail::require(b.size() == c.rows(), "C and b disagree on the number of inequality constraints");
    detail::require(c.rows() == 0 || c.cols() == n, "C must have n columns");
    detail::require(b_eq.size() == c_eq.rows(), "C_eq and b_eq disagree on the number of equality constraints");
    detail::require(c_eq.rows() == 0 || c_eq.cols() == n, "C_eq must have n columns");
  }
};

struct QpOptions {
  /// 0 selects a default of 100 + 10·(n + m).
  std::size_t max_iterations = 0;
  double feasibility_tolerance = 1e-9;
  double step_tolerance = 1e-13;
  double multiplier_tolerance = 1e-10;
  double curvature_tolerance = 1e-12;
};

struct QpSolution {
  linalg::Vector x;
  std::vector<std::size_t> active_set;    ///< inequality rows in the final working set, ascending
  linalg::Vector multipliers;             ///< one per inequality; zero when inactive
  linalg::Vector equality_multipliers;
  std::size_t iterations = 0;             ///< steps and working-set changes
  double objective = 0.0;
};

struct KktResiduals {
  double primal = 0.0;           ///< worst violation of C x ≤ b or C_eq x = b_eq
  double stationarity = 0.0;     ///< ‖2Hx + f + Cᵀλ + C_eqᵀν‖₂
  double dual = 0.0;             ///< worst negative multiplier magnitude
  double complementarity = 0.0;  ///< max |λᵢ (C x − b)ᵢ|
};

inline double qp_objective(const QPProblem& qp, std::span<const double> x) {
  const auto hx = linalg::multiply(qp.h, x);
  return linalg::dot(x, hx) + linalg::dot(qp.f, x);
}

inline KktResiduals kkt_residuals(const QPProblem& qp, const QpSolution& s) {
  KktResiduals r;
  auto grad = linalg::multiply(qp.h, s.x);
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = 2.0 * grad[i] + qp.f[i];
  for (std::size_t i = 0; i < qp.inequality_count(); ++i) {
    const double slack = linalg::dot(qp.c.row(i), s.x) - qp.b[i];
    r.primal = std::max(r.primal, slack);
    r.dual = std::max(r.dual, -s.multipliers[i]);
    r.complementarity = std::max(r.complementarity, std::abs(s.multipliers[i] * slack));
    for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += qp.c(i, j) * s.multipliers[i];
  }
  for (std::size_t i = 0; i < qp.equality_count(); ++i) {
    r.primal = std::max(r.primal, std::abs(linalg::dot(qp.c_eq.row(i), s.x) - qp.b_eq[i]));
    for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += qp.c_eq(i, j) * s.equality_multipliers[i];
  }
  r.stationarity = linalg::norm(grad);
  return r;
}

namespace detail {

inline linalg::Matrix working_rows(const QPProblem& qp, const std::vector<std::size_t>& working) {
  linalg::Matrix a(qp.equality_count() + working.size(), qp.dimension());
  for (std::size_t i = 0; i < qp.equality_count(); ++i)
    for (std::size_t j = 0; j < qp.dimension(); ++j) a(i, j) = qp.c_eq(i, j);
  for (std::size_t k = 0; k < working.size(); ++k)
    for (std::size_t j = 0; j < qp.dimension(); ++j) a(qp.equality_count() + k, j) = qp.c(working[k], j);
  return a;
}

// Least-squares multipliers for  Aᵀμ = −g  on a full-row-rank working set.
inline linalg::Vector working_multipliers(const linalg::Matrix& a, std::span<const double> grad) {
  if (a.rows() == 0) return {};
  const linalg::Matrix aat = linalg::multiply(a, a.transposed());
  auto rhs = linalg::multiply(a, grad);
  for (double& v : rhs) v = -v;
  return linalg::Cholesky(aat, 1e-14).solve(rhs);
}

struct Direction {
  linalg::Vector p;
  bool ray = false;  // zero-curvature descent: step length is not capped at 1
};

inline Direction subproblem_direction(const linalg::Matrix& hessian2, const linalg::Matrix& a,
                                      std::span<const double> grad, const QpOptions& opt) {
  const std::size_t n = grad.size();
  const linalg::Matrix z = linalg::null_space_basis(a, n);
  Direction d{linalg::Vector(n, 0.0), false};
  if (z.cols() == 0) return d;

  const linalg::Matrix reduced = linalg::multiply(z.transposed(), linalg::multiply(hessian2, z));
  const auto reduced_grad = linalg::multiply_transposed(z, grad);
  const auto eig = linalg::symmetric_eigen(reduced);
  double eig_scale = 1.0;
  for (double v : eig.values) eig_scale = std::max(eig_scale, std::abs(v));
  const double grad_scale = 1.0 + linalg::norm(grad);

  linalg::Vector step_reduced(z.cols(), 0.0);
  for (std::size_t k = 0; k < z.cols(); ++k) {
    double component = 0.0;
    for (std::size_t i = 0; i < z.cols(); ++i) component += eig.vectors(i, k) * reduced_grad[i];
    if (eig.values[k] > opt.curvature_tolerance * eig_scale) {
      for (std::size_t i = 0; i < z.cols(); ++i) step_reduced[i] -= component / eig.values[k] * eig.vectors(i, k);
    } else if (std::abs(component) > 1e-10 * grad_scale) {
      // Flat direction along which the objective keeps decreasing.
      const double sign = component > 0.0 ? -1.0 : 1.0;
      linalg::Vector ray(z.cols());
      for (std::size_t i = 0; i < z.cols(); ++i) ray[i] = sign * eig.vectors(i, k);
      return {linalg::multiply(z, ray), true};
    }
  }
  d.p = linalg::multiply(z, step_reduced);
  return d;
}

}  // namespace detail

/// Solves the QP from a feasible starting point.
inline QpSolution solve_qp(const QPProblem& qp, std::span<const double> start, QpOptions opt = {}) {
  qp.validate();
  const std::size_t n = qp.dimension();
  const std::size_t m = qp.inequality_count();
  detail::require(start.size() == n, "start point has the wrong dimension");
  const std::size_t max_iter = opt.max_iterations == 0 ? 100 + 10 * (n + m) : opt.max_iterations;

  linalg::Vector x(start.begin(), start.end());
  for (std::size_t i = 0; i < m; ++i) {
    const double slack = linalg::dot(qp.c.row(i), x) - qp.b[i];
    if (slack > opt.feasibility_tolerance) {
      throw ValidationError("infeasible start: inequality " + std::to_string(i) + " violated by " +
                            std::to_string(slack));
    }
  }
  for (std::size_t i = 0; i < qp.equality_count(); ++i) {
    const double r = linalg::dot(qp.c_eq.row(i), x) - qp.b_eq[i];
    if (std::abs(r) > opt.feasibility_tolerance) {
      throw ValidationError("infeasible start: equality " + std::to_string(i) + " violated by " + std::to_string(r));
    }
  }

  linalg::Matrix hessian2 = qp.h;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) hessian2(i, j) *= 2.0;

  // Seed the working set with constraints active at the start, skipping any
  // that are linearly dependent on those already chosen.
  std::vector<std::size_t> working;
  for (std::size_t i = 0; i < m; ++i) {
    const double slack = linalg::dot(qp.c.row(i), x) - qp.b[i];
    if (std::abs(slack) > opt.feasibility_tolerance) continue;
    const auto before = linalg::null_space_basis(detail::working_rows(qp, working), n).cols();
    working.push_back(i);
    const auto after = linalg::null_space_basis(detail::working_rows(qp, working), n).cols();
    if (after == before) working.pop_back();
  }

  QpSolution sol;
  for (std::size_t iter = 0;; ++iter) {
    if (iter >= max_iter) {
      throw NumericalError("active-set iteration cap of " + std::to_string(max_iter) + " exceeded");
    }
    auto grad = linalg::multiply(hessian2, x);
    for (std::size_t i = 0; i < n; ++i) grad[i] += qp.f[i];
    const linalg::Matrix a = detail::working_rows(qp, working);
    const auto dir = detail::subproblem_direction(hessian2, a, grad, opt);

    if (!dir.ray && linalg::norm(dir.p) <= opt.step_tolerance * (1.0 + linalg::norm(x))) {
      const auto mu = detail::working_multipliers(a, grad);
      const double tol = opt.multiplier_tolerance * (1.0 + linalg::norm(grad));
      std::optional<std::size_t> drop;
      double most_negative = -tol;
      for (std::size_t k = 0; k < working.size(); ++k) {
        const double lambda = mu[qp.equality_count() + k];
        if (lambda < most_negative) {
          most_negative = lambda;
          drop = k;
        }
      }
      if (!drop) {
        sol.x = x;
        sol.multipliers.assign(m, 0.0);
        sol.equality_multipliers.assign(mu.begin(), mu.begin() + static_cast<std::ptrdiff_t>(qp.equality_count()));
        for (std::size_t k = 0; k < working.size(); ++k) sol.multipliers[working[k]] = mu[qp.equality_count() + k];
        sol.active_set = working;
        std::sort(sol.active_set.begin(), sol.active_set.end());
        sol.iterations = iter;
        sol.objective = qp_objective(qp, x);
        return sol;
      }
      working.erase(working.begin() + static_cast<std::ptrdiff_t>(*drop));
      continue;
    }

    double step = dir.ray ? std::numeric_limits<double>::infinity() : 1.0;
    std::optional<std::size_t> blocking;
    for (std::size_t i = 0; i < m; ++i) {
      if (std::find(working.begin(), working.end(), i) != working.end()) continue;
      const double cp = linalg::dot(qp.c.row(i), dir.p);
      if (cp <= 1e-14 * (1.0 + linalg::norm(qp.c.row(i)) * linalg::norm(dir.p))) continue;
      const double t = std::max(0.0, (qp.b[i] - linalg::dot(qp.c.row(i), x)) / cp);
      if (t < step) {
        step = t;
        blocking = i;
      }
    }
    if (!std::isfinite(step)) {
      throw NumericalError("QP is unbounded below: zero-curvature descent direction with no blocking constraint");
    }
    for (std::size_t i = 0; i < n; ++i) x[i] += step * dir.p[i];
    if (blocking) working.push_back(*blocking);
  }
}

}  // namespace revdoe
