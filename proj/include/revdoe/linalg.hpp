#pragma once

// Small dense linear algebra. Every system in this library has at most a
// handful of unknowns, so the routines favour clarity over blocking.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "revdoe/error.hpp"

namespace revdoe::linalg {

using Vector = std::vector<double>;

/// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = init.size();
    cols_ = rows_ == 0 ? 0 : init.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      detail::require(row.size() == cols_, "ragged matrix initializer");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const noexcept {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }

  [[nodiscard]] std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  [[nodiscard]] std::span<double> row(std::size_t r) noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  [[nodiscard]] Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  void append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    detail::require(values.size() == cols_, "row length does not match matrix");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
  detail::require(a.cols() == b.rows(), "matrix product dimension mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

inline Vector multiply(const Matrix& a, std::span<const double> x) {
  detail::require(a.cols() == x.size(), "matrix-vector dimension mismatch");
  Vector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = dot(a.row(i), x);
  return out;
}

/// Aᵀx without forming the transpose.
inline Vector multiply_transposed(const Matrix& a, std::span<const double> x) {
  detail::require(a.rows() == x.size(), "transposed product dimension mismatch");
  Vector out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += a(i, j) * x[i];
  return out;
}

/// AᵀA.
inline Matrix gram(const Matrix& a) {
  Matrix g(a.cols(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t p = 0; p < a.cols(); ++p)
      for (std::size_t q = 0; q < a.cols(); ++q) g(p, q) += a(i, p) * a(i, q);
  return g;
}

/// Raised when a factorization meets a non-positive pivot.
class SingularMatrixError : public NumericalError {
 public:
  SingularMatrixError(std::size_t pivot, double value)
      : NumericalError("matrix is singular or not positive definite at pivot " + std::to_string(pivot) +
                       " (pivot value " + std::to_string(value) + ")"),
        pivot_(pivot) {}

  [[nodiscard]] std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

/// Cholesky factorization A = LLᵀ of a symmetric positive-definite matrix.
/// A pivot at or below `pivot_tolerance` times the largest diagonal entry is
/// reported as singular, naming the offending column.
class Cholesky {
 public:
  explicit Cholesky(const Matrix& a, double pivot_tolerance = 1e-12) : l_(a.rows(), a.cols()) {
    detail::require(a.rows() == a.cols(), "Cholesky needs a square matrix");
    const std::size_t n = a.rows();
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a(i, i)));
    if (scale == 0.0) scale = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      double d = a(j, j);
      for (std::size_t k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
      if (!(d > pivot_tolerance * scale)) {
        throw SingularMatrixError(j, d);
      }
      const double ljj = std::sqrt(d);
      l_(j, j) = ljj;
      for (std::size_t i = j + 1; i < n; ++i) {
        double s = a(i, j);
        for (std::size_t k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
        l_(i, j) = s / ljj;
      }
    }
  }

  [[nodiscard]] Vector solve(std::span<const double> b) const {
    const std::size_t n = l_.rows();
    detail::require(b.size() == n, "right-hand side length mismatch");
    Vector y(b.begin(), b.end());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < i; ++k) y[i] -= l_(i, k) * y[k];
      y[i] /= l_(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t k = i + 1; k < n; ++k) y[i] -= l_(k, i) * y[k];
      y[i] /= l_(i, i);
    }
    return y;
  }

  [[nodiscard]] const Matrix& factor() const noexcept { return l_; }

 private:
  Matrix l_;
};

struct SymmetricEigen {
  Vector values;  // descending
  Matrix vectors; // column k pairs with values[k]
};

/// Cyclic Jacobi eigendecomposition of a small symmetric matrix. Eigenvalues
/// are sorted descending; each eigenvector is signed so that its largest
/// magnitude component is positive.
inline SymmetricEigen symmetric_eigen(Matrix a, int max_sweeps = 100) {
  detail::require(a.rows() == a.cols(), "eigendecomposition needs a square matrix");
  const std::size_t n = a.rows();
  Matrix v = Matrix::identity(n);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    double total = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = 0; q < n; ++q) {
        total += a(p, q) * a(p, q);
        if (p != q) off += a(p, q) * a(p, q);
      }
    if (off <= 1e-30 * total || off == 0.0) break;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.values[k] = a(src, src);
    std::size_t big = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(v(i, src)) > std::abs(v(big, src)) + 1e-15) big = i;
    const double sign = v(big, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = sign * v(i, src);
  }
  return out;
}

/// Orthonormal basis (as columns) of the null space of the rows of `a`.
/// Rows that are numerically dependent on earlier ones are ignored.
inline Matrix null_space_basis(const Matrix& a, std::size_t n, double tolerance = 1e-12) {
  std::vector<Vector> basis;
  auto orthogonalize = [&](Vector v) {
    const double original = norm(v);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        const double proj = dot(v, b);
        for (std::size_t i = 0; i < n; ++i) v[i] -= proj * b[i];
      }
    const double len = norm(v);
    if (original == 0.0 || len <= tolerance * std::max(1.0, original)) return false;
    for (double& x : v) x /= len;
    basis.push_back(std::move(v));
    return true;
  };
  for (std::size_t r = 0; r < a.rows(); ++r) orthogonalize(Vector(a.row(r).begin(), a.row(r).end()));
  const std::size_t rank = basis.size();
  // Complete with the coordinate vector whose residual is largest each round.
  while (basis.size() < n) {
    Vector best;
    double best_len = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      Vector e(n, 0.0);
      e[i] = 1.0;
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) {
          const double proj = dot(e, b);
          for (std::size_t k = 0; k < n; ++k) e[k] -= proj * b[k];
        }
      const double len = norm(e);
      if (len > best_len) {
        best_len = len;
        best = std::move(e);
      }
    }
    if (!orthogonalize(std::move(best))) break;
  }
  Matrix z(n, basis.size() - rank);
  for (std::size_t k = rank; k < basis.size(); ++k)
    for (std::size_t i = 0; i < n; ++i) z(i, k - rank) = basis[k][i];
  return z;
}

}  // namespace revdoe::linalg
