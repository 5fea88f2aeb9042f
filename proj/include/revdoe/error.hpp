#pragma once

#include <stdexcept>
#include <string>

namespace revdoe {

/// Input violates a documented precondition (dimension mismatch, non-positive
/// cost, bad level code, ...). The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A well-formed problem that the numerics cannot finish: singular normal
/// equations, unbounded QP, iteration cap. The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace detail
}  // namespace revdoe
