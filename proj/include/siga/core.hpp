#ifndef SIGA_CORE_HPP
#define SIGA_CORE_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace siga {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

// Error hierarchy. Every failure raised by the library derives from
// siga::Error so callers can catch one type at the boundary.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad dimensions, out-of-range parameters.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// The problem data violates a modelling invariant (empty box, indefinite
// covariance, ...).
class ModelError : public Error {
 public:
  using Error::Error;
};

// An iterative solve did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual, long iterations)
      : Error(what), last_residual_(last_residual), iterations_(iterations) {}

  double last_residual() const { return last_residual_; }
  long iterations() const { return iterations_; }

 private:
  double last_residual_;
  long iterations_;
};

// Non-finite values, singular factorizations.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, long row, long column)
      : Error(what + " (row " + std::to_string(row) + ", column " + std::to_string(column) + ")"),
        row_(row),
        column_(column) {}

  long row() const { return row_; }
  long column() const { return column_; }

 private:
  long row_;
  long column_;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require_size(Index actual, Index expected, const char* what) {
  if (actual != expected) {
    throw ArgumentError(std::string(what) + ": expected length " + std::to_string(expected) +
                        ", got " + std::to_string(actual));
  }
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& a) {
  return a.allFinite();
}

}  // namespace detail
}  // namespace siga

#endif  // SIGA_CORE_HPP
