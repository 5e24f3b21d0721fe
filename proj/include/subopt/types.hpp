#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace subopt {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VectorXd = Vector<double>;
using MatrixXd = Matrix<double>;

/// Problem construction failed (bad spectrum, dimension mismatch, ...).
class InvalidProblem : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A query point or argument was outside the operation's domain.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A required precondition (e.g. known minimizer) does not hold.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Requested accuracy is below the inexactness floor.
class UnreachableAccuracy : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The ellipsoid update met a zero cut or a non-positive quadratic form.
class NumericalBreakdown : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterates became non-finite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ceiling that ignores a relative round-off excess, so that e.g.
/// sqrt(40 * 100 / 0.1) = 200.00000000000003 maps to 200.
inline long ceil_count(double value) {
  if (!std::isfinite(value)) throw InvalidInput("ceil_count: non-finite count");
  if (value <= 0.0) return 0;
  const double snapped = std::round(value);
  if (std::abs(value - snapped) <= 1e-12 * std::max(1.0, std::abs(value))) {
    return static_cast<long>(snapped);
  }
  return static_cast<long>(std::ceil(value));
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace subopt
