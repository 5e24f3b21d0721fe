#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "subopt/types.hpp"

namespace subopt {

/// Objective with its exact gradient and analytically or numerically
/// certified constants.
///
/// `L` bounds the Lipschitz constant of the gradient. `mu` is the PL /
/// quadratic-growth constant and `gamma` the quasar-convexity constant
/// with respect to `x_star`; either may be absent when not certified.
/// `hessian` is set for quadratic objectives and enables the closed-form
/// subproblem solver.
template <typename Scalar>
struct Problem {
  std::string kind;
  int dim = 0;
  std::function<Scalar(const Vector<Scalar>&)> f;
  std::function<Vector<Scalar>(const Vector<Scalar>&)> grad;
  Scalar L = 0;
  std::optional<Scalar> mu;
  std::optional<Scalar> gamma;
  std::optional<Scalar> f_star;
  std::optional<Vector<Scalar>> x_star;
  bool convex = false;
  std::optional<Matrix<Scalar>> hessian;
};

using ProblemD = Problem<double>;

namespace detail {

template <typename Scalar>
void check_point(const Problem<Scalar>& problem, const Vector<Scalar>& x) {
  if (x.size() != problem.dim) {
    throw InvalidInput("dimension mismatch: expected " + std::to_string(problem.dim) + ", got " +
                       std::to_string(x.size()));
  }
  if (!x.allFinite()) throw InvalidInput("non-finite query point");
}

}  // namespace detail

/// Exact objective value. Function values never touch the oracle counters.
template <typename Scalar>
Scalar eval_f(const Problem<Scalar>& problem, const Vector<Scalar>& x) {
  detail::check_point(problem, x);
  return problem.f(x);
}

/// Exact gradient, for diagnostics only (solvers go through InexactOracle).
template <typename Scalar>
Vector<Scalar> exact_grad(const Problem<Scalar>& problem, const Vector<Scalar>& x) {
  detail::check_point(problem, x);
  return problem.grad(x);
}

/// f(x) = offset + 1/2 sum_i lambda_i (x_i - x*_i)^2.
template <typename Scalar>
Problem<Scalar> make_quadratic(const Vector<Scalar>& spectrum, const Vector<Scalar>& x_star,
                               Scalar f_star_offset = Scalar(0)) {
  if (spectrum.size() == 0) throw InvalidProblem("quadratic: empty spectrum");
  if (x_star.size() != spectrum.size()) throw InvalidProblem("quadratic: x_star size mismatch");
  for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
    if (!(spectrum[i] > Scalar(0)) || !std::isfinite(static_cast<double>(spectrum[i]))) {
      throw InvalidProblem("quadratic: spectrum entries must be positive and finite");
    }
  }
  if (!x_star.allFinite()) throw InvalidProblem("quadratic: non-finite minimizer");

  Problem<Scalar> p;
  p.kind = "quadratic";
  p.dim = static_cast<int>(spectrum.size());
  p.f = [spectrum, x_star, f_star_offset](const Vector<Scalar>& x) {
    const Vector<Scalar> r = x - x_star;
    return f_star_offset + Scalar(0.5) * (spectrum.array() * r.array().square()).sum();
  };
  p.grad = [spectrum, x_star](const Vector<Scalar>& x) {
    return Vector<Scalar>(spectrum.array() * (x - x_star).array());
  };
  p.L = spectrum.maxCoeff();
  p.mu = spectrum.minCoeff();
  p.gamma = Scalar(1);
  p.f_star = f_star_offset;
  p.x_star = x_star;
  p.convex = true;
  p.hessian = Matrix<Scalar>(spectrum.asDiagonal());
  return p;
}

/// n eigenvalues evenly spaced on [lo, hi] (n = 1 gives {hi}).
template <typename Scalar>
Vector<Scalar> linear_spectrum(int n, Scalar lo, Scalar hi) {
  if (n < 1) throw InvalidProblem("spectrum size must be >= 1");
  if (n == 1) return Vector<Scalar>::Constant(1, hi);
  return Vector<Scalar>::LinSpaced(n, lo, hi);
}

/// n eigenvalues geometrically spaced on [lo, hi].
template <typename Scalar>
Vector<Scalar> log_spectrum(int n, Scalar lo, Scalar hi) {
  if (n < 1) throw InvalidProblem("spectrum size must be >= 1");
  if (!(lo > 0) || !(hi >= lo)) throw InvalidProblem("log spectrum needs 0 < lo <= hi");
  if (n == 1) return Vector<Scalar>::Constant(1, hi);
  Vector<Scalar> s(n);
  const Scalar step = std::log(hi / lo) / Scalar(n - 1);
  for (int i = 0; i < n; ++i) s[i] = lo * std::exp(step * Scalar(i));
  s[n - 1] = hi;
  return s;
}

/// f(x) = x^2 + 3 sin^2(x) in one dimension: PL but not convex.
/// f'' = 2 + 6 cos(2x) gives L = 8. mu and gamma are left uncertified.
template <typename Scalar>
Problem<Scalar> make_pl_nonconvex() {
  Problem<Scalar> p;
  p.kind = "pl_nonconvex";
  p.dim = 1;
  p.f = [](const Vector<Scalar>& x) {
    const Scalar s = std::sin(x[0]);
    return x[0] * x[0] + Scalar(3) * s * s;
  };
  p.grad = [](const Vector<Scalar>& x) {
    Vector<Scalar> g(1);
    g[0] = Scalar(2) * x[0] + Scalar(3) * std::sin(Scalar(2) * x[0]);
    return g;
  };
  p.L = Scalar(8);
  p.f_star = Scalar(0);
  p.x_star = Vector<Scalar>::Zero(1);
  p.convex = false;
  return p;
}

/// Points used by the brute-force certifiers. In 1-D this is an even grid
/// on [x* - r, x* + r]; in higher dimensions a seeded uniform sample of the
/// cube of half-width r around x*.
template <typename Scalar>
std::vector<Vector<Scalar>> certification_grid(const Problem<Scalar>& problem, Scalar radius,
                                               int points, std::uint64_t seed = 0) {
  if (!problem.x_star) throw PreconditionError("certification grid needs x_star");
  const Vector<Scalar>& center = *problem.x_star;
  std::vector<Vector<Scalar>> grid;
  grid.reserve(static_cast<std::size_t>(points));
  if (problem.dim == 1) {
    for (int i = 0; i < points; ++i) {
      Vector<Scalar> x(1);
      x[0] = center[0] - radius +
             Scalar(2) * radius * Scalar(i) / Scalar(std::max(points - 1, 1));
      grid.push_back(std::move(x));
    }
    return grid;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < points; ++i) {
    Vector<Scalar> x(problem.dim);
    for (int j = 0; j < problem.dim; ++j) x[j] = center[j] + radius * Scalar(unit(rng));
    grid.push_back(std::move(x));
  }
  return grid;
}

/// Brute-force quasar-convexity constant: the least ratio
/// <grad f(x), x - x*> / (f(x) - f*) over the grid, clamped to (0, 1].
/// Returns nullopt when some ratio is non-positive.
template <typename Scalar>
std::optional<Scalar> estimate_quasar_gamma(const Problem<Scalar>& problem, Scalar grid_radius,
                                            int grid_points, std::uint64_t seed = 0) {
  if (!problem.x_star || !problem.f_star) {
    throw PreconditionError("estimate_quasar_gamma needs x_star and f_star");
  }
  if (grid_points < 2) throw PreconditionError("estimate_quasar_gamma needs >= 2 grid points");
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (const auto& x : certification_grid(problem, grid_radius, grid_points, seed)) {
    const Scalar gap = problem.f(x) - *problem.f_star;
    if (!(gap > Scalar(0))) continue;
    const Scalar ratio = problem.grad(x).dot(x - *problem.x_star) / gap;
    if (!(ratio > Scalar(0))) return std::nullopt;
    best = std::min(best, ratio);
  }
  if (!std::isfinite(static_cast<double>(best))) return Scalar(1);
  return std::min(best, Scalar(1));
}

/// Brute-force PL constant: the least ratio |grad f|^2 / (2 (f - f*)).
template <typename Scalar>
std::optional<Scalar> estimate_pl_mu(const Problem<Scalar>& problem, Scalar grid_radius,
                                     int grid_points, std::uint64_t seed = 0) {
  if (!problem.x_star || !problem.f_star) {
    throw PreconditionError("estimate_pl_mu needs x_star and f_star");
  }
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (const auto& x : certification_grid(problem, grid_radius, grid_points, seed)) {
    const Scalar gap = problem.f(x) - *problem.f_star;
    if (!(gap > Scalar(0))) continue;
    const Scalar ratio = problem.grad(x).squaredNorm() / (Scalar(2) * gap);
    if (!(ratio > Scalar(0))) return std::nullopt;
    best = std::min(best, ratio);
  }
  if (!std::isfinite(static_cast<double>(best))) return std::nullopt;
  return best;
}

/// pl_nonconvex with gamma and mu filled in from the grid certifiers on
/// [-10, 10] with 10^4 points.
template <typename Scalar>
Problem<Scalar> make_certified_pl_nonconvex() {
  Problem<Scalar> p = make_pl_nonconvex<Scalar>();
  p.gamma = estimate_quasar_gamma(p, Scalar(10), 10000);
  p.mu = estimate_pl_mu(p, Scalar(10), 10000);
  return p;
}

}  // namespace subopt
