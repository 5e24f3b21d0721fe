#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "subopt/types.hpp"

namespace subopt {

template <typename Scalar>
struct Ball {
  Vector<Scalar> center;
  Scalar radius;

  Ball(Vector<Scalar> c, Scalar r) : center(std::move(c)), radius(r) {
    if (!(r > Scalar(0))) throw InvalidInput("ball radius must be positive");
  }
  int dim() const { return static_cast<int>(center.size()); }
  bool contains(const Vector<Scalar>& x) const { return (x - center).norm() <= radius; }
};

/// Localizer {x : (x - c)^T H^{-1} (x - c) <= 1} plus the best feasible
/// center seen so far.
template <typename Scalar>
struct EllipsoidState {
  Vector<Scalar> c;
  Matrix<Scalar> H;
  std::optional<Vector<Scalar>> best_point;
  Scalar best_value = std::numeric_limits<Scalar>::infinity();
  long iteration = 0;

  static EllipsoidState from_ball(const Ball<Scalar>& ball) {
    EllipsoidState s;
    s.c = ball.center;
    s.H = ball.radius * ball.radius * Matrix<Scalar>::Identity(ball.dim(), ball.dim());
    return s;
  }
};

/// det(H_{k+1}) / det(H_k) for the central-cut update in dimension n.
inline double ellipsoid_volume_ratio(int n) {
  const double nn = static_cast<double>(n);
  return std::pow(nn * nn / (nn * nn - 1.0), nn) * (nn - 1.0) / (nn + 1.0);
}

/// One central cut with normal w:
///   c' = c - H w / ((n + 1) sqrt(w^T H w))
///   H' = n^2/(n^2 - 1) (H - 2/(n + 1) H w w^T H / (w^T H w))
/// followed by re-symmetrisation and an eigenvalue floor of
/// 1e-14 * trace(H') / n.
template <typename Scalar>
EllipsoidState<Scalar> ellipsoid_step(const EllipsoidState<Scalar>& state,
                                      const Vector<Scalar>& w) {
  const Eigen::Index n = state.c.size();
  if (n < 2) throw InvalidInput("ellipsoid_step needs dimension >= 2");
  if (w.size() != n) throw InvalidInput("ellipsoid_step: cut dimension mismatch");
  if (w.isZero(Scalar(0))) throw NumericalBreakdown("ellipsoid_step: zero cut");

  const Vector<Scalar> Hw = state.H * w;
  const Scalar wHw = w.dot(Hw);
  if (!(wHw > Scalar(0)) || !std::isfinite(static_cast<double>(wHw))) {
    throw NumericalBreakdown("ellipsoid_step: w^T H w is not positive");
  }
  const Scalar nn = Scalar(n);

  EllipsoidState<Scalar> next = state;
  next.c = state.c - Hw / ((nn + Scalar(1)) * std::sqrt(wHw));
  next.H = (nn * nn / (nn * nn - Scalar(1))) *
           (state.H - (Scalar(2) / (nn + Scalar(1))) * (Hw * Hw.transpose()) / wHw);
  next.H = (Scalar(0.5) * (next.H + next.H.transpose())).eval();

  const Scalar floor = Scalar(1e-14) * next.H.trace() / nn;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(next.H);
  if (eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() < floor) {
    const Vector<Scalar> clamped = eig.eigenvalues().cwiseMax(floor);
    next.H = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
    next.H = (Scalar(0.5) * (next.H + next.H.transpose())).eval();
  }
  ++next.iteration;
  return next;
}

/// Membership test and separating normal for the feasible set Q.
template <typename Scalar>
struct Feasibility {
  std::function<bool(const Vector<Scalar>&)> contains;
  std::function<Vector<Scalar>(const Vector<Scalar>&)> separator;
};

/// Q = the ball itself; the separator at an outside point c is c - center.
template <typename Scalar>
Feasibility<Scalar> ball_feasibility(const Ball<Scalar>& ball) {
  return {[ball](const Vector<Scalar>& x) { return ball.contains(x); },
          [ball](const Vector<Scalar>& x) { return Vector<Scalar>(x - ball.center); }};
}

struct EllipsoidTraceRow {
  long outer_iteration = -1;
  long inner_iteration = 0;
  bool feasible = false;
  double value = std::numeric_limits<double>::quiet_NaN();
  double cut_norm = 0.0;
};

template <typename Scalar>
struct EllipsoidResult {
  Vector<Scalar> point;
  Scalar value;
  std::vector<EllipsoidTraceRow> trace;
  long subgradient_queries = 0;
  long iterations = 0;
  bool feasible_found = false;
  bool zero_subgradient_exit = false;
  // Stopped because the localizer shrank below floating-point resolution or
  // the update broke down; `point` is still the best feasible center.
  bool collapsed = false;
};

namespace detail {

template <typename Scalar>
bool is_zero_cut(const Vector<Scalar>& w, const Vector<Scalar>& c) {
  return w.norm() <= Scalar(1e-14) * (Scalar(1) + c.norm());
}

template <typename Scalar>
EllipsoidResult<Scalar> bisection_minimize(
    const std::function<Vector<Scalar>(const Vector<Scalar>&)>& subgrad,
    const std::function<Scalar(const Vector<Scalar>&)>& value, const Ball<Scalar>& domain,
    const Feasibility<Scalar>& feasible, long N) {
  EllipsoidResult<Scalar> out;
  Scalar lo = domain.center[0] - domain.radius;
  Scalar hi = domain.center[0] + domain.radius;
  out.point = domain.center;
  out.value = std::numeric_limits<Scalar>::infinity();

  auto consider = [&](const Vector<Scalar>& c, Scalar v) {
    if (v < out.value) {
      out.value = v;
      out.point = c;
    }
    out.feasible_found = true;
  };

  for (long k = 0; k < N; ++k) {
    Vector<Scalar> c(1);
    c[0] = Scalar(0.5) * (lo + hi);
    EllipsoidTraceRow row;
    row.inner_iteration = k;
    Scalar direction;
    if (feasible.contains(c)) {
      const Scalar v = value(c);
      consider(c, v);
      const Vector<Scalar> w = subgrad(c);
      ++out.subgradient_queries;
      row.feasible = true;
      row.value = static_cast<double>(v);
      row.cut_norm = static_cast<double>(w.norm());
      out.trace.push_back(row);
      out.iterations = k + 1;
      if (is_zero_cut(w, c)) {
        out.point = c;
        out.value = v;
        out.zero_subgradient_exit = true;
        return out;
      }
      direction = w[0];
    } else {
      const Vector<Scalar> w = feasible.separator(c);
      row.cut_norm = static_cast<double>(w.norm());
      out.trace.push_back(row);
      out.iterations = k + 1;
      direction = w[0];
    }
    if (direction > Scalar(0)) {
      hi = c[0];
    } else {
      lo = c[0];
    }
    if (hi - lo <= std::numeric_limits<Scalar>::epsilon() * (Scalar(1) + std::abs(c[0]))) {
      out.collapsed = true;
      break;
    }
  }
  Vector<Scalar> last(1);
  last[0] = Scalar(0.5) * (lo + hi);
  if (feasible.contains(last)) consider(last, value(last));
  if (!out.feasible_found) {
    out.point = domain.center;
    out.value = value(domain.center);
  }
  return out;
}

}  // namespace detail

/// Ellipsoid method with delta-subgradients over a ball domain.
///
/// Runs N cuts starting from E_0 = domain. Feasible centers get a
/// subgradient cut (an exactly zero subgradient returns that center), the
/// others a separator cut. The result is the least-value feasible center
/// among c_0..c_N. One-dimensional domains use bisection on the sign of
/// the subgradient, since the central-cut update divides by n^2 - 1.
template <typename Scalar>
EllipsoidResult<Scalar> ellipsoid_minimize(
    const std::function<Vector<Scalar>(const Vector<Scalar>&)>& subgrad,
    const std::function<Scalar(const Vector<Scalar>&)>& value, const Ball<Scalar>& domain,
    const Feasibility<Scalar>& feasible, long N) {
  if (N < 0) throw InvalidInput("ellipsoid_minimize: negative iteration budget");
  if (!std::isfinite(static_cast<double>(domain.radius))) {
    throw InvalidInput("ellipsoid_minimize: domain radius must be finite");
  }
  if (domain.dim() == 1) return detail::bisection_minimize(subgrad, value, domain, feasible, N);

  EllipsoidResult<Scalar> out;
  EllipsoidState<Scalar> state = EllipsoidState<Scalar>::from_ball(domain);

  auto consider = [&](const Vector<Scalar>& c, Scalar v) {
    if (v < state.best_value) {
      state.best_value = v;
      state.best_point = c;
    }
  };

  for (long k = 0; k < N; ++k) {
    const Vector<Scalar> c = state.c;
    EllipsoidTraceRow row;
    row.inner_iteration = k;
    Vector<Scalar> w;
    if (feasible.contains(c)) {
      const Scalar v = value(c);
      consider(c, v);
      w = subgrad(c);
      ++out.subgradient_queries;
      row.feasible = true;
      row.value = static_cast<double>(v);
      row.cut_norm = static_cast<double>(w.norm());
      out.trace.push_back(row);
      out.iterations = k + 1;
      if (detail::is_zero_cut(w, c)) {
        out.point = c;
        out.value = v;
        out.feasible_found = true;
        out.zero_subgradient_exit = true;
        return out;
      }
    } else {
      w = feasible.separator(c);
      row.cut_norm = static_cast<double>(w.norm());
      out.trace.push_back(row);
      out.iterations = k + 1;
    }

    // Below this size further cuts only move c by sub-ulp amounts.
    const Scalar extent = std::sqrt(std::max(state.H.trace(), Scalar(0)));
    if (extent <= Scalar(1e-15) * (Scalar(1) + c.norm())) {
      out.collapsed = true;
      break;
    }
    try {
      state = ellipsoid_step(state, w);
    } catch (const NumericalBreakdown&) {
      out.collapsed = true;
      break;
    }
  }
  if (!out.collapsed && feasible.contains(state.c)) consider(state.c, value(state.c));

  if (state.best_point) {
    out.point = *state.best_point;
    out.value = state.best_value;
    out.feasible_found = true;
  } else {
    out.point = domain.center;
    out.value = value(domain.center);
    out.feasible_found = false;
  }
  return out;
}

/// Cuts needed for B exp(-N / (2 n^2)) + delta <= eps, i.e.
/// N = ceil(2 n^2 ln(B / (eps - delta))), never negative.
inline long required_ellipsoid_iters(double B, double eps, double delta, int n) {
  if (!(B > 0.0)) throw InvalidInput("required_ellipsoid_iters: B must be positive");
  if (n < 1) throw InvalidInput("required_ellipsoid_iters: dimension must be >= 1");
  if (!(delta >= 0.0)) throw InvalidInput("required_ellipsoid_iters: delta must be >= 0");
  if (!(eps > delta)) {
    throw UnreachableAccuracy("required_ellipsoid_iters: eps must exceed the delta floor");
  }
  const double nn = static_cast<double>(n);
  return ceil_count(2.0 * nn * nn * std::log(B / (eps - delta)));
}

/// B exp(-N / (2 n^2)) + delta.
inline double ellipsoid_accuracy_bound(double B, long N, int n, double delta) {
  const double nn = static_cast<double>(n);
  return B * std::exp(-static_cast<double>(N) / (2.0 * nn * nn)) + delta;
}

}  // namespace subopt
