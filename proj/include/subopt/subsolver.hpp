#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "subopt/ellipsoid.hpp"
#include "subopt/subspace.hpp"
#include "subopt/trace.hpp"
#include "subopt/types.hpp"

namespace subopt {

enum class SubsolverKind { kEllipsoid, kClosedForm, kGrid };

inline SubsolverKind parse_subsolver_kind(std::string_view name) {
  if (name == "ellipsoid") return SubsolverKind::kEllipsoid;
  if (name == "closed_form") return SubsolverKind::kClosedForm;
  if (name == "grid") return SubsolverKind::kGrid;
  throw InvalidInput("unknown subsolver kind: " + std::string(name));
}

inline std::string to_string(SubsolverKind k) {
  switch (k) {
    case SubsolverKind::kEllipsoid:
      return "ellipsoid";
    case SubsolverKind::kClosedForm:
      return "closed_form";
    case SubsolverKind::kGrid:
      return "grid";
  }
  return "unknown";
}

struct SubsolverConfig {
  SubsolverKind kind = SubsolverKind::kEllipsoid;
  double R_tau = 1.0;
  int max_retries = 4;
  int grid_points = 21;
  long max_iters = 0;  // caps the ellipsoid budget when > 0
  // Target value accuracy for sub-solves that are not handed an explicit
  // tolerance (the CG plane search).
  double accuracy = 1e-12;
};

template <typename Scalar>
struct SubproblemResult {
  Vector<Scalar> tau;
  Scalar value = 0;
  long inner_iters = 0;  // tau-gradient queries actually issued
  long budget_iters = 0;
  double R_tau = 0.0;
  int retries = 0;
  double B_est = 0.0;
  double delta_sub = 0.0;
  std::optional<double> accuracy_bound;
  // value - exact restricted minimum, when the objective is quadratic and
  // the minimizer lies inside the final ball.
  std::optional<double> exact_gap;
  bool exact = false;
  std::vector<std::string> warnings;
  std::vector<EllipsoidTraceRow> ellipsoid_trace;
};

namespace detail {

template <typename Scalar>
std::optional<Vector<Scalar>> quadratic_restricted_minimizer(const RestrictedOracle<Scalar>& low) {
  const auto& hess = low.problem().hessian;
  if (!hess) return std::nullopt;
  const Matrix<Scalar> Ht = low.D().transpose() * (*hess) * low.D();
  const Vector<Scalar> g0 = low.exact_grad(Vector<Scalar>::Zero(low.dim()));
  Eigen::LDLT<Matrix<Scalar>> ldlt(Ht);
  if (ldlt.info() != Eigen::Success) return std::nullopt;
  Vector<Scalar> tau = -ldlt.solve(g0);
  if (!tau.allFinite()) return std::nullopt;
  return tau;
}

// Compass search on values only, starting from `start` with step `h`,
// confined to the ball.
template <typename Scalar>
Vector<Scalar> compass_refine(const RestrictedOracle<Scalar>& low, Vector<Scalar> start,
                              Scalar start_value, Scalar h, Scalar radius, Scalar* out_value) {
  const int n = low.dim();
  Vector<Scalar> x = std::move(start);
  Scalar fx = start_value;
  const Scalar stop = Scalar(1e-13) * (Scalar(1) + radius);
  long evals = 0;
  while (h > stop && evals < 200000) {
    bool improved = false;
    for (int i = 0; i < n && !improved; ++i) {
      for (Scalar sign : {Scalar(1), Scalar(-1)}) {
        Vector<Scalar> y = x;
        y[i] += sign * h;
        if (y.norm() > radius) continue;
        const Scalar fy = low.value(y);
        ++evals;
        if (fy < fx) {
          x = std::move(y);
          fx = fy;
          improved = true;
          break;
        }
      }
    }
    if (!improved) h *= Scalar(0.5);
  }
  *out_value = fx;
  return x;
}

template <typename Scalar>
void grid_search(const RestrictedOracle<Scalar>& low, Scalar radius, int points,
                 Vector<Scalar>* best, Scalar* best_value) {
  const int n = low.dim();
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  const Scalar h = Scalar(2) * radius / Scalar(points - 1);
  while (true) {
    Vector<Scalar> tau(n);
    for (int i = 0; i < n; ++i) tau[i] = -radius + h * Scalar(idx[static_cast<std::size_t>(i)]);
    if (tau.norm() <= radius) {
      const Scalar v = low.value(tau);
      if (v < *best_value) {
        *best_value = v;
        *best = tau;
      }
    }
    int d = 0;
    while (d < n && ++idx[static_cast<std::size_t>(d)] == points) {
      idx[static_cast<std::size_t>(d)] = 0;
      ++d;
    }
    if (d == n) break;
  }
}

}  // namespace detail

/// Minimizes the restricted objective over a ball around tau = 0.
///
/// Ellipsoid mode: budget N = required_ellipsoid_iters(B_est, delta4 +
/// delta_sub, delta_sub, n) with delta_sub = 2 R |D| delta1 and
/// B_est = |g(0)| R + L |D|^2 R^2 / 2. Whenever the answer lands within
/// 0.9 R of the boundary the radius doubles and the solve is repeated, at
/// most `max_retries` times. `g0` is an already available restricted
/// gradient at tau = 0; it is reused instead of a fresh query.
///
/// Closed-form mode solves the quadratic restriction exactly from the
/// problem's Hessian; grid mode scans a grid_points^n lattice and refines
/// by compass search using function values only.
template <typename Scalar>
SubproblemResult<Scalar> solve_subproblem(RestrictedOracle<Scalar>& low,
                                          const SubsolverConfig& cfg, double delta4, double L,
                                          std::optional<Vector<Scalar>> g0 = std::nullopt) {
  if (!(cfg.R_tau > 0.0)) throw InvalidInput("subproblem radius must be positive");
  const int n = low.dim();
  const Vector<Scalar> origin = Vector<Scalar>::Zero(n);
  const Scalar value0 = low.value(origin);

  SubproblemResult<Scalar> out;
  out.tau = origin;
  out.value = value0;
  out.R_tau = cfg.R_tau;

  if (cfg.kind == SubsolverKind::kClosedForm) {
    if (!low.problem().hessian) {
      throw InvalidInput("closed_form subsolver needs a quadratic problem");
    }
    auto tau = detail::quadratic_restricted_minimizer(low);
    out.exact = true;
    out.exact_gap = 0.0;
    if (tau) {
      const Scalar v = low.value(*tau);
      if (v <= value0) {
        out.tau = *tau;
        out.value = v;
      }
      out.R_tau = std::max(cfg.R_tau, static_cast<double>(tau->norm()));
    } else {
      add_warning(out.warnings, "closed_form_singular");
    }
    return out;
  }

  const double dnorm = static_cast<double>(low.d_norm());
  const double delta1 = static_cast<double>(low.delta1());
  Scalar radius = Scalar(cfg.R_tau);

  if (cfg.kind == SubsolverKind::kGrid) {
    if (cfg.grid_points < 3) throw InvalidInput("grid subsolver needs >= 3 points per axis");
    for (int attempt = 0;; ++attempt) {
      Vector<Scalar> best = origin;
      Scalar best_value = value0;
      detail::grid_search(low, radius, cfg.grid_points, &best, &best_value);
      const Scalar h = Scalar(2) * radius / Scalar(cfg.grid_points - 1);
      Scalar refined_value;
      Vector<Scalar> refined =
          detail::compass_refine(low, best, best_value, h, radius, &refined_value);
      out.tau = refined;
      out.value = refined_value;
      out.R_tau = static_cast<double>(radius);
      out.retries = attempt;
      if (refined.norm() >= Scalar(0.9) * radius && attempt < cfg.max_retries) {
        radius *= Scalar(2);
        continue;
      }
      if (refined.norm() >= Scalar(0.9) * radius) add_warning(out.warnings, "unbounded_step");
      break;
    }
    if (auto tau_star = detail::quadratic_restricted_minimizer(low);
        tau_star && tau_star->norm() <= radius) {
      out.exact_gap = static_cast<double>(out.value - low.value(*tau_star));
    }
    return out;
  }

  // Ellipsoid.
  Vector<Scalar> grad_origin = g0 ? *g0 : low.grad(origin);
  if (!g0) ++out.inner_iters;
  const double g0_norm = static_cast<double>(grad_origin.norm());

  for (int attempt = 0;; ++attempt) {
    const double R = static_cast<double>(radius);
    const double delta_sub = 2.0 * R * dnorm * delta1;
    const double B = std::max(g0_norm * R + 0.5 * L * dnorm * dnorm * R * R, 1e-300);
    if (!(delta4 > 0.0)) throw InvalidInput("subproblem accuracy delta4 must be positive");
    long N = required_ellipsoid_iters(B, delta4 + delta_sub, delta_sub, n);
    if (cfg.max_iters > 0 && N > cfg.max_iters) {
      N = cfg.max_iters;
      add_warning(out.warnings, "inner_budget_capped");
    }

    long queries = 0;
    std::function<Vector<Scalar>(const Vector<Scalar>&)> subgrad =
        [&](const Vector<Scalar>& tau) -> Vector<Scalar> {
      if (tau.isZero(Scalar(0))) return grad_origin;
      ++queries;
      return low.grad(tau);
    };
    std::function<Scalar(const Vector<Scalar>&)> value = [&](const Vector<Scalar>& tau) {
      return low.value(tau);
    };
    const Ball<Scalar> ball(origin, radius);
    EllipsoidResult<Scalar> res =
        ellipsoid_minimize<Scalar>(subgrad, value, ball, ball_feasibility(ball), N);

    out.inner_iters += queries;
    out.budget_iters = N;
    out.B_est = B;
    out.delta_sub = delta_sub;
    out.R_tau = R;
    out.retries = attempt;
    out.accuracy_bound = res.zero_subgradient_exit ? delta_sub
                                                   : ellipsoid_accuracy_bound(B, N, n, delta_sub);
    out.ellipsoid_trace = std::move(res.trace);
    if (res.value <= value0) {
      out.tau = res.point;
      out.value = res.value;
    } else {
      out.tau = origin;
      out.value = value0;
    }
    if (delta4 <= delta_sub) add_warning(out.warnings, "accuracy_floor");
    if (!res.feasible_found) add_warning(out.warnings, "infeasible_run");

    if (out.tau.norm() >= Scalar(0.9) * radius) {
      if (attempt < cfg.max_retries) {
        radius *= Scalar(2);
        continue;
      }
      add_warning(out.warnings, "unbounded_step");
    }
    break;
  }

  if (auto tau_star = detail::quadratic_restricted_minimizer(low);
      tau_star && tau_star->norm() <= radius) {
    out.exact_gap = static_cast<double>(out.value - low.value(*tau_star));
  }
  return out;
}

}  // namespace subopt
