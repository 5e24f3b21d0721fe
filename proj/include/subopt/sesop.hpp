#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "subopt/oracle.hpp"
#include "subopt/problem.hpp"
#include "subopt/subspace.hpp"
#include "subopt/subsolver.hpp"
#include "subopt/trace.hpp"
#include "subopt/types.hpp"

namespace subopt {

/// w_{k+1} = 1/2 + sqrt(1/4 + w_k^2).
template <typename Scalar>
Scalar update_weight(Scalar w) {
  if (!(w >= Scalar(0))) throw InvalidInput("update_weight: weight must be non-negative");
  return Scalar(0.5) + std::sqrt(Scalar(0.25) + w * w);
}

template <typename Scalar>
struct SesopState {
  Vector<Scalar> x0;
  Vector<Scalar> x;
  Scalar w = Scalar(1);
  Vector<Scalar> d2_accum;  // sum_i w_i g(x_i)
  long k = 0;

  static SesopState start(const Vector<Scalar>& x0) {
    SesopState s;
    s.x0 = x0;
    s.x = x0;
    s.d2_accum = Vector<Scalar>::Zero(x0.size());
    return s;
  }
};

/// Folds w_k g_k into the weighted gradient sum, then assembles the
/// directions (g_k, x_k - x_0, sum_{i<=k} w_i g_i). A basis with
/// effective_dim 0 signals that x_k is an approximate stationary point.
template <typename Scalar>
SubspaceBasis<Scalar> build_subspace(SesopState<Scalar>& state, const Vector<Scalar>& g_k) {
  if (g_k.size() != state.x.size()) throw InvalidInput("build_subspace: gradient size mismatch");
  state.d2_accum += state.w * g_k;
  return assemble_basis<Scalar>({g_k, state.x - state.x0, state.d2_accum}, state.x.norm());
}

/// Tolerances and iteration budgets for a SESOP run targeting accuracy eps.
struct ToleranceBudget {
  double eps = 0.0;
  double delta1_max = 0.0;        // min of both gradient-noise conditions
  double delta1_exact_tau = 0.0;  // eps / (R/gamma + 10)
  double delta2 = 0.0;
  double delta3 = 0.0;
  double delta4 = 0.0;
  long N_outer = 0;
  long M_inner_per_outer = 0;

  // Problem constants the online updates need.
  double L = 0.0;
  double R = 0.0;
  double gamma = 1.0;
};

/// Subproblem accuracy sufficient for the orthogonality budgets, given the
/// trajectory constant C = 1 + sqrt(max |D||tau|) + sqrt(max |d1|) + max |d2|:
///   min{eps^4 / (6400 L C), eps^2 / (50 L max|d2|), eps^2 / (625 L)}.
inline double sesop_delta4(double eps, double L, double C, double max_d2) {
  double d4 = std::min(std::pow(eps, 4) / (6400.0 * L * C), eps * eps / (625.0 * L));
  if (max_d2 > 0.0) d4 = std::min(d4, eps * eps / (50.0 * L * max_d2));
  return d4;
}

inline double sesop_trajectory_constant(double max_D_tau, double max_d1, double max_d2) {
  return 1.0 + std::sqrt(max_D_tau) + std::sqrt(max_d1) + max_d2;
}

/// Budget at the start of a run (C = 1, A = 1, B = L R^2 / 2); sesop_run
/// tightens delta4 online as the trajectory constants grow.
inline ToleranceBudget sesop_budget(double L, double R_estimate, double gamma, double eps) {
  if (!(L > 0.0) || !(R_estimate > 0.0) || !(eps > 0.0)) {
    throw InvalidInput("sesop_budget: L, R and eps must be positive");
  }
  if (!(gamma > 0.0) || gamma > 1.0) throw InvalidInput("sesop_budget: gamma must lie in (0, 1]");
  ToleranceBudget b;
  b.eps = eps;
  b.L = L;
  b.R = R_estimate;
  b.gamma = gamma;
  b.N_outer = ceil_count(std::sqrt(40.0 * L * R_estimate * R_estimate / (gamma * gamma * eps)));
  b.delta1_exact_tau = eps / (R_estimate / gamma + 10.0);
  const double A = 1.0;
  b.delta1_max = std::min(b.delta1_exact_tau, std::pow(eps, 4) / (6400.0 * A * L));
  b.delta2 = eps * eps / 400.0;
  b.delta3 = eps / 5.0;
  b.delta4 = sesop_delta4(eps, L, 1.0, 0.0);
  const double B = 0.5 * L * R_estimate * R_estimate;
  b.M_inner_per_outer =
      ceil_count(18.0 * std::log(std::max(12800.0 * L * B * 1.0 / std::pow(eps, 4), 1.0)));
  return b;
}

/// Orthogonality residuals at x_k after the step taken with the previous
/// subspace: r2 = |<grad f(x_k), d2_{k-1}>| / k^2, r3 = |<grad f(x_k), x_k - x_0>|.
template <typename Scalar>
std::pair<double, double> orthogonality_residuals(const Problem<Scalar>& problem,
                                                  const SesopState<Scalar>& state,
                                                  const Vector<Scalar>& d2_prev) {
  const Vector<Scalar> g = exact_grad(problem, state.x);
  const double k = static_cast<double>(std::max<long>(state.k, 1));
  const double r2 = std::abs(static_cast<double>(g.dot(d2_prev))) / (k * k);
  const double r3 = std::abs(static_cast<double>(g.dot(state.x - state.x0)));
  return {r2, r3};
}

struct SesopOptions {
  SubsolverConfig subsolver;
  std::string run_id = "sesop";
  bool record_timing = false;
};

/// SESOP with an inexact gradient. Each outer iteration spends one full
/// gradient query, then minimizes over x_k + span(D_k) to delta4 and updates
/// the momentum weight. Records are numbered k = 1..N by the iterate they
/// describe.
template <typename Scalar>
RunTrace sesop_run(InexactOracle<Scalar>& oracle, const Vector<Scalar>& x0,
                   const ToleranceBudget& budget, const SesopOptions& opts = {}) {
  const Problem<Scalar>& problem = oracle.problem();
  detail::check_point(problem, x0);
  RunTrace trace;
  trace.footer.run_id = opts.run_id;
  trace.footer.algo = "sesop";
  trace.footer.problem = problem.kind;
  trace.footer.eps = budget.eps;
  const bool exact_sub = opts.subsolver.kind == SubsolverKind::kClosedForm;
  trace.footer.exact_subsolve = exact_sub;
  trace.footer.delta2 = exact_sub ? 0.0 : budget.delta2;
  trace.footer.delta3 = exact_sub ? 0.0 : budget.delta3;
  trace.footer.delta4 = exact_sub ? 0.0 : budget.delta4;

  const auto t_start = std::chrono::steady_clock::now();
  const double f_star = problem.f_star ? static_cast<double>(*problem.f_star) : 0.0;
  const double L = static_cast<double>(problem.L);

  SesopState<Scalar> state = SesopState<Scalar>::start(x0);
  double max_D_tau = 0.0;
  double max_d1 = 0.0;
  double max_d2 = 0.0;
  double delta4_max_used = 0.0;

  for (long k = 0; k < budget.N_outer; ++k) {
    const Vector<Scalar> g = oracle.query(state.x, QueryKind::kFull);
    if (!g.allFinite()) {
      throw TracedDivergence("sesop: non-finite gradient at iteration " + std::to_string(k), trace);
    }
    SubspaceBasis<Scalar> basis = build_subspace(state, g);
    if (basis.stationary()) {
      trace.footer.stop_reason = "stationary";
      break;
    }
    max_d1 = std::max(max_d1, static_cast<double>((state.x - state.x0).norm()));
    max_d2 = std::max(max_d2, static_cast<double>(state.d2_accum.norm()));
    const double C = sesop_trajectory_constant(max_D_tau, max_d1, max_d2);
    const double delta4 = exact_sub ? 0.0 : sesop_delta4(budget.eps, L, C, max_d2);
    delta4_max_used = std::max(delta4_max_used, delta4);

    const long lo_before = oracle.lo_dim_calls();
    RestrictedOracle<Scalar> low(oracle, state.x, basis.D);
    const Vector<Scalar> g_tau = basis.D.transpose() * g;
    SubproblemResult<Scalar> sub = solve_subproblem(low, opts.subsolver, exact_sub ? 1.0 : delta4,
                                                    L, std::optional<Vector<Scalar>>(g_tau));

    const Vector<Scalar> step = basis.D * sub.tau;
    const Vector<Scalar> d2_prev = state.d2_accum;
    state.x = state.x + step;
    if (!state.x.allFinite()) {
      throw TracedDivergence("sesop: non-finite iterate at iteration " + std::to_string(k + 1),
                             trace);
    }
    state.k = k + 1;
    state.w = update_weight(state.w);
    max_D_tau = std::max(max_D_tau, static_cast<double>(low.d_norm() * sub.tau.norm()));

    TraceRecord rec;
    rec.run_id = opts.run_id;
    rec.algo = "sesop";
    rec.k = state.k;
    if (problem.f_star) rec.f_gap = static_cast<double>(eval_f(problem, state.x)) - f_star;
    rec.grad_norm = static_cast<double>(g.norm());
    rec.q_norm_or_w = static_cast<double>(state.w);
    rec.hi_calls = oracle.hi_dim_calls();
    rec.lo_calls = oracle.lo_dim_calls();
    rec.inner_iters = oracle.lo_dim_calls() - lo_before;
    const auto [r2, r3] = orthogonality_residuals(problem, state, d2_prev);
    rec.r2_residual = r2;
    rec.r3_residual = r3;
    rec.eff_dim = basis.effective_dim;
    rec.delta4 = delta4;
    rec.tau_radius = sub.R_tau;
    rec.max_D_tau = max_D_tau;
    rec.max_d1 = std::max(max_d1, static_cast<double>((state.x - state.x0).norm()));
    rec.max_d2 = max_d2;
    rec.sub_gap = sub.exact_gap;
    rec.sub_bound = sub.accuracy_bound;
    rec.warnings = sub.warnings;
    if (opts.record_timing) {
      rec.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                        std::chrono::steady_clock::now() - t_start)
                        .count();
    }
    for (const auto& w : sub.warnings) add_warning(trace.footer.warnings, w);
    trace.records.push_back(std::move(rec));
  }

  if (!exact_sub) trace.footer.delta4 = delta4_max_used > 0.0 ? delta4_max_used : budget.delta4;
  trace.footer.records = static_cast<long>(trace.records.size());
  trace.footer.hi_calls = oracle.hi_dim_calls();
  trace.footer.lo_calls = oracle.lo_dim_calls();
  if (problem.f_star) {
    trace.footer.terminal_f_gap = static_cast<double>(eval_f(problem, state.x)) - f_star;
  }
  return trace;
}

}  // namespace subopt
