#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "subopt/oracle.hpp"
#include "subopt/problem.hpp"
#include "subopt/subspace.hpp"
#include "subopt/subsolver.hpp"
#include "subopt/trace.hpp"
#include "subopt/types.hpp"

namespace subopt {

enum class CgStop { kNone, kStopRule, kBudget, kTarget };

template <typename Scalar>
struct CgState {
  Vector<Scalar> x0;
  Vector<Scalar> x;
  Vector<Scalar> x_hat;
  Vector<Scalar> q;  // sum of all g(x_hat_j) so far
  long k = 0;
  CgStop stopped_reason = CgStop::kNone;

  static CgState start(const Vector<Scalar>& x0) {
    CgState s;
    s.x0 = x0;
    s.x = x0;
    s.x_hat = x0;
    s.q = Vector<Scalar>::Zero(x0.size());
    return s;
  }
};

template <typename Scalar>
struct CgSubproblemResult {
  Vector<Scalar> x_hat;
  Scalar value = 0;
  long inner_iters = 0;
  int eff_dim = 0;
  std::optional<double> exact_gap;
  std::vector<std::string> warnings;
};

/// Minimizes f over x0 + span(x - x0, q). The search is parametrised
/// around x itself (x lies in the affine set), so the result is never worse
/// than f(x) beyond the solver tolerance. A degenerate span returns x0.
template <typename Scalar>
CgSubproblemResult<Scalar> cg_subproblem(InexactOracle<Scalar>& oracle, const Vector<Scalar>& x0,
                                         const Vector<Scalar>& x, const Vector<Scalar>& q,
                                         const SubsolverConfig& cfg) {
  const Problem<Scalar>& problem = oracle.problem();
  CgSubproblemResult<Scalar> out;
  SubspaceBasis<Scalar> basis = assemble_basis<Scalar>({Vector<Scalar>(x - x0), q}, x.norm());
  out.eff_dim = basis.effective_dim;
  if (basis.stationary()) {
    out.x_hat = x0;
    out.value = eval_f(problem, x0);
    return out;
  }
  RestrictedOracle<Scalar> low(oracle, x, basis.D);
  const long lo_before = oracle.lo_dim_calls();
  SubproblemResult<Scalar> sub =
      solve_subproblem(low, cfg, cfg.accuracy, static_cast<double>(problem.L));
  out.x_hat = low.point(sub.tau);
  out.value = sub.value;
  out.inner_iters = oracle.lo_dim_calls() - lo_before;
  out.exact_gap = sub.exact_gap;
  out.warnings = sub.warnings;
  return out;
}

/// x <- x_hat - g_hat / (2L), q <- q + g_hat.
template <typename Scalar>
CgState<Scalar> cg_step(CgState<Scalar> state, const Vector<Scalar>& g_hat, Scalar L) {
  if (!(L > Scalar(0))) throw InvalidInput("cg_step: L must be positive");
  state.x = state.x_hat - g_hat / (Scalar(2) * L);
  state.q += g_hat;
  ++state.k;
  return state;
}

/// Stop once |g(x_hat)| <= 8 delta1 / gamma.
inline double stop_threshold(double gamma, double delta1) {
  if (!(gamma > 0.0) || gamma > 1.0) throw InvalidInput("stop_threshold: gamma must lie in (0, 1]");
  if (!(delta1 >= 0.0)) throw InvalidInput("stop_threshold: delta1 must be non-negative");
  return 8.0 * delta1 / gamma;
}

/// Iterations for one phase to reach beta * eps0 (plus the noise term):
/// ceil(2 / (gamma beta) sqrt(2 (1 - beta) L / mu)).
inline long cg_single_phase_iters(double gamma, double beta, double L, double mu) {
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidInput("beta must lie in (0, 1)");
  if (!(gamma > 0.0) || gamma > 1.0) throw InvalidInput("gamma must lie in (0, 1]");
  return std::max<long>(1, ceil_count(2.0 / (gamma * beta) * std::sqrt(2.0 * (1.0 - beta) * L / mu)));
}

/// beta eps0 + (4 / gamma) sqrt(2 eps0 / mu) delta1.
inline double cg_single_phase_bound(double gamma, double beta, double mu, double eps0,
                                    double delta1) {
  return beta * eps0 + 4.0 / gamma * std::sqrt(2.0 * eps0 / mu) * delta1;
}

/// 64 delta1^2 / (gamma^2 mu).
inline double stop_rule_floor(double gamma, double mu, double delta1) {
  return 64.0 * delta1 * delta1 / (gamma * gamma * mu);
}

struct RestartSchedule {
  long K = 1;
  long T = 1;
  double alpha = 0.5;
  double beta = 0.75;  // per-phase contraction (1 + alpha) / 2
  double delta1_bound = 0.0;
  bool delta1_feasible = true;
};

/// K = ceil(2 / (1 - alpha) ln(1 / eps)) phases (at least one) of
/// T = ceil((8 / gamma) sqrt(L / mu) sqrt(1 + alpha) / (1 - alpha)) iterations.
/// `eps` is the target relative to eps0; delta1 is checked against
/// delta1^2 <= gamma^2 alpha^2 mu (eps eps0) / 32.
inline RestartSchedule cg_restart_schedule(double gamma, double L, double mu, double alpha,
                                           double eps, double delta1 = 0.0, double eps0 = 1.0) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0, 1)");
  if (!(gamma > 0.0) || gamma > 1.0) throw InvalidInput("gamma must lie in (0, 1]");
  if (!(L > 0.0) || !(mu > 0.0) || !(eps > 0.0)) {
    throw InvalidInput("cg_restart_schedule: L, mu, eps must be positive");
  }
  RestartSchedule s;
  s.alpha = alpha;
  s.beta = 0.5 * (1.0 + alpha);
  s.K = std::max<long>(1, ceil_count(2.0 / (1.0 - alpha) * std::log(1.0 / eps)));
  s.T = std::max<long>(
      1, ceil_count(8.0 / gamma * std::sqrt(L / mu) * std::sqrt(1.0 + alpha) / (1.0 - alpha)));
  s.delta1_bound = gamma * std::sqrt(alpha * alpha * mu * eps * eps0 / 32.0);
  s.delta1_feasible = delta1 <= s.delta1_bound;
  return s;
}

struct CgOptions {
  SubsolverConfig subsolver{SubsolverKind::kClosedForm};
  bool use_stop_rule = false;
  double gamma = 1.0;
  std::string run_id = "cg";
  std::string algo = "cg";
  // Stop as soon as f - f* <= target_gap (requires f*). Used to count the
  // calls needed to reach a fixed accuracy.
  std::optional<double> target_gap;
  bool record_timing = false;
};

namespace detail {

template <typename Scalar>
struct CgPhaseOutcome {
  Vector<Scalar> output;
  CgStop reason = CgStop::kBudget;
};

template <typename Scalar>
CgPhaseOutcome<Scalar> cg_phase(InexactOracle<Scalar>& oracle, const Vector<Scalar>& x0, long T,
                                long phase, const CgOptions& opts, RunTrace& trace,
                                std::chrono::steady_clock::time_point t_start) {
  const Problem<Scalar>& problem = oracle.problem();
  const double f_star = problem.f_star ? static_cast<double>(*problem.f_star) : 0.0;
  const double threshold =
      opts.use_stop_rule ? stop_threshold(opts.gamma, static_cast<double>(oracle.delta1())) : 0.0;

  CgState<Scalar> state = CgState<Scalar>::start(x0);
  for (long k = 0; k < T; ++k) {
    long inner = 0;
    std::vector<std::string> warnings;
    if (k == 0) {
      state.x_hat = state.x0;
    } else {
      CgSubproblemResult<Scalar> sub =
          cg_subproblem(oracle, state.x0, state.x, state.q, opts.subsolver);
      state.x_hat = sub.x_hat;
      inner = sub.inner_iters;
      warnings = sub.warnings;
    }
    const Vector<Scalar> g = oracle.query(state.x_hat, QueryKind::kFull);
    if (!g.allFinite() || !state.x_hat.allFinite()) {
      throw TracedDivergence("cg: non-finite iterate at iteration " + std::to_string(k), trace);
    }

    TraceRecord rec;
    rec.run_id = opts.run_id;
    rec.algo = opts.algo;
    rec.k = static_cast<long>(trace.records.size());
    rec.phase = phase;
    rec.phase_k = k;
    rec.grad_norm = static_cast<double>(g.norm());
    rec.inner_iters = inner;
    rec.warnings = warnings;
    const Vector<Scalar> exact = exact_grad(problem, state.x_hat);
    rec.r2_residual = std::abs(static_cast<double>(exact.dot(state.q)));
    rec.r3_residual = std::abs(static_cast<double>(exact.dot(state.x - state.x0)));
    rec.q_prev_norm = static_cast<double>(state.q.norm());
    if (problem.f_star) rec.f_gap_hat = static_cast<double>(eval_f(problem, state.x_hat)) - f_star;

    const bool stop = opts.use_stop_rule && rec.grad_norm <= threshold;
    if (stop) {
      rec.stop_fired = true;
      rec.f_gap = rec.f_gap_hat;
      rec.q_norm_or_w = static_cast<double>(state.q.norm());
    } else {
      state = cg_step(state, g, problem.L);
      if (!state.x.allFinite()) {
        throw TracedDivergence("cg: non-finite iterate at iteration " + std::to_string(k), trace);
      }
      if (problem.f_star) rec.f_gap = static_cast<double>(eval_f(problem, state.x)) - f_star;
      rec.q_norm_or_w = static_cast<double>(state.q.norm());
    }
    rec.hi_calls = oracle.hi_dim_calls();
    rec.lo_calls = oracle.lo_dim_calls();
    if (opts.record_timing) {
      rec.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                        std::chrono::steady_clock::now() - t_start)
                        .count();
    }
    for (const auto& w : rec.warnings) add_warning(trace.footer.warnings, w);
    const std::optional<double> gap = rec.f_gap;
    trace.records.push_back(std::move(rec));

    if (stop) return {state.x_hat, CgStop::kStopRule};
    if (opts.target_gap && gap && *gap <= *opts.target_gap) return {state.x, CgStop::kTarget};
  }
  return {state.x, CgStop::kBudget};
}

inline std::string to_string(CgStop s) {
  switch (s) {
    case CgStop::kNone:
      return "none";
    case CgStop::kStopRule:
      return "stop_rule";
    case CgStop::kBudget:
      return "budget";
    case CgStop::kTarget:
      return "target";
  }
  return "none";
}

template <typename Scalar>
void finish_cg_footer(const InexactOracle<Scalar>& oracle, const Vector<Scalar>& output,
                      CgStop reason, const CgOptions& opts, RunTrace& trace) {
  const Problem<Scalar>& problem = oracle.problem();
  trace.footer.run_id = opts.run_id;
  trace.footer.algo = opts.algo;
  trace.footer.problem = problem.kind;
  trace.footer.stop_reason = to_string(reason);
  trace.footer.records = static_cast<long>(trace.records.size());
  trace.footer.hi_calls = oracle.hi_dim_calls();
  trace.footer.lo_calls = oracle.lo_dim_calls();
  trace.footer.exact_subsolve = opts.subsolver.kind == SubsolverKind::kClosedForm;
  if (problem.f_star) {
    trace.footer.terminal_f_gap =
        static_cast<double>(eval_f(problem, output) - *problem.f_star);
  }
}

}  // namespace detail

/// One phase of Nemirovski's conjugate gradient method with an inexact
/// gradient, T iterations or until the stop rule fires.
///
/// Iteration 0 uses x_hat_0 = x_0. For k >= 1, x_hat_k minimizes f over
/// x_0 + span(x_k - x_0, q_{k-1}); then x_{k+1} = x_hat_k - g(x_hat_k) / (2L)
/// and q_k = q_{k-1} + g(x_hat_k). Record k describes x_{k+1} (or x_hat_k
/// when the stop rule fires there).
template <typename Scalar>
RunTrace cg_run(InexactOracle<Scalar>& oracle, const Vector<Scalar>& x0, long T,
                const CgOptions& opts = {}) {
  if (T < 1) throw InvalidInput("cg_run: T must be >= 1");
  detail::check_point(oracle.problem(), x0);
  RunTrace trace;
  const auto t_start = std::chrono::steady_clock::now();
  auto outcome = detail::cg_phase(oracle, x0, T, 0, opts, trace, t_start);
  detail::finish_cg_footer(oracle, outcome.output, outcome.reason, opts, trace);
  trace.footer.T = T;
  return trace;
}

/// K restarts of cg_run, each from the previous phase's output.
template <typename Scalar>
RunTrace cg_restarts_run(InexactOracle<Scalar>& oracle, const Vector<Scalar>& x0,
                         const RestartSchedule& schedule, const CgOptions& opts = {}) {
  detail::check_point(oracle.problem(), x0);
  RunTrace trace;
  const auto t_start = std::chrono::steady_clock::now();
  Vector<Scalar> x = x0;
  CgStop reason = CgStop::kBudget;
  for (long phase = 0; phase < schedule.K; ++phase) {
    auto outcome = detail::cg_phase(oracle, x, schedule.T, phase, opts, trace, t_start);
    x = outcome.output;
    reason = outcome.reason;
    if (reason == CgStop::kStopRule || reason == CgStop::kTarget) break;
  }
  detail::finish_cg_footer(oracle, x, reason, opts, trace);
  trace.footer.T = schedule.T;
  trace.footer.K = schedule.K;
  trace.footer.alpha = schedule.alpha;
  trace.footer.beta = schedule.beta;
  if (!schedule.delta1_feasible) add_warning(trace.footer.warnings, "budget_infeasible");
  return trace;
}

/// Accumulated-gradient norm check on every record of every phase:
///   |q_T| <= 3 delta1 T + (sum_{k<=T} |g(x_hat_k)|^2)^{1/2} + slack,
/// where slack = 3 T rho, rho the largest normalised orthogonality residual
/// |<grad f(x_hat_k), q_{k-1}>| / |q_{k-1}| seen so far in the phase, plus
/// a 1e-12 relative allowance for round-off.
inline bool q_norm_certificate(const RunTrace& trace, double delta1) {
  double sum_sq = 0.0;
  double rho = 0.0;
  long phase = -1;
  for (const auto& rec : trace.records) {
    if (rec.phase != phase) {
      phase = rec.phase;
      sum_sq = 0.0;
      rho = 0.0;
    }
    if (rec.stop_fired) continue;  // q is not updated on the stopping iteration
    sum_sq += rec.grad_norm * rec.grad_norm;
    if (rec.r2_residual && rec.q_prev_norm && *rec.q_prev_norm > 0.0) {
      rho = std::max(rho, *rec.r2_residual / *rec.q_prev_norm);
    }
    const double T = static_cast<double>(rec.phase_k);
    const double base = 3.0 * delta1 * T + std::sqrt(sum_sq);
    const double bound = base + 3.0 * T * rho + 1e-12 * base;
    if (!(rec.q_norm_or_w <= bound)) return false;
  }
  return true;
}

}  // namespace subopt
