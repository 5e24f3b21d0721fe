#pragma once

#include <chrono>
#include <optional>
#include <string>

#include "subopt/oracle.hpp"
#include "subopt/trace.hpp"

namespace subopt {

struct GdOptions {
  std::optional<double> step_size;  // defaults to 1/L
  std::string run_id = "gd";
  bool record_timing = false;
};

/// Plain inexact gradient descent x <- x - h g(x), as a comparison baseline.
template <typename Scalar>
RunTrace gd_baseline_run(InexactOracle<Scalar>& oracle, const Vector<Scalar>& x0, long steps,
                         const GdOptions& opts = {}) {
  const Problem<Scalar>& problem = oracle.problem();
  detail::check_point(problem, x0);
  const Scalar h = opts.step_size ? Scalar(*opts.step_size) : Scalar(1) / problem.L;
  if (!(h > Scalar(0))) throw InvalidInput("gd_baseline_run: step size must be positive");
  RunTrace trace;
  const auto t_start = std::chrono::steady_clock::now();
  Vector<Scalar> x = x0;
  for (long k = 0; k < steps; ++k) {
    const Vector<Scalar> g = oracle.query(x, QueryKind::kFull);
    x -= h * g;
    if (!x.allFinite()) {
      throw TracedDivergence("gd: non-finite iterate at step " + std::to_string(k + 1), trace);
    }
    TraceRecord rec;
    rec.run_id = opts.run_id;
    rec.algo = "gd_baseline";
    rec.k = k + 1;
    if (problem.f_star) rec.f_gap = static_cast<double>(eval_f(problem, x) - *problem.f_star);
    rec.grad_norm = static_cast<double>(g.norm());
    rec.hi_calls = oracle.hi_dim_calls();
    rec.lo_calls = oracle.lo_dim_calls();
    if (opts.record_timing) {
      rec.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                        std::chrono::steady_clock::now() - t_start)
                        .count();
    }
    trace.records.push_back(std::move(rec));
  }
  trace.footer.run_id = opts.run_id;
  trace.footer.algo = "gd_baseline";
  trace.footer.problem = problem.kind;
  trace.footer.records = static_cast<long>(trace.records.size());
  trace.footer.hi_calls = oracle.hi_dim_calls();
  trace.footer.lo_calls = oracle.lo_dim_calls();
  if (problem.f_star) {
    trace.footer.terminal_f_gap = static_cast<double>(eval_f(problem, x) - *problem.f_star);
  }
  return trace;
}

}  // namespace subopt
