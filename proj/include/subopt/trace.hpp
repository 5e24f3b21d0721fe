#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "subopt/types.hpp"

namespace subopt {

/// One outer iteration of any solver. Field order here is the on-disk
/// field order of the trace file.
struct TraceRecord {
  std::string run_id;
  std::string algo;
  long k = 0;
  std::optional<double> f_gap;
  double grad_norm = 0.0;
  double q_norm_or_w = 0.0;
  long hi_calls = 0;
  long lo_calls = 0;
  long inner_iters = 0;
  std::optional<double> r2_residual;
  std::optional<double> r3_residual;
  bool stop_fired = false;
  std::int64_t wall_ns = 0;

  // Solver-specific diagnostics.
  long phase = 0;
  long phase_k = 0;
  int eff_dim = 0;
  double delta4 = 0.0;
  double tau_radius = 0.0;
  double max_D_tau = 0.0;
  double max_d1 = 0.0;
  double max_d2 = 0.0;
  std::optional<double> f_gap_hat;
  std::optional<double> q_prev_norm;
  std::optional<double> sub_gap;
  std::optional<double> sub_bound;
  std::vector<std::string> warnings;
};

/// Totals and run constants, written as the trailing record of a trace.
struct RunFooter {
  std::string run_id;
  std::string algo;
  std::string problem;
  long records = 0;
  long hi_calls = 0;
  long lo_calls = 0;
  std::string stop_reason = "budget";
  std::string status = "ok";
  std::string error;
  std::optional<double> terminal_f_gap;

  double L = 0.0;
  double R = 0.0;
  double eps0 = 0.0;
  double delta1 = 0.0;
  std::optional<double> mu;
  std::optional<double> gamma;

  // Tolerances the run was configured with (0 for exact sub-solves).
  double eps = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  double delta4 = 0.0;
  long T = 0;
  long K = 0;
  double beta = 0.0;
  double alpha = 0.0;
  bool exact_subsolve = false;
  std::vector<std::string> warnings;
};

struct RunTrace {
  std::vector<TraceRecord> records;
  RunFooter footer;
};

/// Divergence that carries the records produced before the failure.
class TracedDivergence : public DivergenceError {
 public:
  TracedDivergence(const std::string& what, RunTrace partial)
      : DivergenceError(what), partial_(std::move(partial)) {}
  const RunTrace& partial() const { return partial_; }

 private:
  RunTrace partial_;
};

inline void add_warning(std::vector<std::string>& list, const std::string& w) {
  for (const auto& existing : list) {
    if (existing == w) return;
  }
  list.push_back(w);
}

}  // namespace subopt
