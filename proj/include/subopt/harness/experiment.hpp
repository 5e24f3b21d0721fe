#pragma once

#include <string>
#include <vector>

#include "subopt/harness/config.hpp"
#include "subopt/problem.hpp"
#include "subopt/trace.hpp"

namespace subopt::harness {

/// Zoo member plus the starting point the config asks for.
struct ProblemInstance {
  Problem<double> problem;
  VectorXd x0;
};

/// Problem zoo keyed by name: "quadratic" and "pl_nonconvex".
ProblemInstance build_problem(const RunConfig& cfg);
std::vector<std::string> zoo_names();

/// Runs the configured algorithm. Divergence is caught and reported in the
/// footer (status "diverged") together with the records produced so far.
RunTrace execute(const RunConfig& cfg, const std::string& run_id);

struct RunOutcome {
  std::string path;
  std::string status;  // "ok" or "diverged"
  std::string error;
  bool ok() const { return status == "ok"; }
};

/// execute() and write the trace to `out_path` (or cfg.output_path when
/// empty). The run id is the file name without extension.
RunOutcome run_experiment(const RunConfig& cfg, const std::string& out_path = "");

}  // namespace subopt::harness
