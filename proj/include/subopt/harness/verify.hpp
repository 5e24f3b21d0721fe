#pragma once

#include <string>
#include <vector>

#include "subopt/harness/config.hpp"
#include "subopt/harness/trace_io.hpp"

namespace subopt::harness {

enum class CheckStatus { kPass, kFail, kNotApplicable };

std::string to_string(CheckStatus s);

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::kNotApplicable;
  std::string detail;
  // Largest observed value / bound over the checked entries (0 when n/a).
  double worst_ratio = 0.0;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  int passed() const;
  int failed() const;
  int not_applicable() const;
  bool ok() const { return failed() == 0; }
};

/// Re-checks every applicable convergence bound against a recorded trace.
/// Pure over its inputs: constants come from the footer, algorithm
/// parameters from `cfg`; nothing is re-run.
VerifyReport verify_bounds(const TraceFile& file, const RunConfig& cfg);

Json report_to_json(const VerifyReport& report);

}  // namespace subopt::harness
