#pragma once

#include <string>
#include <vector>

#include "subopt/harness/config.hpp"

namespace subopt::harness {

/// Environment variable holding the number of concurrent sweep runs.
inline constexpr const char* kJobsEnvVar = "SUBOPT_JOBS";

/// Parallelism from SUBOPT_JOBS, else the hardware concurrency (>= 1).
int sweep_jobs();

/// File name for one sweep member: <stem>_<value>.jsonl with characters
/// outside [A-Za-z0-9.+-] replaced by '_'.
std::string sweep_file_name(const std::string& stem, const Json& value);

/// One run per value with `param_path` overridden; all other fields are
/// kept. Returns the trace paths in value order. `jobs` <= 0 means
/// sweep_jobs().
std::vector<std::string> sweep(const Json& base_config, const std::string& param_path,
                               const std::vector<Json>& values, const std::string& out_dir,
                               int jobs = 0);

}  // namespace subopt::harness
