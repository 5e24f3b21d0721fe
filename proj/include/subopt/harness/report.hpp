#pragma once

#include <string>

namespace subopt::harness {

/// Summary CSV over every *.jsonl trace in `in_dir`: one row per run,
/// sorted by (algo, delta1). Unreadable traces are skipped with a warning
/// on stderr. Returns the number of rows written.
int report(const std::string& in_dir, const std::string& out_path);

}  // namespace subopt::harness
