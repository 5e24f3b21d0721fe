#include "subopt/harness/report.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "subopt/harness/trace_io.hpp"
#include "subopt/harness/verify.hpp"

namespace subopt::harness {

namespace {

struct Row {
  std::string algo;
  std::string problem;
  double delta1 = 0.0;
  std::string terminal_f_gap;
  long hi_calls = 0;
  long lo_calls = 0;
  int bounds_passed = 0;
};

std::string format_number(double v) {
  return Json(v).dump();
}

}  // namespace

int report(const std::string& in_dir, const std::string& out_path) {
  if (!std::filesystem::is_directory(in_dir)) {
    throw std::runtime_error("report: not a directory: " + in_dir);
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(in_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  std::vector<Row> rows;
  for (const auto& path : files) {
    try {
      const TraceFile file = read_trace_file(path.string());
      const RunFooter& f = file.trace.footer;
      if (f.algo.empty()) throw std::runtime_error("no footer");
      Row row{f.algo, f.problem, f.delta1, "", f.hi_calls, f.lo_calls, 0};
      row.terminal_f_gap = f.terminal_f_gap ? format_number(*f.terminal_f_gap) : "";
      try {
        row.bounds_passed = verify_bounds(file, parse_config(file.config)).passed();
      } catch (const ConfigError&) {
        row.bounds_passed = 0;
      }
      rows.push_back(std::move(row));
    } catch (const std::exception& e) {
      std::cerr << "warning: skipping " << path.string() << ": " << e.what() << '\n';
    }
  }
  if (rows.empty()) throw std::runtime_error("report: no readable traces in " + in_dir);
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.algo != b.algo) return a.algo < b.algo;
    return a.delta1 < b.delta1;
  });

  const std::filesystem::path out(out_path);
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  std::ofstream csv(out_path, std::ios::binary | std::ios::trunc);
  if (!csv) throw std::runtime_error("cannot write report: " + out_path);
  csv << "algo,problem,delta1,terminal_f_gap,hi_calls,lo_calls,bounds_passed\n";
  for (const auto& r : rows) {
    csv << r.algo << ',' << r.problem << ',' << format_number(r.delta1) << ',' << r.terminal_f_gap
        << ',' << r.hi_calls << ',' << r.lo_calls << ',' << r.bounds_passed << '\n';
  }
  return static_cast<int>(rows.size());
}

}  // namespace subopt::harness
