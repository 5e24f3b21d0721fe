// Command-line front end: run, sweep, verify, report.
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "subopt/harness/config.hpp"
#include "subopt/harness/experiment.hpp"
#include "subopt/harness/report.hpp"
#include "subopt/harness/sweep.hpp"
#include "subopt/harness/trace_io.hpp"
#include "subopt/harness/verify.hpp"

namespace h = subopt::harness;

namespace {

std::vector<h::Json> split_values(const std::string& csv) {
  std::vector<h::Json> out;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) out.push_back(h::parse_scalar(token));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inexact-gradient SESOP and conjugate-gradient experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  auto* run = app.add_subcommand("run", "Run one experiment and write its trace");
  run->add_option("--config", config_path, "JSON run config")->required();
  run->add_option("--out", out_path, "Trace output path (default: output.path)");

  std::string param;
  std::string values;
  std::string out_dir;
  int jobs = 0;
  auto* sw = app.add_subcommand(
      "sweep", "One run per value of a config field (parallelism: SUBOPT_JOBS)");
  sw->add_option("--config", config_path, "JSON run config")->required();
  sw->add_option("--param", param, "Dotted path of a scalar field, e.g. oracle.delta1")
      ->required();
  sw->add_option("--values", values, "Comma-separated values")->required();
  sw->add_option("--out-dir", out_dir, "Directory for the traces")->required();
  sw->add_option("--jobs", jobs, "Concurrent runs (overrides SUBOPT_JOBS)");

  std::string trace_path;
  auto* verify = app.add_subcommand("verify", "Check convergence bounds against a trace");
  verify->add_option("--trace", trace_path, "Trace file")->required();
  verify->add_option("--config", config_path, "JSON run config")->required();

  std::string in_dir;
  auto* rep = app.add_subcommand("report", "Summarize a directory of traces as CSV");
  rep->add_option("--in", in_dir, "Directory of *.jsonl traces")->required();
  rep->add_option("--out", out_path, "CSV output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const h::RunOutcome outcome = h::run_experiment(h::load_config(config_path), out_path);
      std::cout << outcome.path << '\n';
      if (!outcome.ok()) {
        std::cerr << "run " << outcome.status << ": " << outcome.error << '\n';
        return 3;
      }
      return 0;
    }
    if (*sw) {
      const h::RunConfig base = h::load_config(config_path);
      for (const auto& p : h::sweep(base.raw, param, split_values(values), out_dir, jobs)) {
        std::cout << p << '\n';
      }
      return 0;
    }
    if (*verify) {
      const h::VerifyReport report =
          h::verify_bounds(h::read_trace_file(trace_path), h::load_config(config_path));
      std::cout << h::report_to_json(report).dump(2) << '\n';
      return report.ok() ? 0 : 1;
    }
    if (*rep) {
      const int rows = h::report(in_dir, out_path);
      std::cout << rows << " rows written to " << out_path << '\n';
      return 0;
    }
  } catch (const h::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
