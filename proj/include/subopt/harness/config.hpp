#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

#include "subopt/subsolver.hpp"

namespace subopt::harness {

using Json = nlohmann::ordered_json;

/// Malformed or inconsistent run configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parsed experiment description. `raw` keeps the document as read so it
/// can be embedded in the trace footer and re-derived for sweeps.
struct RunConfig {
  Json raw;

  std::string problem_kind;
  int dim = 0;
  Json problem_params = Json::object();
  std::uint64_t problem_seed = 0;

  double delta1 = 0.0;
  std::string noise_model = "zero";
  std::uint64_t oracle_seed = 0;

  std::string algo;
  Json algo_params = Json::object();

  double eps = 0.0;
  std::optional<long> max_outer;
  std::optional<long> max_inner;
  std::optional<double> target_rel_gap;
  std::optional<double> R;

  SubsolverConfig subsolver;
  std::string output_path;
  bool record_timing = false;
};

RunConfig parse_config(const Json& doc);
RunConfig load_config(const std::string& path);

/// Optional numeric field of algo.params.
std::optional<double> algo_param(const RunConfig& cfg, std::string_view name);
bool algo_flag(const RunConfig& cfg, std::string_view name, bool fallback);

/// Replaces the scalar at a dotted path ("oracle.delta1"). The path must
/// already exist and address a scalar.
Json set_dotted(Json doc, const std::string& path, const Json& value);

/// Interprets a command-line token as a JSON scalar: number, boolean, or
/// string otherwise.
Json parse_scalar(const std::string& token);

}  // namespace subopt::harness
