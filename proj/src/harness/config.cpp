#include "subopt/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "subopt/harness/experiment.hpp"

namespace subopt::harness {

namespace {

const Json& section(const Json& doc, const char* name) {
  static const Json kEmpty = Json::object();
  if (!doc.contains(name)) return kEmpty;
  const Json& s = doc.at(name);
  if (!s.is_object()) throw ConfigError(std::string(name) + " must be an object");
  return s;
}

void reject_unknown(const Json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return item.key() == a; });
    if (!known) throw ConfigError("unknown field " + where + item.key());
  }
}

template <typename T>
T get_or(const Json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("field " + where + key + " has the wrong type");
  }
}

template <typename T>
std::optional<T> get_opt(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("field " + where + key + " has the wrong type");
  }
}

}  // namespace

RunConfig parse_config(const Json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(doc, "", {"problem", "oracle", "algo", "budget", "subsolver", "output"});
  RunConfig cfg;
  cfg.raw = doc;

  const Json& problem = section(doc, "problem");
  reject_unknown(problem, "problem.", {"kind", "dim", "params", "seed"});
  cfg.problem_kind = get_or<std::string>(problem, "kind", "", "problem.");
  const auto names = zoo_names();
  if (std::find(names.begin(), names.end(), cfg.problem_kind) == names.end()) {
    throw ConfigError("unknown problem kind: '" + cfg.problem_kind + "'");
  }
  cfg.dim = get_or<int>(problem, "dim", cfg.problem_kind == "pl_nonconvex" ? 1 : 0, "problem.");
  if (cfg.dim < 1) throw ConfigError("problem.dim must be >= 1");
  if (problem.contains("params")) {
    if (!problem.at("params").is_object()) throw ConfigError("problem.params must be an object");
    cfg.problem_params = problem.at("params");
  }
  cfg.problem_seed = get_or<std::uint64_t>(problem, "seed", 0, "problem.");

  const Json& oracle = section(doc, "oracle");
  reject_unknown(oracle, "oracle.", {"delta1", "noise_model", "seed"});
  cfg.delta1 = get_or<double>(oracle, "delta1", 0.0, "oracle.");
  if (!(cfg.delta1 >= 0.0)) throw ConfigError("oracle.delta1 must be >= 0");
  cfg.noise_model = get_or<std::string>(oracle, "noise_model", "zero", "oracle.");
  try {
    (void)parse_noise_model(cfg.noise_model);
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  cfg.oracle_seed = get_or<std::uint64_t>(oracle, "seed", 0, "oracle.");

  const Json& algo = section(doc, "algo");
  reject_unknown(algo, "algo.", {"name", "params"});
  cfg.algo = get_or<std::string>(algo, "name", "", "algo.");
  if (cfg.algo != "sesop" && cfg.algo != "cg" && cfg.algo != "cg_restarts" &&
      cfg.algo != "gd_baseline") {
    throw ConfigError("unknown algo: '" + cfg.algo + "'");
  }
  if (algo.contains("params")) {
    if (!algo.at("params").is_object()) throw ConfigError("algo.params must be an object");
    cfg.algo_params = algo.at("params");
  }

  const Json& budget = section(doc, "budget");
  reject_unknown(budget, "budget.", {"eps", "max_outer", "max_inner", "target_rel_gap", "R"});
  cfg.eps = get_or<double>(budget, "eps", 0.0, "budget.");
  if (!(cfg.eps > 0.0)) throw ConfigError("budget.eps must be > 0");
  cfg.max_outer = get_opt<long>(budget, "max_outer", "budget.");
  cfg.max_inner = get_opt<long>(budget, "max_inner", "budget.");
  cfg.target_rel_gap = get_opt<double>(budget, "target_rel_gap", "budget.");
  cfg.R = get_opt<double>(budget, "R", "budget.");
  if (cfg.max_outer && *cfg.max_outer < 1) throw ConfigError("budget.max_outer must be >= 1");
  if (cfg.max_inner && *cfg.max_inner < 1) throw ConfigError("budget.max_inner must be >= 1");
  if (cfg.R && !(*cfg.R > 0.0)) throw ConfigError("budget.R must be > 0");

  const Json& sub = section(doc, "subsolver");
  reject_unknown(sub, "subsolver.", {"kind", "R_tau", "max_retries", "grid_points"});
  try {
    cfg.subsolver.kind = parse_subsolver_kind(get_or<std::string>(
        sub, "kind", cfg.algo == "sesop" ? "ellipsoid" : "closed_form", "subsolver."));
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  cfg.subsolver.R_tau = get_or<double>(sub, "R_tau", 1.0, "subsolver.");
  cfg.subsolver.max_retries = get_or<int>(sub, "max_retries", 4, "subsolver.");
  cfg.subsolver.grid_points = get_or<int>(sub, "grid_points", 21, "subsolver.");
  if (!(cfg.subsolver.R_tau > 0.0)) throw ConfigError("subsolver.R_tau must be > 0");
  if (cfg.subsolver.max_retries < 0) throw ConfigError("subsolver.max_retries must be >= 0");

  const Json& output = section(doc, "output");
  reject_unknown(output, "output.", {"path", "record_timing"});
  cfg.output_path = get_or<std::string>(output, "path", "", "output.");
  cfg.record_timing = get_or<bool>(output, "record_timing", false, "output.");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

std::optional<double> algo_param(const RunConfig& cfg, std::string_view name) {
  const std::string key(name);
  if (!cfg.algo_params.contains(key) || cfg.algo_params.at(key).is_null()) return std::nullopt;
  const Json& v = cfg.algo_params.at(key);
  if (!v.is_number()) throw ConfigError("algo.params." + key + " must be a number");
  return v.get<double>();
}

bool algo_flag(const RunConfig& cfg, std::string_view name, bool fallback) {
  const std::string key(name);
  if (!cfg.algo_params.contains(key)) return fallback;
  const Json& v = cfg.algo_params.at(key);
  if (!v.is_boolean()) throw ConfigError("algo.params." + key + " must be a boolean");
  return v.get<bool>();
}

Json set_dotted(Json doc, const std::string& path, const Json& value) {
  if (path.empty()) throw ConfigError("empty parameter path");
  Json* node = &doc;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (part.empty() || !node->is_object() || !node->contains(part)) {
      throw ConfigError("parameter path does not exist: " + path);
    }
    node = &(*node)[part];
  }
  if (node->is_object() || node->is_array()) {
    throw ConfigError("parameter path does not address a scalar: " + path);
  }
  *node = value;
  return doc;
}

Json parse_scalar(const std::string& token) {
  if (token == "true") return true;
  if (token == "false") return false;
  long long as_int = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (auto [p, ec] = std::from_chars(first, last, as_int); ec == std::errc() && p == last) {
    return as_int;
  }
  double as_double = 0.0;
  if (auto [p, ec] = std::from_chars(first, last, as_double); ec == std::errc() && p == last) {
    return as_double;
  }
  return token;
}

}  // namespace subopt::harness
