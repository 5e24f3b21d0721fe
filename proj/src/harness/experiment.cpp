#include "subopt/harness/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <random>

#include "subopt/cg.hpp"
#include "subopt/gd_baseline.hpp"
#include "subopt/harness/trace_io.hpp"
#include "subopt/sesop.hpp"

namespace subopt::harness {

namespace {

double param_number(const Json& params, const char* key, double fallback) {
  if (!params.contains(key) || params.at(key).is_null()) return fallback;
  if (!params.at(key).is_number()) {
    throw ConfigError(std::string("problem.params.") + key + " must be a number");
  }
  return params.at(key).get<double>();
}

std::string param_string(const Json& params, const char* key, const std::string& fallback) {
  if (!params.contains(key)) return fallback;
  if (!params.at(key).is_string()) {
    throw ConfigError(std::string("problem.params.") + key + " must be a string");
  }
  return params.at(key).get<std::string>();
}

VectorXd param_vector(const Json& params, const char* key, int dim) {
  const Json& v = params.at(key);
  if (v.is_number() && dim == 1) return VectorXd::Constant(1, v.get<double>());
  if (!v.is_array() || static_cast<int>(v.size()) != dim) {
    throw ConfigError(std::string("problem.params.") + key + " must be a list of length dim");
  }
  VectorXd out(dim);
  for (int i = 0; i < dim; ++i) out[i] = v.at(static_cast<std::size_t>(i)).get<double>();
  return out;
}

VectorXd seeded_unit_vector(int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd v(dim);
  do {
    for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

// x0 = x* + radius * direction, unless an explicit x0 is given.
VectorXd starting_point(const RunConfig& cfg, const VectorXd& x_star, double default_radius) {
  const Json& p = cfg.problem_params;
  if (p.contains("x0")) return param_vector(p, "x0", cfg.dim);
  const double radius = param_number(p, "x0_radius", default_radius);
  const std::string dir = param_string(p, "x0_direction", "ones");
  VectorXd u;
  if (dir == "ones") {
    u = VectorXd::Ones(cfg.dim) / std::sqrt(static_cast<double>(cfg.dim));
  } else if (dir == "random") {
    u = seeded_unit_vector(cfg.dim, cfg.problem_seed);
  } else {
    throw ConfigError("problem.params.x0_direction must be 'ones' or 'random'");
  }
  return x_star + radius * u;
}

ProblemInstance build_quadratic(const RunConfig& cfg) {
  const Json& p = cfg.problem_params;
  VectorXd spectrum;
  if (p.contains("eigenvalues")) {
    spectrum = param_vector(p, "eigenvalues", cfg.dim);
  } else {
    double lo = 1.0;
    double hi = 100.0;
    if (p.contains("spectrum")) {
      const Json& s = p.at("spectrum");
      if (!s.is_array() || s.size() != 2) {
        throw ConfigError("problem.params.spectrum must be [lambda_min, lambda_max]");
      }
      lo = s.at(0).get<double>();
      hi = s.at(1).get<double>();
    }
    lo = param_number(p, "lambda_min", lo);
    hi = param_number(p, "lambda_max", hi);
    const std::string spacing = param_string(p, "spacing", "linear");
    if (spacing == "linear") {
      spectrum = linear_spectrum<double>(cfg.dim, lo, hi);
    } else if (spacing == "log") {
      spectrum = log_spectrum<double>(cfg.dim, lo, hi);
    } else {
      throw ConfigError("problem.params.spacing must be 'linear' or 'log'");
    }
  }
  VectorXd x_star = VectorXd::Zero(cfg.dim);
  if (p.contains("x_star")) x_star = param_vector(p, "x_star", cfg.dim);
  const double offset = param_number(p, "offset", 0.0);
  ProblemInstance inst{make_quadratic<double>(spectrum, x_star, offset), VectorXd()};
  inst.x0 = starting_point(cfg, x_star, 1.0);
  return inst;
}

ProblemInstance build_pl_nonconvex(const RunConfig& cfg) {
  if (cfg.dim != 1) throw ConfigError("pl_nonconvex is one-dimensional (problem.dim = 1)");
  const Json& p = cfg.problem_params;
  ProblemInstance inst{make_certified_pl_nonconvex<double>(), VectorXd()};
  if (!inst.problem.gamma || !inst.problem.mu) {
    throw ConfigError("pl_nonconvex: certification of gamma or mu failed");
  }
  inst.x0 = starting_point(cfg, VectorXd::Zero(1), param_number(p, "x0_radius", 3.0));
  return inst;
}

// Run constants shared by every algorithm.
struct Constants {
  double L = 0.0;
  double R = 1.0;
  double eps0 = 0.0;
  double gamma = 1.0;
  std::optional<double> mu;
};

Constants run_constants(const RunConfig& cfg, const ProblemInstance& inst) {
  const auto& problem = inst.problem;
  Constants c;
  c.L = problem.L;
  if (cfg.R) {
    c.R = *cfg.R;
  } else if (problem.x_star) {
    const double r = (inst.x0 - *problem.x_star).norm();
    c.R = r > 0.0 ? r : 1.0;
  }
  if (problem.f_star) c.eps0 = eval_f(problem, inst.x0) - *problem.f_star;
  c.gamma = algo_param(cfg, "gamma").value_or(problem.gamma.value_or(1.0));
  if (!(c.gamma > 0.0) || c.gamma > 1.0) throw ConfigError("algo.params.gamma must lie in (0, 1]");
  if (problem.mu) c.mu = *problem.mu;
  return c;
}

long long_param(const RunConfig& cfg, const char* name, long fallback) {
  const auto v = algo_param(cfg, name);
  if (!v) return fallback;
  if (!(*v >= 1.0) || *v != std::floor(*v)) {
    throw ConfigError(std::string("algo.params.") + name + " must be a positive integer");
  }
  return static_cast<long>(*v);
}

double require_mu(const Constants& c, const std::string& algo) {
  if (!c.mu) throw ConfigError(algo + " needs a problem with known mu");
  return *c.mu;
}

CgOptions cg_options(const RunConfig& cfg, const Constants& c, const std::string& run_id) {
  CgOptions opts;
  opts.subsolver = cfg.subsolver;
  opts.use_stop_rule = algo_flag(cfg, "use_stop_rule", false);
  opts.gamma = c.gamma;
  opts.run_id = run_id;
  opts.algo = cfg.algo;
  opts.record_timing = cfg.record_timing;
  if (cfg.target_rel_gap) opts.target_gap = *cfg.target_rel_gap * c.eps0;
  return opts;
}

RunTrace dispatch(const RunConfig& cfg, OracleD& oracle, const ProblemInstance& inst,
                  const Constants& c, const std::string& run_id, RunFooter& constants) {
  constants.L = c.L;
  constants.R = c.R;
  constants.eps0 = c.eps0;
  constants.delta1 = cfg.delta1;
  constants.mu = c.mu;
  constants.gamma = c.gamma;
  constants.eps = cfg.eps;

  if (cfg.algo == "sesop") {
    ToleranceBudget budget = sesop_budget(c.L, c.R, c.gamma, cfg.eps);
    if (cfg.max_outer) budget.N_outer = *cfg.max_outer;
    SesopOptions opts;
    opts.subsolver = cfg.subsolver;
    if (cfg.max_inner) opts.subsolver.max_iters = *cfg.max_inner;
    opts.run_id = run_id;
    opts.record_timing = cfg.record_timing;
    constants.T = budget.N_outer;
    return sesop_run(oracle, inst.x0, budget, opts);
  }
  if (cfg.algo == "cg") {
    const double beta = algo_param(cfg, "beta").value_or(0.5);
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("algo.params.beta must lie in (0, 1)");
    long T = cfg.max_outer.value_or(0);
    if (T == 0) T = long_param(cfg, "T", 0);
    if (T == 0) T = cg_single_phase_iters(c.gamma, beta, c.L, require_mu(c, "cg"));
    constants.beta = beta;
    return cg_run(oracle, inst.x0, T, cg_options(cfg, c, run_id));
  }
  if (cfg.algo == "cg_restarts") {
    const double alpha = algo_param(cfg, "alpha").value_or(0.5);
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("algo.params.alpha must lie in (0, 1)");
    // budget.eps is the accuracy relative to eps0 for restarts.
    if (!(cfg.eps < 1.0)) throw ConfigError("cg_restarts: budget.eps is relative and must be < 1");
    RestartSchedule s = cg_restart_schedule(c.gamma, c.L, require_mu(c, "cg_restarts"), alpha,
                                            cfg.eps, cfg.delta1, c.eps0);
    s.T = long_param(cfg, "T", s.T);
    s.K = long_param(cfg, "K", s.K);
    return cg_restarts_run(oracle, inst.x0, s, cg_options(cfg, c, run_id));
  }
  if (cfg.algo == "gd_baseline") {
    GdOptions opts;
    opts.step_size = algo_param(cfg, "step_size");
    opts.run_id = run_id;
    opts.record_timing = cfg.record_timing;
    return gd_baseline_run(oracle, inst.x0, cfg.max_outer.value_or(100), opts);
  }
  throw ConfigError("unknown algo: '" + cfg.algo + "'");
}

// Copies the run constants into the footer, keeping what the solver set.
void merge_constants(RunFooter& footer, const RunFooter& c) {
  footer.L = c.L;
  footer.R = c.R;
  footer.eps0 = c.eps0;
  footer.delta1 = c.delta1;
  footer.mu = c.mu;
  footer.gamma = c.gamma;
  footer.eps = c.eps;
  if (footer.T == 0) footer.T = c.T;
  if (footer.beta == 0.0) footer.beta = c.beta;
}

}  // namespace

std::vector<std::string> zoo_names() { return {"quadratic", "pl_nonconvex"}; }

ProblemInstance build_problem(const RunConfig& cfg) {
  try {
    if (cfg.problem_kind == "quadratic") return build_quadratic(cfg);
    if (cfg.problem_kind == "pl_nonconvex") return build_pl_nonconvex(cfg);
  } catch (const InvalidProblem& e) {
    throw ConfigError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("problem.params: ") + e.what());
  }
  throw ConfigError("unknown problem kind: '" + cfg.problem_kind + "'");
}

RunTrace execute(const RunConfig& cfg, const std::string& run_id) {
  const ProblemInstance inst = build_problem(cfg);
  const Constants c = run_constants(cfg, inst);
  OracleD oracle(inst.problem, cfg.delta1, parse_noise_model(cfg.noise_model), cfg.oracle_seed);
  RunFooter constants;
  RunTrace trace;
  try {
    trace = dispatch(cfg, oracle, inst, c, run_id, constants);
  } catch (const TracedDivergence& e) {
    trace = e.partial();
    trace.footer.status = "diverged";
    trace.footer.stop_reason = "diverged";
    trace.footer.error = e.what();
  } catch (const DivergenceError& e) {
    trace.footer.status = "diverged";
    trace.footer.stop_reason = "diverged";
    trace.footer.error = e.what();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  RunFooter& f = trace.footer;
  f.run_id = run_id;
  f.algo = cfg.algo;
  f.problem = inst.problem.kind;
  f.records = static_cast<long>(trace.records.size());
  f.hi_calls = oracle.hi_dim_calls();
  f.lo_calls = oracle.lo_dim_calls();
  merge_constants(f, constants);
  return trace;
}

RunOutcome run_experiment(const RunConfig& cfg, const std::string& out_path) {
  const std::string path = out_path.empty() ? cfg.output_path : out_path;
  if (path.empty()) throw ConfigError("no output path (output.path or --out)");
  const std::filesystem::path fs_path(path);
  if (fs_path.has_parent_path()) std::filesystem::create_directories(fs_path.parent_path());
  const RunTrace trace = execute(cfg, fs_path.stem().string());
  write_trace_file(path, trace, cfg.raw);
  return {path, trace.footer.status, trace.footer.error};
}

}  // namespace subopt::harness
