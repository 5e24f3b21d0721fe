#include "subopt/harness/trace_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

namespace subopt::harness {

namespace {

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> opt_from(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

template <typename T>
T value_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

}  // namespace

Json record_to_json(const TraceRecord& r) {
  Json j;
  j["run_id"] = r.run_id;
  j["algo"] = r.algo;
  j["k"] = r.k;
  j["f_gap"] = opt(r.f_gap);
  j["grad_norm"] = r.grad_norm;
  j["q_norm_or_w"] = r.q_norm_or_w;
  j["hi_calls"] = r.hi_calls;
  j["lo_calls"] = r.lo_calls;
  j["inner_iters"] = r.inner_iters;
  j["r2_residual"] = opt(r.r2_residual);
  j["r3_residual"] = opt(r.r3_residual);
  j["stop_fired"] = r.stop_fired;
  j["wall_ns"] = r.wall_ns;
  j["phase"] = r.phase;
  j["phase_k"] = r.phase_k;
  j["eff_dim"] = r.eff_dim;
  j["delta4"] = r.delta4;
  j["tau_radius"] = r.tau_radius;
  j["max_D_tau"] = r.max_D_tau;
  j["max_d1"] = r.max_d1;
  j["max_d2"] = r.max_d2;
  j["f_gap_hat"] = opt(r.f_gap_hat);
  j["q_prev_norm"] = opt(r.q_prev_norm);
  j["sub_gap"] = opt(r.sub_gap);
  j["sub_bound"] = opt(r.sub_bound);
  j["warnings"] = r.warnings;
  return j;
}

TraceRecord record_from_json(const Json& j) {
  TraceRecord r;
  r.run_id = value_or<std::string>(j, "run_id", "");
  r.algo = value_or<std::string>(j, "algo", "");
  r.k = j.at("k").get<long>();
  r.f_gap = opt_from(j, "f_gap");
  r.grad_norm = value_or<double>(j, "grad_norm", 0.0);
  r.q_norm_or_w = value_or<double>(j, "q_norm_or_w", 0.0);
  r.hi_calls = value_or<long>(j, "hi_calls", 0);
  r.lo_calls = value_or<long>(j, "lo_calls", 0);
  r.inner_iters = value_or<long>(j, "inner_iters", 0);
  r.r2_residual = opt_from(j, "r2_residual");
  r.r3_residual = opt_from(j, "r3_residual");
  r.stop_fired = value_or<bool>(j, "stop_fired", false);
  r.wall_ns = value_or<std::int64_t>(j, "wall_ns", 0);
  r.phase = value_or<long>(j, "phase", 0);
  r.phase_k = value_or<long>(j, "phase_k", 0);
  r.eff_dim = value_or<int>(j, "eff_dim", 0);
  r.delta4 = value_or<double>(j, "delta4", 0.0);
  r.tau_radius = value_or<double>(j, "tau_radius", 0.0);
  r.max_D_tau = value_or<double>(j, "max_D_tau", 0.0);
  r.max_d1 = value_or<double>(j, "max_d1", 0.0);
  r.max_d2 = value_or<double>(j, "max_d2", 0.0);
  r.f_gap_hat = opt_from(j, "f_gap_hat");
  r.q_prev_norm = opt_from(j, "q_prev_norm");
  r.sub_gap = opt_from(j, "sub_gap");
  r.sub_bound = opt_from(j, "sub_bound");
  r.warnings = value_or<std::vector<std::string>>(j, "warnings", {});
  return r;
}

Json footer_to_json(const RunFooter& f, const Json& config) {
  Json j;
  j["type"] = "footer";
  j["run_id"] = f.run_id;
  j["algo"] = f.algo;
  j["problem"] = f.problem;
  j["records"] = f.records;
  j["hi_calls"] = f.hi_calls;
  j["lo_calls"] = f.lo_calls;
  j["stop_reason"] = f.stop_reason;
  j["status"] = f.status;
  j["error"] = f.error;
  j["terminal_f_gap"] = opt(f.terminal_f_gap);
  j["L"] = f.L;
  j["R"] = f.R;
  j["eps0"] = f.eps0;
  j["delta1"] = f.delta1;
  j["mu"] = opt(f.mu);
  j["gamma"] = opt(f.gamma);
  j["eps"] = f.eps;
  j["delta2"] = f.delta2;
  j["delta3"] = f.delta3;
  j["delta4"] = f.delta4;
  j["T"] = f.T;
  j["K"] = f.K;
  j["beta"] = f.beta;
  j["alpha"] = f.alpha;
  j["exact_subsolve"] = f.exact_subsolve;
  j["warnings"] = f.warnings;
  j["config"] = config;
  return j;
}

RunFooter footer_from_json(const Json& j) {
  RunFooter f;
  f.run_id = value_or<std::string>(j, "run_id", "");
  f.algo = value_or<std::string>(j, "algo", "");
  f.problem = value_or<std::string>(j, "problem", "");
  f.records = value_or<long>(j, "records", 0);
  f.hi_calls = value_or<long>(j, "hi_calls", 0);
  f.lo_calls = value_or<long>(j, "lo_calls", 0);
  f.stop_reason = value_or<std::string>(j, "stop_reason", "budget");
  f.status = value_or<std::string>(j, "status", "ok");
  f.error = value_or<std::string>(j, "error", "");
  f.terminal_f_gap = opt_from(j, "terminal_f_gap");
  f.L = value_or<double>(j, "L", 0.0);
  f.R = value_or<double>(j, "R", 0.0);
  f.eps0 = value_or<double>(j, "eps0", 0.0);
  f.delta1 = value_or<double>(j, "delta1", 0.0);
  f.mu = opt_from(j, "mu");
  f.gamma = opt_from(j, "gamma");
  f.eps = value_or<double>(j, "eps", 0.0);
  f.delta2 = value_or<double>(j, "delta2", 0.0);
  f.delta3 = value_or<double>(j, "delta3", 0.0);
  f.delta4 = value_or<double>(j, "delta4", 0.0);
  f.T = value_or<long>(j, "T", 0);
  f.K = value_or<long>(j, "K", 0);
  f.beta = value_or<double>(j, "beta", 0.0);
  f.alpha = value_or<double>(j, "alpha", 0.0);
  f.exact_subsolve = value_or<bool>(j, "exact_subsolve", false);
  f.warnings = value_or<std::vector<std::string>>(j, "warnings", {});
  return f;
}

void write_trace(std::ostream& out, const RunTrace& trace, const Json& config) {
  for (const auto& rec : trace.records) out << record_to_json(rec).dump() << '\n';
  out << footer_to_json(trace.footer, config).dump() << '\n';
}

void write_trace_file(const std::string& path, const RunTrace& trace, const Json& config) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write trace: " + path);
  write_trace(out, trace, config);
  if (!out) throw std::runtime_error("write failed: " + path);
}

TraceFile read_trace(std::istream& in) {
  TraceFile file;
  bool have_footer = false;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const Json j = Json::parse(line);
      if (j.contains("type") && j.at("type") == "footer") {
        file.trace.footer = footer_from_json(j);
        if (j.contains("config")) file.config = j.at("config");
        have_footer = true;
      } else {
        file.trace.records.push_back(record_from_json(j));
      }
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_footer) {
    file.trace.footer.records = static_cast<long>(file.trace.records.size());
    if (!file.trace.records.empty()) {
      file.trace.footer.algo = file.trace.records.back().algo;
      file.trace.footer.run_id = file.trace.records.back().run_id;
    }
  }
  return file;
}

TraceFile read_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace: " + path);
  return read_trace(in);
}

}  // namespace subopt::harness
