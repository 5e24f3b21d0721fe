#include "subopt/harness/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "subopt/cg.hpp"

namespace subopt::harness {

namespace {

constexpr double kUlpAllowance = 8.0 * std::numeric_limits<double>::epsilon();

// Accumulates (value, bound) pairs into one check.
class Check {
 public:
  explicit Check(std::string name) { result_.name = std::move(name); }

  void observe(double value, double bound, const std::string& where) {
    ++count_;
    const double ratio = bound > 0.0 ? value / bound : (value > 0.0 ? HUGE_VAL : 0.0);
    if (ratio > result_.worst_ratio || count_ == 1) result_.worst_ratio = ratio;
    if (!(value <= bound) && first_fail_.empty()) {
      std::ostringstream os;
      os.precision(6);
      os << where << ": " << value << " > " << bound;
      first_fail_ = os.str();
    }
  }

  void not_applicable(std::string why) { na_reason_ = std::move(why); }

  CheckResult finish() {
    if (!na_reason_.empty() || count_ == 0) {
      result_.status = CheckStatus::kNotApplicable;
      result_.detail = na_reason_.empty() ? "no applicable entries" : na_reason_;
      result_.worst_ratio = 0.0;
    } else if (!first_fail_.empty()) {
      result_.status = CheckStatus::kFail;
      result_.detail = first_fail_;
    } else {
      result_.status = CheckStatus::kPass;
      result_.detail = std::to_string(count_) + " entries";
    }
    return result_;
  }

 private:
  CheckResult result_;
  long count_ = 0;
  std::string first_fail_;
  std::string na_reason_;
};

std::string at_k(long k) { return "k=" + std::to_string(k); }

bool has_warning(const std::vector<std::string>& list, const std::string& w) {
  return std::find(list.begin(), list.end(), w) != list.end();
}

bool has_gaps(const RunTrace& t) {
  return !t.records.empty() &&
         std::all_of(t.records.begin(), t.records.end(), [](const auto& r) { return r.f_gap; });
}

CheckResult check_run_status(const RunFooter& f) {
  CheckResult r{"run_status", CheckStatus::kPass, f.status, 0.0};
  if (f.status != "ok") {
    r.status = CheckStatus::kFail;
    r.detail = f.status + ": " + f.error;
  }
  return r;
}

CheckResult check_config_match(const RunFooter& f, const RunConfig& cfg) {
  CheckResult r{"config_match", CheckStatus::kPass, "algo and delta1 agree", 0.0};
  if (f.algo.empty()) {
    r.status = CheckStatus::kNotApplicable;
    r.detail = "trace has no footer";
  } else if (f.algo != cfg.algo || f.delta1 != cfg.delta1) {
    r.status = CheckStatus::kFail;
    r.detail = "trace algo/delta1 differ from config";
  }
  return r;
}

CheckResult check_record_order(const RunTrace& t) {
  CheckResult r{"record_order", CheckStatus::kPass, "", 0.0};
  for (std::size_t i = 1; i < t.records.size(); ++i) {
    const auto& a = t.records[i - 1];
    const auto& b = t.records[i];
    if (!(b.k > a.k) || b.hi_calls < a.hi_calls || b.lo_calls < a.lo_calls) {
      r.status = CheckStatus::kFail;
      r.detail = "order or counter violation at record " + std::to_string(i);
      return r;
    }
  }
  r.detail = std::to_string(t.records.size()) + " records";
  return r;
}

// f_gap(k) <= 8LR^2/(gamma^2 k^2) + (R/gamma + 10) delta1 + 4 sqrt(delta2)
//            + delta3 + 5 sqrt(L delta4 / k), for k >= 8.
CheckResult check_sesop_rate(const RunTrace& t) {
  Check c("sesop_rate");
  const RunFooter& f = t.footer;
  const double g = f.gamma.value_or(1.0);
  if (!(f.L > 0.0) || !(f.R > 0.0)) c.not_applicable("run constants missing");
  if (!has_gaps(t)) c.not_applicable("f* unknown");
  bool any = false;
  for (const auto& r : t.records) {
    if (r.k < 8 || !r.f_gap) continue;
    any = true;
    const double k = static_cast<double>(r.k);
    const double bound = 8.0 * f.L * f.R * f.R / (g * g * k * k) + (f.R / g + 10.0) * f.delta1 +
                         4.0 * std::sqrt(f.delta2) + f.delta3 + 5.0 * std::sqrt(f.L * f.delta4 / k);
    c.observe(*r.f_gap, bound, at_k(r.k));
  }
  if (!any) c.not_applicable("needs records with k >= 8");
  return c.finish();
}

// f(x_{k+1}) <= f(x_k) + delta4, starting from f(x_0) - f* = eps0.
CheckResult check_sesop_descent(const RunTrace& t) {
  Check c("sesop_descent");
  const RunFooter& f = t.footer;
  if (!has_gaps(t)) c.not_applicable("f* unknown");
  double prev = f.eps0;
  bool have_prev = f.algo == "sesop" && f.eps0 > 0.0;
  long prev_k = 0;
  for (const auto& r : t.records) {
    if (!r.f_gap) continue;
    if (have_prev && r.k == prev_k + 1) {
      const double slack = f.delta4 + kUlpAllowance * (std::abs(prev) + 1.0);
      c.observe(*r.f_gap - prev, slack, at_k(r.k));
    }
    prev = *r.f_gap;
    prev_k = r.k;
    have_prev = true;
  }
  return c.finish();
}

// Residual linkage to the sub-solve accuracy:
//   r3 <= sqrt(2 L delta4) (sqrt(max |D||tau|) + sqrt(max |d1|)),
//   k^2 r2 <= sqrt(2 L max|d2| delta4).
// Exact sub-solves (delta4 = 0) are held to a round-off level instead.
// Records whose sub-solve could not reach delta4 are skipped.
std::pair<CheckResult, CheckResult> check_sesop_linkage(const RunTrace& t) {
  Check c3("sesop_linkage_r3");
  Check c2("sesop_linkage_r2");
  const double L = t.footer.L;
  if (!(L > 0.0)) {
    c3.not_applicable("run constants missing");
    c2.not_applicable("run constants missing");
  }
  for (const auto& r : t.records) {
    if (!r.r2_residual || !r.r3_residual) continue;
    if (has_warning(r.warnings, "accuracy_floor") || has_warning(r.warnings, "unbounded_step") ||
        has_warning(r.warnings, "inner_budget_capped")) {
      continue;
    }
    const double k = static_cast<double>(r.k);
    const double k2r2 = *r.r2_residual * k * k;
    if (r.delta4 == 0.0) {
      const double scale = 1e-8 * L * (1.0 + r.max_d1);
      c3.observe(*r.r3_residual, scale * (1.0 + r.max_d1), at_k(r.k));
      c2.observe(k2r2, scale * (1.0 + r.max_d2), at_k(r.k));
    } else {
      const double s = std::sqrt(2.0 * L * r.delta4);
      c3.observe(*r.r3_residual, s * (std::sqrt(r.max_D_tau) + std::sqrt(r.max_d1)), at_k(r.k));
      c2.observe(k2r2, std::sqrt(2.0 * L * r.max_d2 * r.delta4), at_k(r.k));
    }
  }
  return {c3.finish(), c2.finish()};
}

// Per-solve ellipsoid certificate: achieved gap <= advertised bound.
CheckResult check_ellipsoid_certificates(const RunTrace& t) {
  Check c("ellipsoid_certificate");
  for (const auto& r : t.records) {
    if (!r.sub_gap || !r.sub_bound) continue;
    c.observe(*r.sub_gap, *r.sub_bound + kUlpAllowance * (1.0 + std::abs(*r.sub_bound)), at_k(r.k));
  }
  return c.finish();
}

// 1 + k/2 <= w_k <= 1 + k.
CheckResult check_weights(const RunTrace& t) {
  Check c("sesop_weight_bounds");
  for (const auto& r : t.records) {
    const double k = static_cast<double>(r.k);
    c.observe(1.0 + 0.5 * k, r.q_norm_or_w, at_k(r.k));
    c.observe(r.q_norm_or_w, 1.0 + k, at_k(r.k));
  }
  return c.finish();
}

// With fixed delta1 > 0 the gap at the final k = N is no larger than at
// N/2 beyond the descent slack.
CheckResult check_non_accumulation(const RunTrace& t) {
  Check c("sesop_non_accumulation");
  if (!(t.footer.delta1 > 0.0)) c.not_applicable("exact oracle");
  if (t.records.size() < 16 || !has_gaps(t)) c.not_applicable("needs >= 16 records with f_gap");
  if (t.records.size() >= 16 && has_gaps(t)) {
    const auto& last = t.records.back();
    const auto half = std::find_if(t.records.begin(), t.records.end(),
                                   [&](const auto& r) { return r.k >= last.k / 2; });
    c.observe(*last.f_gap - *half->f_gap,
              t.footer.delta4 + kUlpAllowance * (1.0 + std::abs(*half->f_gap)), at_k(last.k));
  }
  return c.finish();
}

CheckResult check_q_norm(const RunTrace& t) {
  CheckResult r{"q_norm_certificate", CheckStatus::kPass, "", 0.0};
  const bool complete = std::all_of(t.records.begin(), t.records.end(),
                                    [](const auto& rec) { return rec.q_prev_norm.has_value(); });
  if (t.records.empty() || !complete) {
    r.status = CheckStatus::kNotApplicable;
    r.detail = "records lack q diagnostics";
    return r;
  }
  const bool ok = q_norm_certificate(t, t.footer.delta1);
  r.status = ok ? CheckStatus::kPass : CheckStatus::kFail;
  r.detail = std::to_string(t.records.size()) + " records";
  return r;
}

// After T >= T(gamma, beta) iterations of one phase without the stop rule:
//   f_gap <= beta eps0 + (4/gamma) sqrt(2 eps0 / mu) delta1,
// provided |g(x_hat_k)| >= 2 delta1 throughout.
CheckResult check_cg_single_phase(const RunTrace& t) {
  Check c("cg_single_phase");
  const RunFooter& f = t.footer;
  const double g = f.gamma.value_or(1.0);
  if (!f.mu || !(f.beta > 0.0 && f.beta < 1.0)) c.not_applicable("mu or beta unknown");
  else if (f.stop_reason != "budget") c.not_applicable("run stopped early: " + f.stop_reason);
  else if (static_cast<long>(t.records.size()) != f.T) c.not_applicable("trace incomplete");
  else if (f.T < cg_single_phase_iters(g, f.beta, f.L, *f.mu)) c.not_applicable("T below budget");
  else if (!f.terminal_f_gap) c.not_applicable("f* unknown");
  else {
    const bool noise_ok = std::all_of(t.records.begin(), t.records.end(), [&](const auto& r) {
      return r.grad_norm >= 2.0 * f.delta1;
    });
    if (!noise_ok) {
      c.not_applicable("|g| < 2 delta1 during the run");
    } else {
      c.observe(*f.terminal_f_gap, cg_single_phase_bound(g, f.beta, *f.mu, f.eps0, f.delta1),
                "T=" + std::to_string(f.T));
    }
  }
  return c.finish();
}

// Stop-rule output: f_gap <= 64 delta1^2 / (gamma^2 mu).
CheckResult check_stop_floor(const RunTrace& t) {
  Check c("cg_stop_floor");
  const RunFooter& f = t.footer;
  const auto fired = std::find_if(t.records.begin(), t.records.end(),
                                  [](const auto& r) { return r.stop_fired; });
  if (fired == t.records.end()) c.not_applicable("stop rule did not fire");
  else if (!f.mu) c.not_applicable("mu unknown");
  else if (!(f.delta1 > 0.0)) c.not_applicable("exact oracle");
  else if (!fired->f_gap) c.not_applicable("f* unknown");
  else {
    c.observe(*fired->f_gap, stop_rule_floor(f.gamma.value_or(1.0), *f.mu, f.delta1),
              at_k(fired->k));
  }
  return c.finish();
}

// Restart schedule target: f_gap <= eps * eps0 (eps relative).
CheckResult check_restart_target(const RunTrace& t) {
  Check c("cg_restart_target");
  const RunFooter& f = t.footer;
  if (!f.mu) {
    c.not_applicable("mu unknown");
  } else if (!f.terminal_f_gap) {
    c.not_applicable("f* unknown");
  } else if (has_warning(f.warnings, "budget_infeasible")) {
    c.not_applicable("delta1 above the schedule bound");
  } else if (f.stop_reason != "budget" && f.stop_reason != "target") {
    c.not_applicable("run stopped early: " + f.stop_reason);
  } else {
    const RestartSchedule need = cg_restart_schedule(f.gamma.value_or(1.0), f.L, *f.mu, f.alpha,
                                                     f.eps, f.delta1, f.eps0);
    if (f.stop_reason == "budget" && (f.T < need.T || f.K < need.K)) {
      c.not_applicable("T or K below the schedule");
    } else {
      c.observe(*f.terminal_f_gap, f.eps * f.eps0, "terminal");
    }
  }
  return c.finish();
}

CheckResult check_gd_monotone(const RunTrace& t) {
  Check c("gd_monotone");
  if (t.footer.delta1 > 0.0) c.not_applicable("inexact oracle");
  double prev = t.footer.eps0;
  for (const auto& r : t.records) {
    if (!r.f_gap) continue;
    c.observe(*r.f_gap - prev, kUlpAllowance * (1.0 + std::abs(prev)), at_k(r.k));
    prev = *r.f_gap;
  }
  return c.finish();
}

}  // namespace

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::kPass:
      return "pass";
    case CheckStatus::kFail:
      return "fail";
    case CheckStatus::kNotApplicable:
      return "not-applicable";
  }
  return "not-applicable";
}

int VerifyReport::passed() const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(), [](const auto& c) {
    return c.status == CheckStatus::kPass;
  }));
}

int VerifyReport::failed() const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(), [](const auto& c) {
    return c.status == CheckStatus::kFail;
  }));
}

int VerifyReport::not_applicable() const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(), [](const auto& c) {
    return c.status == CheckStatus::kNotApplicable;
  }));
}

VerifyReport verify_bounds(const TraceFile& file, const RunConfig& cfg) {
  const RunTrace& t = file.trace;
  VerifyReport report;
  auto& out = report.checks;
  out.push_back(check_run_status(t.footer));
  out.push_back(check_config_match(t.footer, cfg));
  out.push_back(check_record_order(t));
  const std::string& algo = t.footer.algo.empty() ? cfg.algo : t.footer.algo;
  if (algo == "sesop") {
    out.push_back(check_sesop_rate(t));
    out.push_back(check_sesop_descent(t));
    auto [r3, r2] = check_sesop_linkage(t);
    out.push_back(r3);
    out.push_back(r2);
    out.push_back(check_ellipsoid_certificates(t));
    out.push_back(check_weights(t));
    out.push_back(check_non_accumulation(t));
  } else if (algo == "cg" || algo == "cg_restarts") {
    out.push_back(check_q_norm(t));
    out.push_back(check_stop_floor(t));
    if (algo == "cg") {
      out.push_back(check_cg_single_phase(t));
    } else {
      out.push_back(check_restart_target(t));
    }
  } else if (algo == "gd_baseline") {
    out.push_back(check_gd_monotone(t));
  }
  return report;
}

Json report_to_json(const VerifyReport& report) {
  Json j;
  Json checks = Json::array();
  for (const auto& c : report.checks) {
    Json e;
    e["name"] = c.name;
    e["status"] = to_string(c.status);
    e["worst_ratio"] = c.worst_ratio;
    e["detail"] = c.detail;
    checks.push_back(e);
  }
  j["checks"] = checks;
  j["passed"] = report.passed();
  j["failed"] = report.failed();
  j["not_applicable"] = report.not_applicable();
  j["ok"] = report.ok();
  return j;
}

}  // namespace subopt::harness
