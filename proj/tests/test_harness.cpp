#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "subopt/harness/config.hpp"
#include "subopt/harness/experiment.hpp"
#include "subopt/harness/report.hpp"
#include "subopt/harness/sweep.hpp"
#include "subopt/harness/trace_io.hpp"
#include "subopt/harness/verify.hpp"

using namespace subopt;
using namespace subopt::harness;
namespace fs = std::filesystem;

namespace {

class HarnessTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("subopt_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

Json sesop_exact_config(long iters = 100) {
  return Json::parse(R"({
    "problem": {"kind": "quadratic", "dim": 20, "params": {"spectrum": [1, 100]}, "seed": 0},
    "oracle": {"delta1": 0.0, "noise_model": "zero", "seed": 0},
    "algo": {"name": "sesop", "params": {}},
    "budget": {"eps": 0.1, "max_outer": 100},
    "subsolver": {"kind": "closed_form", "R_tau": 1.0, "max_retries": 4},
    "output": {"path": "sesop.jsonl"}
  })")
      .patch(Json::parse(R"([{"op": "replace", "path": "/budget/max_outer", "value": )" +
                         std::to_string(iters) + "}]"));
}

Json cg_config(const std::string& algo) {
  return Json::parse(R"({
    "problem": {"kind": "quadratic", "dim": 10, "params": {"spectrum": [1, 100]}},
    "oracle": {"delta1": 0.0, "noise_model": "zero"},
    "algo": {"name": ")" + algo + R"(", "params": {"alpha": 0.5}},
    "budget": {"eps": 0.01},
    "output": {"path": "cg.jsonl"}
  })");
}

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

long count_lines(const std::string& p) {
  const std::string s = slurp(p);
  return static_cast<long>(std::count(s.begin(), s.end(), '\n'));
}

const CheckResult& find_check(const VerifyReport& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.name == name) return c;
  }
  throw std::runtime_error("no check " + name);
}

}  // namespace

TEST(Config, DefaultsAndValues) {
  const RunConfig cfg = parse_config(sesop_exact_config());
  EXPECT_EQ(cfg.problem_kind, "quadratic");
  EXPECT_EQ(cfg.dim, 20);
  EXPECT_EQ(cfg.algo, "sesop");
  EXPECT_EQ(*cfg.max_outer, 100);
  EXPECT_EQ(cfg.subsolver.kind, SubsolverKind::kClosedForm);
  EXPECT_EQ(cfg.noise_model, "zero");
  const RunConfig cg = parse_config(cg_config("cg"));
  EXPECT_EQ(cg.subsolver.kind, SubsolverKind::kClosedForm);
  EXPECT_EQ(*algo_param(cg, "alpha"), 0.5);
  EXPECT_FALSE(algo_param(cg, "beta"));
  EXPECT_FALSE(algo_flag(cg, "use_stop_rule", false));
}

TEST(Config, Errors) {
  auto bad = [](const std::string& ptr, const Json& value) {
    Json doc = sesop_exact_config();
    doc[Json::json_pointer(ptr)] = value;
    return doc;
  };
  EXPECT_THROW(parse_config(bad("/problem/kind", "rosenbrock")), ConfigError);
  EXPECT_THROW(parse_config(bad("/algo/name", "adam")), ConfigError);
  EXPECT_THROW(parse_config(bad("/budget/eps", 0.0)), ConfigError);
  EXPECT_THROW(parse_config(bad("/budget/eps", "small")), ConfigError);
  EXPECT_THROW(parse_config(bad("/oracle/delta1", -1.0)), ConfigError);
  EXPECT_THROW(parse_config(bad("/oracle/noise_model", "gaussian")), ConfigError);
  EXPECT_THROW(parse_config(bad("/subsolver/kind", "newton")), ConfigError);
  EXPECT_THROW(parse_config(bad("/budget/typo", 1)), ConfigError);
  EXPECT_THROW(parse_config(bad("/extra", 1)), ConfigError);
  EXPECT_THROW(parse_config(Json::array()), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, DottedPaths) {
  const Json doc = sesop_exact_config();
  const Json changed = set_dotted(doc, "oracle.delta1", 0.5);
  EXPECT_EQ(changed["oracle"]["delta1"], 0.5);
  EXPECT_EQ(doc["oracle"]["delta1"], 0.0);
  EXPECT_THROW(set_dotted(doc, "oracle.sigma", 1.0), ConfigError);
  EXPECT_THROW(set_dotted(doc, "oracle", 1.0), ConfigError);
  EXPECT_THROW(set_dotted(doc, "problem.params.spectrum", 1.0), ConfigError);
  EXPECT_THROW(set_dotted(doc, "", 1.0), ConfigError);
  EXPECT_EQ(parse_scalar("1e-3"), Json(1e-3));
  EXPECT_EQ(parse_scalar("7"), Json(7));
  EXPECT_EQ(parse_scalar("true"), Json(true));
  EXPECT_EQ(parse_scalar("log"), Json("log"));
}

TEST(Zoo, BuildsMembers) {
  const auto inst = build_problem(parse_config(sesop_exact_config()));
  EXPECT_EQ(inst.problem.dim, 20);
  EXPECT_NEAR((inst.x0 - *inst.problem.x_star).norm(), 1.0, 1e-14);
  Json pl = sesop_exact_config();
  pl["problem"] = Json::parse(R"({"kind": "pl_nonconvex", "params": {"x0": [2.5]}})");
  const auto p = build_problem(parse_config(pl));
  EXPECT_EQ(p.x0[0], 2.5);
  EXPECT_TRUE(p.problem.gamma && p.problem.mu);
  pl["problem"]["dim"] = 2;
  EXPECT_THROW(build_problem(parse_config(pl)), ConfigError);
  Json lg = sesop_exact_config();
  lg["problem"]["params"]["spacing"] = "cubic";
  EXPECT_THROW(build_problem(parse_config(lg)), ConfigError);
}

TEST_F(HarnessTest, SesopRecordCountAndFooter) {
  const auto out = run_experiment(parse_config(sesop_exact_config()), path("s.jsonl"));
  EXPECT_TRUE(out.ok());
  EXPECT_EQ(count_lines(out.path), 101);
  const TraceFile tf = read_trace_file(out.path);
  EXPECT_EQ(tf.trace.records.size(), 100u);
  EXPECT_EQ(tf.trace.footer.records, 100);
  EXPECT_EQ(tf.trace.footer.hi_calls, 100);
  EXPECT_EQ(tf.trace.footer.run_id, "s");
  EXPECT_EQ(tf.config, sesop_exact_config());
  EXPECT_EQ(tf.trace.records.front().run_id, "s");
}

TEST_F(HarnessTest, ByteIdenticalReruns) {
  Json doc = sesop_exact_config(30);
  doc["oracle"]["delta1"] = 1e-3;
  doc["oracle"]["noise_model"] = "random_sphere";
  doc["oracle"]["seed"] = 17;
  doc["subsolver"]["kind"] = "ellipsoid";
  const RunConfig cfg = parse_config(doc);
  run_experiment(cfg, path("a/run.jsonl"));
  run_experiment(cfg, path("b/run.jsonl"));
  EXPECT_EQ(slurp(path("a/run.jsonl")), slurp(path("b/run.jsonl")));
  EXPECT_GT(slurp(path("a/run.jsonl")).size(), 1000u);
}

TEST_F(HarnessTest, TraceRoundTrip) {
  const RunConfig cfg = parse_config(cg_config("cg"));
  const auto out = run_experiment(cfg, path("cg.jsonl"));
  const TraceFile tf = read_trace_file(out.path);
  std::ostringstream again;
  write_trace(again, tf.trace, tf.config);
  EXPECT_EQ(again.str(), slurp(out.path));
}

TEST_F(HarnessTest, VerifyExactSesopAllPass) {
  const RunConfig cfg = parse_config(sesop_exact_config());
  const auto out = run_experiment(cfg, path("s.jsonl"));
  const VerifyReport r = verify_bounds(read_trace_file(out.path), cfg);
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.failed(), 0);
  EXPECT_EQ(find_check(r, "sesop_rate").status, CheckStatus::kPass);
  EXPECT_EQ(find_check(r, "sesop_linkage_r3").status, CheckStatus::kPass);
  EXPECT_EQ(find_check(r, "sesop_linkage_r2").status, CheckStatus::kPass);
  const Json j = report_to_json(r);
  EXPECT_TRUE(j["ok"].get<bool>());
}

TEST_F(HarnessTest, VerifyTruncatedTraceNotApplicable) {
  const RunConfig cfg = parse_config(sesop_exact_config());
  const auto out = run_experiment(cfg, path("s.jsonl"));
  TraceFile tf = read_trace_file(out.path);
  tf.trace.records.resize(4);
  const VerifyReport r = verify_bounds(tf, cfg);
  EXPECT_EQ(find_check(r, "sesop_rate").status, CheckStatus::kNotApplicable);
  EXPECT_TRUE(r.ok());
}

TEST_F(HarnessTest, VerifyCorruptedTraceFails) {
  const RunConfig cfg = parse_config(sesop_exact_config());
  const auto out = run_experiment(cfg, path("s.jsonl"));
  TraceFile tf = read_trace_file(out.path);
  for (auto& rec : tf.trace.records) *rec.f_gap *= 10.0;
  tf.trace.records[10].f_gap = 1e3;
  const VerifyReport r = verify_bounds(tf, cfg);
  EXPECT_GE(r.failed(), 1);
  EXPECT_FALSE(r.ok());
}

TEST_F(HarnessTest, VerifyMissingFStarNotApplicable) {
  const RunConfig cfg = parse_config(sesop_exact_config());
  TraceFile tf = read_trace_file(run_experiment(cfg, path("s.jsonl")).path);
  for (auto& rec : tf.trace.records) rec.f_gap.reset();
  tf.trace.footer.terminal_f_gap.reset();
  const VerifyReport r = verify_bounds(tf, cfg);
  EXPECT_EQ(find_check(r, "sesop_rate").status, CheckStatus::kNotApplicable);
  EXPECT_EQ(find_check(r, "sesop_descent").status, CheckStatus::kNotApplicable);
}

TEST_F(HarnessTest, CgRestartsCallAccounting) {
  Json doc = cg_config("cg_restarts");
  doc["algo"]["params"]["K"] = 19;
  doc["algo"]["params"]["T"] = 196;
  doc["subsolver"] = Json::parse(R"({"kind": "ellipsoid"})");
  const RunConfig cfg = parse_config(doc);
  const auto out = run_experiment(cfg, path("r.jsonl"));
  const TraceFile tf = read_trace_file(out.path);
  EXPECT_EQ(tf.trace.footer.K, 19);
  EXPECT_EQ(tf.trace.footer.T, 196);
  long inner_max = 0;
  for (const auto& r : tf.trace.records) inner_max = std::max(inner_max, r.inner_iters);
  EXPECT_GT(inner_max, 0);
  EXPECT_LE(tf.trace.footer.hi_calls, 19L * 196L * (1 + inner_max));
  EXPECT_TRUE(verify_bounds(tf, cfg).ok());
}

TEST_F(HarnessTest, CgVerifyPasses) {
  for (const std::string algo : {"cg", "cg_restarts"}) {
    const RunConfig cfg = parse_config(cg_config(algo));
    const auto out = run_experiment(cfg, path(algo + ".jsonl"));
    const VerifyReport r = verify_bounds(read_trace_file(out.path), cfg);
    EXPECT_TRUE(r.ok()) << algo << ": " << report_to_json(r).dump();
    EXPECT_EQ(find_check(r, "q_norm_certificate").status, CheckStatus::kPass);
  }
}

TEST_F(HarnessTest, GdBaseline) {
  Json doc = cg_config("gd_baseline");
  doc["algo"]["params"] = Json::object();
  doc["budget"]["max_outer"] = 50;
  const RunConfig cfg = parse_config(doc);
  const TraceFile tf = read_trace_file(run_experiment(cfg, path("gd.jsonl")).path);
  ASSERT_EQ(tf.trace.records.size(), 50u);
  for (std::size_t i = 1; i < tf.trace.records.size(); ++i) {
    EXPECT_LE(*tf.trace.records[i].f_gap, *tf.trace.records[i - 1].f_gap);
  }
  EXPECT_EQ(find_check(verify_bounds(tf, cfg), "gd_monotone").status, CheckStatus::kPass);

  doc["problem"]["params"]["x0_radius"] = 0.0;
  const TraceFile fixed = read_trace_file(run_experiment(parse_config(doc), path("gd0.jsonl")).path);
  for (const auto& r : fixed.trace.records) EXPECT_EQ(*r.f_gap, 0.0);
}

TEST_F(HarnessTest, DivergenceReportedInFooter) {
  Json doc = cg_config("gd_baseline");
  doc["algo"]["params"] = Json::parse(R"({"step_size": 1.0})");
  doc["budget"]["max_outer"] = 1000;
  const RunConfig cfg = parse_config(doc);
  const auto out = run_experiment(cfg, path("div.jsonl"));
  EXPECT_FALSE(out.ok());
  EXPECT_EQ(out.status, "diverged");
  const TraceFile tf = read_trace_file(out.path);
  EXPECT_EQ(tf.trace.footer.status, "diverged");
  EXPECT_FALSE(tf.trace.records.empty());
  EXPECT_FALSE(verify_bounds(tf, cfg).ok());
}

TEST_F(HarnessTest, SweepThreeTracesPreservingFields) {
  const Json base = sesop_exact_config(20);
  const auto paths =
      sweep(base, "oracle.delta1", {Json(1e-4), Json(1e-3), Json(1e-2)}, path("sw"), 2);
  ASSERT_EQ(paths.size(), 3u);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const TraceFile tf = read_trace_file(paths[i]);
    Json expect = set_dotted(base, "oracle.delta1", tf.config["oracle"]["delta1"]);
    EXPECT_EQ(tf.config, expect);
    EXPECT_EQ(tf.trace.records.size(), 20u);
  }
  EXPECT_EQ(fs::path(paths[1]).filename().string(), "sesop_0.001.jsonl");
  EXPECT_THROW(sweep(base, "oracle.nope", {Json(1)}, path("bad")), ConfigError);
  EXPECT_THROW(sweep(base, "oracle.delta1", {}, path("bad")), ConfigError);
}

TEST_F(HarnessTest, SweepJobsFromEnvironment) {
  ::setenv(kJobsEnvVar, "3", 1);
  EXPECT_EQ(sweep_jobs(), 3);
  ::setenv(kJobsEnvVar, "zero", 1);
  EXPECT_GE(sweep_jobs(), 1);
  ::unsetenv(kJobsEnvVar);
  EXPECT_GE(sweep_jobs(), 1);
  EXPECT_EQ(sweep_file_name("run", Json("a/b c")), "run_a_b_c.jsonl");
}

TEST_F(HarnessTest, ReportRowsSortedAndCopied) {
  Json restarts = cg_config("cg_restarts");
  restarts["output"]["path"] = "restarts.jsonl";
  sweep(restarts, "oracle.delta1", {Json(1e-3), Json(0.0)}, path("in"), 1);
  sweep(sesop_exact_config(10), "oracle.delta1", {Json(1e-2)}, path("in"), 1);
  {
    std::ofstream junk(path("in/broken.jsonl"));
    junk << "{not json\n";
  }
  const int rows = report(path("in"), path("out/summary.csv"));
  EXPECT_EQ(rows, 3);
  std::ifstream csv(path("out/summary.csv"));
  std::string header, l1, l2, l3;
  std::getline(csv, header);
  std::getline(csv, l1);
  std::getline(csv, l2);
  std::getline(csv, l3);
  EXPECT_EQ(header, "algo,problem,delta1,terminal_f_gap,hi_calls,lo_calls,bounds_passed");
  EXPECT_EQ(l1.rfind("cg_restarts,quadratic,0.0,", 0), 0u) << l1;
  EXPECT_EQ(l2.rfind("cg_restarts,quadratic,0.001,", 0), 0u) << l2;
  EXPECT_EQ(l3.rfind("sesop,", 0), 0u) << l3;
  const TraceFile tf = read_trace_file(path("in/restarts_0.001.jsonl"));
  EXPECT_NE(l2.find("," + std::to_string(tf.trace.footer.hi_calls) + ","), std::string::npos);
  EXPECT_THROW(report(path("missing"), path("x.csv")), std::runtime_error);
}

TEST_F(HarnessTest, MalformedTraceLineThrows) {
  std::ofstream(path("bad.jsonl")) << "{\"k\": 1}\n[oops\n";
  EXPECT_THROW(read_trace_file(path("bad.jsonl")), std::runtime_error);
  EXPECT_THROW(read_trace_file(path("none.jsonl")), std::runtime_error);
}

TEST_F(HarnessTest, CliExitCodes) {
  const std::string cli = SUBOPT_CLI_PATH;
  std::ofstream(path("cfg.json")) << sesop_exact_config(20).dump(2);
  auto sh = [](const std::string& cmd) {
    const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
  };
  EXPECT_EQ(sh(cli + " run --config " + path("cfg.json") + " --out " + path("t.jsonl")), 0);
  EXPECT_EQ(sh(cli + " verify --trace " + path("t.jsonl") + " --config " + path("cfg.json")), 0);

  TraceFile tf = read_trace_file(path("t.jsonl"));
  for (auto& r : tf.trace.records) *r.f_gap *= 10.0;
  tf.trace.records[9].f_gap = 1e3;
  write_trace_file(path("bad.jsonl"), tf.trace, tf.config);
  EXPECT_NE(sh(cli + " verify --trace " + path("bad.jsonl") + " --config " + path("cfg.json")), 0);

  EXPECT_EQ(sh(cli + " sweep --config " + path("cfg.json") +
               " --param oracle.delta1 --values 1e-4,1e-3 --out-dir " + path("sw")),
            0);
  EXPECT_TRUE(fs::exists(path("sw/sesop_0.0001.jsonl")));
  EXPECT_EQ(sh(cli + " report --in " + path("sw") + " --out " + path("r.csv")), 0);
  EXPECT_EQ(count_lines(path("r.csv")), 3);

  std::ofstream(path("broken.json")) << "{\"problem\": {\"kind\": \"nope\"}}";
  EXPECT_EQ(sh(cli + " run --config " + path("broken.json") + " --out " + path("x.jsonl")), 2);
  EXPECT_NE(sh(cli + " frobnicate"), 0);
}
