// Randomized invariant checks with hand-rolled generators; every property
// below runs at least 1000 cases.
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "subopt/subopt.hpp"
#include "support.hpp"

using namespace subopt;
using subopt::testing::random_quadratic;
using subopt::testing::random_unit;
using subopt::testing::random_vector;

namespace {

constexpr int kCases = 1000;

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

bool same_records(const RunTrace& a, const RunTrace& b) {
  if (a.records.size() != b.records.size()) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& x = a.records[i];
    const auto& y = b.records[i];
    if (x.k != y.k || x.f_gap != y.f_gap || x.grad_norm != y.grad_norm ||
        x.q_norm_or_w != y.q_norm_or_w || x.hi_calls != y.hi_calls ||
        x.lo_calls != y.lo_calls || x.r2_residual != y.r2_residual ||
        x.r3_residual != y.r3_residual) {
      return false;
    }
  }
  return a.footer.terminal_f_gap == b.footer.terminal_f_gap;
}

}  // namespace

// |g(x) - grad f(x)| <= delta1 exactly as measured in floating point.
TEST(Property, NoiseBoundExactness) {
  std::mt19937_64 rng(20240601);
  const NoiseModel models[] = {NoiseModel::kRandomSphere, NoiseModel::kAdversarialAntigradient,
                               NoiseModel::kZero};
  int checked = 0;
  for (int c = 0; c < 3 * kCases; ++c) {
    const int n = uniform_int(rng, 1, 30);
    const ProblemD p = random_quadratic(rng, n, 1e-3, 1e3, 10.0);
    const double d1 = log_uniform(rng, 1e-14, 1e3);
    OracleD o(p, d1, models[c % 3], rng());
    const VectorXd x = random_vector(rng, n, log_uniform(rng, 1e-6, 1e6));
    const VectorXd err = o.query(x) - exact_grad(p, x);
    ASSERT_LE(err.norm(), d1) << "case " << c << " n=" << n << " delta1=" << d1;
    ++checked;
  }
  EXPECT_GE(checked, kCases);
}

// det(H') / det(H) equals the closed-form volume ratio.
TEST(Property, EllipsoidDeterminantContraction) {
  std::mt19937_64 rng(77);
  for (int c = 0; c < kCases; ++c) {
    const int n = uniform_int(rng, 2, 8);
    MatrixXd A(n, n);
    for (int i = 0; i < n; ++i) A.col(i) = random_vector(rng, n, 1.0);
    EllipsoidState<double> s;
    s.c = random_vector(rng, n, 1.0);
    s.H = A * A.transpose() + 0.5 * MatrixXd::Identity(n, n);
    const VectorXd w = random_unit(rng, n) * log_uniform(rng, 1e-3, 1e3);
    const auto next = ellipsoid_step(s, w);
    const double ratio = next.H.determinant() / s.H.determinant();
    const double expect = ellipsoid_volume_ratio(n);
    ASSERT_LE(std::abs(ratio / expect - 1.0), 1e-8) << "case " << c << " n=" << n;
    // Positive definite afterwards.
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(next.H);
    ASSERT_GT(eig.eigenvalues().minCoeff(), 0.0);
  }
}

// 1 + k/2 <= w_k <= 1 + k along the recurrence from w_0 = 1, and the
// recurrence step lies in [1/2, 1] from any non-negative start.
TEST(Property, WeightRecurrenceBounds) {
  double w = 1.0;
  for (int k = 1; k <= 10 * kCases; ++k) {
    w = update_weight(w);
    ASSERT_GE(w, 1.0 + 0.5 * k) << "k=" << k;
    ASSERT_LE(w, 1.0 + k) << "k=" << k;
  }
  std::mt19937_64 rng(5);
  for (int c = 0; c < kCases; ++c) {
    const double w0 = log_uniform(rng, 1e-6, 1e8);
    const double w1 = update_weight(w0);
    ASSERT_GE(w1 - w0, 0.5 - 1e-12 * w0);
    ASSERT_LE(w1 - w0, 1.0 + 1e-12 * w0);
    // w1^2 - w1 = w0^2.
    ASSERT_NEAR(w1 * w1 - w1, w0 * w0, 1e-12 * (1.0 + w0 * w0));
  }
}

// f(x_{k+1}) <= f(x_k) + delta4 on every SESOP iteration.
TEST(Property, SesopDescentWithSlack) {
  std::mt19937_64 rng(99);
  int steps = 0;
  for (int run = 0; steps < kCases; ++run) {
    const int n = uniform_int(rng, 2, 12);
    const ProblemD p = random_quadratic(rng, n, 0.5, log_uniform(rng, 1.0, 200.0), 1.0);
    const double d1 = run % 2 == 0 ? 0.0 : log_uniform(rng, 1e-8, 1e-2);
    OracleD o(p, d1, NoiseModel::kRandomSphere, rng());
    const VectorXd x0 = *p.x_star + random_unit(rng, n) * log_uniform(rng, 0.1, 3.0);
    auto budget = sesop_budget(p.L, (x0 - *p.x_star).norm(), 1.0, 0.1);
    budget.N_outer = 25;
    const RunTrace t = sesop_run(o, x0, budget);
    double prev = eval_f(p, x0) - *p.f_star;
    for (const auto& r : t.records) {
      ASSERT_LE(*r.f_gap, prev + r.delta4) << "run " << run << " k=" << r.k;
      prev = *r.f_gap;
      ++steps;
    }
  }
}

// Identical inputs and seeds give identical trajectories.
TEST(Property, Determinism) {
  std::mt19937_64 rng(4242);
  for (int c = 0; c < kCases; ++c) {
    const int n = uniform_int(rng, 1, 8);
    const ProblemD p = random_quadratic(rng, n, 1.0, 50.0, 1.0);
    const double d1 = log_uniform(rng, 1e-6, 1e-1);
    const std::uint64_t seed = rng();
    const VectorXd x0 = random_vector(rng, n, 2.0);
    const bool use_cg = c % 2 == 0;
    auto run_once = [&] {
      OracleD o(p, d1, NoiseModel::kRandomSphere, seed);
      if (use_cg) return cg_run(o, x0, 8);
      auto b = sesop_budget(p.L, 1.0, 1.0, 0.1);
      b.N_outer = 4;
      SesopOptions opts;
      opts.subsolver.kind = SubsolverKind::kClosedForm;
      return sesop_run(o, x0, b, opts);
    };
    ASSERT_TRUE(same_records(run_once(), run_once())) << "case " << c;
  }
}

// Assembled bases: unit columns, full column rank, and every candidate
// lies in their span.
TEST(Property, SubspaceBasisSpansCandidates) {
  std::mt19937_64 rng(8);
  for (int c = 0; c < kCases; ++c) {
    const int n = uniform_int(rng, 2, 10);
    std::vector<VectorXd> cands;
    const int m = uniform_int(rng, 1, 4);
    for (int j = 0; j < m; ++j) {
      switch (uniform_int(rng, 0, 3)) {
        case 0:
          cands.push_back(VectorXd::Zero(n));
          break;
        case 1:
          if (!cands.empty()) {
            cands.push_back(cands.back() * 3.0);
            break;
          }
          [[fallthrough]];
        default:
          cands.push_back(random_vector(rng, n, log_uniform(rng, 1e-3, 1e3)));
      }
    }
    const auto basis = assemble_basis<double>(cands, 1.0);
    for (int j = 0; j < basis.effective_dim; ++j) {
      ASSERT_NEAR(basis.D.col(j).norm(), 1.0, 1e-14);
    }
    if (basis.effective_dim == 0) continue;
    Eigen::ColPivHouseholderQR<MatrixXd> qr(basis.D);
    ASSERT_EQ(qr.rank(), basis.effective_dim);
    for (const auto& v : cands) {
      const VectorXd coef = qr.solve(v);
      ASSERT_LE((basis.D * coef - v).norm(), 1e-7 * (1.0 + v.norm())) << "case " << c;
    }
  }
}
