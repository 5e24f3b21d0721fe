#include <gtest/gtest.h>

#include "subopt/oracle.hpp"
#include "subopt/subspace.hpp"

using namespace subopt;

namespace {

ProblemD quad2() {
  VectorXd eig(2);
  eig << 1.0, 100.0;
  return make_quadratic<double>(eig, VectorXd::Zero(2));
}

}  // namespace

TEST(Oracle, ZeroNoiseIsExact) {
  OracleD o(quad2(), 0.5, NoiseModel::kZero);
  VectorXd x(2);
  x << 1.0, 1.0;
  const VectorXd g = o.query(x);
  EXPECT_EQ(g[0], 1.0);
  EXPECT_EQ(g[1], 100.0);
}

TEST(Oracle, AdversarialShrinksGradient) {
  OracleD o(quad2(), 0.5, NoiseModel::kAdversarialAntigradient);
  VectorXd x(2);
  x << 1.0, 0.0;
  const VectorXd g = o.query(x);
  EXPECT_NEAR(g[0], 0.5, 1e-15);
  EXPECT_EQ(g[1], 0.0);
  // At the minimizer the exact gradient is zero and stays so.
  EXPECT_TRUE(o.query(VectorXd::Zero(2)).isZero(0.0));
}

TEST(Oracle, RandomSphereHasNormDelta) {
  OracleD o(quad2(), 1e-3, NoiseModel::kRandomSphere, 42);
  VectorXd x(2);
  x << 0.3, -0.2;
  const VectorXd err = o.query(x) - exact_grad(o.problem(), x);
  EXPECT_LE(err.norm(), 1e-3);
  EXPECT_NEAR(err.norm(), 1e-3, 1e-12);
}

TEST(Oracle, SeedDeterminesSequence) {
  OracleD a(quad2(), 1e-2, NoiseModel::kRandomSphere, 7);
  OracleD b(quad2(), 1e-2, NoiseModel::kRandomSphere, 7);
  OracleD c(quad2(), 1e-2, NoiseModel::kRandomSphere, 8);
  VectorXd x(2);
  x << 1.0, 2.0;
  const VectorXd ga = a.query(x);
  EXPECT_TRUE(ga == b.query(x));
  EXPECT_FALSE(ga == c.query(x));
}

TEST(Oracle, CountersTrackQueryKind) {
  OracleD o(quad2(), 0.0, NoiseModel::kZero);
  const VectorXd x = VectorXd::Ones(2);
  o.query(x, QueryKind::kFull);
  o.query(x, QueryKind::kRestricted);
  o.query(x, QueryKind::kRestricted);
  EXPECT_EQ(o.hi_dim_calls(), 3);
  EXPECT_EQ(o.lo_dim_calls(), 2);
  EXPECT_EQ(inexact_grad(o, x).size(), 2);
  EXPECT_EQ(o.hi_dim_calls(), 4);
}

TEST(Oracle, RestrictedQueriesChargeBothCounters) {
  OracleD o(quad2(), 0.0, NoiseModel::kZero);
  MatrixXd D = MatrixXd::Identity(2, 1);
  RestrictedOracle<double> low(o, VectorXd::Ones(2), D);
  const VectorXd g = low.grad(VectorXd::Zero(1));
  EXPECT_EQ(g.size(), 1);
  EXPECT_EQ(g[0], 1.0);
  EXPECT_EQ(o.hi_dim_calls(), 1);
  EXPECT_EQ(o.lo_dim_calls(), 1);
  EXPECT_DOUBLE_EQ(low.d_norm(), 1.0);
  EXPECT_DOUBLE_EQ(low.value(VectorXd::Constant(1, -1.0)), 50.0);
}

TEST(Oracle, ErrorPaths) {
  EXPECT_THROW(OracleD(quad2(), -1.0, NoiseModel::kZero), InvalidInput);
  OracleD o(quad2(), 0.1, NoiseModel::kZero);
  VectorXd bad(2);
  bad << 1.0, std::nan("");
  EXPECT_THROW(o.query(bad), InvalidInput);
  EXPECT_THROW(o.query(VectorXd::Zero(3)), InvalidInput);
  EXPECT_THROW(parse_noise_model("gaussian"), InvalidInput);
}

TEST(Oracle, NoiseModelNamesRoundTrip) {
  for (auto m : {NoiseModel::kZero, NoiseModel::kRandomSphere,
                 NoiseModel::kAdversarialAntigradient}) {
    EXPECT_EQ(parse_noise_model(to_string(m)), m);
  }
  EXPECT_EQ(parse_noise_model("adversarial"), NoiseModel::kAdversarialAntigradient);
}

TEST(Subspace, DropsZeroAndDependentColumns) {
  VectorXd a(3), b(3), z = VectorXd::Zero(3);
  a << 1.0, 0.0, 0.0;
  b << 2.0, 0.0, 0.0;
  auto basis = assemble_basis<double>({z, a, b}, 0.0);
  EXPECT_EQ(basis.effective_dim, 1);
  EXPECT_EQ(basis.source.size(), 1u);
  EXPECT_EQ(basis.source[0], 1);
  EXPECT_DOUBLE_EQ(basis.column_norms[0], 1.0);
  VectorXd c(3);
  c << 0.0, 3.0, 0.0;
  basis = assemble_basis<double>({c, a}, 0.0);
  EXPECT_EQ(basis.effective_dim, 2);
  EXPECT_NEAR(basis.raw_column(0)[1], 3.0, 1e-15);
  EXPECT_NEAR(basis.spectral_norm(), 1.0, 1e-12);
  EXPECT_TRUE(assemble_basis<double>({z, z}, 1.0).stationary());
}

TEST(Subspace, RestrictedOracleNeedsDirections) {
  OracleD o(quad2(), 0.0, NoiseModel::kZero);
  EXPECT_THROW(RestrictedOracle<double>(o, VectorXd::Zero(2), MatrixXd(2, 0)), InvalidInput);
}
