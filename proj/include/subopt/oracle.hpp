#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "subopt/problem.hpp"
#include "subopt/types.hpp"

namespace subopt {

enum class NoiseModel { kZero, kRandomSphere, kAdversarialAntigradient };

inline NoiseModel parse_noise_model(std::string_view name) {
  if (name == "zero") return NoiseModel::kZero;
  if (name == "random_sphere") return NoiseModel::kRandomSphere;
  if (name == "adversarial_antigradient" || name == "adversarial") {
    return NoiseModel::kAdversarialAntigradient;
  }
  throw InvalidInput("unknown noise model: " + std::string(name));
}

inline std::string to_string(NoiseModel m) {
  switch (m) {
    case NoiseModel::kZero:
      return "zero";
    case NoiseModel::kRandomSphere:
      return "random_sphere";
    case NoiseModel::kAdversarialAntigradient:
      return "adversarial_antigradient";
  }
  return "unknown";
}

/// Which counter a gradient query is charged to. A restricted (tau-space)
/// query consumes one full gradient, so it bumps both counters.
enum class QueryKind { kFull, kRestricted };

/// Additively inexact gradient: every answer g(x) satisfies
/// |g(x) - grad f(x)| <= delta1, measured in floating point exactly as
/// (g - grad).norm().
template <typename Scalar>
class InexactOracle {
 public:
  InexactOracle(Problem<Scalar> problem, Scalar delta1, NoiseModel model,
                std::uint64_t seed = 0)
      : problem_(std::move(problem)), delta1_(delta1), model_(model), rng_(seed) {
    if (!(delta1 >= Scalar(0))) throw InvalidInput("delta1 must be non-negative");
  }

  const Problem<Scalar>& problem() const { return problem_; }
  Scalar delta1() const { return delta1_; }
  NoiseModel noise_model() const { return model_; }
  long hi_dim_calls() const { return hi_calls_; }
  long lo_dim_calls() const { return lo_calls_; }

  Vector<Scalar> query(const Vector<Scalar>& x, QueryKind kind = QueryKind::kFull) {
    if (!x.allFinite()) throw InvalidInput("inexact_grad: non-finite query point");
    detail::check_point(problem_, x);
    ++hi_calls_;
    if (kind == QueryKind::kRestricted) ++lo_calls_;

    const Vector<Scalar> exact = problem_.grad(x);
    if (delta1_ == Scalar(0) || model_ == NoiseModel::kZero) return exact;

    Vector<Scalar> noise = Vector<Scalar>::Zero(x.size());
    switch (model_) {
      case NoiseModel::kRandomSphere: {
        std::normal_distribution<double> normal(0.0, 1.0);
        do {
          for (Eigen::Index i = 0; i < noise.size(); ++i) noise[i] = Scalar(normal(rng_));
        } while (noise.norm() == Scalar(0));
        noise *= delta1_ / noise.norm();
        break;
      }
      case NoiseModel::kAdversarialAntigradient: {
        const Scalar gnorm = exact.norm();
        if (gnorm > Scalar(0)) noise = -(delta1_ / gnorm) * exact;
        break;
      }
      case NoiseModel::kZero:
        break;
    }
    return add_bounded(exact, noise);
  }

 private:
  // Rounding in exact + noise can push the realised error a few ulps past
  // delta1; shrink the noise until the measured error is within bound.
  Vector<Scalar> add_bounded(const Vector<Scalar>& exact, Vector<Scalar> noise) const {
    for (int attempt = 0; attempt < 16; ++attempt) {
      Vector<Scalar> g = exact + noise;
      const Scalar err = (g - exact).norm();
      if (err <= delta1_) return g;
      noise *= (delta1_ / err) * (Scalar(1) - Scalar(8) * std::numeric_limits<Scalar>::epsilon() *
                                                  Scalar(attempt + 1));
    }
    return exact;
  }

  Problem<Scalar> problem_;
  Scalar delta1_;
  NoiseModel model_;
  std::mt19937_64 rng_;
  long hi_calls_ = 0;
  long lo_calls_ = 0;
};

using OracleD = InexactOracle<double>;

template <typename Scalar>
Vector<Scalar> inexact_grad(InexactOracle<Scalar>& oracle, const Vector<Scalar>& x) {
  return oracle.query(x, QueryKind::kFull);
}

}  // namespace subopt
