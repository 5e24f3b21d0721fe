#pragma once

#include <cmath>
#include <random>

#include "subopt/subopt.hpp"

namespace subopt::testing {

inline VectorXd random_unit(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd v(n);
  do {
    for (int i = 0; i < n; ++i) v[i] = normal(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

inline VectorXd random_vector(std::mt19937_64& rng, int n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

// Diagonal quadratic with eigenvalues drawn log-uniformly from [lo, hi],
// the extremes always included so that L and mu are exact.
inline ProblemD random_quadratic(std::mt19937_64& rng, int n, double lo, double hi,
                                 double xstar_scale = 1.0) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  VectorXd eig(n);
  for (int i = 0; i < n; ++i) eig[i] = std::exp(u(rng));
  eig[0] = lo;
  if (n > 1) eig[n - 1] = hi;
  return make_quadratic<double>(eig, random_vector(rng, n, xstar_scale));
}

}  // namespace subopt::testing
