#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "subopt/oracle.hpp"
#include "subopt/types.hpp"

namespace subopt {

/// Search directions for a subspace step.
///
/// Columns of `D` are the retained candidate directions scaled to unit
/// length; `column_norms[j]` is the original length of column j, and
/// `source[j]` its position in the candidate list. Candidates that are
/// (numerically) zero or dependent on earlier ones are dropped.
template <typename Scalar>
struct SubspaceBasis {
  Matrix<Scalar> D;
  int effective_dim = 0;
  Vector<Scalar> column_norms;
  std::vector<int> source;
  std::vector<Scalar> candidate_norms;

  bool stationary() const { return effective_dim == 0; }

  Vector<Scalar> raw_column(int j) const { return D.col(j) * column_norms[j]; }

  Scalar spectral_norm() const {
    if (effective_dim == 0) return Scalar(0);
    Eigen::JacobiSVD<Matrix<Scalar>> svd(D);
    return svd.singularValues()[0];
  }
};

// A candidate of length <= kZeroColumnTol * (1 + |x|) counts as zero; one
// whose component orthogonal to the kept columns is shorter than
// kDependentTol (after normalisation) counts as dependent.
inline constexpr double kZeroColumnTol = 1e-14;
inline constexpr double kDependentTol = 1e-8;

template <typename Scalar>
SubspaceBasis<Scalar> assemble_basis(const std::vector<Vector<Scalar>>& candidates,
                                     Scalar point_scale) {
  SubspaceBasis<Scalar> basis;
  if (candidates.empty()) return basis;
  const Eigen::Index n = candidates.front().size();
  Matrix<Scalar> kept(n, static_cast<Eigen::Index>(candidates.size()));
  Matrix<Scalar> ortho(n, static_cast<Eigen::Index>(candidates.size()));
  std::vector<Scalar> norms;
  const Scalar zero_tol = Scalar(kZeroColumnTol) * (Scalar(1) + point_scale);

  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Scalar len = candidates[i].norm();
    basis.candidate_norms.push_back(len);
    if (!(len > zero_tol)) continue;
    const Vector<Scalar> unit = candidates[i] / len;
    Vector<Scalar> residual = unit;
    // Two passes of modified Gram-Schmidt.
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < basis.effective_dim; ++j) {
        residual -= ortho.col(j).dot(residual) * ortho.col(j);
      }
    }
    const Scalar rlen = residual.norm();
    if (!(rlen > Scalar(kDependentTol))) continue;
    kept.col(basis.effective_dim) = unit;
    ortho.col(basis.effective_dim) = residual / rlen;
    norms.push_back(len);
    basis.source.push_back(static_cast<int>(i));
    ++basis.effective_dim;
  }
  basis.D = kept.leftCols(basis.effective_dim);
  basis.column_norms = Vector<Scalar>::Map(norms.data(), static_cast<Eigen::Index>(norms.size()));
  return basis;
}

/// tau-space view of the objective along x_base + D tau. Gradient queries
/// go through the full-dimensional oracle and are charged to both counters;
/// their error is at most |D|_2 delta1.
template <typename Scalar>
class RestrictedOracle {
 public:
  RestrictedOracle(InexactOracle<Scalar>& oracle, Vector<Scalar> x_base, Matrix<Scalar> D)
      : oracle_(&oracle), x_base_(std::move(x_base)), D_(std::move(D)) {
    if (D_.cols() == 0) throw InvalidInput("restricted oracle needs at least one direction");
    Eigen::JacobiSVD<Matrix<Scalar>> svd(D_);
    d_norm_ = svd.singularValues()[0];
  }

  int dim() const { return static_cast<int>(D_.cols()); }
  const Matrix<Scalar>& D() const { return D_; }
  const Vector<Scalar>& base() const { return x_base_; }
  Scalar d_norm() const { return d_norm_; }
  Scalar delta1() const { return oracle_->delta1(); }
  Scalar inexactness_bound() const { return d_norm_ * oracle_->delta1(); }
  const Problem<Scalar>& problem() const { return oracle_->problem(); }

  Vector<Scalar> point(const Vector<Scalar>& tau) const { return x_base_ + D_ * tau; }

  Scalar value(const Vector<Scalar>& tau) const { return eval_f(oracle_->problem(), point(tau)); }

  Vector<Scalar> grad(const Vector<Scalar>& tau) {
    return D_.transpose() * oracle_->query(point(tau), QueryKind::kRestricted);
  }

  /// Exact restricted gradient; diagnostic only, no counter change.
  Vector<Scalar> exact_grad(const Vector<Scalar>& tau) const {
    return D_.transpose() * oracle_->problem().grad(point(tau));
  }

 private:
  InexactOracle<Scalar>* oracle_;
  Vector<Scalar> x_base_;
  Matrix<Scalar> D_;
  Scalar d_norm_ = 0;
};

}  // namespace subopt
