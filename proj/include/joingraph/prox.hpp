#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "joingraph/errors.hpp"

namespace joingraph {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Elementwise sign(x) * max(|x| - tau, 0): the proximal operator of tau*||.||_1.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> soft_threshold(const Eigen::MatrixBase<Derived>& x,
                                                     typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  if (!(tau >= Scalar(0))) throw RangeError("soft_threshold: tau must be non-negative");
  return x.unaryExpr([tau](Scalar v) {
    const Scalar shrunk = std::abs(v) - tau;
    return shrunk > Scalar(0) ? (v < Scalar(0) ? -shrunk : shrunk) : Scalar(0);
  });
}

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& x) {
  if (x.rows() != x.cols()) return false;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < x.cols(); ++j) {
      if (x(i, j) != x(j, i)) return false;
    }
  }
  return true;
}

// Singular value thresholding: U * max(Sigma - tau, 0) * V^T, the proximal
// operator of tau*||.||_*. Exactly symmetric inputs go through a symmetric
// eigendecomposition (singular values are |eigenvalues|); anything else uses
// a full SVD.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> svt_prox(const Eigen::MatrixBase<Derived>& x,
                                               typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  using Mat = DenseMatrix<Scalar>;
  if (x.rows() != x.cols()) {
    throw ShapeError("svt_prox: matrix is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
  }
  if (!(tau >= Scalar(0))) throw RangeError("svt_prox: tau must be non-negative");
  if (x.rows() == 0) return Mat(0, 0);
  if (!x.allFinite()) throw NumericalError("svt_prox: non-finite input");

  if (is_symmetric(x)) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(x.eval());
    if (eig.info() != Eigen::Success) throw NumericalError("svt_prox: eigendecomposition failed");
    const auto shrunk = eig.eigenvalues().unaryExpr([tau](Scalar v) {
      const Scalar mag = std::abs(v) - tau;
      return mag > Scalar(0) ? (v < Scalar(0) ? -mag : mag) : Scalar(0);
    });
    return eig.eigenvectors() * shrunk.asDiagonal() * eig.eigenvectors().transpose();
  }

  Eigen::BDCSVD<Mat> svd(x.eval(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) throw NumericalError("svt_prox: SVD failed");
  const auto shrunk = (svd.singularValues().array() - tau).cwiseMax(Scalar(0)).matrix();
  return svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose();
}

// Sum of singular values.
template <typename Derived>
typename Derived::Scalar nuclear_norm(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  if (x.size() == 0) return Scalar(0);
  if (is_symmetric(x)) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> eig(x.eval(), Eigen::EigenvaluesOnly);
    return eig.eigenvalues().cwiseAbs().sum();
  }
  return Eigen::BDCSVD<DenseMatrix<Scalar>>(x.eval()).singularValues().sum();
}

}  // namespace joingraph
