#pragma once

#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ebm/error.hpp"

namespace ebm {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Relative pivot threshold shared by the dense solvers.
inline constexpr double kPivotTolerance = 1e-14;

namespace detail {

template <typename Scalar>
bool lu_has_small_pivot(const Eigen::PartialPivLU<MatrixX<Scalar>>& lu, Scalar scale) {
  using std::abs;
  const auto& packed = lu.matrixLU();
  for (Index i = 0; i < packed.rows(); ++i) {
    if (!(abs(packed(i, i)) > Scalar(kPivotTolerance) * scale)) return true;
  }
  return false;
}

}  // namespace detail

/// Solves A x = b with partially pivoted LU. Throws SingularMatrix when a
/// pivot falls below 1e-14 times the largest entry of A.
template <typename MatDerived, typename VecDerived>
VectorX<typename MatDerived::Scalar> solve_dense(const Eigen::MatrixBase<MatDerived>& A,
                                                 const Eigen::MatrixBase<VecDerived>& b) {
  using Scalar = typename MatDerived::Scalar;
  if (A.rows() != A.cols()) throw Error(ErrorCode::DimensionMismatch, "solve_dense: matrix not square");
  if (b.size() != A.rows()) throw Error(ErrorCode::DimensionMismatch, "solve_dense: rhs length");
  if (A.rows() == 0) return VectorX<Scalar>(0);
  const Scalar scale = A.cwiseAbs().maxCoeff();
  Eigen::PartialPivLU<MatrixX<Scalar>> lu(A.eval());
  if (detail::lu_has_small_pivot<Scalar>(lu, scale)) {
    throw Error(ErrorCode::SingularMatrix, "solve_dense: pivot below tolerance");
  }
  return lu.solve(b.eval());
}

/// Minimum-norm solution of an underdetermined system with full row rank,
/// x = A^T (A A^T)^{-1} b.
template <typename MatDerived, typename VecDerived>
VectorX<typename MatDerived::Scalar> min_norm_solve(const Eigen::MatrixBase<MatDerived>& A,
                                                    const Eigen::MatrixBase<VecDerived>& b) {
  using Scalar = typename MatDerived::Scalar;
  if (b.size() != A.rows()) throw Error(ErrorCode::DimensionMismatch, "min_norm_solve: rhs length");
  if (A.rows() > A.cols()) throw Error(ErrorCode::RankDeficient, "min_norm_solve: more rows than columns");
  const MatrixX<Scalar> gram = A * A.transpose();
  if (gram.rows() == 0) return VectorX<Scalar>::Zero(A.cols());
  const Scalar scale = gram.cwiseAbs().maxCoeff();
  Eigen::PartialPivLU<MatrixX<Scalar>> lu(gram);
  if (detail::lu_has_small_pivot<Scalar>(lu, scale)) {
    throw Error(ErrorCode::RankDeficient, "min_norm_solve: A A^T singular");
  }
  return A.transpose() * lu.solve(b.eval());
}

template <typename Scalar>
struct ThinSvd {
  MatrixX<Scalar> U;
  VectorX<Scalar> singular_values;  // nonincreasing
  MatrixX<Scalar> V;
};

/// A = U diag(s) V^T with orthonormal thin factors.
template <typename MatDerived>
ThinSvd<typename MatDerived::Scalar> thin_svd(const Eigen::MatrixBase<MatDerived>& A) {
  using Scalar = typename MatDerived::Scalar;
  if (A.size() == 0) throw Error(ErrorCode::InvalidArgument, "thin_svd: empty matrix");
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(A.eval(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  ThinSvd<Scalar> out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  if (!out.U.allFinite() || !out.V.allFinite() || !out.singular_values.allFinite()) {
    throw Error(ErrorCode::NoConvergence, "thin_svd: non-finite factors");
  }
  return out;
}

/// Row-major sparse copy of a dense matrix, dropping exact zeros.
inline SparseMatrix to_sparse(const Matrix& dense) { return dense.sparseView(0.0, 0.0); }

}  // namespace ebm
