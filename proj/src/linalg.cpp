#include <sda/linalg.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sda {

namespace {

struct Svd {
  Vector singular;
  Matrix U;
  Matrix V;
};

Svd thin_svd(const Matrix& M) {
  Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.singularValues(), svd.matrixU(), svd.matrixV()};
}

}  // namespace

double rank_threshold(Index rows, Index cols, double sigma_max) {
  return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() *
         sigma_max;
}

Index numerical_rank(const Matrix& M) {
  if (M.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(M);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double tau = rank_threshold(M.rows(), M.cols(), s(0));
  return (s.array() > tau).count();
}

Matrix pseudo_inverse(const Matrix& M) {
  if (M.size() == 0) return Matrix::Zero(M.cols(), M.rows());
  const Svd svd = thin_svd(M);
  const double smax = svd.singular.size() > 0 ? svd.singular(0) : 0.0;
  const double tau = rank_threshold(M.rows(), M.cols(), smax);
  Vector inv = Vector::Zero(svd.singular.size());
  for (Index i = 0; i < svd.singular.size(); ++i) {
    if (svd.singular(i) > tau) inv(i) = 1.0 / svd.singular(i);
  }
  return svd.V * inv.asDiagonal() * svd.U.transpose();
}

Vector least_norm_solve(const Matrix& M, const Vector& d) {
  if (M.rows() != d.size()) {
    throw ContractViolation("least_norm_solve: matrix has " + std::to_string(M.rows()) +
                            " rows but right-hand side has " + std::to_string(d.size()));
  }
  if (M.rows() == 1 && M.cols() == 1) {
    const double g = M(0, 0);
    Vector out(1);
    out(0) = g == 0.0 ? 0.0 : d(0) / g;
    return out;
  }
  const Svd svd = thin_svd(M);
  const double smax = svd.singular.size() > 0 ? svd.singular(0) : 0.0;
  const double tau = rank_threshold(M.rows(), M.cols(), smax);
  Vector coeff = svd.U.transpose() * d;
  for (Index i = 0; i < coeff.size(); ++i) {
    coeff(i) = svd.singular(i) > tau ? coeff(i) / svd.singular(i) : 0.0;
  }
  return svd.V * coeff;
}

double lambda_min_plus(const Matrix& M) {
  if (M.rows() != M.cols()) throw ContractViolation("lambda_min_plus: matrix is not square");
  if (M.size() == 0) throw NumericalError("zero matrix has no positive eigenvalue");
  const Matrix sym = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();  // ascending
  const double top = ev.cwiseAbs().maxCoeff();
  const double tau = rank_threshold(M.rows(), M.cols(), top);
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > tau) return ev(i);
  }
  throw NumericalError("zero matrix has no positive eigenvalue");
}

SpdMatrix::SpdMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
    throw ContractViolation("SpdMatrix: matrix must be square and non-empty");
  }
  const double scale = entries_.cwiseAbs().maxCoeff();
  const double asym = (entries_ - entries_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) throw ContractViolation("SpdMatrix: matrix is not symmetric");
  llt_.compute(entries_);
  if (llt_.info() != Eigen::Success ||
      (llt_.matrixLLT().diagonal().array() <= 0.0).any()) {
    throw ContractViolation("SpdMatrix: matrix is not positive definite");
  }
  identity_ = entries_.isIdentity(0.0);
}

SpdMatrix SpdMatrix::identity(Index n) { return SpdMatrix(Matrix::Identity(n, n)); }

Vector SpdMatrix::solve(const Vector& v) const {
  if (v.size() != dim()) throw ContractViolation("SpdMatrix::solve: dimension mismatch");
  if (identity_) return v;
  return llt_.solve(v);
}

Matrix SpdMatrix::solve(const Matrix& M) const {
  if (M.rows() != dim()) throw ContractViolation("SpdMatrix::solve: dimension mismatch");
  if (identity_) return M;
  return llt_.solve(M);
}

Matrix SpdMatrix::lower_solve(const Matrix& M) const {
  if (M.rows() != dim()) throw ContractViolation("SpdMatrix::lower_solve: dimension mismatch");
  if (identity_) return M;
  return llt_.matrixL().solve(M);
}

Vector SpdMatrix::apply(const Vector& v) const {
  if (v.size() != dim()) throw ContractViolation("SpdMatrix::apply: dimension mismatch");
  if (identity_) return v;
  return entries_ * v;
}

double SpdMatrix::quadratic(const Vector& x) const {
  if (x.size() != dim()) throw ContractViolation("SpdMatrix: dimension mismatch");
  if (identity_) return x.squaredNorm();
  return x.dot(entries_ * x);
}

Matrix SpdMatrix::sqrt() const {
  if (identity_) return entries_;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(entries_);
  return eig.operatorSqrt();
}

Matrix SpdMatrix::inverse_sqrt() const {
  if (identity_) return entries_;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(entries_);
  return eig.operatorInverseSqrt();
}

double b_norm(const Vector& x, const SpdMatrix& B) {
  return std::sqrt(std::max(0.0, B.quadratic(x)));
}

}  // namespace sda
