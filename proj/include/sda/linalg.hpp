#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace sda {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Raised when a caller breaks an operation's preconditions (shapes, ranges, probabilities).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when the numbers themselves make an operation meaningless.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InconsistentSystem : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Cut-off below which a singular value counts as zero: max(rows, cols) * eps * sigma_max.
/// Shared by pseudoinverse, rank and lambda_min_plus so the three always agree.
double rank_threshold(Index rows, Index cols, double sigma_max);

Index numerical_rank(const Matrix& M);
Matrix pseudo_inverse(const Matrix& M);

/// M^+ d, the minimum Euclidean norm minimizer of ||M lambda - d||^2.
Vector least_norm_solve(const Matrix& M, const Vector& d);

/// Smallest eigenvalue of a symmetric PSD matrix above the rank threshold.
/// Throws NumericalError when every eigenvalue falls below it.
double lambda_min_plus(const Matrix& M);

/// Dense symmetric positive definite matrix with a cached Cholesky factor.
/// Inverse applications go through the factor; no explicit inverse is formed.
class SpdMatrix {
 public:
  explicit SpdMatrix(Matrix entries);
  static SpdMatrix identity(Index n);

  Index dim() const { return entries_.rows(); }
  const Matrix& entries() const { return entries_; }
  bool is_identity() const { return identity_; }

  Vector solve(const Vector& v) const;
  Matrix solve(const Matrix& M) const;
  Vector apply(const Vector& v) const;
  /// L^-1 M for the Cholesky factor B = L L^T.
  Matrix lower_solve(const Matrix& M) const;

  /// x^T B x
  double quadratic(const Vector& x) const;

  /// B^{1/2} and B^{-1/2} from the symmetric eigendecomposition.
  Matrix sqrt() const;
  Matrix inverse_sqrt() const;

 private:
  Matrix entries_;
  Eigen::LLT<Matrix> llt_;
  bool identity_ = false;
};

double b_norm(const Vector& x, const SpdMatrix& B);

}  // namespace sda
