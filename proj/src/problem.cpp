#include <sda/problem.hpp>

#include <cmath>
#include <string>

namespace sda {

ProjectionProblem::ProjectionProblem(Matrix A, Vector b, SpdMatrix B, Vector c)
    : A_(std::move(A)), b_(std::move(b)), B_(std::move(B)), c_(std::move(c)) {
  if (A_.rows() == 0 || A_.cols() == 0) throw ContractViolation("ProjectionProblem: empty A");
  if (b_.size() != A_.rows()) {
    throw ContractViolation("ProjectionProblem: b has " + std::to_string(b_.size()) +
                            " entries, A has " + std::to_string(A_.rows()) + " rows");
  }
  if (B_.dim() != A_.cols()) throw ContractViolation("ProjectionProblem: B does not match A");
  if (c_.size() != A_.cols()) throw ContractViolation("ProjectionProblem: c does not match A");
  if (!A_.allFinite() || !b_.allFinite() || !c_.allFinite()) {
    throw ContractViolation("ProjectionProblem: non-finite input");
  }
  if (A_.cwiseAbs().maxCoeff() == 0.0) throw ContractViolation("ProjectionProblem: A is zero");
  binv_at_ = B_.solve(Matrix(A_.transpose()));
  whitened_at_ = B_.lower_solve(Matrix(A_.transpose()));
  gram_ = whitened_at_.transpose() * whitened_at_;
  gram_ = 0.5 * (gram_ + gram_.transpose()).eval();
}

ProjectionProblem ProjectionProblem::least_norm(Matrix A, Vector b) {
  const Index n = A.cols();
  return ProjectionProblem(std::move(A), std::move(b), SpdMatrix::identity(n), Vector::Zero(n));
}

double ProjectionProblem::consistency_residual() const {
  const Vector x = pseudo_inverse(A_) * b_;
  return (A_ * x - b_).norm();
}

void ProjectionProblem::check_consistent(double rel_tol) const {
  const double res = consistency_residual();
  const double limit = rel_tol * std::max(1.0, b_.norm());
  if (!(res <= limit)) {
    throw InconsistentSystem("inconsistent system: least-squares residual " +
                             std::to_string(res) + " exceeds " + std::to_string(limit));
  }
}

BProjector projector(const ProjectionProblem& problem) {
  const Matrix& A = problem.A();
  Matrix Z = A.transpose() * pseudo_inverse(problem.gram()) * A;
  Z = 0.5 * (Z + Z.transpose()).eval();
  Matrix binv_Z = problem.B().solve(Z);
  return {std::move(Z), std::move(binv_Z)};
}

Decomposition decompose(const Vector& x, const ProjectionProblem& problem) {
  if (x.size() != problem.cols()) throw ContractViolation("decompose: dimension mismatch");
  // s = B^-1 A^T (A B^-1 A^T)^+ A x without forming Z.
  const Vector coeff = least_norm_solve(problem.gram(), problem.A() * x);
  Vector s = problem.binv_at() * coeff;
  Vector t = x - s;
  return {std::move(s), std::move(t)};
}

}  // namespace sda
