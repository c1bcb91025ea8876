#include <sda/rates.hpp>

#include <sda/parallel.hpp>

#include <Eigen/Eigenvalues>

namespace sda {

double rate_rho(const ProjectionProblem& problem, const Matrix& H) {
  if (H.rows() != problem.rows() || H.cols() != problem.rows()) {
    throw ContractViolation("rate_rho: H must be m x m");
  }
  const Matrix& A = problem.A();
  Matrix M = A.transpose() * H * A;
  if (!problem.B().is_identity()) {
    const Matrix R = problem.B().inverse_sqrt();
    M = R * M * R;
  }
  return 1.0 - lambda_min_plus(M);
}

double expected_sketch_rank(const DiscreteDistribution& dist, const Matrix& A) {
  if (dist.rows() != A.rows()) throw ContractViolation("expected_sketch_rank: row mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    total += dist.probabilities()[i] *
             static_cast<double>(numerical_rank(dist.sketches()[i].transpose_times(A)));
  }
  return total;
}

double rate_lower_bound(const DiscreteDistribution& dist, const Matrix& A) {
  const Index rank = numerical_rank(A);
  if (rank == 0) throw NumericalError("rate_lower_bound: rank(A) = 0");
  return 1.0 - expected_sketch_rank(dist, A) / static_cast<double>(rank);
}

double rk_rate(const Matrix& A) {
  const Vector norms = A.rowwise().squaredNorm();
  for (Index i = 0; i < norms.size(); ++i) {
    if (norms(i) == 0.0) throw ContractViolation("zero row: row-norm probabilities undefined");
  }
  return 1.0 - lambda_min_plus(A.transpose() * A) / norms.sum();
}

double selfdual_rate(const Matrix& A) {
  const SpdMatrix spd(A);  // throws on non-SPD input
  Eigen::SelfAdjointEigenSolver<Matrix> eig(spd.entries(), Eigen::EigenvaluesOnly);
  return 1.0 - eig.eigenvalues()(0) / spd.entries().trace();
}

Vector shift_vector(const Vector& x0, const ProjectionProblem& problem) {
  if (x0.size() != problem.cols()) throw ContractViolation("shift_vector: dimension mismatch");
  return decompose(Vector(x0 - problem.c()), problem).t;
}

RateReport rate_report(const DiscreteDistribution& dist, const ProjectionProblem& problem) {
  RateReport report;
  report.H = parallel::compute_H(dist, problem);
  const auto verdict = is_H_nonsingular(dist, problem);
  report.h_nonsingular = verdict.nonsingular;
  report.h_rank = verdict.rank;
  report.rank_A = numerical_rank(problem.A());
  report.expected_sketch_rank = expected_sketch_rank(dist, problem.A());
  report.lower_bound =
      1.0 - report.expected_sketch_rank / static_cast<double>(report.rank_A);
  report.rho = rate_rho(problem, report.H);
  return report;
}

}  // namespace sda
