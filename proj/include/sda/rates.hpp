#pragma once

#include <sda/problem.hpp>
#include <sda/sketch.hpp>

namespace sda {

/// rho = 1 - lambda_min^+(B^-1/2 A^T H A B^-1/2).
/// Throws NumericalError when A^T H A is numerically zero.
double rate_rho(const ProjectionProblem& problem, const Matrix& H);

/// sum_i p_i rank(S_i^T A)
double expected_sketch_rank(const DiscreteDistribution& dist, const Matrix& A);

/// 1 - E[rank(S^T A)] / rank(A), computed exactly over the finite support.
double rate_lower_bound(const DiscreteDistribution& dist, const Matrix& A);

/// Randomized Kaczmarz with row-norm probabilities: 1 - lambda_min^+(A^T A) / ||A||_F^2.
double rk_rate(const Matrix& A);

/// Coordinate descent on the self-dual problem (B = A SPD, p_i = A_ii / Tr A):
/// 1 - lambda_min(A) / Tr(A).
double selfdual_rate(const Matrix& A);

/// t: B-projection of x0 - c onto Null(A). Primal iterates converge to x* + t.
Vector shift_vector(const Vector& x0, const ProjectionProblem& problem);

struct RateReport {
  double rho = 0.0;
  double lower_bound = 0.0;
  Matrix H;
  double expected_sketch_rank = 0.0;
  Index rank_A = 0;
  bool h_nonsingular = false;
  Index h_rank = 0;
};

/// Full diagnostic for a finite distribution. rho is reported even when H is
/// singular; h_nonsingular then flags that no guarantee applies.
RateReport rate_report(const DiscreteDistribution& dist, const ProjectionProblem& problem);

}  // namespace sda
