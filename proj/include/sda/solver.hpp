#pragma once

#include <sda/problem.hpp>
#include <sda/sketch.hpp>

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace sda {

/// Dual iterate y, its primal image x = c + B^-1 A^T y, iteration count and
/// the most recent step coefficients.
struct SolverState {
  Vector y;
  Vector x;
  long k = 0;
  Vector last_lambda;

  static SolverState from_dual(const Vector& y, const ProjectionProblem& problem);
};

struct ReferenceSolution {
  Vector y_star;
  Vector x_star;
  double opt = 0.0;
  double u0 = 0.0;
};

// Single-step operations. These evaluate the update formulas directly and are
// the reference the fast kernel in solve() is checked against.

/// lambda = (S^T G S)^+ S^T (b - A x(y)),  y' = y + S lambda,  x' = c + B^-1 A^T y'.
SolverState dual_step(const SolverState& state, const SketchMatrix& S,
                      const ProjectionProblem& problem);

/// x' = x - B^-1 A^T S (S^T G S)^+ S^T (A x - b): the B-projection of x onto {S^T A z = S^T b}.
Vector primal_step(const Vector& x, const SketchMatrix& S, const ProjectionProblem& problem);

Vector primal_from_dual(const Vector& y, const ProjectionProblem& problem);
double dual_value(const Vector& y, const ProjectionProblem& problem);
double primal_value(const Vector& x, const ProjectionProblem& problem);

/// (A B^-1 A^T y + A c - b)^T y = P(x(y)) - D(y). Only a certificate together
/// with feasibility: y = 0 gives zero gap whether or not c is feasible.
double duality_gap(const Vector& y, const ProjectionProblem& problem);

/// y* = (A B^-1 A^T)^+ (b - A c), x* = c + B^-1 A^T y*, OPT, U0 = 1/2 ||x0 - x*||_B^2.
/// Throws InconsistentSystem when A x* = b fails.
ReferenceSolution reference_solution(const ProjectionProblem& problem, const Vector& x0,
                                     double rel_tol = 1e-8);

struct SolveOptions {
  long max_iters = 100000;
  std::optional<double> tol_residual;  // default 1e-8 ||b|| (1e-12 if b = 0)
  std::optional<double> tol_gap;       // default 1e-8 (1 + |D(y^k)|)
  std::optional<double> tol_step;      // primal runs; default 1e-8 max(1, ||x0 - c||_B)
  long gap_check_period = 100;
  long record_every = 1;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  void validate() const;
};

struct DualStart {
  Vector y0;
};
struct PrimalStart {
  Vector x0;
};
using StartPoint = std::variant<DualStart, PrimalStart>;

struct TraceRow {
  long k = 0;
  double error_sq = 0.0;  // ||x^k - x* - t||_B^2
  double residual = 0.0;  // ||A x^k - b||_2
  std::optional<double> dual_value;
  std::optional<double> gap;
};

struct SolveReport {
  std::vector<TraceRow> trace;
  SolverState final_state;
  bool converged = false;
  long iterations = 0;
  /// Set when the sampler has finite support: whether H is nonsingular.
  /// No decay guarantee applies when false.
  std::optional<bool> h_nonsingular;
  ReferenceSolution reference;
  Vector shift;
};

/// Incremental sketch-and-project kernel. Keeps r = A x - b up to date through
/// the cached gram matrix so a step with a q-column selection sketch costs
/// O((m + n) q + q^3) instead of O(m n).
class IterationKernel {
 public:
  explicit IterationKernel(const ProjectionProblem& problem);

  /// Exact residual A x - b.
  Vector residual(const Vector& x) const;

  /// Dual step on state; residual must hold A state.x - b and is updated.
  void dual_step(SolverState& state, Vector& residual, const SketchMatrix& S) const;
  /// Primal step on x; residual must hold A x - b and is updated.
  void primal_step(Vector& x, Vector& residual, const SketchMatrix& S) const;

 private:
  Vector coefficients(const Vector& residual, const SketchMatrix& S) const;
  const ProjectionProblem& problem_;
};

/// Runs the dual-start or primal-start iteration until the stopping rule passes or
/// max_iters. Deterministic in (inputs, seed, stream).
SolveReport solve(const ProjectionProblem& problem, const SamplerSpec& spec,
                  const SolveOptions& options, const StartPoint& start);

}  // namespace sda
