#include <sda/solver.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace sda {

namespace {

void require_dual_size(const Vector& y, const ProjectionProblem& problem, const char* op) {
  if (y.size() != problem.rows()) {
    throw ContractViolation(std::string(op) + ": dual vector has wrong length");
  }
}

void require_primal_size(const Vector& x, const ProjectionProblem& problem, const char* op) {
  if (x.size() != problem.cols()) {
    throw ContractViolation(std::string(op) + ": primal vector has wrong length");
  }
}

void require_sketch(const SketchMatrix& S, const ProjectionProblem& problem) {
  if (S.rows() != problem.rows()) throw ContractViolation("sketch rows do not match A");
}

// (S^T G S)^+ d: scalar division for one column, factor-based pseudoinverse otherwise.
Vector step_coefficients(const SketchMatrix& S, const ProjectionProblem& problem, const Vector& d) {
  if (S.cols() == 1) return least_norm_solve(S.sandwich(problem.gram()), d);
  return sketched_gram_pinv(S, problem) * d;
}

}  // namespace

SolverState SolverState::from_dual(const Vector& y, const ProjectionProblem& problem) {
  return {y, primal_from_dual(y, problem), 0, Vector()};
}

SolverState dual_step(const SolverState& state, const SketchMatrix& S,
                      const ProjectionProblem& problem) {
  require_dual_size(state.y, problem, "dual_step");
  require_sketch(S, problem);
  const Vector x = primal_from_dual(state.y, problem);
  const Vector rhs = S.transpose_times(Vector(problem.b() - problem.A() * x));
  SolverState next;
  next.last_lambda = step_coefficients(S, problem, rhs);
  next.y = state.y + S.times(next.last_lambda);
  next.x = primal_from_dual(next.y, problem);
  next.k = state.k + 1;
  return next;
}

Vector primal_step(const Vector& x, const SketchMatrix& S, const ProjectionProblem& problem) {
  require_primal_size(x, problem, "primal_step");
  require_sketch(S, problem);
  const Vector rhs = S.transpose_times(Vector(problem.b() - problem.A() * x));
  const Vector lambda = step_coefficients(S, problem, rhs);
  return x + S.right_times(problem.binv_at()) * lambda;
}

Vector primal_from_dual(const Vector& y, const ProjectionProblem& problem) {
  require_dual_size(y, problem, "primal_from_dual");
  return problem.c() + problem.binv_at() * y;
}

double dual_value(const Vector& y, const ProjectionProblem& problem) {
  require_dual_size(y, problem, "dual_value");
  const Vector bc = problem.b() - problem.A() * problem.c();
  return bc.dot(y) - 0.5 * y.dot(problem.gram() * y);
}

double primal_value(const Vector& x, const ProjectionProblem& problem) {
  require_primal_size(x, problem, "primal_value");
  return 0.5 * problem.B().quadratic(Vector(x - problem.c()));
}

double duality_gap(const Vector& y, const ProjectionProblem& problem) {
  require_dual_size(y, problem, "duality_gap");
  const Vector grad_neg = problem.gram() * y + problem.A() * problem.c() - problem.b();
  return grad_neg.dot(y);
}

ReferenceSolution reference_solution(const ProjectionProblem& problem, const Vector& x0,
                                     double rel_tol) {
  require_primal_size(x0, problem, "reference_solution");
  ReferenceSolution ref;
  const Vector bc = problem.b() - problem.A() * problem.c();
  ref.y_star = least_norm_solve(problem.gram(), bc);
  ref.x_star = primal_from_dual(ref.y_star, problem);

  const double residual = (problem.A() * ref.x_star - problem.b()).norm();
  const double scale = std::max(problem.b().norm(), problem.A().norm() * ref.x_star.norm());
  if (residual > rel_tol * scale) {
    throw InconsistentSystem("inconsistent system: residual " + std::to_string(residual) +
                             " at the least-norm solution");
  }

  const double p = primal_value(ref.x_star, problem);
  const double d = dual_value(ref.y_star, problem);
  const double term_scale = std::max({1.0, std::abs(p), std::abs(bc.dot(ref.y_star))});
  if (std::abs(p - d) > 1e-10 * term_scale) {
    throw NumericalError("reference_solution: primal and dual optima disagree (" +
                         std::to_string(p) + " vs " + std::to_string(d) + ")");
  }
  ref.opt = p;
  ref.u0 = 0.5 * problem.B().quadratic(Vector(x0 - ref.x_star));
  return ref;
}

void SolveOptions::validate() const {
  if (max_iters < 0) throw ContractViolation("solve: max_iters must be >= 0");
  if (gap_check_period < 1) throw ContractViolation("solve: gap_check_period must be >= 1");
  if (record_every < 1) throw ContractViolation("solve: record_every must be >= 1");
  for (const auto& tol : {tol_residual, tol_gap, tol_step}) {
    if (tol && !(*tol > 0.0)) throw ContractViolation("solve: tolerances must be positive");
  }
}

IterationKernel::IterationKernel(const ProjectionProblem& problem) : problem_(problem) {}

Vector IterationKernel::residual(const Vector& x) const { return problem_.A() * x - problem_.b(); }

Vector IterationKernel::coefficients(const Vector& residual, const SketchMatrix& S) const {
  return step_coefficients(S, problem_, Vector(-S.transpose_times(residual)));
}

void IterationKernel::dual_step(SolverState& state, Vector& residual,
                                const SketchMatrix& S) const {
  state.last_lambda = coefficients(residual, S);
  if (S.is_selection()) {
    const auto& cols = S.columns();
    const auto& sg = S.signs();
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const double w = sg[j] * state.last_lambda(static_cast<Index>(j));
      if (w == 0.0) continue;
      state.y(cols[j]) += w;
      state.x.noalias() += w * problem_.binv_at().col(cols[j]);
      residual.noalias() += w * problem_.gram().col(cols[j]);
    }
  } else {
    const Vector step = S.times(state.last_lambda);
    state.y += step;
    state.x.noalias() += problem_.binv_at() * step;
    residual.noalias() += problem_.gram() * step;
  }
  ++state.k;
}

void IterationKernel::primal_step(Vector& x, Vector& residual, const SketchMatrix& S) const {
  const Vector lambda = coefficients(residual, S);
  if (S.is_selection()) {
    const auto& cols = S.columns();
    const auto& sg = S.signs();
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const double w = sg[j] * lambda(static_cast<Index>(j));
      if (w == 0.0) continue;
      x.noalias() += w * problem_.binv_at().col(cols[j]);
      residual.noalias() += w * problem_.gram().col(cols[j]);
    }
  } else {
    const Vector step = S.times(lambda);
    x.noalias() += problem_.binv_at() * step;
    residual.noalias() += problem_.gram() * step;
  }
}

SolveReport solve(const ProjectionProblem& problem, const SamplerSpec& spec,
                  const SolveOptions& options, const StartPoint& start) {
  options.validate();
  spec.validate();
  if (spec.m != problem.rows()) throw ContractViolation("solve: sampler m does not match A");

  const bool dual = std::holds_alternative<DualStart>(start);
  SolveReport report;
  SolverState state;
  if (dual) {
    const Vector& y0 = std::get<DualStart>(start).y0;
    require_dual_size(y0, problem, "solve");
    state = SolverState::from_dual(y0, problem);
  } else {
    const Vector& x0 = std::get<PrimalStart>(start).x0;
    require_primal_size(x0, problem, "solve");
    state.x = x0;
  }

  report.reference = reference_solution(problem, state.x);
  report.shift = decompose(Vector(state.x - problem.c()), problem).t;
  const Vector target = report.reference.x_star + report.shift;

  if (spec.has_finite_support()) {
    report.h_nonsingular = is_H_nonsingular(to_discrete(spec), problem).nonsingular;
  }

  const double b_norm2 = problem.b().norm();
  const double tol_res = options.tol_residual.value_or(b_norm2 > 0.0 ? 1e-8 * b_norm2 : 1e-12);
  const double tol_step =
      options.tol_step.value_or(1e-8 * std::max(1.0, b_norm(state.x - problem.c(), problem.B())));

  const IterationKernel kernel(problem);
  Sampler sampler(spec, options.seed, options.stream);
  Vector r = kernel.residual(state.x);

  auto record = [&](long k, std::optional<double> gap) {
    TraceRow row;
    row.k = k;
    row.error_sq = problem.B().quadratic(Vector(state.x - target));
    row.residual = kernel.residual(state.x).norm();
    if (dual) row.dual_value = dual_value(state.y, problem);
    row.gap = gap;
    report.trace.push_back(row);
  };

  record(0, dual ? std::optional<double>(duality_gap(state.y, problem)) : std::nullopt);

  Vector previous;
  for (long k = 1; k <= options.max_iters; ++k) {
    const SketchMatrix S = sampler.next();
    if (dual) {
      kernel.dual_step(state, r, S);
    } else {
      previous = state.x;
      kernel.primal_step(state.x, r, S);
      ++state.k;
    }

    const bool periodic = k % options.gap_check_period == 0;
    bool residual_pass = r.norm() <= tol_res;
    std::optional<double> gap;
    if (residual_pass || periodic) {
      r = kernel.residual(state.x);
      residual_pass = r.norm() <= tol_res;
      if (dual) gap = duality_gap(state.y, problem);
    }

    bool converged = false;
    if (residual_pass) {
      if (dual) {
        const double tol_gap =
            options.tol_gap.value_or(1e-8 * (1.0 + std::abs(dual_value(state.y, problem))));
        converged = std::abs(*gap) <= tol_gap;
      } else {
        converged = b_norm(state.x - previous, problem.B()) <= tol_step;
      }
    }

    if (k % options.record_every == 0 || converged || k == options.max_iters) record(k, gap);
    report.iterations = k;
    if (converged) {
      report.converged = true;
      break;
    }
  }
  report.final_state = std::move(state);
  return report;
}

}  // namespace sda
