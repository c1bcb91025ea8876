#include <doctest.h>

#include <sda/rates.hpp>
#include <sda/solver.hpp>

#include "test_support.hpp"

using namespace sda;
using sda::testing::random_low_rank;
using sda::testing::random_matrix;
using sda::testing::random_spd;
using sda::testing::random_vector;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

SketchMatrix e(Index m, Index i) { return SketchMatrix::selection(m, {i}); }

// Random consistent problem with general B and c.
ProjectionProblem random_problem(Index m, Index n, Index r, std::mt19937_64& rng) {
  const Matrix A = random_low_rank(m, n, r, rng);
  const Vector b = A * random_vector(n, rng);
  return ProjectionProblem(A, b, SpdMatrix(random_spd(n, rng)), random_vector(n, rng));
}

}  // namespace

TEST_CASE("dual_step examples") {
  {
    const auto p = ProjectionProblem::least_norm(Matrix::Identity(2, 2), vec({1, 2}));
    const SolverState s0 = SolverState::from_dual(Vector::Zero(2), p);
    const SolverState s1 = dual_step(s0, e(2, 0), p);
    CHECK(s1.y.isApprox(vec({1, 0})));
    CHECK(s1.x.isApprox(vec({1, 0})));
    CHECK(s1.k == 1);
    CHECK(s1.last_lambda.size() == 1);
  }
  {
    Matrix A = Matrix::Identity(2, 2);
    A.row(1).setZero();
    const auto p = ProjectionProblem::least_norm(A, vec({1, 0}));
    const SolverState s0 = SolverState::from_dual(vec({0.5, 0.25}), p);
    const SolverState s1 = dual_step(s0, e(2, 1), p);
    CHECK(s1.y == s0.y);
  }
  {
    Matrix A = Matrix::Zero(2, 2);
    A.diagonal() << 1, 2;
    const ProjectionProblem p(A, vec({1, 2}), SpdMatrix(A), Vector::Zero(2));
    const SolverState s1 = dual_step(SolverState::from_dual(Vector::Zero(2), p), e(2, 0), p);
    CHECK(s1.y.isApprox(vec({1, 0})));
    CHECK(s1.x.isApprox(vec({1, 0})));
  }
}

TEST_CASE("primal_step examples") {
  std::mt19937_64 rng(4);
  {
    const Matrix A = random_matrix(3, 5, rng);
    const Vector x = random_vector(5, rng);
    const ProjectionProblem p(A, A * x, SpdMatrix(random_spd(5, rng)), Vector::Zero(5));
    CHECK((primal_step(x, e(3, 1), p) - x).norm() <= 1e-12 * x.norm());
  }
  {
    Matrix A(1, 2);
    A << 1, -1;
    const auto p = ProjectionProblem::least_norm(A, Vector::Zero(1));
    CHECK(primal_step(vec({4, 2}), e(1, 0), p).isApprox(vec({3, 3})));
  }
  {
    const Vector u = random_vector(4, rng);
    const Vector v = random_vector(6, rng);
    const Matrix A = u * v.transpose();
    const Vector b = A * random_vector(6, rng);
    const auto p = ProjectionProblem::least_norm(A, b);
    const Vector x1 = primal_step(random_vector(6, rng), e(4, 2), p);
    CHECK((A * x1 - b).norm() <= 1e-12 * std::max(1.0, b.norm()));
  }
}

TEST_CASE("primal_step is the B-projection onto the sketched system") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_problem(5, 7, 4, rng);
    const Matrix S = random_matrix(5, 2, rng);
    const Vector x = random_vector(7, rng);
    const Vector x1 = primal_step(x, SketchMatrix::dense(S), p);
    // Oracle: minimize ||z - x||_B s.t. S^T A z = S^T b via the KKT system.
    const Matrix C = S.transpose() * p.A();
    const Matrix& Bm = p.B().entries();
    Matrix K = Matrix::Zero(7 + 2, 7 + 2);
    K.topLeftCorner(7, 7) = Bm;
    K.topRightCorner(7, 2) = C.transpose();
    K.bottomLeftCorner(2, 7) = C;
    Vector rhs(9);
    rhs << Bm * x, S.transpose() * p.b();
    const Vector sol = K.fullPivLu().solve(rhs);
    CHECK((x1 - sol.head(7)).norm() <= 1e-8 * std::max(1.0, x.norm()));
  }
}

TEST_CASE("primal_from_dual, dual_value and primal_value examples") {
  Matrix A(1, 2);
  A << 1, 0;
  const ProjectionProblem p(A, vec({1}), SpdMatrix::identity(2), vec({1, 1}));
  CHECK(primal_from_dual(Vector::Zero(1), p) == vec({1, 1}));
  CHECK(primal_from_dual(vec({2}), p).isApprox(vec({3, 1})));

  const auto q = ProjectionProblem::least_norm(Matrix::Identity(2, 2), vec({1, 2}));
  CHECK(dual_value(Vector::Zero(2), q) == 0.0);
  CHECK(dual_value(vec({1, 2}), q) == doctest::Approx(2.5));
  CHECK(primal_value(Vector::Zero(2), q) == 0.0);
  CHECK(primal_value(vec({1, 2}), q) == doctest::Approx(2.5));

  Matrix Bd = Matrix::Zero(2, 2);
  Bd.diagonal() << 1, 4;
  const ProjectionProblem r(A, vec({1}), SpdMatrix(Bd), vec({2, 3}));
  CHECK(primal_value(vec({3, 4}), r) == doctest::Approx(2.5));
}

TEST_CASE("weak duality and the gap formula") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = random_problem(4, 6, 1 + trial % 4, rng);
    const auto ref = reference_solution(p, p.c());
    const Vector y = random_vector(4, rng);
    CHECK(dual_value(y, p) <= ref.opt + 1e-10 * std::max(1.0, std::abs(ref.opt)));
    const double direct = primal_value(primal_from_dual(y, p), p) - dual_value(y, p);
    const double gap = duality_gap(y, p);
    CHECK(std::abs(gap - direct) <= 1e-10 * std::max({1.0, std::abs(gap), std::abs(direct)}));
    CHECK(std::abs(duality_gap(ref.y_star, p)) <= 1e-9 * std::max(1.0, std::abs(ref.opt)));
  }
  const auto q = ProjectionProblem::least_norm(Matrix::Identity(2, 2), vec({1, 2}));
  CHECK(duality_gap(Vector::Zero(2), q) == 0.0);
}

TEST_CASE("reference_solution examples") {
  {
    const auto p = ProjectionProblem::least_norm(Matrix::Identity(3, 3), vec({1, 2, 3}));
    const auto ref = reference_solution(p, Vector::Zero(3));
    CHECK(ref.x_star.isApprox(vec({1, 2, 3})));
    CHECK(ref.y_star.isApprox(vec({1, 2, 3})));
    CHECK(ref.opt == doctest::Approx(7.0));
    CHECK(ref.u0 == doctest::Approx(7.0));
  }
  {
    Matrix A(1, 2);
    A << 1, 0;
    const auto ref = reference_solution(ProjectionProblem::least_norm(A, vec({1})), Vector::Zero(2));
    CHECK(ref.x_star.isApprox(vec({1, 0})));
  }
  {
    std::mt19937_64 rng(12);
    const Matrix A = random_matrix(3, 5, rng);
    const Vector c = random_vector(5, rng);
    const ProjectionProblem p(A, A * c, SpdMatrix(random_spd(5, rng)), c);
    const auto ref = reference_solution(p, c);
    CHECK((ref.x_star - c).norm() <= 1e-10 * c.norm());
    CHECK(std::abs(ref.opt) <= 1e-18 * std::max(1.0, c.squaredNorm()));
  }
}

TEST_CASE("reference_solution rejects inconsistent systems") {
  Matrix A(2, 1);
  A << 1, 1;
  const auto p = ProjectionProblem::least_norm(A, vec({1, 2}));
  CHECK_THROWS_AS(reference_solution(p, Vector::Zero(1)), InconsistentSystem);
  CHECK_THROWS_AS(p.check_consistent(), InconsistentSystem);
}

TEST_CASE("dual objective identity D(y*) - D(y) = 1/2 ||x(y*) - x(y)||_B^2") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 40; ++trial) {
    const auto p = random_problem(3 + trial % 4, 5, 1 + trial % 3, rng);
    const auto ref = reference_solution(p, p.c());
    const Vector y = random_vector(p.rows(), rng);
    const double lhs = dual_value(ref.y_star, p) - dual_value(y, p);
    const Vector d = primal_from_dual(ref.y_star, p) - primal_from_dual(y, p);
    const double rhs = 0.5 * p.B().quadratic(d);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max({1.0, std::abs(lhs), std::abs(rhs)}));
  }
}

TEST_CASE("incremental kernel agrees with the reference steps") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_problem(6, 8, 2 + trial % 5, rng);
    const IterationKernel kernel(p);
    SolverState fast = SolverState::from_dual(random_vector(6, rng), p);
    SolverState slow = fast;
    Vector r = kernel.residual(fast.x);
    Vector xp = random_vector(8, rng);
    Vector xp_slow = xp;
    Vector rp = kernel.residual(xp);
    Sampler s(trial % 2 ? SamplerSpec{6, CountSketchSpec{2}} : SamplerSpec{6, GaussianSpec{2}}, 5);
    for (int k = 0; k < 60; ++k) {
      const SketchMatrix S = s.next();
      kernel.dual_step(fast, r, S);
      slow = dual_step(slow, S, p);
      kernel.primal_step(xp, rp, S);
      xp_slow = primal_step(xp_slow, S, p);
    }
    CHECK(fast.k == slow.k);
    CHECK((fast.y - slow.y).norm() <= 1e-9 * std::max(1.0, slow.y.norm()));
    CHECK((fast.x - slow.x).norm() <= 1e-9 * std::max(1.0, slow.x.norm()));
    CHECK((r - kernel.residual(fast.x)).norm() <= 1e-9 * std::max(1.0, p.b().norm()));
    CHECK((xp - xp_slow).norm() <= 1e-9 * std::max(1.0, xp_slow.norm()));
    CHECK((rp - kernel.residual(xp)).norm() <= 1e-9 * std::max(1.0, p.b().norm()));
  }
}

TEST_CASE("dual ascent is monotone and iterates stay in c + Range(B^-1 A^T)") {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_problem(5, 7, 3 + trial % 3, rng);
    SolverState s = SolverState::from_dual(Vector::Zero(5), p);
    Sampler sampler(trial % 2 ? SamplerSpec::coordinate_uniform(5)
                              : SamplerSpec{5, UniformBlockSpec{2}},
                    static_cast<std::uint64_t>(trial));
    double d = dual_value(s.y, p);
    for (int k = 0; k < 200; ++k) {
      s = dual_step(s, sampler.next(), p);
      const double next = dual_value(s.y, p);
      CHECK(next >= d - 1e-12 * (1.0 + std::abs(d)));
      d = next;
    }
    const Vector t = decompose(Vector(s.x - p.c()), p).t;
    CHECK(b_norm(t, p.B()) <= 1e-9 * std::max(1.0, b_norm(s.x - p.c(), p.B())));
  }
}

TEST_CASE("self-duality: x^k = y^k when B = A and c = 0") {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix A = random_spd(6, rng);
    const Vector b = random_vector(6, rng);
    const ProjectionProblem p(A, b, SpdMatrix(A), Vector::Zero(6));
    SolveOptions opts;
    opts.max_iters = 300;
    opts.seed = 99;
    const SolveReport rep = solve(p, SamplerSpec::coordinate_uniform(6), opts, DualStart{Vector::Zero(6)});
    const auto& st = rep.final_state;
    CHECK((st.x - st.y).norm() <= 1e-10 * std::max(1.0, st.y.norm()));
    // Step by step with the reference recursion.
    SolverState s = SolverState::from_dual(Vector::Zero(6), p);
    Sampler sampler(SamplerSpec::coordinate_uniform(6), 7);
    for (int k = 0; k < 100; ++k) {
      s = dual_step(s, sampler.next(), p);
      CHECK((s.x - s.y).norm() <= 1e-10 * std::max(1.0, s.y.norm()));
    }
  }
}

TEST_CASE("solve: rank-1 Kaczmarz converges in one step") {
  std::mt19937_64 rng(20);
  const Matrix A = random_vector(5, rng) * random_vector(7, rng).transpose();
  const auto p = ProjectionProblem::least_norm(A, A * random_vector(7, rng));
  SolveOptions opts;
  opts.seed = 3;
  const auto rep = solve(p, SamplerSpec::coordinate_row_norm(A), opts, DualStart{Vector::Zero(5)});
  CHECK(rep.converged);
  CHECK(rep.iterations == 1);
  CHECK(rep.h_nonsingular.has_value());
}

TEST_CASE("solve from x0 = c converges to x*") {
  std::mt19937_64 rng(21);
  const auto p = random_problem(6, 9, 4, rng);
  SolveOptions opts;
  opts.seed = 1;
  const auto rep = solve(p, SamplerSpec{6, BlockSpec{{{0, 1}, {2, 3}, {4, 5}, {1, 4}}, {0.25, 0.25, 0.25, 0.25}}},
                         opts, PrimalStart{p.c()});
  CHECK(rep.converged);
  CHECK(rep.shift.norm() <= 1e-10 * std::max(1.0, p.c().norm()));
  CHECK((rep.final_state.x - rep.reference.x_star).norm() <=
        1e-6 * std::max(1.0, rep.reference.x_star.norm()));
}

TEST_CASE("solve from an arbitrary x0 converges to x* + t") {
  Matrix A(1, 2);
  A << 1, 0;
  const auto p = ProjectionProblem::least_norm(A, vec({1}));
  const auto rep = solve(p, SamplerSpec::coordinate_uniform(1), SolveOptions{}, PrimalStart{vec({0, 5})});
  CHECK(rep.converged);
  CHECK(rep.shift.isApprox(vec({0, 5})));
  CHECK(rep.final_state.x.isApprox(vec({1, 5})));
  CHECK(shift_vector(vec({0, 5}), p).isApprox(vec({0, 5})));
}

TEST_CASE("solve reports non-convergence and is deterministic") {
  std::mt19937_64 rng(22);
  const auto p = random_problem(8, 8, 8, rng);
  SolveOptions opts;
  opts.max_iters = 5;
  opts.seed = 11;
  const auto spec = SamplerSpec::coordinate_uniform(8);
  const auto a = solve(p, spec, opts, DualStart{Vector::Zero(8)});
  const auto b = solve(p, spec, opts, DualStart{Vector::Zero(8)});
  CHECK_FALSE(a.converged);
  CHECK(a.iterations == 5);
  REQUIRE(a.trace.size() == b.trace.size());
  CHECK(a.trace.size() == 6);
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].k == b.trace[i].k);
    CHECK(a.trace[i].error_sq == b.trace[i].error_sq);
    CHECK(a.trace[i].residual == b.trace[i].residual);
  }
  CHECK(a.final_state.y == b.final_state.y);
}

TEST_CASE("solve validates its options") {
  const auto p = ProjectionProblem::least_norm(Matrix::Identity(2, 2), vec({1, 1}));
  SolveOptions bad;
  bad.gap_check_period = 0;
  CHECK_THROWS_AS(solve(p, SamplerSpec::coordinate_uniform(2), bad, DualStart{Vector::Zero(2)}),
                  ContractViolation);
  SolveOptions neg;
  neg.tol_residual = -1.0;
  CHECK_THROWS_AS(solve(p, SamplerSpec::coordinate_uniform(2), neg, DualStart{Vector::Zero(2)}),
                  ContractViolation);
  CHECK_THROWS_AS(solve(p, SamplerSpec::coordinate_uniform(3), SolveOptions{}, DualStart{Vector::Zero(2)}),
                  ContractViolation);
}
