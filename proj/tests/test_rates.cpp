#include <doctest.h>

#include <sda/parallel.hpp>
#include <sda/rates.hpp>

#include "test_support.hpp"

#include <algorithm>
#include <numeric>

using namespace sda;
using sda::testing::random_low_rank;
using sda::testing::random_matrix;
using sda::testing::random_spd;
using sda::testing::random_vector;

namespace {

// Eigenvalues of A^T A by the dense self-adjoint solver, smallest nonzero picked by rank.
double oracle_lambda_min_plus_ata(const Matrix& A) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A.transpose() * A);
  const Index r = sda::testing::elimination_rank(A);
  return eig.eigenvalues()(A.cols() - r);
}

}  // namespace

TEST_CASE("rate_rho examples") {
  for (Index n : {2, 5, 9}) {
    const auto p = ProjectionProblem::least_norm(Matrix::Identity(n, n), Vector::Zero(n));
    const Matrix H = compute_H(to_discrete(SamplerSpec::coordinate_uniform(n)), p);
    CHECK(rate_rho(p, H) == doctest::Approx(1.0 - 1.0 / static_cast<double>(n)));
  }
  std::mt19937_64 rng(1);
  {
    const Matrix A = random_vector(4, rng) * random_vector(3, rng).transpose();
    const auto p = ProjectionProblem::least_norm(A, Vector::Zero(4));
    const Matrix H = compute_H(to_discrete(SamplerSpec::coordinate_row_norm(A)), p);
    CHECK(std::abs(rate_rho(p, H)) <= 1e-12);
  }
  {
    const Matrix A = random_matrix(4, 3, rng);
    const auto p = ProjectionProblem::least_norm(A, Vector::Zero(4));
    const Matrix H = compute_H(to_discrete(SamplerSpec::coordinate_row_norm(A)), p);
    const double oracle = 1.0 - oracle_lambda_min_plus_ata(A) / A.squaredNorm();
    CHECK(std::abs(rate_rho(p, H) - oracle) <= 1e-10);
  }
  {
    const auto p = ProjectionProblem::least_norm(Matrix::Identity(3, 3), Vector::Zero(3));
    CHECK_THROWS_AS(rate_rho(p, Matrix::Zero(3, 3)), NumericalError);
  }
}

TEST_CASE("rate_lower_bound examples") {
  std::mt19937_64 rng(2);
  {
    const Matrix A = random_low_rank(6, 5, 4, rng);
    const auto dist = to_discrete(SamplerSpec::coordinate_row_norm(A));
    CHECK(rate_lower_bound(dist, A) == doctest::Approx(1.0 - 1.0 / 4.0));
  }
  {
    const Matrix A = random_low_rank(4, 4, 2, rng);
    const DiscreteDistribution single({SketchMatrix::selection(4, {0, 1, 2, 3})}, {1.0});
    CHECK(rate_lower_bound(single, A) == 0.0);
  }
  {
    // tau = 2 blocks of a full-row-rank 6 x 8 matrix: each S_i^T A has rank 2.
    const Matrix A = random_matrix(6, 8, rng);
    const DiscreteDistribution blocks(
        {SketchMatrix::selection(6, {0, 1}), SketchMatrix::selection(6, {2, 3}),
         SketchMatrix::selection(6, {4, 5}), SketchMatrix::selection(6, {1, 4})},
        {0.4, 0.3, 0.2, 0.1});
    for (const auto& S : blocks.sketches()) {
      Eigen::JacobiSVD<Matrix> svd(S.transpose_times(A));
      CHECK(svd.singularValues()(1) > 1e-8);
    }
    CHECK(rate_lower_bound(blocks, A) == doctest::Approx(1.0 - 2.0 / 6.0));
  }
  CHECK_THROWS_AS(rate_lower_bound(to_discrete(SamplerSpec::coordinate_uniform(2)),
                                   Matrix::Zero(2, 2)),
                  NumericalError);
}

TEST_CASE("rk_rate examples") {
  CHECK(rk_rate(Matrix::Identity(4, 4)) == doctest::Approx(0.75));
  std::mt19937_64 rng(3);
  const Matrix r1 = random_vector(5, rng) * random_vector(3, rng).transpose();
  CHECK(std::abs(rk_rate(r1)) <= 1e-12);
  const Matrix A = random_matrix(5, 4, rng);
  CHECK(std::abs(rk_rate(A) - (1.0 - oracle_lambda_min_plus_ata(A) / A.squaredNorm())) <= 1e-10);
  Matrix Z = A;
  Z.row(2).setZero();
  CHECK_THROWS_WITH_AS(rk_rate(Z), "zero row: row-norm probabilities undefined",
                       ContractViolation);
}

TEST_CASE("rk_rate matches rate_rho under row-norm coordinates") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 25; ++trial) {
    const Index m = 3 + trial % 5;
    const Index n = 2 + trial % 6;
    const Matrix A = random_low_rank(m, n, 1 + trial % std::min(m, n), rng);
    const auto p = ProjectionProblem::least_norm(A, Vector::Zero(m));
    const Matrix H = compute_H(to_discrete(SamplerSpec::coordinate_row_norm(A)), p);
    CHECK(std::abs(rk_rate(A) - rate_rho(p, H)) <= 1e-10);
  }
}

TEST_CASE("selfdual_rate examples") {
  CHECK(selfdual_rate(Matrix::Identity(3, 3)) == doctest::Approx(2.0 / 3.0));
  Matrix D = Matrix::Zero(2, 2);
  D.diagonal() << 1, 3;
  CHECK(selfdual_rate(D) == doctest::Approx(0.75));
  Matrix bad = Matrix::Identity(2, 2);
  bad(1, 1) = -1.0;
  CHECK_THROWS_AS(selfdual_rate(bad), ContractViolation);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix A = random_spd(5, rng);
    const ProjectionProblem p(A, Vector::Zero(5), SpdMatrix(A), Vector::Zero(5));
    std::vector<double> probs(5);
    for (Index i = 0; i < 5; ++i) probs[static_cast<std::size_t>(i)] = A(i, i) / A.trace();
    const Matrix H = compute_H(to_discrete(SamplerSpec{5, CoordinateSpec{probs}}), p);
    CHECK((H - Matrix::Identity(5, 5) / A.trace()).norm() <= 1e-12 * H.norm());
    CHECK(std::abs(selfdual_rate(A) - rate_rho(p, H)) <= 1e-10);
  }
}

TEST_CASE("shift_vector examples") {
  std::mt19937_64 rng(6);
  const auto p = ProjectionProblem(random_matrix(3, 5, rng), Vector::Zero(3),
                                   SpdMatrix(random_spd(5, rng)), random_vector(5, rng));
  CHECK(shift_vector(p.c(), p).norm() == doctest::Approx(0.0));
  const auto full = ProjectionProblem::least_norm(random_matrix(6, 4, rng), Vector::Zero(6));
  CHECK(shift_vector(random_vector(4, rng), full).norm() <= 1e-10);
  Matrix A(1, 2);
  A << 1, 0;
  Vector x0(2);
  x0 << 0, 5;
  CHECK(shift_vector(x0, ProjectionProblem::least_norm(A, Vector::Ones(1))).isApprox(x0));
}

TEST_CASE("key spectral inequality on random instances") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 120; ++trial) {
    const Index rows = 2 + trial % 6;
    const Index cols = 2 + trial % 5;
    const Matrix W = random_low_rank(rows, cols, 1 + trial % std::min(rows, cols), rng);
    const Matrix G = random_spd(rows, rng);
    const Vector y = random_vector(rows, rng);
    // y^T W (W^T G W) W^T y >= lambda_min^+(W^T G W) ||W^T y||^2
    const Vector u = W.transpose() * y;
    const double lhs = u.dot(W.transpose() * G * W * u);
    const double rhs = lambda_min_plus(W.transpose() * G * W) * u.squaredNorm();
    CHECK(lhs >= rhs - 1e-10 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("bound ordering and support-order invariance") {
  std::mt19937_64 rng(8);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Index m = 3 + trial % 4;
    const Index n = 3 + trial % 5;
    const Matrix A = random_low_rank(m, n, 1 + trial % std::min(m, n), rng);
    const ProjectionProblem p(A, Vector::Zero(m), SpdMatrix(random_spd(n, rng)),
                              Vector::Zero(n));
    std::vector<SketchMatrix> support;
    std::vector<double> probs;
    std::uniform_real_distribution<double> u(0.2, 1.0);
    for (Index i = 0; i < m; ++i) {
      support.push_back(trial % 2 ? SketchMatrix::selection(m, {i})
                                  : SketchMatrix::dense(random_matrix(m, 2, rng)));
      probs.push_back(u(rng));
    }
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    for (double& q : probs) q /= total;
    const DiscreteDistribution dist(support, probs);
    const RateReport rep = rate_report(dist, p);
    CHECK(rep.lower_bound ==
          doctest::Approx(1.0 - rep.expected_sketch_rank / static_cast<double>(rep.rank_A)));
    if (!rep.h_nonsingular) continue;
    ++checked;
    CHECK(rep.lower_bound <= rep.rho + 1e-12);
    CHECK(rep.rho < 1.0);

    std::vector<std::size_t> order(support.size());
    std::iota(order.begin(), order.end(), 0);
    std::reverse(order.begin(), order.end());
    std::vector<SketchMatrix> s2;
    std::vector<double> p2;
    for (std::size_t k : order) {
      s2.push_back(support[k]);
      p2.push_back(probs[k]);
    }
    const double rho2 = rate_rho(p, compute_H(DiscreteDistribution(s2, p2), p));
    CHECK(std::abs(rho2 - rep.rho) <= 1e-12);
  }
  CHECK(checked >= 20);
}

TEST_CASE("rate_report uses the parallel H and matches the serial one") {
  std::mt19937_64 rng(9);
  const Matrix A = random_matrix(30, 12, rng);
  const auto p = ProjectionProblem::least_norm(A, Vector::Zero(30));
  const auto dist = to_discrete(SamplerSpec::coordinate_row_norm(A));
  const RateReport rep = rate_report(dist, p);
  CHECK((rep.H - compute_H(dist, p)).norm() <= 1e-14 * rep.H.norm());
  CHECK(rep.h_nonsingular);
  CHECK(rep.h_rank == 30);
  CHECK(rep.rank_A == 12);
  CHECK(std::abs(rep.rho - rk_rate(A)) <= 1e-10);
}
