#pragma once

#include <sda/problem.hpp>

#include <cstdint>
#include <random>
#include <variant>
#include <vector>

namespace sda {

/// Seedable random stream. Streams for parallel work are split from a base
/// seed by index so every (seed, stream) pair yields its own sequence.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// An m x q sketch S. Coordinate, block, count-sketch and count-min sketches
/// are signed column selections of the m x m identity and are stored as
/// (index, sign) pairs; Gaussian sketches are stored densely.
class SketchMatrix {
 public:
  static SketchMatrix selection(Index m, std::vector<Index> columns,
                                std::vector<double> signs = {});
  static SketchMatrix dense(Matrix S);

  Index rows() const { return rows_; }
  Index cols() const;
  bool is_selection() const { return dense_.size() == 0; }
  const std::vector<Index>& columns() const { return columns_; }
  const std::vector<double>& signs() const { return signs_; }

  Matrix to_dense() const;

  /// S^T M for M with m rows.
  Matrix transpose_times(const Matrix& M) const;
  Vector transpose_times(const Vector& v) const;
  /// S lambda
  Vector times(const Vector& lambda) const;
  /// M S for M with m columns.
  Matrix right_times(const Matrix& M) const;
  /// S^T G S for an m x m matrix G.
  Matrix sandwich(const Matrix& G) const;

 private:
  Index rows_ = 0;
  std::vector<Index> columns_;
  std::vector<double> signs_;
  Matrix dense_;
};

/// Finite support {(S_i, p_i)}; p_i > 0 and sum to one.
class DiscreteDistribution {
 public:
  DiscreteDistribution(std::vector<SketchMatrix> sketches, std::vector<double> probabilities);

  std::size_t size() const { return sketches_.size(); }
  Index rows() const { return sketches_.front().rows(); }
  const std::vector<SketchMatrix>& sketches() const { return sketches_; }
  const std::vector<double>& probabilities() const { return probabilities_; }

 private:
  std::vector<SketchMatrix> sketches_;
  std::vector<double> probabilities_;
};

struct CoordinateSpec {
  std::vector<double> probabilities;  // length m
};
/// Explicit subset family C_j of {0..m-1} with probabilities.
struct BlockSpec {
  std::vector<std::vector<Index>> subsets;
  std::vector<double> probabilities;
};
/// Uniform over all subsets of size tau; sampled directly, never enumerated.
struct UniformBlockSpec {
  Index tau = 1;
};
struct CountSketchSpec {
  Index q = 1;
};
struct CountMinSpec {
  Index q = 1;
};
struct GaussianSpec {
  Index q = 1;
};

using SamplerKind =
    std::variant<CoordinateSpec, BlockSpec, UniformBlockSpec, CountSketchSpec, CountMinSpec,
                 GaussianSpec>;

struct SamplerSpec {
  Index m = 0;
  SamplerKind kind;

  static SamplerSpec coordinate_uniform(Index m);
  /// p_i = ||A_i:||^2 / ||A||_F^2; throws on zero rows.
  static SamplerSpec coordinate_row_norm(const Matrix& A);

  /// Throws ContractViolation when the spec is malformed.
  void validate() const;
  bool has_finite_support() const;
};

/// Support of a finite sampler spec. Throws ContractViolation
/// ("analysis unavailable for this sampler") for Gaussian, count and uniform-block specs.
DiscreteDistribution to_discrete(const SamplerSpec& spec);

/// Stateful sampler: owns a spec, its RNG stream and any cached tables.
class Sampler {
 public:
  Sampler(SamplerSpec spec, std::uint64_t seed, std::uint64_t stream = 0);
  SketchMatrix next();
  const SamplerSpec& spec() const { return spec_; }

 private:
  SamplerSpec spec_;
  RngStream rng_;
  std::discrete_distribution<std::size_t> choice_;
  std::vector<Index> scratch_;
};

/// One draw from spec using rng.
SketchMatrix sample(const SamplerSpec& spec, RngStream& rng);

/// (S^T G S)^+ with G = A B^-1 A^T. Computed from the SVD of K S (K the whitened
/// factor), so its rank is decided on an n x q matrix rather than on the squared
/// q x q product, where roundoff from the inner sums can sit above the cut-off.
Matrix sketched_gram_pinv(const SketchMatrix& S, const ProjectionProblem& problem);

/// H += p S (S^T G S)^+ S^T
void add_H_term(Matrix& H, const SketchMatrix& S, double p, const ProjectionProblem& problem);

/// H = sum_i p_i S_i (S_i^T A B^-1 A^T S_i)^+ S_i^T  (serial reference).
Matrix compute_H(const DiscreteDistribution& dist, const ProjectionProblem& problem);

struct NonsingularityVerdict {
  bool nonsingular = false;
  Index rank = 0;  // rank of [S_1 S_1^T A, ..., S_r S_r^T A]
};

/// H is nonsingular iff Range([S_1 S_1^T A, ..., S_r S_r^T A]) = R^m.
NonsingularityVerdict is_H_nonsingular(const DiscreteDistribution& dist,
                                       const ProjectionProblem& problem);

}  // namespace sda
