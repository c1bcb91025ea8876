#include <sda/sketch.hpp>

#include <algorithm>
#include <iterator>
#include <type_traits>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/SVD>

namespace sda {

namespace {

void check_probability_vector(const std::vector<double>& p, const char* what) {
  if (p.empty()) throw ContractViolation(std::string(what) + ": empty support");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ContractViolation(std::string(what) + ": probabilities must be finite and >= 0");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ContractViolation(std::string(what) + ": probabilities sum to " +
                            std::to_string(sum) + ", not 1");
  }
}

std::vector<double> weights_of(const SamplerSpec& spec) {
  if (const auto* c = std::get_if<CoordinateSpec>(&spec.kind)) return c->probabilities;
  if (const auto* b = std::get_if<BlockSpec>(&spec.kind)) return b->probabilities;
  return {};
}

SketchMatrix draw(const SamplerSpec& spec, std::mt19937_64& engine,
                  std::discrete_distribution<std::size_t>& choice, std::vector<Index>& scratch) {
  const Index m = spec.m;
  return std::visit(
      [&](const auto& kind) -> SketchMatrix {
        using K = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<K, CoordinateSpec>) {
          return SketchMatrix::selection(m, {static_cast<Index>(choice(engine))});
        } else if constexpr (std::is_same_v<K, BlockSpec>) {
          return SketchMatrix::selection(m, kind.subsets[choice(engine)]);
        } else if constexpr (std::is_same_v<K, UniformBlockSpec>) {
          if (static_cast<Index>(scratch.size()) != m) {
            scratch.resize(static_cast<std::size_t>(m));
            std::iota(scratch.begin(), scratch.end(), Index{0});
          }
          std::vector<Index> picked;
          picked.reserve(static_cast<std::size_t>(kind.tau));
          std::sample(scratch.begin(), scratch.end(), std::back_inserter(picked), kind.tau,
                      engine);
          return SketchMatrix::selection(m, std::move(picked));
        } else if constexpr (std::is_same_v<K, CountSketchSpec>) {
          std::uniform_int_distribution<Index> pick(0, 2 * m - 1);
          std::vector<Index> cols(static_cast<std::size_t>(kind.q));
          std::vector<double> signs(cols.size());
          for (std::size_t j = 0; j < cols.size(); ++j) {
            const Index k = pick(engine);
            cols[j] = k % m;
            signs[j] = k < m ? 1.0 : -1.0;
          }
          return SketchMatrix::selection(m, std::move(cols), std::move(signs));
        } else if constexpr (std::is_same_v<K, CountMinSpec>) {
          std::uniform_int_distribution<Index> pick(0, m - 1);
          std::vector<Index> cols(static_cast<std::size_t>(kind.q));
          for (auto& c : cols) c = pick(engine);
          return SketchMatrix::selection(m, std::move(cols));
        } else {
          std::normal_distribution<double> normal(0.0, 1.0);
          Matrix S(m, kind.q);
          for (Index j = 0; j < S.cols(); ++j) {
            for (Index i = 0; i < m; ++i) S(i, j) = normal(engine);
          }
          return SketchMatrix::dense(std::move(S));
        }
      },
      spec.kind);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

SketchMatrix SketchMatrix::selection(Index m, std::vector<Index> columns,
                                     std::vector<double> signs) {
  if (m < 1) throw ContractViolation("sketch: m must be positive");
  if (columns.empty()) throw ContractViolation("sketch: q must be at least 1");
  for (Index c : columns) {
    if (c < 0 || c >= m) throw ContractViolation("sketch: column index out of range");
  }
  if (signs.empty()) signs.assign(columns.size(), 1.0);
  if (signs.size() != columns.size()) throw ContractViolation("sketch: sign count mismatch");
  SketchMatrix s;
  s.rows_ = m;
  s.columns_ = std::move(columns);
  s.signs_ = std::move(signs);
  return s;
}

SketchMatrix SketchMatrix::dense(Matrix S) {
  if (S.rows() < 1 || S.cols() < 1) throw ContractViolation("sketch: empty matrix");
  SketchMatrix s;
  s.rows_ = S.rows();
  s.dense_ = std::move(S);
  return s;
}

Index SketchMatrix::cols() const {
  return is_selection() ? static_cast<Index>(columns_.size()) : dense_.cols();
}

Matrix SketchMatrix::to_dense() const {
  if (!is_selection()) return dense_;
  Matrix S = Matrix::Zero(rows_, cols());
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    S(columns_[j], static_cast<Index>(j)) = signs_[j];
  }
  return S;
}

Matrix SketchMatrix::transpose_times(const Matrix& M) const {
  if (M.rows() != rows_) throw ContractViolation("sketch: S^T M dimension mismatch");
  if (!is_selection()) return dense_.transpose() * M;
  Matrix out(cols(), M.cols());
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    out.row(static_cast<Index>(j)) = signs_[j] * M.row(columns_[j]);
  }
  return out;
}

Vector SketchMatrix::transpose_times(const Vector& v) const {
  if (v.size() != rows_) throw ContractViolation("sketch: S^T v dimension mismatch");
  if (!is_selection()) return dense_.transpose() * v;
  Vector out(cols());
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    out(static_cast<Index>(j)) = signs_[j] * v(columns_[j]);
  }
  return out;
}

Vector SketchMatrix::times(const Vector& lambda) const {
  if (lambda.size() != cols()) throw ContractViolation("sketch: S lambda dimension mismatch");
  if (!is_selection()) return dense_ * lambda;
  Vector out = Vector::Zero(rows_);
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    out(columns_[j]) += signs_[j] * lambda(static_cast<Index>(j));
  }
  return out;
}

Matrix SketchMatrix::right_times(const Matrix& M) const {
  if (M.cols() != rows_) throw ContractViolation("sketch: M S dimension mismatch");
  if (!is_selection()) return M * dense_;
  Matrix out(M.rows(), cols());
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    out.col(static_cast<Index>(j)) = signs_[j] * M.col(columns_[j]);
  }
  return out;
}

Matrix SketchMatrix::sandwich(const Matrix& G) const {
  if (G.rows() != rows_ || G.cols() != rows_) {
    throw ContractViolation("sketch: S^T G S dimension mismatch");
  }
  if (!is_selection()) return dense_.transpose() * G * dense_;
  const Index q = cols();
  Matrix out(q, q);
  for (Index a = 0; a < q; ++a) {
    for (Index b = 0; b < q; ++b) {
      out(a, b) = signs_[a] * signs_[b] * G(columns_[a], columns_[b]);
    }
  }
  return out;
}

DiscreteDistribution::DiscreteDistribution(std::vector<SketchMatrix> sketches,
                                           std::vector<double> probabilities)
    : sketches_(std::move(sketches)), probabilities_(std::move(probabilities)) {
  if (sketches_.empty()) throw ContractViolation("distribution: empty support");
  if (sketches_.size() != probabilities_.size()) {
    throw ContractViolation("distribution: support and probability sizes differ");
  }
  check_probability_vector(probabilities_, "distribution");
  for (double p : probabilities_) {
    if (!(p > 0.0)) throw ContractViolation("distribution: probabilities must be positive");
  }
  const Index m = sketches_.front().rows();
  for (const auto& S : sketches_) {
    if (S.rows() != m) throw ContractViolation("distribution: sketches differ in row count");
  }
}

SamplerSpec SamplerSpec::coordinate_uniform(Index m) {
  if (m < 1) throw ContractViolation("coordinate sampler: m must be positive");
  return {m, CoordinateSpec{std::vector<double>(static_cast<std::size_t>(m),
                                                1.0 / static_cast<double>(m))}};
}

SamplerSpec SamplerSpec::coordinate_row_norm(const Matrix& A) {
  const Vector norms = A.rowwise().squaredNorm();
  for (Index i = 0; i < norms.size(); ++i) {
    if (norms(i) == 0.0) throw ContractViolation("zero row: row-norm probabilities undefined");
  }
  const double total = norms.sum();
  std::vector<double> p(static_cast<std::size_t>(norms.size()));
  for (Index i = 0; i < norms.size(); ++i) p[static_cast<std::size_t>(i)] = norms(i) / total;
  return {A.rows(), CoordinateSpec{std::move(p)}};
}

void SamplerSpec::validate() const {
  if (m < 1) throw ContractViolation("sampler: m must be positive");
  std::visit(
      [&](const auto& kind) {
        using K = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<K, CoordinateSpec>) {
          if (static_cast<Index>(kind.probabilities.size()) != m) {
            throw ContractViolation("coordinate sampler: need one probability per row");
          }
          check_probability_vector(kind.probabilities, "coordinate sampler");
        } else if constexpr (std::is_same_v<K, BlockSpec>) {
          if (kind.subsets.size() != kind.probabilities.size()) {
            throw ContractViolation("block sampler: subset and probability counts differ");
          }
          check_probability_vector(kind.probabilities, "block sampler");
          std::vector<bool> covered(static_cast<std::size_t>(m), false);
          for (std::size_t j = 0; j < kind.subsets.size(); ++j) {
            if (kind.subsets[j].empty()) throw ContractViolation("block sampler: empty subset");
            for (Index i : kind.subsets[j]) {
              if (i < 0 || i >= m) throw ContractViolation("block sampler: index out of range");
              if (kind.probabilities[j] > 0.0) covered[static_cast<std::size_t>(i)] = true;
            }
          }
          if (std::find(covered.begin(), covered.end(), false) != covered.end()) {
            throw ContractViolation("block sampler: subset family is not proper");
          }
        } else if constexpr (std::is_same_v<K, UniformBlockSpec>) {
          if (kind.tau < 1 || kind.tau > m) {
            throw ContractViolation("block sampler: tau must lie in [1, m]");
          }
        } else {
          if (kind.q < 1) throw ContractViolation("sampler: q must be at least 1");
        }
      },
      kind);
}

bool SamplerSpec::has_finite_support() const {
  return std::holds_alternative<CoordinateSpec>(kind) || std::holds_alternative<BlockSpec>(kind);
}

DiscreteDistribution to_discrete(const SamplerSpec& spec) {
  spec.validate();
  std::vector<SketchMatrix> support;
  std::vector<double> probs;
  if (const auto* c = std::get_if<CoordinateSpec>(&spec.kind)) {
    for (std::size_t i = 0; i < c->probabilities.size(); ++i) {
      if (c->probabilities[i] > 0.0) {
        support.push_back(SketchMatrix::selection(spec.m, {static_cast<Index>(i)}));
        probs.push_back(c->probabilities[i]);
      }
    }
  } else if (const auto* b = std::get_if<BlockSpec>(&spec.kind)) {
    for (std::size_t j = 0; j < b->subsets.size(); ++j) {
      if (b->probabilities[j] > 0.0) {
        support.push_back(SketchMatrix::selection(spec.m, b->subsets[j]));
        probs.push_back(b->probabilities[j]);
      }
    }
  } else {
    throw ContractViolation("analysis unavailable for this sampler");
  }
  return DiscreteDistribution(std::move(support), std::move(probs));
}

Sampler::Sampler(SamplerSpec spec, std::uint64_t seed, std::uint64_t stream)
    : spec_(std::move(spec)), rng_(seed, stream) {
  spec_.validate();
  const auto w = weights_of(spec_);
  if (!w.empty()) choice_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
}

SketchMatrix Sampler::next() { return draw(spec_, rng_.engine(), choice_, scratch_); }

SketchMatrix sample(const SamplerSpec& spec, RngStream& rng) {
  spec.validate();
  const auto w = weights_of(spec);
  std::discrete_distribution<std::size_t> choice;
  if (!w.empty()) choice = std::discrete_distribution<std::size_t>(w.begin(), w.end());
  std::vector<Index> scratch;
  return draw(spec, rng.engine(), choice, scratch);
}

Matrix sketched_gram_pinv(const SketchMatrix& S, const ProjectionProblem& problem) {
  if (S.rows() != problem.rows()) throw ContractViolation("sketch rows do not match A");
  const Matrix KS = S.right_times(problem.whitened_at());
  Eigen::BDCSVD<Matrix> svd(KS, Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  Vector inv = Vector::Zero(sv.size());
  if (sv.size() > 0 && sv(0) > 0.0) {
    const double tau = rank_threshold(KS.rows(), KS.cols(), sv(0));
    for (Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > tau) inv(i) = 1.0 / (sv(i) * sv(i));
    }
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixV().transpose();
}

void add_H_term(Matrix& H, const SketchMatrix& S, double p, const ProjectionProblem& problem) {
  const Matrix inner = sketched_gram_pinv(S, problem);
  if (S.is_selection()) {
    const auto& cols = S.columns();
    const auto& sg = S.signs();
    for (std::size_t a = 0; a < cols.size(); ++a) {
      for (std::size_t b = 0; b < cols.size(); ++b) {
        H(cols[a], cols[b]) +=
            p * sg[a] * sg[b] * inner(static_cast<Index>(a), static_cast<Index>(b));
      }
    }
  } else {
    const Matrix D = S.to_dense();
    H.noalias() += p * D * inner * D.transpose();
  }
}

Matrix compute_H(const DiscreteDistribution& dist, const ProjectionProblem& problem) {
  if (dist.rows() != problem.rows()) throw ContractViolation("compute_H: sketch rows != m");
  Matrix H = Matrix::Zero(problem.rows(), problem.rows());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    add_H_term(H, dist.sketches()[i], dist.probabilities()[i], problem);
  }
  return H;
}

NonsingularityVerdict is_H_nonsingular(const DiscreteDistribution& dist,
                                       const ProjectionProblem& problem) {
  const Index m = problem.rows();
  if (dist.rows() != m) throw ContractViolation("is_H_nonsingular: sketch rows != m");
  // Range(S_i S_i^T A) = S_i Range(S_i^T A); an orthonormal basis of each block's range
  // spans the same space as the concatenation.
  std::vector<Matrix> blocks;
  Index total = 0;
  for (const auto& S : dist.sketches()) {
    const Matrix StA = S.transpose_times(problem.A());
    Eigen::BDCSVD<Matrix> svd(StA, Eigen::ComputeThinU);
    const Vector& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) continue;
    const double tau = rank_threshold(StA.rows(), StA.cols(), sv(0));
    const Index r = (sv.array() > tau).count();
    if (r == 0) continue;
    blocks.push_back(S.to_dense() * svd.matrixU().leftCols(r));
    total += r;
  }
  NonsingularityVerdict verdict;
  if (total == 0) return verdict;
  Matrix K(m, total);
  Index offset = 0;
  for (const auto& blk : blocks) {
    K.middleCols(offset, blk.cols()) = blk;
    offset += blk.cols();
  }
  verdict.rank = numerical_rank(K);
  verdict.nonsingular = verdict.rank == m;
  return verdict;
}

}  // namespace sda
