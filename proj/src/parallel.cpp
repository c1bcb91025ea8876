#include <sda/parallel.hpp>

#include <omp.h>

#include <algorithm>
#include <exception>
#include <mutex>
#include <vector>

namespace sda::parallel {

namespace {
// Chunking depends only on the support size, so H is bitwise independent of the
// thread count. Each chunk owns an m x m accumulator, hence the minimum chunk size.
constexpr std::size_t kMaxChunks = 64;
constexpr std::size_t kMinPerChunk = 32;
}

Matrix compute_H(const DiscreteDistribution& dist, const ProjectionProblem& problem) {
  if (dist.rows() != problem.rows()) throw ContractViolation("compute_H: sketch rows != m");
  const Index m = problem.rows();
  const std::size_t chunks =
      std::clamp<std::size_t>(dist.size() / kMinPerChunk, 1, kMaxChunks);
  const std::size_t per = (dist.size() + chunks - 1) / chunks;
  std::vector<Matrix> partial(chunks, Matrix::Zero(m, m));

  for_each_index(chunks, [&](std::size_t c) {
    const std::size_t begin = c * per;
    const std::size_t end = std::min(dist.size(), begin + per);
    for (std::size_t i = begin; i < end; ++i) {
      add_H_term(partial[c], dist.sketches()[i], dist.probabilities()[i], problem);
    }
  });

  Matrix H = Matrix::Zero(m, m);
  for (const auto& p : partial) H += p;
  return H;
}

void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body) {
  std::exception_ptr failure;
  std::mutex guard;
  const auto n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

int max_threads() { return omp_get_max_threads(); }

void set_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

}  // namespace sda::parallel
