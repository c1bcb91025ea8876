#pragma once

#include <sda/gossip.hpp>
#include <sda/solver.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sda::bench {

enum class Method {
  kaczmarz,
  coordinate_ascent,
  block,
  count_sketch,
  count_min,
  gaussian,
  gossip_model1,
  gossip_model2,
};

enum class ProbabilityRule { uniform, row_norm };

Method parse_method(const std::string& name);
std::string method_name(Method m);
ProbabilityRule parse_rule(const std::string& name);

struct BenchConfig {
  // Matrix source: a Matrix Market file, or the rank-deficient generator.
  std::optional<std::string> matrix_path;
  Index n = 300;
  Index rank = 300;
  // Gossip methods: edge-list file, or a random connected graph on n nodes.
  std::optional<std::string> graph_path;
  std::optional<Vector> node_values;
  // Overrides of the defaults c = 0, B = I (non-gossip methods).
  std::optional<Vector> c;
  std::optional<Matrix> B;
  // External right-hand side; checked for consistency. Default b = A x_true.
  std::optional<Vector> rhs;

  Method method = Method::kaczmarz;
  Index sketch_size = 1;  // tau for block, q for count-sketch / count-min / gaussian
  std::optional<ProbabilityRule> rule;  // default row-norm (uniform for gossip)

  int trials = 10;
  long iterations = 100000;
  long record_every = 100;
  long gap_every = 1000;
  double tol = 1e-6;  // per-trial stop once rel_error <= tol; 0 disables
  std::uint64_t seed = 0;
  std::string output;  // empty: no files written

  void validate() const;
};

/// Sum of the top r singular triplets of an n x n matrix with i.i.d. U(0,1) entries.
Matrix generate_rank_deficient(Index n, Index r, std::uint64_t seed);

/// x_true used to synthesize b = A x_true (standard normal entries).
Vector synthetic_solution(Index n, std::uint64_t seed);

struct BenchInstance {
  ProjectionProblem problem;
  SamplerSpec spec;
  Vector x_true;
  ReferenceSolution reference;
  Index rank_A = 0;
  std::optional<double> rho;          // finite-support samplers only
  std::optional<double> lower_bound;  // 1 - E[rank(S^T A)] / rank(A)
  std::optional<bool> h_nonsingular;
};

/// b = A x_true for a random x_true (consistent by construction), x0 = c.
BenchInstance make_instance(const BenchConfig& config);

struct BenchRow {
  int trial = 0;
  long k = 0;
  double rel_error = 0.0;
  double residual = 0.0;
  double dual_value = 0.0;
  std::optional<double> gap;
};

struct TrialResult {
  int trial = 0;
  std::vector<BenchRow> rows;
  long iterations = 0;  // steps taken
  std::optional<long> iterations_to_tol;
};

/// Trial seed = base seed XOR trial index.
TrialResult run_trial(const BenchInstance& instance, const BenchConfig& config, int trial);

/// OpenMP over trials; identical output to run_trials_serial.
std::vector<TrialResult> run_trials(const BenchInstance& instance, const BenchConfig& config);
std::vector<TrialResult> run_trials_serial(const BenchInstance& instance,
                                           const BenchConfig& config);

struct SummaryRow {
  long k = 0;
  int active_trials = 0;
  double mean = 0.0;
  double median = 0.0;
  double p05 = 0.0;
  double p95 = 0.0;
  std::optional<double> rho_pow_k;
  std::optional<double> lower_bound_pow_k;
};

/// Statistics of rel_error over the trials still running at each recorded k
/// (k a multiple of record_every).
std::vector<SummaryRow> summarize(const std::vector<TrialResult>& trials,
                                  const BenchInstance& instance, const BenchConfig& config);

void write_csv(std::ostream& out, const std::vector<TrialResult>& trials);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& summary);
/// "<stem>_summary.csv" next to the per-trial CSV.
std::string summary_path(const std::string& output);

struct BenchResult {
  BenchInstance instance;
  std::vector<TrialResult> trials;
  std::vector<SummaryRow> summary;
};

/// Builds the instance, runs all trials and writes output (+ summary) when set.
BenchResult run_benchmark(const BenchConfig& config);

/// Linear-interpolation percentile (q in [0, 1]) of an unsorted sample.
double percentile(std::vector<double> values, double q);

}  // namespace sda::bench
