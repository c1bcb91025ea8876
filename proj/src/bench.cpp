#include <sda/bench.hpp>

#include <sda/parallel.hpp>
#include <sda/rates.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <random>

#include <sda/io.hpp>

namespace sda::bench {

namespace {

bool is_gossip(Method m) { return m == Method::gossip_model1 || m == Method::gossip_model2; }

Vector uniform_vector(Index n, std::uint64_t seed, std::uint64_t stream) {
  RngStream rng(seed, stream);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = u(rng.engine());
  return v;
}

Vector normal_vector(Index n, std::uint64_t seed, std::uint64_t stream) {
  RngStream rng(seed, stream);
  std::normal_distribution<double> z(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = z(rng.engine());
  return v;
}

SamplerSpec sampler_for(const BenchConfig& config, const Matrix& A) {
  const Index m = A.rows();
  switch (config.method) {
    case Method::kaczmarz:
    case Method::coordinate_ascent:
      return config.rule.value_or(ProbabilityRule::row_norm) == ProbabilityRule::row_norm
                 ? SamplerSpec::coordinate_row_norm(A)
                 : SamplerSpec::coordinate_uniform(m);
    case Method::block:
      return {m, UniformBlockSpec{config.sketch_size}};
    case Method::count_sketch:
      return {m, CountSketchSpec{config.sketch_size}};
    case Method::count_min:
      return {m, CountMinSpec{config.sketch_size}};
    case Method::gaussian:
      return {m, GaussianSpec{config.sketch_size}};
    default:
      throw ContractViolation("sampler_for: gossip methods use gossip_sampler");
  }
}

}  // namespace

Method parse_method(const std::string& name) {
  static const std::map<std::string, Method> names = {
      {"kaczmarz", Method::kaczmarz},         {"coordinate-ascent", Method::coordinate_ascent},
      {"block", Method::block},               {"count-sketch", Method::count_sketch},
      {"count-min", Method::count_min},       {"gaussian", Method::gaussian},
      {"gossip-model1", Method::gossip_model1}, {"gossip-model2", Method::gossip_model2},
  };
  const auto it = names.find(name);
  if (it == names.end()) throw ContractViolation("unknown method '" + name + "'");
  return it->second;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::kaczmarz: return "kaczmarz";
    case Method::coordinate_ascent: return "coordinate-ascent";
    case Method::block: return "block";
    case Method::count_sketch: return "count-sketch";
    case Method::count_min: return "count-min";
    case Method::gaussian: return "gaussian";
    case Method::gossip_model1: return "gossip-model1";
    case Method::gossip_model2: return "gossip-model2";
  }
  return "?";
}

ProbabilityRule parse_rule(const std::string& name) {
  if (name == "uniform") return ProbabilityRule::uniform;
  if (name == "row-norm") return ProbabilityRule::row_norm;
  throw ContractViolation("unknown probability rule '" + name + "'");
}

void BenchConfig::validate() const {
  if (trials < 1) throw ContractViolation("bench: trials must be >= 1");
  if (iterations < 0) throw ContractViolation("bench: iterations must be >= 0");
  if (record_every < 1 || gap_every < 1) {
    throw ContractViolation("bench: record/gap intervals must be >= 1");
  }
  if (!(tol >= 0.0)) throw ContractViolation("bench: tol must be >= 0");
  if (!matrix_path && !graph_path) {
    if (is_gossip(method)) {
      if (n < 2) throw ContractViolation("bench: gossip needs n >= 2");
    } else if (n < 1 || rank < 1 || rank > n) {
      throw ContractViolation("bench: need 1 <= rank <= n");
    }
  }
  if (sketch_size < 1) throw ContractViolation("bench: sketch size must be >= 1");
}

Matrix generate_rank_deficient(Index n, Index r, std::uint64_t seed) {
  if (n < 1 || r < 1 || r > n) throw ContractViolation("generate: need 1 <= r <= n");
  RngStream rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix M(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) M(i, j) = u(rng.engine());
  }
  Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU().leftCols(r) * svd.singularValues().head(r).asDiagonal() *
         svd.matrixV().leftCols(r).transpose();
}

Vector synthetic_solution(Index n, std::uint64_t seed) { return normal_vector(n, seed, 1); }

BenchInstance make_instance(const BenchConfig& config) {
  config.validate();
  std::optional<ProjectionProblem> problem;
  std::optional<SamplerSpec> spec;
  Vector x_true;

  if (is_gossip(config.method)) {
    const GossipModel model =
        config.method == Method::gossip_model1 ? GossipModel::pairwise : GossipModel::neighbourhood;
    const Index n = config.graph_path ? io::edge_list_node_count(*config.graph_path) : config.n;
    Vector values = config.node_values ? *config.node_values : uniform_vector(n, config.seed, 2);
    const GossipNetwork g = config.graph_path
                                ? io::read_edge_list(*config.graph_path, std::move(values))
                                : GossipNetwork::random_connected(n, 0.3, config.seed, std::move(values));
    problem.emplace(gossip_problem(g, model));
    const Activation act = config.rule.value_or(ProbabilityRule::uniform) == ProbabilityRule::uniform
                               ? Activation::uniform
                               : Activation::row_norm;
    spec = gossip_sampler(g, model, act);
    x_true = Vector::Constant(n, g.values().mean());
  } else {
    Matrix A = config.matrix_path ? io::read_matrix_market(*config.matrix_path)
                                  : generate_rank_deficient(config.n, config.rank, config.seed);
    const Index n = A.cols();
    x_true = synthetic_solution(n, config.seed);
    Vector b = config.rhs ? *config.rhs : Vector(A * x_true);
    SpdMatrix B = config.B ? SpdMatrix(*config.B) : SpdMatrix::identity(n);
    Vector c = config.c ? *config.c : Vector::Zero(n);
    spec = sampler_for(config, A);
    problem.emplace(std::move(A), std::move(b), std::move(B), std::move(c));
    if (config.rhs) {
      problem->check_consistent();
      x_true = pseudo_inverse(problem->A()) * problem->b();
    }
  }

  BenchInstance inst{std::move(*problem), std::move(*spec), std::move(x_true), {}, 0, {}, {}, {}};
  inst.reference = reference_solution(inst.problem, inst.problem.c());
  inst.rank_A = numerical_rank(inst.problem.A());
  if (inst.spec.has_finite_support()) {
    const DiscreteDistribution dist = to_discrete(inst.spec);
    inst.h_nonsingular = is_H_nonsingular(dist, inst.problem).nonsingular;
    inst.lower_bound = rate_lower_bound(dist, inst.problem.A());
    try {
      inst.rho = rate_rho(inst.problem, parallel::compute_H(dist, inst.problem));
    } catch (const NumericalError&) {
      inst.rho.reset();
    }
  }
  return inst;
}

TrialResult run_trial(const BenchInstance& instance, const BenchConfig& config, int trial) {
  const ProjectionProblem& problem = instance.problem;
  const IterationKernel kernel(problem);
  Sampler sampler(instance.spec, config.seed ^ static_cast<std::uint64_t>(trial));

  SolverState state = SolverState::from_dual(Vector::Zero(problem.rows()), problem);
  Vector r = kernel.residual(state.x);
  const Vector& x_star = instance.reference.x_star;
  const double e0 = (state.x - x_star).squaredNorm();
  const double denom = e0 > 0.0 ? e0 : 1.0;

  TrialResult result;
  result.trial = trial;
  auto push = [&](long k, double rel) {
    r = kernel.residual(state.x);
    BenchRow row;
    row.trial = trial;
    row.k = k;
    row.rel_error = rel;
    row.residual = r.norm();
    row.dual_value = dual_value(state.y, problem);
    if (k % config.gap_every == 0) row.gap = duality_gap(state.y, problem);
    result.rows.push_back(row);
  };

  push(0, e0 / denom);
  if (config.tol > 0.0 && e0 / denom <= config.tol) result.iterations_to_tol = 0;
  for (long k = 1; k <= config.iterations && !result.iterations_to_tol; ++k) {
    kernel.dual_step(state, r, sampler.next());
    const double rel = (state.x - x_star).squaredNorm() / denom;
    const bool reached = config.tol > 0.0 && rel <= config.tol;
    if (reached) result.iterations_to_tol = k;
    result.iterations = k;
    if (k % config.record_every == 0 || reached || k == config.iterations) push(k, rel);
  }
  return result;
}

std::vector<TrialResult> run_trials(const BenchInstance& instance, const BenchConfig& config) {
  std::vector<TrialResult> out(static_cast<std::size_t>(config.trials));
  parallel::for_each_index(out.size(), [&](std::size_t i) {
    out[i] = run_trial(instance, config, static_cast<int>(i));
  });
  return out;
}

std::vector<TrialResult> run_trials_serial(const BenchInstance& instance,
                                           const BenchConfig& config) {
  std::vector<TrialResult> out;
  out.reserve(static_cast<std::size_t>(config.trials));
  for (int i = 0; i < config.trials; ++i) out.push_back(run_trial(instance, config, i));
  return out;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw ContractViolation("percentile: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<SummaryRow> summarize(const std::vector<TrialResult>& trials,
                                  const BenchInstance& instance, const BenchConfig& config) {
  std::map<long, std::vector<double>> by_k;
  for (const auto& t : trials) {
    for (const auto& row : t.rows) {
      if (row.k % config.record_every == 0) by_k[row.k].push_back(row.rel_error);
    }
  }
  const bool kaczmarz_like = instance.lower_bound.has_value();
  std::vector<SummaryRow> out;
  out.reserve(by_k.size());
  for (const auto& [k, values] : by_k) {
    SummaryRow s;
    s.k = k;
    s.active_trials = static_cast<int>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    s.median = percentile(values, 0.5);
    s.p05 = percentile(values, 0.05);
    s.p95 = percentile(values, 0.95);
    const double kk = static_cast<double>(k);
    if (instance.rho) s.rho_pow_k = std::pow(std::max(0.0, *instance.rho), kk);
    if (kaczmarz_like) s.lower_bound_pow_k = std::pow(std::max(0.0, *instance.lower_bound), kk);
    out.push_back(s);
  }
  return out;
}

void write_csv(std::ostream& out, const std::vector<TrialResult>& trials) {
  out << "trial,k,rel_error,residual,dual_value,gap\n";
  for (const auto& t : trials) {
    for (const auto& row : t.rows) {
      out << row.trial << ',' << row.k << ',' << io::format_double(row.rel_error) << ','
          << io::format_double(row.residual) << ',' << io::format_double(row.dual_value) << ',';
      if (row.gap) out << io::format_double(*row.gap);
      out << '\n';
    }
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& summary) {
  out << "k,active_trials,mean,median,p05,p95,rho_pow_k,lower_bound_pow_k\n";
  for (const auto& s : summary) {
    out << s.k << ',' << s.active_trials << ',' << io::format_double(s.mean) << ','
        << io::format_double(s.median) << ',' << io::format_double(s.p05) << ','
        << io::format_double(s.p95) << ',';
    if (s.rho_pow_k) out << io::format_double(*s.rho_pow_k);
    out << ',';
    if (s.lower_bound_pow_k) out << io::format_double(*s.lower_bound_pow_k);
    out << '\n';
  }
}

std::string summary_path(const std::string& output) {
  const std::string ext = ".csv";
  if (output.size() > ext.size() && output.compare(output.size() - ext.size(), ext.size(), ext) == 0) {
    return output.substr(0, output.size() - ext.size()) + "_summary.csv";
  }
  return output + "_summary.csv";
}

BenchResult run_benchmark(const BenchConfig& config) {
  BenchResult result{make_instance(config), {}, {}};
  result.trials = run_trials(result.instance, config);
  result.summary = summarize(result.trials, result.instance, config);
  if (!config.output.empty()) {
    std::ofstream csv(config.output);
    if (!csv) throw io::IoError("cannot open " + config.output + " for writing");
    write_csv(csv, result.trials);
    const std::string spath = summary_path(config.output);
    std::ofstream sum(spath);
    if (!sum) throw io::IoError("cannot open " + spath + " for writing");
    write_summary_csv(sum, result.summary);
    if (!csv || !sum) throw io::IoError("write failed for " + config.output);
  }
  return result;
}

}  // namespace sda::bench
