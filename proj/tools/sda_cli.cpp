// sda: command-line front end for the stochastic dual ascent solvers.
//
//   sda gen      --n 300 --rank 40 --seed 7 --output A.mtx
//   sda solve    --matrix A.mtx --method kaczmarz --trace trace.csv
//   sda bench    --n 300 --rank 40 --trials 10 --output fig1_r40.csv
//   sda analyze  --matrix A.mtx --method kaczmarz --json
//   sda gossip   --graph g.txt --model 1 --rounds 1000 --output gossip.csv
//
// Exit codes: 0 success, 1 usage error, 2 numerical or consistency failure.

#include <sda/analyze.hpp>
#include <sda/bench.hpp>
#include <sda/gossip.hpp>
#include <sda/io.hpp>
#include <sda/parallel.hpp>
#include <sda/solver.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using sda::bench::BenchConfig;

struct ProblemArgs {
  std::string matrix;
  std::string rhs;
  std::string c_file;
  std::string b_matrix_file;
  std::string graph;
  std::string values;
  long n = 300;
  long rank = 300;
  std::string method = "kaczmarz";
  std::string prob;
  long sketch_size = 1;
  std::uint64_t seed = 0;
};

void add_problem_options(CLI::App* cmd, ProblemArgs& a) {
  cmd->add_option("--matrix", a.matrix, "System matrix A (Matrix Market)");
  cmd->add_option("--rhs", a.rhs, "Right-hand side b (one value per line); default b = A x_true");
  cmd->add_option("--c-file", a.c_file, "Vector c (default 0)");
  cmd->add_option("--b-matrix-file", a.b_matrix_file, "SPD matrix B (Matrix Market, default I)");
  cmd->add_option("--graph", a.graph, "Edge list for gossip methods");
  cmd->add_option("--values", a.values, "Node values for gossip methods");
  cmd->add_option("--n", a.n, "Generator size (or node count for a random gossip graph)");
  cmd->add_option("--rank", a.rank, "Generator rank");
  cmd->add_option("--method", a.method,
                  "kaczmarz | coordinate-ascent | block | count-sketch | count-min | gaussian | "
                  "gossip-model1 | gossip-model2");
  cmd->add_option("--prob", a.prob, "Probability rule: uniform | row-norm");
  cmd->add_option("--tau,--q,--sketch-size", a.sketch_size, "Block size / sketch columns");
  cmd->add_option("--seed", a.seed, "Base seed");
}

BenchConfig config_from(const ProblemArgs& a) {
  BenchConfig cfg;
  if (!a.matrix.empty()) cfg.matrix_path = a.matrix;
  if (!a.graph.empty()) cfg.graph_path = a.graph;
  if (!a.values.empty()) cfg.node_values = sda::io::read_vector(a.values);
  if (!a.rhs.empty()) cfg.rhs = sda::io::read_vector(a.rhs);
  if (!a.c_file.empty()) cfg.c = sda::io::read_vector(a.c_file);
  if (!a.b_matrix_file.empty()) cfg.B = sda::io::read_matrix_market(a.b_matrix_file);
  cfg.n = a.n;
  cfg.rank = a.rank;
  cfg.method = sda::bench::parse_method(a.method);
  if (!a.prob.empty()) cfg.rule = sda::bench::parse_rule(a.prob);
  cfg.sketch_size = a.sketch_size;
  cfg.seed = a.seed;
  return cfg;
}

std::string opt_str(const std::optional<double>& v) {
  return v ? sda::io::format_double(*v) : std::string();
}

int run_gen(long n, long rank, std::uint64_t seed, const std::string& output,
            const std::string& rhs_out, const std::string& x_out) {
  const sda::Matrix A = sda::bench::generate_rank_deficient(n, rank, seed);
  sda::io::write_matrix_market(output, A);
  const sda::Vector x_true = sda::bench::synthetic_solution(n, seed);
  if (!rhs_out.empty()) sda::io::write_vector(rhs_out, A * x_true);
  if (!x_out.empty()) sda::io::write_vector(x_out, x_true);
  std::cout << "wrote " << n << "x" << n << " matrix of rank " << sda::numerical_rank(A) << " to "
            << output << '\n';
  return 0;
}

struct SolveArgs {
  long max_iters = 100000;
  double tol_residual = 0.0;
  double tol_gap = 0.0;
  long gap_period = 100;
  long record_every = 1;
  std::string x0_file;
  std::string trace;
  std::string x_out;
};

int run_solve(const ProblemArgs& pa, const SolveArgs& sa) {
  BenchConfig cfg = config_from(pa);
  const sda::bench::BenchInstance inst = sda::bench::make_instance(cfg);

  sda::SolveOptions opts;
  opts.max_iters = sa.max_iters;
  if (sa.tol_residual > 0.0) opts.tol_residual = sa.tol_residual;
  if (sa.tol_gap > 0.0) opts.tol_gap = sa.tol_gap;
  opts.gap_check_period = sa.gap_period;
  opts.record_every = sa.record_every;
  opts.seed = pa.seed;

  sda::StartPoint start = sda::DualStart{sda::Vector::Zero(inst.problem.rows())};
  if (!sa.x0_file.empty()) start = sda::PrimalStart{sda::io::read_vector(sa.x0_file)};

  const sda::SolveReport report = sda::solve(inst.problem, inst.spec, opts, start);

  if (!sa.trace.empty()) {
    std::ofstream out(sa.trace);
    if (!out) throw sda::io::IoError("cannot open " + sa.trace + " for writing");
    out << "k,error_sq,residual,dual_value,gap\n";
    for (const auto& row : report.trace) {
      out << row.k << ',' << sda::io::format_double(row.error_sq) << ','
          << sda::io::format_double(row.residual) << ',' << opt_str(row.dual_value) << ','
          << opt_str(row.gap) << '\n';
    }
  }
  if (!sa.x_out.empty()) sda::io::write_vector(sa.x_out, report.final_state.x);

  const auto& last = report.trace.back();
  std::cout << "method: " << sda::bench::method_name(cfg.method) << '\n'
            << "converged: " << (report.converged ? "yes" : "no") << '\n'
            << "iterations: " << report.iterations << '\n'
            << "residual: " << sda::io::format_double(last.residual) << '\n'
            << "error_sq: " << sda::io::format_double(last.error_sq) << '\n';
  if (last.gap) std::cout << "gap: " << sda::io::format_double(*last.gap) << '\n';
  if (report.h_nonsingular && !*report.h_nonsingular) {
    std::cout << "warning: H is singular; no convergence guarantee\n";
  }
  return 0;
}

struct BenchArgs {
  int trials = 10;
  long iterations = 100000;
  long record_every = 100;
  long gap_every = 1000;
  double tol = 1e-6;
  std::string output;
  int threads = 0;
};

int run_bench(const ProblemArgs& pa, const BenchArgs& ba) {
  BenchConfig cfg = config_from(pa);
  cfg.trials = ba.trials;
  cfg.iterations = ba.iterations;
  cfg.record_every = ba.record_every;
  cfg.gap_every = ba.gap_every;
  cfg.tol = ba.tol;
  cfg.output = ba.output;
  sda::parallel::set_threads(ba.threads);

  const auto result = sda::bench::run_benchmark(cfg);
  const auto& inst = result.instance;
  std::cout << "method: " << sda::bench::method_name(cfg.method) << '\n'
            << "size: " << inst.problem.rows() << "x" << inst.problem.cols()
            << ", rank(A) = " << inst.rank_A << '\n';
  if (inst.rho) std::cout << "rho: " << sda::io::format_double(*inst.rho) << '\n';
  if (inst.lower_bound) {
    std::cout << "lower bound: " << sda::io::format_double(*inst.lower_bound) << '\n';
  }
  for (const auto& t : result.trials) {
    std::cout << "trial " << t.trial << ": ";
    if (t.iterations_to_tol) {
      std::cout << "rel_error <= " << cfg.tol << " after " << *t.iterations_to_tol
                << " iterations\n";
    } else {
      std::cout << "not converged after " << t.iterations << " iterations (rel_error "
                << sda::io::format_double(t.rows.back().rel_error) << ")\n";
    }
  }
  if (!cfg.output.empty()) {
    std::cout << "wrote " << cfg.output << " and " << sda::bench::summary_path(cfg.output)
              << '\n';
  }
  return 0;
}

int run_analyze(const ProblemArgs& pa, bool json) {
  BenchConfig cfg = config_from(pa);
  const auto inst = sda::bench::make_instance(cfg);
  const sda::AnalysisReport report = sda::analyze(inst.problem, inst.spec);
  std::cout << (json ? sda::to_json(report) : sda::to_text(report));
  return 0;
}

struct GossipArgs {
  std::string graph;
  std::string values;
  long n = 10;
  double extra_edges = 0.3;
  int model = 1;
  long rounds = 1000;
  long record_every = 1;
  std::string activation = "uniform";
  std::string output;
  std::uint64_t seed = 0;
};

int run_gossip_cmd(const GossipArgs& ga) {
  if (ga.model != 1 && ga.model != 2) throw sda::ContractViolation("--model must be 1 or 2");
  const sda::Index n = ga.graph.empty() ? ga.n : sda::io::edge_list_node_count(ga.graph);
  sda::Vector values;
  if (!ga.values.empty()) {
    values = sda::io::read_vector(ga.values);
  } else {
    sda::RngStream rng(ga.seed, 2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    values.resize(n);
    for (sda::Index i = 0; i < n; ++i) values(i) = u(rng.engine());
  }
  const sda::GossipNetwork g =
      ga.graph.empty() ? sda::GossipNetwork::random_connected(n, ga.extra_edges, ga.seed, values)
                       : sda::io::read_edge_list(ga.graph, values);
  const auto model = ga.model == 1 ? sda::GossipModel::pairwise : sda::GossipModel::neighbourhood;
  sda::Activation act;
  if (ga.activation == "uniform") {
    act = sda::Activation::uniform;
  } else if (ga.activation == "row-norm") {
    act = sda::Activation::row_norm;
  } else {
    throw sda::ContractViolation("--activation must be uniform or row-norm");
  }

  const auto report = sda::run_gossip(g, model, ga.rounds, ga.seed, ga.record_every, act);
  if (!ga.output.empty()) {
    std::ofstream out(ga.output);
    if (!out) throw sda::io::IoError("cannot open " + ga.output + " for writing");
    out << "round,max_abs_error,sum\n";
    for (const auto& rec : report.trace) {
      out << rec.round << ',' << sda::io::format_double(rec.max_abs_error) << ','
          << sda::io::format_double(rec.sum) << '\n';
    }
  }
  std::cout << "nodes: " << g.nodes() << ", edges: " << g.edge_count() << '\n'
            << "rate: " << sda::io::format_double(sda::gossip_rate(g, model, act)) << '\n'
            << "mean: " << sda::io::format_double(g.values().mean()) << '\n'
            << "rounds: " << report.rounds << '\n'
            << "max_abs_error: " << sda::io::format_double(report.trace.back().max_abs_error)
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic dual ascent / sketch-and-project solvers"};
  app.require_subcommand(1);

  long gen_n = 300, gen_rank = 300;
  std::uint64_t gen_seed = 0;
  std::string gen_out, gen_rhs, gen_x;
  auto* gen = app.add_subcommand("gen", "Generate a rank-deficient test matrix");
  gen->add_option("--n", gen_n, "Matrix size")->required();
  gen->add_option("--rank", gen_rank, "Target rank")->required();
  gen->add_option("--seed", gen_seed, "Seed");
  gen->add_option("--output", gen_out, "Matrix Market output path")->required();
  gen->add_option("--rhs-out", gen_rhs, "Also write b = A x_true");
  gen->add_option("--x-true-out", gen_x, "Also write x_true");

  ProblemArgs solve_pa;
  SolveArgs solve_sa;
  auto* solve = app.add_subcommand("solve", "Run one solve and report convergence");
  add_problem_options(solve, solve_pa);
  solve->add_option("--max-iters", solve_sa.max_iters, "Iteration cap");
  solve->add_option("--tol-residual", solve_sa.tol_residual, "Stop when ||Ax - b|| <= tol");
  solve->add_option("--tol-gap", solve_sa.tol_gap, "Duality gap tolerance (dual start)");
  solve->add_option("--gap-period", solve_sa.gap_period, "Iterations between gap checks");
  solve->add_option("--record-every", solve_sa.record_every, "Trace row interval");
  solve->add_option("--x0-file", solve_sa.x0_file, "Primal start x0 (default: dual start y0 = 0)");
  solve->add_option("--trace", solve_sa.trace, "Trace CSV output");
  solve->add_option("--x-out", solve_sa.x_out, "Final iterate output");

  ProblemArgs bench_pa;
  BenchArgs bench_ba;
  auto* bench = app.add_subcommand("bench", "Multi-trial convergence benchmark (CSV)");
  add_problem_options(bench, bench_pa);
  bench->add_option("--trials", bench_ba.trials, "Independent runs");
  bench->add_option("--iterations", bench_ba.iterations, "Iteration cap per trial");
  bench->add_option("--record-every", bench_ba.record_every, "CSV row interval");
  bench->add_option("--gap-every", bench_ba.gap_every, "Interval for dual value and gap columns");
  bench->add_option("--tol", bench_ba.tol, "Per-trial stop at rel_error <= tol (0 disables)");
  bench->add_option("--output", bench_ba.output, "Per-trial CSV; summary goes to <stem>_summary.csv");
  bench->add_option("--threads", bench_ba.threads, "OpenMP threads (0 = runtime default)");

  ProblemArgs analyze_pa;
  bool analyze_json = false;
  auto* analyze = app.add_subcommand("analyze", "Rate analysis for a finite sketch distribution");
  add_problem_options(analyze, analyze_pa);
  analyze->add_flag("--json", analyze_json, "JSON output");

  GossipArgs gossip_ga;
  auto* gossip = app.add_subcommand("gossip", "Randomized gossip averaging simulation");
  gossip->add_option("--graph", gossip_ga.graph, "Edge list (first line 'n m', then 'i j')");
  gossip->add_option("--values", gossip_ga.values, "Node values, one per line");
  gossip->add_option("--n", gossip_ga.n, "Nodes of a random connected graph (no --graph)");
  gossip->add_option("--extra-edges", gossip_ga.extra_edges, "Extra edge probability");
  gossip->add_option("--model", gossip_ga.model, "1: pairwise averaging, 2: neighbourhood");
  gossip->add_option("--rounds", gossip_ga.rounds, "Number of activations");
  gossip->add_option("--record-every", gossip_ga.record_every, "CSV row interval");
  gossip->add_option("--activation", gossip_ga.activation, "uniform | row-norm");
  gossip->add_option("--output", gossip_ga.output, "CSV output");
  gossip->add_option("--seed", gossip_ga.seed, "Seed for graph, values and activations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*gen) return run_gen(gen_n, gen_rank, gen_seed, gen_out, gen_rhs, gen_x);
    if (*solve) return run_solve(solve_pa, solve_sa);
    if (*bench) return run_bench(bench_pa, bench_ba);
    if (*analyze) return run_analyze(analyze_pa, analyze_json);
    if (*gossip) return run_gossip_cmd(gossip_ga);
  } catch (const sda::NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
