#include <sda/gossip.hpp>

#include <sda/rates.hpp>

#include <algorithm>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <string>

namespace sda {

namespace {

double neighbour_mean(const Vector& x, const std::vector<Index>& nbrs) {
  double s = 0.0;
  for (Index j : nbrs) s += x(j);
  return s / static_cast<double>(nbrs.size());
}

void average_edge(Vector& x, const Edge& e) {
  const double avg = (x(e.i) + x(e.j)) / 2.0;
  x(e.i) = avg;
  x(e.j) = avg;
}

void average_neighbourhood(Vector& x, Index node, const std::vector<Index>& nbrs) {
  const double d = static_cast<double>(nbrs.size());
  double sum = 0.0;
  for (Index j : nbrs) sum += x(j);
  const double shift = (x(node) - sum / d) / (d + 1.0);
  x(node) = (x(node) + sum) / (d + 1.0);
  for (Index j : nbrs) x(j) += shift;
}

}  // namespace

GossipNetwork::GossipNetwork(Index n, const std::vector<std::pair<Index, Index>>& edges,
                             Vector values)
    : n_(n), adjacency_(static_cast<std::size_t>(std::max<Index>(n, 0))), values_(std::move(values)) {
  if (n < 2) throw ContractViolation("gossip network: need at least two nodes");
  if (values_.size() != n) throw ContractViolation("gossip network: need one value per node");
  std::set<std::pair<Index, Index>> seen;
  edges_.reserve(edges.size());
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) {
      throw ContractViolation("gossip network: edge endpoint out of range");
    }
    if (a == b) throw ContractViolation("gossip network: self-loop at node " + std::to_string(a + 1));
    const Edge e{std::min(a, b), std::max(a, b)};
    if (!seen.insert({e.i, e.j}).second) {
      throw ContractViolation("gossip network: duplicate edge " + std::to_string(e.i + 1) + " " +
                              std::to_string(e.j + 1));
    }
    edges_.push_back(e);
    adjacency_[static_cast<std::size_t>(e.i)].push_back(e.j);
    adjacency_[static_cast<std::size_t>(e.j)].push_back(e.i);
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());

  std::vector<bool> reached(static_cast<std::size_t>(n), false);
  std::queue<Index> frontier;
  frontier.push(0);
  reached[0] = true;
  Index count = 1;
  while (!frontier.empty()) {
    const Index v = frontier.front();
    frontier.pop();
    for (Index w : neighbours(v)) {
      if (!reached[static_cast<std::size_t>(w)]) {
        reached[static_cast<std::size_t>(w)] = true;
        ++count;
        frontier.push(w);
      }
    }
  }
  if (count != n) throw ContractViolation("gossip network: graph is not connected");
}

GossipNetwork GossipNetwork::random_connected(Index n, double extra_edge_prob,
                                              std::uint64_t seed, Vector values) {
  if (n < 2) throw ContractViolation("gossip network: need at least two nodes");
  RngStream rng(seed);
  auto& eng = rng.engine();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), eng);
  std::set<std::pair<Index, Index>> chosen;
  for (std::size_t k = 1; k < order.size(); ++k) {
    std::uniform_int_distribution<std::size_t> parent(0, k - 1);
    const Index a = order[k];
    const Index b = order[parent(eng)];
    chosen.insert({std::min(a, b), std::max(a, b)});
  }
  std::bernoulli_distribution extra(extra_edge_prob);
  for (Index a = 0; a < n; ++a) {
    for (Index b = a + 1; b < n; ++b) {
      if (!chosen.count({a, b}) && extra(eng)) chosen.insert({a, b});
    }
  }
  return GossipNetwork(n, {chosen.begin(), chosen.end()}, std::move(values));
}

GossipNetwork GossipNetwork::complete(Index n, Vector values) {
  std::vector<std::pair<Index, Index>> edges;
  for (Index a = 0; a < n; ++a) {
    for (Index b = a + 1; b < n; ++b) edges.emplace_back(a, b);
  }
  return GossipNetwork(n, edges, std::move(values));
}

GossipNetwork GossipNetwork::with_values(Vector values) const {
  if (values.size() != n_) throw ContractViolation("gossip network: need one value per node");
  GossipNetwork g = *this;
  g.values_ = std::move(values);
  return g;
}

Matrix model1_matrix(const GossipNetwork& g) {
  Matrix A = Matrix::Zero(g.edge_count(), g.nodes());
  for (Index e = 0; e < g.edge_count(); ++e) {
    const Edge& edge = g.edges()[static_cast<std::size_t>(e)];
    A(e, edge.i) = 1.0;
    A(e, edge.j) = -1.0;
  }
  return A;
}

Matrix laplacian(const GossipNetwork& g) {
  Matrix L = Matrix::Zero(g.nodes(), g.nodes());
  for (Index i = 0; i < g.nodes(); ++i) L(i, i) = static_cast<double>(g.degree(i));
  for (const Edge& e : g.edges()) {
    L(e.i, e.j) = -1.0;
    L(e.j, e.i) = -1.0;
  }
  return L;
}

Matrix model2_matrix(const GossipNetwork& g) {
  Matrix A = Matrix::Zero(g.nodes(), g.nodes());
  for (Index i = 0; i < g.nodes(); ++i) {
    const auto& nbrs = g.neighbours(i);
    if (nbrs.empty()) throw ContractViolation("model 2: isolated node " + std::to_string(i + 1));
    A(i, i) = 1.0;
    const double w = 1.0 / static_cast<double>(nbrs.size());
    for (Index j : nbrs) A(i, j) = -w;
  }
  return A;
}

ProjectionProblem gossip_problem(const GossipNetwork& g, GossipModel model) {
  Matrix A = model == GossipModel::pairwise ? model1_matrix(g) : model2_matrix(g);
  const Index m = A.rows();
  return ProjectionProblem(std::move(A), Vector::Zero(m), SpdMatrix::identity(g.nodes()),
                           g.values());
}

SamplerSpec gossip_sampler(const GossipNetwork& g, GossipModel model, Activation activation) {
  if (model == GossipModel::pairwise) return SamplerSpec::coordinate_uniform(g.edge_count());
  if (activation == Activation::uniform) return SamplerSpec::coordinate_uniform(g.nodes());
  return SamplerSpec::coordinate_row_norm(model2_matrix(g));
}

Vector gossip_step_model1(const Vector& values, const Edge& edge) {
  if (edge.i < 0 || edge.j < 0 || edge.i >= values.size() || edge.j >= values.size() ||
      edge.i == edge.j) {
    throw ContractViolation("gossip_step_model1: invalid edge");
  }
  Vector x = values;
  average_edge(x, edge);
  return x;
}

Vector gossip_step_model2(const Vector& values, Index node, const GossipNetwork& g) {
  if (values.size() != g.nodes()) throw ContractViolation("gossip_step_model2: size mismatch");
  if (node < 0 || node >= g.nodes()) throw ContractViolation("gossip_step_model2: invalid node");
  Vector x = values;
  average_neighbourhood(x, node, g.neighbours(node));
  return x;
}

double gossip_rate(const GossipNetwork& g, GossipModel model, Activation activation) {
  const double m2 = 2.0 * static_cast<double>(g.edge_count());
  if (model == GossipModel::pairwise || g.is_complete()) {
    // L = M^T M shares its nonzero spectrum with M M^T; take the smaller one.
    if (g.edge_count() < g.nodes()) {
      const Matrix M = model1_matrix(g);
      return 1.0 - lambda_min_plus(Matrix(M * M.transpose())) / m2;
    }
    return 1.0 - lambda_min_plus(laplacian(g)) / m2;
  }
  const ProjectionProblem problem = gossip_problem(g, model);
  const Matrix H = compute_H(to_discrete(gossip_sampler(g, model, activation)), problem);
  return rate_rho(problem, H);
}

GossipReport run_gossip(const GossipNetwork& g, GossipModel model, long rounds,
                        std::uint64_t seed, long record_every, Activation activation) {
  if (rounds < 0) throw ContractViolation("run_gossip: rounds must be >= 0");
  if (record_every < 1) throw ContractViolation("run_gossip: record_every must be >= 1");

  const bool pairwise = model == GossipModel::pairwise;
  const Index n = g.nodes();
  const Index rows = pairwise ? g.edge_count() : n;
  const double mean = g.values().mean();

  std::vector<double> weights(static_cast<std::size_t>(rows), 1.0);
  if (!pairwise && activation == Activation::row_norm) {
    for (Index i = 0; i < n; ++i) {
      weights[static_cast<std::size_t>(i)] = 1.0 + 1.0 / static_cast<double>(g.degree(i));
    }
  }
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  RngStream rng(seed);

  GossipReport report;
  Vector x = g.values();
  Vector y = Vector::Zero(rows);

  auto record = [&](long round) {
    report.trace.push_back({round, x, (x.array() - mean).abs().maxCoeff(), x.sum()});
  };
  record(0);

  for (long k = 1; k <= rounds; ++k) {
    const auto r = static_cast<Index>(pick(rng.engine()));
    if (pairwise) {
      const Edge& e = g.edges()[static_cast<std::size_t>(r)];
      y(r) -= (x(e.i) - x(e.j)) / 2.0;
      average_edge(x, e);
    } else {
      const auto& nbrs = g.neighbours(r);
      const double d = static_cast<double>(nbrs.size());
      y(r) -= (x(r) - neighbour_mean(x, nbrs)) / (1.0 + 1.0 / d);
      average_neighbourhood(x, r, nbrs);
    }
    if (k % record_every == 0 || k == rounds) record(k);
  }

  Vector corrections = Vector::Zero(n);
  if (pairwise) {
    for (Index e = 0; e < rows; ++e) {
      const Edge& edge = g.edges()[static_cast<std::size_t>(e)];
      corrections(edge.i) += y(e);
      corrections(edge.j) -= y(e);
    }
  } else {
    for (Index i = 0; i < n; ++i) {
      corrections(i) += y(i);
      const double w = y(i) / static_cast<double>(g.degree(i));
      for (Index j : g.neighbours(i)) corrections(j) -= w;
    }
  }

  report.rounds = rounds;
  report.final_values = std::move(x);
  report.edge_weights = std::move(y);
  report.corrections = std::move(corrections);
  return report;
}

}  // namespace sda
