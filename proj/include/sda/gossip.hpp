#pragma once

#include <sda/problem.hpp>
#include <sda/sketch.hpp>

#include <cstdint>
#include <utility>
#include <vector>

namespace sda {

/// Undirected edge stored with i < j (fixed orientation; 0-based).
struct Edge {
  Index i = 0;
  Index j = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Connected simple graph with a private value c_i at every node.
class GossipNetwork {
 public:
  /// Edges are 0-based; orientation is normalized to (min, max) and the list
  /// keeps the caller's order. Throws ContractViolation on self-loops,
  /// duplicates, out-of-range nodes, disconnected graphs or n < 2.
  GossipNetwork(Index n, const std::vector<std::pair<Index, Index>>& edges, Vector values);

  /// Random spanning tree plus each remaining pair with probability extra_edge_prob.
  static GossipNetwork random_connected(Index n, double extra_edge_prob, std::uint64_t seed,
                                        Vector values);
  static GossipNetwork complete(Index n, Vector values);

  Index nodes() const { return n_; }
  Index edge_count() const { return static_cast<Index>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Index>& neighbours(Index i) const { return adjacency_[static_cast<std::size_t>(i)]; }
  Index degree(Index i) const { return static_cast<Index>(neighbours(i).size()); }
  const Vector& values() const { return values_; }
  bool is_complete() const { return edge_count() * 2 == n_ * (n_ - 1); }

  GossipNetwork with_values(Vector values) const;

 private:
  Index n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<Index>> adjacency_;
  Vector values_;
};

enum class GossipModel { pairwise = 1, neighbourhood = 2 };
enum class Activation { uniform, row_norm };

/// Model 1: one row f_i - f_j per edge.
Matrix model1_matrix(const GossipNetwork& g);
/// L_ii = d_i, L_ij = -1 on edges.
Matrix laplacian(const GossipNetwork& g);
/// Model 2: row i = f_i - (1/d_i) sum_{j in N(i)} f_j.
Matrix model2_matrix(const GossipNetwork& g);

/// The consensus problem: A from the model, b = 0, B = I, c = node values.
ProjectionProblem gossip_problem(const GossipNetwork& g, GossipModel model);
/// Unit-coordinate sketches over rows of the model matrix.
SamplerSpec gossip_sampler(const GossipNetwork& g, GossipModel model,
                           Activation activation = Activation::uniform);

/// Both endpoints take their average.
Vector gossip_step_model1(const Vector& values, const Edge& edge);

/// Node i takes the average of itself and its neighbours; each neighbour moves
/// by (x_i - mean of N(i)) / (d_i + 1).
Vector gossip_step_model2(const Vector& values, Index node, const GossipNetwork& g);

/// Model 1: 1 - lambda_min^+(L) / 2m. Model 2: same closed form on complete
/// graphs, otherwise rho computed from H for the chosen activation rule.
double gossip_rate(const GossipNetwork& g, GossipModel model,
                   Activation activation = Activation::uniform);

struct GossipRecord {
  long round = 0;
  Vector values;
  double max_abs_error = 0.0;  // max_i |x_i - mean(c)|
  double sum = 0.0;
};

struct GossipReport {
  std::vector<GossipRecord> trace;
  long rounds = 0;
  Vector final_values;
  Vector edge_weights;  // dual iterate y^k (per edge for model 1, per node for model 2)
  Vector corrections;   // A^T y^k; converges to mean(c) - c
};

GossipReport run_gossip(const GossipNetwork& g, GossipModel model, long rounds,
                        std::uint64_t seed, long record_every = 1,
                        Activation activation = Activation::uniform);

}  // namespace sda
