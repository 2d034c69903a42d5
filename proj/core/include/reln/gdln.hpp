#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "reln/dataset.hpp"
#include "reln/linalg.hpp"
#include "reln/trajectory.hpp"

namespace reln {

enum class NodeRole { kInput, kHidden, kOutput };

/// A layer of neurons. Input nodes read rows [data_offset, data_offset+width)
/// of the dataset inputs; output nodes are compared to the same rows of the
/// targets. Distinct input nodes may read overlapping rows.
struct Node {
  std::string name;
  int width = 0;
  NodeRole role = NodeRole::kHidden;
  int data_offset = 0;
};

struct Edge {
  std::string name;
  int source = 0;
  int target = 0;
  Matrix weight;  // |target| x |source|
};

/// Edge ids from an input node to an output node, input side first.
using Path = std::vector<int>;

/// Directed acyclic layer graph with per-edge weights. Call finalize() after
/// the last add_* to validate the graph and enumerate its paths.
class GatedGraph {
 public:
  int add_node(std::string name, int width, NodeRole role, int data_offset = 0);
  int add_edge(std::string name, int source, int target);
  void finalize();

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  Edge& edge(int e) { return edges_.at(e); }
  const Edge& edge(int e) const { return edges_.at(e); }
  const std::vector<Path>& paths() const { return paths_; }
  const std::vector<int>& topo_order() const { return topo_; }
  const std::vector<int>& input_nodes() const { return inputs_; }
  const std::vector<int>& output_nodes() const { return outputs_; }
  bool finalized() const { return finalized_; }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_paths() const { return static_cast<int>(paths_.size()); }
  int path_source(int p) const { return edges_[paths_[p].front()].source; }
  int path_target(int p) const { return edges_[paths_[p].back()].target; }
  /// Nodes visited by path p, source first.
  std::vector<int> path_nodes(int p) const;
  /// Paths that pass through edge e.
  const std::vector<int>& paths_through(int e) const { return through_.at(e); }
  /// Paths terminating at node v.
  std::vector<int> paths_ending_at(int v) const;
  int node_index(const std::string& name) const;

  std::vector<Matrix> weights() const;
  void set_weights(const std::vector<Matrix>& w);
  /// Product of the edge weights along path p, |t(p)| x |s(p)|.
  Matrix path_product(int p) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<Path> paths_;
  std::vector<std::vector<int>> through_;
  std::vector<int> topo_;
  std::vector<int> inputs_;
  std::vector<int> outputs_;
  bool finalized_ = false;
};

/// Per-datapoint binary gates for every node and edge.
class GatingTable {
 public:
  GatingTable() = default;
  GatingTable(int datapoints, int nodes, int edges, bool on = true);
  static GatingTable all_on(const GatedGraph& g, int datapoints) {
    return GatingTable(datapoints, g.num_nodes(), g.num_edges(), true);
  }

  int datapoints() const { return n_; }
  int num_nodes() const { return nodes_; }
  int num_edges() const { return edges_; }
  bool node(int i, int v) const { return node_gates_[static_cast<std::size_t>(i) * nodes_ + v] != 0; }
  bool edge(int i, int e) const { return edge_gates_[static_cast<std::size_t>(i) * edges_ + e] != 0; }
  void set_node(int i, int v, bool on) {
    node_gates_[static_cast<std::size_t>(i) * nodes_ + v] = on ? 1 : 0;
  }
  void set_edge(int i, int e, bool on) {
    edge_gates_[static_cast<std::size_t>(i) * edges_ + e] = on ? 1 : 0;
  }
  /// Product of node and edge gates along path p for datapoint i.
  bool path_gate(const GatedGraph& g, int i, int p) const;
  /// path_gate for every datapoint, as 0/1 doubles.
  Vector path_gates(const GatedGraph& g, int p) const;
  void check_compatible(const GatedGraph& g) const;

  bool operator==(const GatingTable&) const = default;

 private:
  int n_ = 0;
  int nodes_ = 0;
  int edges_ = 0;
  std::vector<std::uint8_t> node_gates_;
  std::vector<std::uint8_t> edge_gates_;
};

/// Effective statistics each path sees through its gates.
struct PathwayStats {
  int num_paths = 0;
  std::vector<Matrix> sigma_yx;     // per path, |t(p)| x |s(p)|
  std::vector<Svd> svd;             // U_t(p), S(p), V_s(p), jointly aligned
  std::vector<Vector> mode_variance;  // diag of V^T sigma_x(p,p) V
  std::vector<int> rank;            // numerical rank of sigma_yx(p)
  std::vector<bool> inert;          // gated off on every datapoint
  std::vector<std::vector<int>> same_terminal;  // T(t(p)), includes p
  double sigma_y = 0.0;             // (1/N) sum_i sum_{v in Out} ||y_v||^2

  /// sigma_x(j, p), |s(j)| x |s(p)|; only defined when t(j) == t(p).
  const Matrix& sigma_x(int j, int p) const;
  bool has_sigma_x(int j, int p) const;
  /// D(j,p) = V_s(j)^T sigma_x(j,p) V_s(p) in the aligned bases.
  Matrix coupling_variance(int j, int p) const;

  std::vector<Matrix> sigma_x_;  // flat [j * num_paths + p]
  std::vector<std::uint8_t> has_;
};

/// Activations of every node for datapoint i.
std::vector<Vector> forward(const GatedGraph& g, const GatingTable& gates, const Dataset& data,
                            int i);
/// Activations of every node for all datapoints at once (|v| x N each).
std::vector<Matrix> forward_all(const GatedGraph& g, const GatingTable& gates,
                                const Dataset& data);
/// Network prediction in target layout (rows not produced by any output node
/// are zero).
Matrix predict(const GatedGraph& g, const GatingTable& gates, const Dataset& data);

/// Mean squared loss (1/2N) sum_i sum_{v in Out} ||y_v - h_v||^2, by forward pass.
double loss(const GatedGraph& g, const GatingTable& gates, const Dataset& data);

PathwayStats pathway_stats(const GatedGraph& g, const GatingTable& gates, const Dataset& data);

/// Loss evaluated from pathway statistics and path products (no data pass).
double loss_from_stats(const GatedGraph& g, const PathwayStats& stats);

/// Negative loss gradient per edge, assembled path by path from the
/// effective statistics. A descent step is W_e += N * lr * grad_e.
std::vector<Matrix> gradient(const GatedGraph& g, const PathwayStats& stats);
std::vector<Matrix> gradient(const GatedGraph& g, const GatingTable& gates, const Dataset& data);

/// Zero-mean Gaussian weights with standard deviation init_scale.
void init_weights(GatedGraph& g, double init_scale, std::uint64_t seed);

struct TrainConfig {
  double learning_rate = 0.001;  // per-datapoint rate; tau = 1 / (N * lr)
  int epochs = 1000;
  double init_scale = 1e-7;
  std::uint64_t seed = 0;
  int record_every = 1;
  bool initialize = true;     // false keeps the graph's current weights
  bool track_modes = false;
  int snapshot_every = 0;     // 0 disables weight snapshots
  int output_every = 0;       // 0 disables output snapshots
  std::vector<int> output_epochs;  // extra epochs at which outputs are stored
  double divergence_loss = 1e6;
  // called with the epoch and current graph on every record_every-th epoch
  std::function<void(int, const GatedGraph&)> observer;
};

/// Full-batch gradient descent. Deterministic given the seed.
Trajectory train(GatedGraph& g, const GatingTable& gates, const Dataset& data,
                 const TrainConfig& cfg);

/// Per-mode effective singular values diag(U^T W_p V) for path p, limited to
/// the path's nonzero modes.
Vector path_mode_strengths(const GatedGraph& g, const PathwayStats& stats, int p);

// ---- preset architectures -------------------------------------------------

enum class RelnKind { kXorLinear, kXorPointwise, kContextual, kDepth2Contextual };

struct RelnPreset {
  RelnKind kind = RelnKind::kContextual;
  int contexts = 3;
  int arity = 2;  // contexts each gated pathway is active in
  bool include_common = true;  // contextual presets: keep the always-on pathway
};

struct RelnNetwork {
  GatedGraph graph;
  GatingTable gates;
  std::vector<std::string> pathway_labels;  // one per path
};

/// The gated architectures used as ReLN candidates. For the depth-2 preset the
/// shared ungated first layer has `first_layer_width` units (defaults to
/// hidden_width when 0).
RelnNetwork build_reln_graph(const Dataset& data, const RelnPreset& preset, int hidden_width,
                             int first_layer_width = 0);

/// Gate pattern (per datapoint, 0/1) of every path in the network.
std::vector<std::vector<std::uint8_t>> path_gate_patterns(const RelnNetwork& net);

}  // namespace reln
