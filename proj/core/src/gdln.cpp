#include "reln/gdln.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "reln/error.hpp"

namespace reln {

// ---- GatedGraph -----------------------------------------------------------

int GatedGraph::add_node(std::string name, int width, NodeRole role, int data_offset) {
  require(width >= 1, ErrorKind::kInvalidParameter, "node width must be positive");
  require(data_offset >= 0, ErrorKind::kInvalidParameter, "data offset must be nonnegative");
  finalized_ = false;
  nodes_.push_back({std::move(name), width, role, data_offset});
  return static_cast<int>(nodes_.size()) - 1;
}

int GatedGraph::add_edge(std::string name, int source, int target) {
  require(source >= 0 && source < num_nodes() && target >= 0 && target < num_nodes(),
          ErrorKind::kShape, "edge endpoint out of range");
  require(nodes_[source].role != NodeRole::kOutput, ErrorKind::kShape,
          "output nodes cannot have outgoing edges");
  require(nodes_[target].role != NodeRole::kInput, ErrorKind::kShape,
          "input nodes cannot have incoming edges");
  finalized_ = false;
  Edge e;
  e.name = std::move(name);
  e.source = source;
  e.target = target;
  e.weight = Matrix::Zero(nodes_[target].width, nodes_[source].width);
  edges_.push_back(std::move(e));
  return static_cast<int>(edges_.size()) - 1;
}

void GatedGraph::finalize() {
  const int n = num_nodes();
  std::vector<std::vector<int>> out(n);
  std::vector<int> indeg(n, 0);
  for (int e = 0; e < num_edges(); ++e) {
    const Edge& ed = edges_[e];
    require(ed.weight.rows() == nodes_[ed.target].width && ed.weight.cols() == nodes_[ed.source].width,
            ErrorKind::kShape, "edge weight shape does not match endpoint widths");
    out[ed.source].push_back(e);
    ++indeg[ed.target];
  }

  topo_.clear();
  std::vector<int> deg = indeg;
  std::vector<int> queue;
  for (int v = 0; v < n; ++v) {
    if (deg[v] == 0) queue.push_back(v);
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int v = queue[head];
    topo_.push_back(v);
    for (int e : out[v]) {
      if (--deg[edges_[e].target] == 0) queue.push_back(edges_[e].target);
    }
  }
  require(static_cast<int>(topo_.size()) == n, ErrorKind::kShape, "graph contains a cycle");

  inputs_.clear();
  outputs_.clear();
  for (int v = 0; v < n; ++v) {
    const Node& node = nodes_[v];
    if (node.role == NodeRole::kInput) inputs_.push_back(v);
    if (node.role == NodeRole::kOutput) outputs_.push_back(v);
    if (node.role == NodeRole::kHidden) {
      require(indeg[v] > 0 && !out[v].empty(), ErrorKind::kShape,
              "hidden node '" + node.name + "' must have incoming and outgoing edges");
    }
  }
  require(!inputs_.empty() && !outputs_.empty(), ErrorKind::kShape,
          "graph needs at least one input and one output node");

  paths_.clear();
  Path current;
  std::function<void(int)> walk = [&](int v) {
    if (nodes_[v].role == NodeRole::kOutput) {
      paths_.push_back(current);
      return;
    }
    for (int e : out[v]) {
      current.push_back(e);
      walk(edges_[e].target);
      current.pop_back();
    }
  };
  for (int v : inputs_) walk(v);

  through_.assign(num_edges(), {});
  for (int p = 0; p < num_paths(); ++p) {
    for (int e : paths_[p]) through_[e].push_back(p);
  }
  finalized_ = true;
}

std::vector<int> GatedGraph::path_nodes(int p) const {
  std::vector<int> out{path_source(p)};
  for (int e : paths_.at(p)) out.push_back(edges_[e].target);
  return out;
}

std::vector<int> GatedGraph::paths_ending_at(int v) const {
  std::vector<int> out;
  for (int p = 0; p < num_paths(); ++p) {
    if (path_target(p) == v) out.push_back(p);
  }
  return out;
}

int GatedGraph::node_index(const std::string& name) const {
  for (int v = 0; v < num_nodes(); ++v) {
    if (nodes_[v].name == name) return v;
  }
  fail(ErrorKind::kInvalidParameter, "unknown node '" + name + "'");
}

std::vector<Matrix> GatedGraph::weights() const {
  std::vector<Matrix> w;
  w.reserve(edges_.size());
  for (const Edge& e : edges_) w.push_back(e.weight);
  return w;
}

void GatedGraph::set_weights(const std::vector<Matrix>& w) {
  require(w.size() == edges_.size(), ErrorKind::kShape, "one weight matrix per edge required");
  for (std::size_t e = 0; e < w.size(); ++e) {
    require(w[e].rows() == edges_[e].weight.rows() && w[e].cols() == edges_[e].weight.cols(),
            ErrorKind::kShape, "weight shape mismatch on edge '" + edges_[e].name + "'");
    edges_[e].weight = w[e];
  }
}

Matrix GatedGraph::path_product(int p) const {
  const Path& path = paths_.at(p);
  Matrix prod = edges_[path.front()].weight;
  for (std::size_t k = 1; k < path.size(); ++k) prod = edges_[path[k]].weight * prod;
  return prod;
}

// ---- GatingTable ----------------------------------------------------------

GatingTable::GatingTable(int datapoints, int nodes, int edges, bool on)
    : n_(datapoints),
      nodes_(nodes),
      edges_(edges),
      node_gates_(static_cast<std::size_t>(datapoints) * nodes, on ? 1 : 0),
      edge_gates_(static_cast<std::size_t>(datapoints) * edges, on ? 1 : 0) {
  require(datapoints >= 0 && nodes >= 0 && edges >= 0, ErrorKind::kInvalidParameter,
          "gating table dimensions must be nonnegative");
}

bool GatingTable::path_gate(const GatedGraph& g, int i, int p) const {
  const Path& path = g.paths()[p];
  if (!node(i, g.path_source(p))) return false;
  for (int e : path) {
    if (!edge(i, e) || !node(i, g.edges()[e].target)) return false;
  }
  return true;
}

Vector GatingTable::path_gates(const GatedGraph& g, int p) const {
  Vector out(n_);
  for (int i = 0; i < n_; ++i) out(i) = path_gate(g, i, p) ? 1.0 : 0.0;
  return out;
}

void GatingTable::check_compatible(const GatedGraph& g) const {
  require(nodes_ == g.num_nodes() && edges_ == g.num_edges(), ErrorKind::kShape,
          "gating table does not match graph");
}

// ---- forward / loss -------------------------------------------------------

namespace {

void check_inputs(const GatedGraph& g, const GatingTable& gates, const Dataset& data) {
  require(g.finalized(), ErrorKind::kShape, "graph is not finalized");
  gates.check_compatible(g);
  require(gates.datapoints() == data.size(), ErrorKind::kShape,
          "gating table and dataset differ in datapoint count");
  for (int v : g.input_nodes()) {
    const Node& n = g.nodes()[v];
    require(n.data_offset + n.width <= data.input_dim(), ErrorKind::kShape,
            "input node '" + n.name + "' reads past the input rows");
  }
  for (int v : g.output_nodes()) {
    const Node& n = g.nodes()[v];
    require(n.data_offset + n.width <= data.output_dim(), ErrorKind::kShape,
            "output node '" + n.name + "' reads past the target rows");
  }
}

Matrix input_block(const Node& n, const Dataset& data) {
  return data.inputs.middleRows(n.data_offset, n.width);
}

Matrix target_block(const Node& n, const Dataset& data) {
  return data.targets.middleRows(n.data_offset, n.width);
}

Vector node_gate_row(const GatingTable& gates, int v) {
  Vector out(gates.datapoints());
  for (int i = 0; i < gates.datapoints(); ++i) out(i) = gates.node(i, v) ? 1.0 : 0.0;
  return out;
}

Vector edge_gate_row(const GatingTable& gates, int e) {
  Vector out(gates.datapoints());
  for (int i = 0; i < gates.datapoints(); ++i) out(i) = gates.edge(i, e) ? 1.0 : 0.0;
  return out;
}

}  // namespace

std::vector<Vector> forward(const GatedGraph& g, const GatingTable& gates, const Dataset& data,
                            int i) {
  check_inputs(g, gates, data);
  require(i >= 0 && i < data.size(), ErrorKind::kInvalidParameter, "datapoint index out of range");
  std::vector<Vector> h(g.num_nodes());
  std::vector<std::vector<int>> incoming(g.num_nodes());
  for (int e = 0; e < g.num_edges(); ++e) incoming[g.edges()[e].target].push_back(e);
  for (int v : g.topo_order()) {
    const Node& n = g.nodes()[v];
    if (n.role == NodeRole::kInput) {
      h[v] = data.inputs.col(i).segment(n.data_offset, n.width);
    } else {
      h[v] = Vector::Zero(n.width);
      for (int e : incoming[v]) {
        if (gates.edge(i, e)) h[v] += g.edges()[e].weight * h[g.edges()[e].source];
      }
    }
    if (!gates.node(i, v)) h[v].setZero();
  }
  return h;
}

std::vector<Matrix> forward_all(const GatedGraph& g, const GatingTable& gates,
                                const Dataset& data) {
  check_inputs(g, gates, data);
  const int n = data.size();
  std::vector<Matrix> h(g.num_nodes());
  std::vector<std::vector<int>> incoming(g.num_nodes());
  for (int e = 0; e < g.num_edges(); ++e) incoming[g.edges()[e].target].push_back(e);
  for (int v : g.topo_order()) {
    const Node& node = g.nodes()[v];
    if (node.role == NodeRole::kInput) {
      h[v] = input_block(node, data);
    } else {
      h[v] = Matrix::Zero(node.width, n);
      for (int e : incoming[v]) {
        const Vector ge = edge_gate_row(gates, e);
        h[v].noalias() += (g.edges()[e].weight * h[g.edges()[e].source]) * ge.asDiagonal();
      }
    }
    h[v] = h[v] * node_gate_row(gates, v).asDiagonal();
  }
  return h;
}

Matrix predict(const GatedGraph& g, const GatingTable& gates, const Dataset& data) {
  const std::vector<Matrix> h = forward_all(g, gates, data);
  Matrix out = Matrix::Zero(data.output_dim(), data.size());
  for (int v : g.output_nodes()) {
    const Node& n = g.nodes()[v];
    out.middleRows(n.data_offset, n.width) += h[v];
  }
  return out;
}

double loss(const GatedGraph& g, const GatingTable& gates, const Dataset& data) {
  const std::vector<Matrix> h = forward_all(g, gates, data);
  double acc = 0.0;
  for (int v : g.output_nodes()) {
    acc += (target_block(g.nodes()[v], data) - h[v]).squaredNorm();
  }
  return acc / (2.0 * data.size());
}

// ---- pathway statistics ---------------------------------------------------

const Matrix& PathwayStats::sigma_x(int j, int p) const {
  require(has_sigma_x(j, p), ErrorKind::kInvalidParameter,
          "sigma_x(j,p) is only defined for paths sharing a terminal node");
  return sigma_x_[static_cast<std::size_t>(j) * num_paths + p];
}

bool PathwayStats::has_sigma_x(int j, int p) const {
  return j >= 0 && p >= 0 && j < num_paths && p < num_paths &&
         has_[static_cast<std::size_t>(j) * num_paths + p] != 0;
}

Matrix PathwayStats::coupling_variance(int j, int p) const {
  return svd[j].V.transpose() * sigma_x(j, p) * svd[p].V;
}

PathwayStats pathway_stats(const GatedGraph& g, const GatingTable& gates, const Dataset& data) {
  check_inputs(g, gates, data);
  const int np = g.num_paths();
  const double inv_n = 1.0 / data.size();
  PathwayStats st;
  st.num_paths = np;
  st.sigma_yx.resize(np);
  st.svd.resize(np);
  st.mode_variance.resize(np);
  st.rank.resize(np);
  st.inert.resize(np);
  st.same_terminal.resize(np);
  st.sigma_x_.resize(static_cast<std::size_t>(np) * np);
  st.has_.assign(static_cast<std::size_t>(np) * np, 0);

  std::vector<Vector> gp(np);
  std::vector<Matrix> xs(np);
  for (int p = 0; p < np; ++p) {
    gp[p] = gates.path_gates(g, p);
    st.inert[p] = gp[p].sum() == 0.0;
    xs[p] = input_block(g.nodes()[g.path_source(p)], data);
    const Matrix yt = target_block(g.nodes()[g.path_target(p)], data);
    st.sigma_yx[p] = inv_n * yt * gp[p].asDiagonal() * xs[p].transpose();
  }
  for (int p = 0; p < np; ++p) {
    for (int j = 0; j < np; ++j) {
      if (g.path_target(j) != g.path_target(p)) continue;
      st.same_terminal[p].push_back(j);
      const Vector w = gp[j].cwiseProduct(gp[p]);
      const std::size_t idx = static_cast<std::size_t>(j) * np + p;
      st.sigma_x_[idx] = inv_n * xs[j] * w.asDiagonal() * xs[p].transpose();
      st.has_[idx] = 1;
    }
  }
  for (int p = 0; p < np; ++p) {
    const Matrix& sx = st.sigma_x(p, p);
    const JointBasis jb = joint_basis(st.sigma_yx[p], sx);
    const Eigen::Index k = jb.S.size();
    st.svd[p] = {jb.U, jb.S, jb.V.leftCols(k)};
    st.mode_variance[p] = (st.svd[p].V.transpose() * sx * st.svd[p].V).diagonal();
    st.rank[p] = st.inert[p] ? 0 : numerical_rank(st.sigma_yx[p]);
  }
  for (int v : g.output_nodes()) {
    st.sigma_y += target_block(g.nodes()[v], data).squaredNorm();
  }
  st.sigma_y *= inv_n;
  return st;
}

// ---- gradient -------------------------------------------------------------

namespace {

struct PathTerms {
  std::vector<Matrix> product;  // W_p
  std::vector<Matrix> error;    // sigma_yx(p) - sum_j W_j sigma_x(j,p)
};

PathTerms path_terms(const GatedGraph& g, const PathwayStats& st) {
  require(st.num_paths == g.num_paths(), ErrorKind::kShape, "stats do not match graph");
  PathTerms t;
  const int np = g.num_paths();
  t.product.resize(np);
  t.error.resize(np);
  for (int p = 0; p < np; ++p) t.product[p] = g.path_product(p);
  for (int p = 0; p < np; ++p) {
    t.error[p] = st.sigma_yx[p];
    for (int j : st.same_terminal[p]) t.error[p].noalias() -= t.product[j] * st.sigma_x(j, p);
  }
  return t;
}

double loss_from_terms(const PathTerms& t, const PathwayStats& st) {
  double acc = st.sigma_y;
  for (int p = 0; p < st.num_paths; ++p) {
    acc -= (t.product[p].cwiseProduct(st.sigma_yx[p] + t.error[p])).sum();
  }
  return 0.5 * acc;
}

std::vector<Matrix> gradient_from_terms(const GatedGraph& g, const PathTerms& t) {
  std::vector<Matrix> grad;
  grad.reserve(g.num_edges());
  for (const Edge& e : g.edges()) grad.push_back(Matrix::Zero(e.weight.rows(), e.weight.cols()));
  for (int p = 0; p < g.num_paths(); ++p) {
    const Path& path = g.paths()[p];
    const std::size_t len = path.size();
    // prefix[k] = W_{k-1} ... W_0 (empty product for k = 0)
    std::vector<Matrix> prefix(len);
    for (std::size_t k = 1; k < len; ++k) {
      const Matrix& w = g.edges()[path[k - 1]].weight;
      prefix[k] = (k == 1) ? w : Matrix(w * prefix[k - 1]);
    }
    Matrix back = t.error[p];  // suffix^T * E_p
    for (std::size_t kk = len; kk-- > 0;) {
      if (kk == 0) {
        grad[path[0]] += back;
      } else {
        grad[path[kk]].noalias() += back * prefix[kk].transpose();
        back = g.edges()[path[kk]].weight.transpose() * back;
      }
    }
  }
  return grad;
}

}  // namespace

double loss_from_stats(const GatedGraph& g, const PathwayStats& stats) {
  return loss_from_terms(path_terms(g, stats), stats);
}

std::vector<Matrix> gradient(const GatedGraph& g, const PathwayStats& stats) {
  return gradient_from_terms(g, path_terms(g, stats));
}

std::vector<Matrix> gradient(const GatedGraph& g, const GatingTable& gates, const Dataset& data) {
  return gradient(g, pathway_stats(g, gates, data));
}

void init_weights(GatedGraph& g, double init_scale, std::uint64_t seed) {
  require(init_scale >= 0.0, ErrorKind::kInvalidParameter, "init_scale must be nonnegative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int e = 0; e < g.num_edges(); ++e) {
    Matrix& w = g.edge(e).weight;
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = init_scale * dist(rng);
    }
  }
}

Vector path_mode_strengths(const GatedGraph& g, const PathwayStats& stats, int p) {
  const int r = stats.rank[p];
  if (r == 0) return Vector();
  const Matrix proj = stats.svd[p].U.leftCols(r).transpose() * g.path_product(p) *
                      stats.svd[p].V.leftCols(r);
  return proj.diagonal();
}

namespace {

double path_alignment(const GatedGraph& g, const PathwayStats& st, int p) {
  const int r = st.rank[p];
  if (r == 0) return 0.0;
  const Matrix proj =
      st.svd[p].U.leftCols(r).transpose() * g.path_product(p) * st.svd[p].V.leftCols(r);
  const double total = proj.norm();
  return total == 0.0 ? 0.0 : offdiag_norm(proj) / total;
}

}  // namespace

Trajectory train(GatedGraph& g, const GatingTable& gates, const Dataset& data,
                 const TrainConfig& cfg) {
  require(cfg.learning_rate >= 0.0, ErrorKind::kInvalidParameter,
          "learning rate must be nonnegative");
  require(cfg.epochs >= 0, ErrorKind::kInvalidParameter, "epochs must be nonnegative");
  require(cfg.record_every >= 1, ErrorKind::kInvalidParameter, "record_every must be >= 1");
  if (cfg.initialize) init_weights(g, cfg.init_scale, cfg.seed);

  const PathwayStats st = pathway_stats(g, gates, data);
  const double step = data.size() * cfg.learning_rate;

  Trajectory traj;
  traj.source = "gdln";
  traj.run_id = static_cast<int>(cfg.seed);
  if (cfg.track_modes) {
    for (int p = 0; p < g.num_paths(); ++p) {
      for (int a = 0; a < st.rank[p]; ++a) {
        traj.mode_names.push_back("path" + std::to_string(p) + "_mode" + std::to_string(a));
      }
    }
  }

  auto wants_output = [&](int epoch) {
    if (cfg.output_every > 0 && epoch % cfg.output_every == 0) return true;
    return std::find(cfg.output_epochs.begin(), cfg.output_epochs.end(), epoch) !=
           cfg.output_epochs.end();
  };

  for (int epoch = 0;; ++epoch) {
    const PathTerms terms = path_terms(g, st);
    const double cheap_loss = loss_from_terms(terms, st);
    if (!std::isfinite(cheap_loss) || cheap_loss > cfg.divergence_loss) {
      throw DivergedError(epoch, cheap_loss);
    }
    const bool last = epoch == cfg.epochs;
    if (epoch % cfg.record_every == 0 || last) {
      traj.push(epoch, loss(g, gates, data));
      if (cfg.track_modes) {
        std::vector<double> row;
        double worst = 0.0;
        for (int p = 0; p < g.num_paths(); ++p) {
          const Vector m = path_mode_strengths(g, st, p);
          row.insert(row.end(), m.data(), m.data() + m.size());
          worst = std::max(worst, path_alignment(g, st, p));
        }
        traj.mode_values.push_back(std::move(row));
        traj.alignment.push_back(worst);
      }
      if (cfg.observer) cfg.observer(epoch, g);
    }
    if (wants_output(epoch)) {
      traj.output_epochs.push_back(epoch);
      traj.outputs.push_back(predict(g, gates, data));
    }
    if (cfg.snapshot_every > 0 && (epoch % cfg.snapshot_every == 0 || last)) {
      traj.snapshot_epochs.push_back(epoch);
      traj.snapshots.push_back(g.weights());
    }
    if (last) break;
    const std::vector<Matrix> grad = gradient_from_terms(g, terms);
    for (int e = 0; e < g.num_edges(); ++e) g.edge(e).weight += step * grad[e];
  }
  return traj;
}

}  // namespace reln
