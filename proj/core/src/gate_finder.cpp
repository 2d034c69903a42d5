#include "reln/gate_finder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <unordered_map>

#include "reln/error.hpp"

namespace reln {

void append_samples(SampleStack& stack, const std::vector<ActivationSample>& samples,
                    const CollectOptions& opts) {
  std::vector<const ActivationSample*> picked;
  Eigen::Index extra = 0;
  for (const auto& s : samples) {
    if (s.layer != opts.layer || s.epoch < opts.min_epoch) continue;
    if (stack.rows.size() > 0) {
      require(s.active.cols() == stack.rows.cols(), ErrorKind::kShape,
              "samples differ in datapoint count");
    }
    picked.push_back(&s);
    extra += s.active.rows();
  }
  if (picked.empty()) return;
  const Eigen::Index n = picked.front()->active.cols();
  BinaryMatrix grown(stack.rows.rows() + extra, n);
  if (stack.rows.rows() > 0) grown.topRows(stack.rows.rows()) = stack.rows;
  Eigen::Index r = stack.rows.rows();
  for (const auto* s : picked) {
    for (Eigen::Index h = 0; h < s->active.rows(); ++h) {
      if (opts.drop_dead && s->active.row(h).cast<int>().sum() == 0) continue;
      grown.row(r++) = s->active.row(h);
      stack.provenance.emplace_back(s->run_id, s->epoch);
    }
  }
  stack.rows = grown.topRows(r);
}

SampleStack collect_samples(const Dataset& data, const ReluConfig& cfg, int num_trainings,
                            int sample_every, const CollectOptions& opts) {
  require(num_trainings >= 1, ErrorKind::kInvalidParameter, "need at least one training run");
  require(sample_every >= 1, ErrorKind::kInvalidParameter, "sample_every must be >= 1");
  SampleStack stack;
  for (int run = 0; run < num_trainings; ++run) {
    ReluConfig c = cfg;
    c.seed = cfg.seed + static_cast<std::uint64_t>(run);
    c.sample_every = sample_every;
    c.record_every = std::max(1, cfg.epochs);
    append_samples(stack, train_relu(data, c).samples, opts);
  }
  return stack;
}

namespace {

struct UniqueRows {
  Matrix points;               // u x N
  Vector weights;              // multiplicity
  std::vector<int> row_to_unique;
};

UniqueRows deduplicate(const BinaryMatrix& rows) {
  UniqueRows out;
  std::unordered_map<std::string, int> index;
  std::vector<int> first_row;
  std::vector<double> counts;
  const Eigen::Index n = rows.cols();
  std::string key(static_cast<std::size_t>(n), '\0');
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < n; ++c) key[c] = static_cast<char>(rows(r, c));
    auto [it, inserted] = index.try_emplace(key, static_cast<int>(first_row.size()));
    if (inserted) {
      first_row.push_back(static_cast<int>(r));
      counts.push_back(0.0);
    }
    counts[it->second] += 1.0;
    out.row_to_unique.push_back(it->second);
  }
  out.points.resize(static_cast<Eigen::Index>(first_row.size()), n);
  for (std::size_t u = 0; u < first_row.size(); ++u) {
    out.points.row(u) = rows.row(first_row[u]).cast<double>();
  }
  out.weights = Eigen::Map<Vector>(counts.data(), static_cast<Eigen::Index>(counts.size()));
  return out;
}

struct LloydResult {
  Matrix centroids;
  std::vector<int> assign;  // per unique point
  double inertia = 0.0;
  int iterations = 0;
};

int nearest(const Matrix& centroids, const Eigen::RowVectorXd& x, double* dist) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
    const double d = (centroids.row(c) - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  if (dist) *dist = best_d;
  return best;
}

LloydResult lloyd(const UniqueRows& data, int k, std::mt19937_64& rng, int max_iter) {
  const Eigen::Index u = data.points.rows();
  const Eigen::Index n = data.points.cols();
  LloydResult res;
  res.centroids.resize(k, n);

  // k-means++ seeding on weighted unique points
  std::vector<double> d2(static_cast<std::size_t>(u), std::numeric_limits<double>::infinity());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pick = [&](const std::vector<double>& mass) {
    double total = 0.0;
    for (double m : mass) total += m;
    if (total <= 0.0) return 0;
    double r = unit(rng) * total;
    for (std::size_t i = 0; i < mass.size(); ++i) {
      r -= mass[i];
      if (r <= 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(mass.size()) - 1;
  };
  std::vector<double> mass(static_cast<std::size_t>(u));
  for (Eigen::Index i = 0; i < u; ++i) mass[i] = data.weights(i);
  res.centroids.row(0) = data.points.row(pick(mass));
  for (int c = 1; c < k; ++c) {
    for (Eigen::Index i = 0; i < u; ++i) {
      d2[i] = std::min(d2[i], (data.points.row(i) - res.centroids.row(c - 1)).squaredNorm());
      mass[i] = data.weights(i) * d2[i];
    }
    res.centroids.row(c) = data.points.row(pick(mass));
  }

  res.assign.assign(static_cast<std::size_t>(u), -1);
  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < u; ++i) {
      const int c = nearest(res.centroids, data.points.row(i), nullptr);
      if (c != res.assign[i]) {
        res.assign[i] = c;
        changed = true;
      }
    }
    res.iterations = it + 1;
    Matrix sum = Matrix::Zero(k, n);
    Vector w = Vector::Zero(k);
    for (Eigen::Index i = 0; i < u; ++i) {
      sum.row(res.assign[i]) += data.weights(i) * data.points.row(i);
      w(res.assign[i]) += data.weights(i);
    }
    for (int c = 0; c < k; ++c) {
      if (w(c) > 0.0) {
        res.centroids.row(c) = sum.row(c) / w(c);
        continue;
      }
      // empty cluster: move it onto the point farthest from its centroid
      double far_d = -1.0;
      Eigen::Index far_i = 0;
      for (Eigen::Index i = 0; i < u; ++i) {
        const double d = (data.points.row(i) - res.centroids.row(res.assign[i])).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far_i = i;
        }
      }
      if (far_d > 0.0) {
        res.centroids.row(c) = data.points.row(far_i);
        res.assign[far_i] = c;
        changed = true;
      }
    }
    if (!changed) break;
  }
  res.inertia = 0.0;
  for (Eigen::Index i = 0; i < u; ++i) {
    res.inertia += data.weights(i) * (data.points.row(i) - res.centroids.row(res.assign[i])).squaredNorm();
  }
  return res;
}

}  // namespace

GateClustering kmeans(const SampleStack& stack, int k, std::uint64_t seed,
                      const KMeansOptions& opts) {
  require(k >= 1, ErrorKind::kInvalidParameter, "k must be positive");
  require(k <= stack.num_rows(), ErrorKind::kInvalidParameter, "k exceeds the number of rows");
  require(opts.max_iter >= 1 && opts.restarts >= 1, ErrorKind::kInvalidParameter,
          "max_iter and restarts must be positive");
  const UniqueRows data = deduplicate(stack.rows);
  std::mt19937_64 rng(seed);
  LloydResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < opts.restarts; ++r) {
    LloydResult res = lloyd(data, k, rng, opts.max_iter);
    if (res.inertia < best.inertia - 1e-9) best = std::move(res);
  }

  GateClustering out;
  out.k = k;
  out.centroids = best.centroids;
  out.inertia = best.inertia;
  out.iterations = best.iterations;
  out.sizes.assign(k, 0);
  out.assignments.reserve(data.row_to_unique.size());
  for (int u : data.row_to_unique) {
    const int c = best.assign[u];
    out.assignments.push_back(c);
    ++out.sizes[c];
  }
  return out;
}

BinarizedGates binarize_centroids(const GateClustering& c, double threshold) {
  require(threshold > 0.0 && threshold < 1.0, ErrorKind::kInvalidParameter,
          "threshold must lie in (0, 1)");
  BinarizedGates out;
  for (Eigen::Index r = 0; r < c.centroids.rows(); ++r) {
    std::vector<std::uint8_t> pattern;
    int crisp = 0;
    for (Eigen::Index i = 0; i < c.centroids.cols(); ++i) {
      const double v = c.centroids(r, i);
      pattern.push_back(v >= threshold ? 1 : 0);
      if (v <= 0.05 || v >= 0.95) ++crisp;
    }
    const double consistency =
        c.centroids.cols() ? static_cast<double>(crisp) / static_cast<double>(c.centroids.cols()) : 1.0;
    out.patterns.push_back(std::move(pattern));
    out.consistency.push_back(consistency);
    if (consistency < 0.8) out.needs_more_clusters = true;
  }
  return out;
}

RelnNetwork build_reln(const Dataset& data, const std::vector<std::vector<std::uint8_t>>& patterns,
                       int hidden_per_pathway) {
  require(!patterns.empty(), ErrorKind::kInvalidParameter, "need at least one pattern");
  require(hidden_per_pathway >= 1, ErrorKind::kInvalidParameter, "hidden width must be positive");
  RelnNetwork net;
  GatedGraph& g = net.graph;
  const int x = g.add_node("x_all", data.input_dim(), NodeRole::kInput);
  const int y = g.add_node("y", data.output_dim(), NodeRole::kOutput);
  std::vector<int> hidden;
  for (std::size_t k = 0; k < patterns.size(); ++k) {
    require(static_cast<int>(patterns[k].size()) == data.size(), ErrorKind::kShape,
            "pattern length must equal the datapoint count");
    const std::string name = "h" + std::to_string(k);
    const int h = g.add_node(name, hidden_per_pathway, NodeRole::kHidden);
    g.add_edge("x_all->" + name, x, h);
    g.add_edge(name + "->y", h, y);
    hidden.push_back(h);
    net.pathway_labels.push_back("cluster" + std::to_string(k));
  }
  g.finalize();
  net.gates = GatingTable::all_on(g, data.size());
  for (std::size_t k = 0; k < patterns.size(); ++k) {
    for (int i = 0; i < data.size(); ++i) net.gates.set_node(i, hidden[k], patterns[k][i] != 0);
  }
  const PathwayStats st = pathway_stats(g, net.gates, data);
  for (int p = 0; p < g.num_paths(); ++p) {
    require(hidden_per_pathway >= st.rank[p], ErrorKind::kUnderParameterized,
            "pathway " + std::to_string(p) + " needs " + std::to_string(st.rank[p]) +
                " hidden units");
  }
  return net;
}

double imitation_mse(const Trajectory& a, const Trajectory& b) {
  double acc = 0.0;
  double count = 0.0;
  for (std::size_t i = 0; i < a.output_epochs.size(); ++i) {
    const Matrix* other = b.output_at(a.output_epochs[i]);
    if (!other) continue;
    require(other->rows() == a.outputs[i].rows() && other->cols() == a.outputs[i].cols(),
            ErrorKind::kShape, "output shapes differ");
    acc += (a.outputs[i] - *other).squaredNorm();
    count += static_cast<double>(other->size());
  }
  require(count > 0.0, ErrorKind::kShape, "trajectories share no output epochs");
  return acc / count;
}

std::vector<ElbowPoint> elbow_scan(const Dataset& data, const SampleStack& stack,
                                   const std::vector<int>& k_range,
                                   const Trajectory& relu_reference, const ReluConfig& relu_cfg,
                                   const ElbowOptions& opts) {
  require(!k_range.empty(), ErrorKind::kInvalidParameter, "k_range must be nonempty");
  require(!relu_reference.output_epochs.empty(), ErrorKind::kInvalidParameter,
          "reference trajectory has no recorded outputs");
  std::vector<ElbowPoint> out;
  for (int k : k_range) {
    ElbowPoint pt;
    pt.k = k;
    try {
      pt.clustering = kmeans(stack, k, opts.seed, opts.kmeans);
      const BinarizedGates gates = binarize_centroids(pt.clustering, opts.threshold);
      RelnNetwork net = build_reln(data, gates.patterns, opts.hidden_per_pathway);
      TrainConfig tc;
      tc.learning_rate = relu_cfg.learning_rate;
      tc.epochs = relu_cfg.epochs;
      tc.init_scale = relu_cfg.init_scale;
      tc.seed = relu_cfg.seed;
      tc.record_every = std::max(1, relu_cfg.epochs);
      tc.output_epochs = relu_reference.output_epochs;
      const Trajectory traj = train(net.graph, net.gates, data, tc);
      pt.imitation_mse = imitation_mse(traj, relu_reference);
      pt.clustering.imitation_mse = pt.imitation_mse;
    } catch (const Error& e) {
      pt.failed = true;
      pt.error = e.what();
      pt.imitation_mse = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(std::move(pt));
  }
  return out;
}

int select_elbow(const std::vector<ElbowPoint>& scan) {
  require(scan.size() >= 3, ErrorKind::kInvalidParameter, "elbow needs at least three points");
  int best_k = scan[1].k;
  double best_ratio = -std::numeric_limits<double>::infinity();
  const double floor = 1e-12 * std::max(1e-300, std::abs(scan.front().imitation_mse));
  for (std::size_t i = 1; i + 1 < scan.size(); ++i) {
    if (scan[i - 1].failed || scan[i].failed || scan[i + 1].failed) continue;
    const double in = scan[i - 1].imitation_mse - scan[i].imitation_mse;
    const double outd = std::max(scan[i].imitation_mse - scan[i + 1].imitation_mse, 0.0);
    const double ratio = in / (outd + floor);
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best_k = scan[i].k;
    }
  }
  return best_k;
}

bool same_patterns(std::vector<std::vector<std::uint8_t>> a,
                   std::vector<std::vector<std::uint8_t>> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

}  // namespace reln
