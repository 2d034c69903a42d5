#include "reln/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "reln/error.hpp"

namespace reln {

// ---- XoR with margin -----------------------------------------------------

double xor_initial_strength(int hidden, double variance) {
  require(hidden > 0 && variance > 0.0, ErrorKind::kInvalidParameter,
          "hidden width and variance must be positive");
  return hidden * variance / 4.0;
}

double sharpest_bend(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 3, ErrorKind::kInvalidParameter,
          "need at least three aligned points");
  double best = -1.0;
  double at = x[1];
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    const double left = (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
    const double right = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    const double bend = std::abs(right - left) / (0.5 * (x[i + 1] - x[i - 1]));
    if (bend > best) {
      best = bend;
      at = x[i];
    }
  }
  return at;
}

namespace {

std::optional<double> mean_of(const std::vector<std::optional<double>>& v) {
  if (v.empty()) return std::nullopt;
  double acc = 0.0;
  for (const auto& x : v) {
    if (!x) return std::nullopt;
    acc += *x;
  }
  return acc / static_cast<double>(v.size());
}

std::optional<double> min_of(std::optional<double> a, std::optional<double> b) {
  if (!a) return b;
  if (!b) return a;
  return std::min(*a, *b);
}

Trajectory analytic_xor_curve(double delta, XorVariant variant, double a0, double tau,
                              int epochs, int run_id) {
  Trajectory t;
  t.source = "analytic";
  t.run_id = run_id;
  for (int e = 0; e <= epochs; ++e) t.push(e, xor_gdln_loss(delta, e, variant, a0, tau).loss);
  return t;
}

}  // namespace

XorCrossoverResult run_xor_crossover(const XorCrossoverConfig& cfg) {
  require(cfg.inv_tau > 0.0 && cfg.init_variance > 0.0, ErrorKind::kInvalidParameter,
          "rate and variance must be positive");
  require(cfg.seeds >= 0 && cfg.epochs >= 1, ErrorKind::kInvalidParameter,
          "seeds >= 0 and epochs >= 1 required");
  XorCrossoverResult res;
  res.tau = 1.0 / cfg.inv_tau;
  res.a0 = xor_initial_strength(cfg.hidden, cfg.init_variance);

  auto relu_runs = [&](double delta, std::vector<Trajectory>* keep) {
    const Dataset data = build_xor_margin(delta);
    std::vector<std::optional<double>> out;
    for (int s = 0; s < cfg.seeds; ++s) {
      ReluConfig rc;
      rc.hidden_widths = {cfg.hidden};
      rc.learning_rate = cfg.inv_tau / data.size();
      rc.epochs = cfg.epochs;
      rc.init_scale = std::sqrt(cfg.init_variance);
      rc.seed = cfg.seed + static_cast<std::uint64_t>(s);
      ReluRun run = train_relu(data, rc);
      out.push_back(time_to_criterion(run.trajectory, cfg.threshold));
      if (keep) keep->push_back(std::move(run.trajectory));
    }
    return out;
  };

  auto point = [&](double delta, bool with_relu, std::vector<Trajectory>* keep) {
    XorPoint p;
    p.delta = delta;
    p.linear = xor_time_to_loss(delta, cfg.threshold, XorVariant::kLinearGating, res.a0, res.tau);
    p.xor_ = xor_time_to_loss(delta, cfg.threshold, XorVariant::kXorGating, res.a0, res.tau);
    p.fastest = min_of(p.linear, p.xor_);
    if (with_relu) {
      p.relu = relu_runs(delta, keep);
      p.relu_mean = mean_of(p.relu);
    }
    return p;
  };

  for (double delta : cfg.grid) res.grid.push_back(point(delta, cfg.run_relu_on_grid, nullptr));
  for (double delta : cfg.probes) {
    res.curves.push_back(
        analytic_xor_curve(delta, XorVariant::kLinearGating, res.a0, res.tau, cfg.epochs, 0));
    res.curves.push_back(
        analytic_xor_curve(delta, XorVariant::kXorGating, res.a0, res.tau, cfg.epochs, 1));
    res.curve_deltas.insert(res.curve_deltas.end(), 2, delta);
    const std::size_t before = res.curves.size();
    res.probes.push_back(point(delta, true, &res.curves));
    res.curve_deltas.insert(res.curve_deltas.end(), res.curves.size() - before, delta);
  }

  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> rx;
  std::vector<double> ry;
  for (const XorPoint& p : res.grid) {
    if (p.fastest) {
      xs.push_back(p.delta);
      ys.push_back(*p.fastest);
    }
    if (p.relu_mean) {
      rx.push_back(p.delta);
      ry.push_back(*p.relu_mean);
    }
  }
  require(xs.size() >= 3, ErrorKind::kDegenerateStatistics,
          "fewer than three grid points reach the threshold");
  res.analytic_kink = sharpest_bend(xs, ys);
  if (rx.size() >= 3) res.relu_kink = sharpest_bend(rx, ry);
  return res;
}

// ---- shared mode comparison ----------------------------------------------

namespace {

struct PathBasis {
  Matrix U;
  Matrix V;
  Vector S;
  Vector D;
  std::vector<ModeGroup> groups;
  Vector a0;
};

PathBasis path_basis(const GatedGraph& g, const PathwayStats& st, int p) {
  require(g.paths()[p].size() == 2, ErrorKind::kUnsupported,
          "mode comparison needs two-edge pathways");
  PathBasis b;
  const int r = st.rank[p];
  b.U = st.svd[p].U.leftCols(r);
  b.V = st.svd[p].V.leftCols(r);
  b.S = st.svd[p].S.head(r);
  b.D = st.mode_variance[p].head(r);
  b.groups = degenerate_groups(b.S);
  const Path& path = g.paths()[p];
  b.a0 = balanced_initial_strengths(g.edge(path[0]).weight, g.edge(path[1]).weight, b.U, b.V,
                                    b.groups);
  return b;
}

std::vector<std::string> mode_names(int count) {
  std::vector<std::string> out;
  for (int a = 0; a < count; ++a) out.push_back("path0_mode" + std::to_string(a));
  return out;
}

using Predictor = std::function<double(double s, double d, double a0, double t)>;

// Trains the (already initialized) graph and compares the mean block mode
// strength over all paths with `predict`. Errors are relative to `fixed`.
ModeComparison compare_modes(GatedGraph& g, const GatingTable& gates, const Dataset& data,
                             TrainConfig tc, double transient, const Predictor& predict,
                             const std::function<double(double, double)>& fixed) {
  const PathwayStats st = pathway_stats(g, gates, data);
  const int np = g.num_paths();
  std::vector<PathBasis> bases;
  for (int p = 0; p < np; ++p) {
    bases.push_back(path_basis(g, st, p));
    require(bases.back().S.size() == bases.front().S.size(), ErrorKind::kUnsupported,
            "paths must share their mode count");
  }
  const int r = static_cast<int>(bases.front().S.size());

  ModeComparison cmp;
  for (int a = 0; a < r; ++a) {
    cmp.S.push_back(bases.front().S(a));
    cmp.D.push_back(bases.front().D(a));
    double a0 = 0.0;
    for (const PathBasis& b : bases) a0 += b.a0(a) / np;
    cmp.a0.push_back(std::max(a0, 1e-300));
  }
  cmp.max_rel_error.assign(r, 0.0);
  cmp.simulated.source = "gdln";
  cmp.simulated.run_id = static_cast<int>(tc.seed);
  cmp.simulated.mode_names = mode_names(r);
  cmp.predicted.source = "analytic";
  cmp.predicted.run_id = static_cast<int>(tc.seed);
  cmp.predicted.mode_names = mode_names(r);

  const double skip = transient * tc.epochs;
  tc.initialize = false;
  tc.observer = [&](int epoch, const GatedGraph& now) {
    std::vector<double> sim(r, 0.0);
    for (int p = 0; p < np; ++p) {
      const Vector b = block_mode_strengths(now.path_product(p), bases[p].U, bases[p].V,
                                            bases[p].groups);
      for (int a = 0; a < r; ++a) sim[a] += b(a) / np;
    }
    std::vector<double> pred(r);
    for (int a = 0; a < r; ++a) {
      pred[a] = predict(cmp.S[a], cmp.D[a], cmp.a0[a], epoch);
      if (epoch >= skip) {
        cmp.max_rel_error[a] = std::max(cmp.max_rel_error[a],
                                        std::abs(sim[a] - pred[a]) / fixed(cmp.S[a], cmp.D[a]));
      }
    }
    cmp.simulated.mode_values.push_back(std::move(sim));
    cmp.predicted.mode_values.push_back(std::move(pred));
  };
  const Trajectory tr = train(g, gates, data, tc);
  cmp.simulated.epochs = tr.epochs;
  cmp.simulated.loss = tr.loss;
  cmp.predicted.epochs = tr.epochs;
  cmp.predicted.loss.assign(tr.epochs.size(), std::nan(""));
  return cmp;
}

GatedGraph two_layer_graph(const Dataset& data, int hidden) {
  GatedGraph g;
  const int x = g.add_node("x", data.input_dim(), NodeRole::kInput);
  const int h = g.add_node("h", hidden, NodeRole::kHidden);
  const int y = g.add_node("y", data.output_dim(), NodeRole::kOutput);
  g.add_edge("x->h", x, h);
  g.add_edge("h->y", h, y);
  g.finalize();
  return g;
}

double worst(const std::vector<double>& v) {
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

}  // namespace

// ---- deep linear hierarchy -----------------------------------------------

ModeComparison run_deep_linear(const DeepLinearConfig& cfg) {
  const Dataset data = build_hierarchy_dataset(cfg.n_items);
  GatedGraph g = two_layer_graph(data, cfg.hidden);
  const GatingTable gates = GatingTable::all_on(g, data.size());
  init_weights(g, cfg.init_scale, cfg.seed);
  TrainConfig tc;
  tc.learning_rate = cfg.learning_rate;
  tc.epochs = cfg.epochs;
  tc.seed = cfg.seed;
  tc.record_every = cfg.record_every;
  const double tau = 1.0 / (data.size() * cfg.learning_rate);
  return compare_modes(
      g, gates, data, tc, cfg.transient,
      [tau](double s, double d, double a0, double t) {
        return linear_mode_trajectory({s, d, a0, tau}, t);
      },
      [](double s, double d) { return s / d; });
}

Trajectory predicted_dynamics(const GatedGraph& g, const GatingTable& gates, const Dataset& data,
                              double learning_rate, int epochs, int record_every) {
  require(learning_rate > 0.0, ErrorKind::kInvalidParameter, "learning rate must be positive");
  const PathwayStats st = pathway_stats(g, gates, data);
  RaceSystem sys = race_system_from_stats(g, st, 1.0);
  for (int p = 0; p < g.num_paths(); ++p) sys.B0[p] = path_basis(g, st, p).a0.cwiseMax(1e-300);
  const double tau = 1.0 / (data.size() * learning_rate);
  double max_s = 0.0;
  for (const Vector& s : sys.S) {
    if (s.size() > 0) max_s = std::max(max_s, s.maxCoeff());
  }
  const int sub = std::max(1, static_cast<int>(std::ceil(10.0 * max_s / tau)));
  return race_reduction_integrate(sys, tau, 1.0 / sub, epochs * sub, record_every * sub);
}

// ---- three-context equivalence --------------------------------------------

Dataset context_task_dataset(const ContextTaskConfig& cfg) {
  return build_contextual_hierarchy(cfg.items, cfg.contexts, cfg.permute_seed);
}

namespace {

TrainConfig task_train_config(const ContextTaskConfig& cfg) {
  TrainConfig tc;
  tc.learning_rate = cfg.learning_rate;
  tc.epochs = cfg.epochs;
  tc.init_scale = cfg.init_scale;
  tc.seed = cfg.seed;
  tc.record_every = cfg.record_every;
  tc.output_epochs = cfg.output_epochs;
  return tc;
}

ReluConfig task_relu_config(const ContextTaskConfig& cfg) {
  ReluConfig rc;
  rc.hidden_widths = {cfg.relu_hidden};
  rc.learning_rate = cfg.learning_rate;
  rc.epochs = cfg.epochs;
  rc.init_scale = cfg.init_scale;
  rc.seed = cfg.seed;
  rc.record_every = cfg.record_every;
  rc.output_epochs = cfg.output_epochs;
  return rc;
}

}  // namespace

EquivalenceResult run_context_equivalence(const ContextTaskConfig& cfg) {
  require(cfg.contexts >= 3, ErrorKind::kInvalidParameter, "need at least three contexts");
  EquivalenceResult res;
  res.data = context_task_dataset(cfg);
  res.relu = train_relu(res.data, task_relu_config(cfg));

  const TrainConfig tc = task_train_config(cfg);
  RelnNetwork reln = build_reln_graph(res.data, {RelnKind::kContextual, cfg.contexts,
                                                 cfg.contexts - 1, true},
                                      cfg.reln_hidden);
  res.reln = train(reln.graph, reln.gates, res.data, tc);

  RelnNetwork single =
      build_reln_graph(res.data, {RelnKind::kContextual, cfg.contexts, 1, true}, cfg.reln_hidden);
  res.single = train(single.graph, single.gates, res.data, tc);
  res.single.run_id = 1;

  init_weights(reln.graph, cfg.init_scale, cfg.seed);
  res.reduction = predicted_dynamics(reln.graph, reln.gates, res.data, cfg.learning_rate,
                                     cfg.epochs, cfg.record_every);

  res.l2_reln = l2_distance(res.reln, res.relu.trajectory);
  res.l2_single = l2_distance(res.single, res.relu.trajectory);
  for (int e : cfg.output_epochs) {
    const Matrix* a = res.reln.output_at(e);
    const Matrix* b = res.relu.trajectory.output_at(e);
    if (!a || !b) continue;
    res.output_epochs.push_back(e);
    res.output_max_diff.push_back((*a - *b).cwiseAbs().maxCoeff());
  }
  return res;
}

// ---- closed forms for C contexts ------------------------------------------

std::vector<ClosedFormCase> run_closed_forms(const ClosedFormConfig& cfg) {
  std::vector<ClosedFormCase> out;
  for (int c : cfg.contexts) {
    require(c >= 3, ErrorKind::kInvalidParameter, "closed forms need at least three contexts");
    ClosedFormCase cs;
    cs.contexts = c;
    const Dataset data = build_contextual_hierarchy(cfg.items, c, std::nullopt);
    cs.tau = 1.0 / (data.size() * cfg.learning_rate);
    const double tau = cs.tau;

    TrainConfig tc;
    tc.learning_rate = cfg.learning_rate;
    tc.epochs = cfg.epochs;
    tc.seed = cfg.seed;
    tc.record_every = cfg.snapshot_every;

    GatedGraph g = two_layer_graph(data, cfg.hidden);
    const GatingTable gates = GatingTable::all_on(g, data.size());
    init_weights(g, cfg.init_scale, cfg.seed);
    cs.common = compare_modes(
        g, gates, data, tc, cfg.transient,
        [tau](double s, double d, double a0, double t) {
          return linear_mode_trajectory({s, d, a0, tau}, t);
        },
        [](double s, double d) { return s / d; });

    const Dataset residual = residual_dataset(data);
    RelnNetwork net =
        build_reln_graph(residual, {RelnKind::kContextual, c, c - 1, false}, cfg.hidden);
    init_weights(net.graph, cfg.init_scale, cfg.seed);
    cs.contextual = compare_modes(
        net.graph, net.gates, residual, tc, cfg.transient,
        [c, tau](double s, double d, double a0, double t) {
          return contextual_closed_form(c, s, d, a0, tau, t);
        },
        [c](double s, double d) { return (c - 1) * s / d; });

    cs.common_max_error = worst(cs.common.max_rel_error);
    cs.contextual_max_error = worst(cs.contextual.max_rel_error);
    cs.context_S = cs.contextual.S;
    cs.context_D = cs.contextual.D;
    out.push_back(std::move(cs));
  }
  return out;
}

// ---- gate recovery --------------------------------------------------------

std::vector<std::vector<std::uint8_t>> expected_context_patterns(const Dataset& data) {
  require(data.contextual(), ErrorKind::kInapplicable, "dataset has no contexts");
  std::vector<std::vector<std::uint8_t>> out;
  out.emplace_back(data.size(), 1);
  for (int left_out = 0; left_out < data.num_contexts; ++left_out) {
    std::vector<std::uint8_t> p(data.size());
    for (int i = 0; i < data.size(); ++i) p[i] = data.context_ids[i] != left_out ? 1 : 0;
    out.push_back(std::move(p));
  }
  return out;
}

GateRecoveryResult run_gate_recovery(const GateRecoveryConfig& cfg, bool scan) {
  require(cfg.runs >= 1 && cfg.sample_every >= 1, ErrorKind::kInvalidParameter,
          "runs and sample_every must be positive");
  GateRecoveryResult res;
  const Dataset data = context_task_dataset(cfg.task);
  ReluConfig rc = task_relu_config(cfg.task);
  rc.output_epochs.clear();
  rc.record_every = cfg.sample_every;
  const std::vector<std::vector<std::uint8_t>> expected = expected_context_patterns(data);

  auto stack_for = [&](std::uint64_t base) {
    ReluConfig c = rc;
    c.seed = base;
    return collect_samples(data, c, cfg.runs, cfg.sample_every);
  };

  std::optional<SampleStack> first;
  if (scan) {
    first = stack_for(cfg.seed);
    ReluConfig ref = rc;
    ref.seed = cfg.seed;
    ref.output_every = cfg.sample_every;
    const ReluRun reference = train_relu(data, ref);
    ElbowOptions eo;
    eo.threshold = cfg.threshold;
    eo.hidden_per_pathway = cfg.hidden_per_pathway;
    eo.seed = cfg.seed;
    res.scan = elbow_scan(data, *first, cfg.k_range, reference.trajectory, rc, eo);
    res.elbow_k = select_elbow(res.scan);
    auto mse = [&](int k) -> std::optional<double> {
      for (const ElbowPoint& p : res.scan) {
        if (p.k == k && !p.failed) return p.imitation_mse;
      }
      return std::nullopt;
    };
    const auto before = mse(cfg.recovery_k - 1);
    const auto at = mse(cfg.recovery_k);
    const auto after = mse(cfg.recovery_k + 1);
    if (before && at) res.drop_in = *before - *at;
    if (at && after) res.drop_out = *at - *after;
    for (const ElbowPoint& p : res.scan) {
      if (p.k >= 2 && p.k <= 4 && !p.failed) res.fig8.push_back(p.clustering);
    }
  }

  for (int r = 0; r < cfg.recovery_seeds; ++r) {
    const std::uint64_t base = cfg.seed + static_cast<std::uint64_t>(r) * cfg.runs;
    SampleStack stack = (r == 0 && first) ? *first : stack_for(base);
    const GateClustering c = kmeans(stack, cfg.recovery_k, base);
    const BinarizedGates b = binarize_centroids(c, cfg.threshold);
    res.recovered.push_back(same_patterns(b.patterns, expected));
    res.recovered_patterns.push_back(b.patterns);
  }
  return res;
}

// ---- gating conformity ----------------------------------------------------

namespace {

GatingConformity classify(const BinaryMatrix& pattern, const Dataset& data,
                          const std::vector<bool>& negligible) {
  require(data.contextual(), ErrorKind::kInapplicable, "dataset has no contexts");
  require(pattern.cols() == data.size(), ErrorKind::kShape,
          "pattern columns must match the datapoints");
  GatingConformity out;
  out.units = static_cast<int>(pattern.rows());
  for (Eigen::Index h = 0; h < pattern.rows(); ++h) {
    int active = 0;
    for (Eigen::Index i = 0; i < pattern.cols(); ++i) active += pattern(h, i) ? 1 : 0;
    if (active == 0 || negligible[h]) {
      ++out.dead;
      continue;
    }
    bool by_context = true;
    std::vector<int> seen(data.num_contexts, -1);
    for (int i = 0; i < data.size() && by_context; ++i) {
      int& v = seen[data.context_ids[i]];
      if (v < 0) v = pattern(h, i);
      by_context = v == pattern(h, i);
    }
    if (by_context) {
      ++out.context_only;
    } else if (active == 1) {
      ++out.single_datapoint;
    } else {
      ++out.other;
    }
  }
  return out;
}

}  // namespace

GatingConformity gating_conformity(const BinaryMatrix& pattern, const Dataset& data) {
  return classify(pattern, data, std::vector<bool>(pattern.rows(), false));
}

GatingConformity gating_conformity(const MlpState& state, const Dataset& data, double dead_tol) {
  require(state.num_hidden_layers() >= 1, ErrorKind::kInapplicable, "network has no hidden layer");
  const BinaryMatrix pattern = activation_pattern(state, data.inputs, 0);
  const Eigen::Index h = pattern.rows();
  Vector scale(h);
  for (Eigen::Index u = 0; u < h; ++u) {
    scale(u) = state.weights[0].row(u).norm() * state.weights[1].col(u).norm();
  }
  const double top = h > 0 ? scale.maxCoeff() : 0.0;
  std::vector<bool> negligible(h);
  for (Eigen::Index u = 0; u < h; ++u) negligible[u] = scale(u) <= dead_tol * top;
  return classify(pattern, data, negligible);
}

// ---- depth-two ensembles --------------------------------------------------

DepthResult run_depth_ensemble(const DepthConfig& cfg) {
  require(cfg.runs >= 1, ErrorKind::kInvalidParameter, "runs must be positive");
  DepthResult res;
  const Dataset data = context_task_dataset(cfg.task);
  for (int r = 0; r < cfg.runs; ++r) {
    const std::uint64_t seed = cfg.task.seed + static_cast<std::uint64_t>(r);
    ReluConfig rc;
    rc.hidden_widths = {cfg.hidden, cfg.hidden};
    rc.learning_rate = cfg.task.learning_rate;
    rc.epochs = cfg.epochs;
    rc.init_scale = cfg.init_scale;
    rc.seed = seed;
    rc.record_every = cfg.record_every;
    ReluRun run = train_relu(data, rc);
    const BinaryMatrix first = activation_pattern(run.state, data.inputs, 0);
    for (Eigen::Index u = 0; u < first.rows(); ++u) {
      ++res.first_layer_units;
      const int active = first.row(u).cast<int>().sum();
      if (active == 0) {
        ++res.first_layer_dead;
      } else if (active == first.cols()) {
        ++res.first_layer_all_active;
      }
    }
    res.relu.push_back(std::move(run.trajectory));

    if (cfg.train_gdln) {
      RelnNetwork net = build_reln_graph(
          data, {RelnKind::kDepth2Contextual, cfg.task.contexts, cfg.task.contexts - 1, true},
          cfg.hidden, cfg.hidden);
      TrainConfig tc;
      tc.learning_rate = cfg.task.learning_rate;
      tc.epochs = cfg.epochs;
      tc.init_scale = cfg.init_scale;
      tc.seed = seed;
      tc.record_every = cfg.record_every;
      res.gdln.push_back(train(net.graph, net.gates, data, tc));
    }
  }
  res.relu_stereotypical = select_stereotypical_run(res.relu);
  res.relu_plateaus = count_plateaus(res.relu[res.relu_stereotypical]);
  res.relu_final = res.relu[res.relu_stereotypical].loss.back();
  if (!res.gdln.empty()) {
    res.gdln_stereotypical = select_stereotypical_run(res.gdln);
    res.gdln_plateaus = count_plateaus(res.gdln[res.gdln_stereotypical]);
    res.gdln_final = res.gdln[res.gdln_stereotypical].loss.back();
  }
  return res;
}

}  // namespace reln

// ---- structural checks ----------------------------------------------------

namespace reln {

double VerificationResult::worst_gradient_error() const {
  double w = 0.0;
  for (const NamedGradientCheck& g : gradients) w = std::max(w, g.report.max_rel_error);
  return w;
}

std::vector<std::pair<std::string, Dataset>> preset_datasets() {
  std::vector<std::pair<std::string, Dataset>> out;
  for (double delta : {0.0, 0.5, crossover_delta(), 1.2}) {
    out.emplace_back("xor_" + std::to_string(delta).substr(0, 4), build_xor_margin(delta));
  }
  out.emplace_back("hierarchy", build_hierarchy_dataset(4));
  for (int c : {3, 4, 5}) {
    out.emplace_back("context" + std::to_string(c), build_contextual_hierarchy(8, c, std::nullopt));
  }
  out.emplace_back("context3_permuted", build_contextual_hierarchy(8, 3, std::uint64_t{1}));
  return out;
}

std::vector<std::pair<std::string, RelnNetwork>> preset_graphs(int hidden) {
  std::vector<std::pair<std::string, RelnNetwork>> out;
  const Dataset xor_data = build_xor_margin(1.0);
  out.emplace_back("xor_linear", build_reln_graph(xor_data, {RelnKind::kXorLinear}, hidden));
  out.emplace_back("xor_pointwise", build_reln_graph(xor_data, {RelnKind::kXorPointwise}, hidden));
  const Dataset hier = build_hierarchy_dataset(4);
  RelnNetwork plain;
  plain.graph = two_layer_graph(hier, hidden);
  plain.gates = GatingTable::all_on(plain.graph, hier.size());
  plain.pathway_labels = {"x->y"};
  out.emplace_back("hierarchy", std::move(plain));
  for (int c : {3, 4, 5}) {
    const Dataset d = build_contextual_hierarchy(8, c, std::nullopt);
    out.emplace_back("context" + std::to_string(c),
                     build_reln_graph(d, {RelnKind::kContextual, c, c - 1, true}, hidden));
  }
  const Dataset d3 = build_contextual_hierarchy(8, 3, std::uint64_t{1});
  out.emplace_back("context3_single", build_reln_graph(d3, {RelnKind::kContextual, 3, 1, true}, hidden));
  out.emplace_back("context3_residual",
                   build_reln_graph(residual_dataset(d3), {RelnKind::kContextual, 3, 2, false}, hidden));
  out.emplace_back("depth2",
                   build_reln_graph(d3, {RelnKind::kDepth2Contextual, 3, 2, true}, hidden, hidden));
  return out;
}

namespace {

Dataset graph_dataset(const std::string& name) {
  if (name.rfind("xor", 0) == 0) return build_xor_margin(1.0);
  if (name == "hierarchy") return build_hierarchy_dataset(4);
  if (name == "context3_residual") return residual_dataset(build_contextual_hierarchy(8, 3, std::uint64_t{1}));
  if (name == "context3_single" || name == "depth2") {
    return build_contextual_hierarchy(8, 3, std::uint64_t{1});
  }
  return build_contextual_hierarchy(8, name.back() - '0', std::nullopt);
}

std::vector<int> random_subset(int n, std::mt19937_64& rng) {
  std::vector<int> out;
  std::bernoulli_distribution keep(0.5);
  for (int i = 0; i < n; ++i) {
    if (keep(rng)) out.push_back(i);
  }
  if (out.empty()) out.push_back(std::uniform_int_distribution<int>(0, n - 1)(rng));
  return out;
}

}  // namespace

VerificationResult run_verification(const VerificationConfig& cfg) {
  require(cfg.max_dim >= 1, ErrorKind::kInvalidParameter, "max_dim must be positive");
  VerificationResult res;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> dim(1, cfg.max_dim);

  auto record = [&](const InterlacingReport& rep, int& checked, int& passed) {
    ++checked;
    if (rep.holds) ++passed;
    res.worst_violation = std::max(res.worst_violation, rep.max_violation);
  };

  for (int m = 0; m < cfg.random_matrices; ++m) {
    Matrix a(dim(rng), dim(rng));
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
    record(interlacing_check(a, random_subset(static_cast<int>(a.rows()), rng),
                             random_subset(static_cast<int>(a.cols()), rng)),
           res.random_checked, res.random_passed);
  }
  for (const auto& [name, data] : preset_datasets()) {
    const Matrix syx = correlation_stats(data).sigma_yx;
    for (int k = 0; k < cfg.draws_per_preset; ++k) {
      record(interlacing_check(syx, random_subset(static_cast<int>(syx.rows()), rng),
                               random_subset(static_cast<int>(syx.cols()), rng)),
             res.preset_checked, res.preset_passed);
    }
  }

  const Dataset context3 = build_contextual_hierarchy(8, 3, std::uint64_t{1});
  res.removal = datapoint_removal_check(context3);
  res.removal_subsets = context3.size();

  for (auto& [name, net] : preset_graphs(16)) {
    GradientCheckOptions go;
    go.n_points = cfg.gradient_points;
    go.seed = cfg.seed;
    res.gradients.push_back(
        {name, gradient_check(net.graph, net.gates, graph_dataset(name), go)});
  }
  return res;
}

}  // namespace reln
