#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "reln/analytic.hpp"
#include "reln/error.hpp"
#include "reln/gdln.hpp"

using namespace reln;

namespace {

GatedGraph chain(int d, int h, int p) {
  GatedGraph g;
  const int x = g.add_node("x", d, NodeRole::kInput);
  const int hid = g.add_node("h", h, NodeRole::kHidden);
  const int y = g.add_node("y", p, NodeRole::kOutput);
  g.add_edge("a", x, hid);
  g.add_edge("b", hid, y);
  g.finalize();
  return g;
}

// x -> {h1, h2} -> y with h2 gated by datapoint parity.
struct Diamond {
  GatedGraph g;
  GatingTable gates;
};

Diamond diamond(const Dataset& d) {
  Diamond out;
  GatedGraph& g = out.g;
  const int x = g.add_node("x", d.input_dim(), NodeRole::kInput);
  const int h1 = g.add_node("h1", 3, NodeRole::kHidden);
  const int h2 = g.add_node("h2", 2, NodeRole::kHidden);
  const int y = g.add_node("y", d.output_dim(), NodeRole::kOutput);
  g.add_edge("x-h1", x, h1);
  g.add_edge("x-h2", x, h2);
  g.add_edge("h1-y", h1, y);
  g.add_edge("h2-y", h2, y);
  g.finalize();
  out.gates = GatingTable::all_on(g, d.size());
  for (int i = 0; i < d.size(); i += 2) out.gates.set_node(i, h2, false);
  out.gates.set_edge(1, 2, false);
  return out;
}

}  // namespace

TEST(Gdln, ChainForwardIsMatrixProduct) {
  const Dataset d = build_hierarchy_dataset(4);
  GatedGraph g = chain(4, 5, 7);
  init_weights(g, 0.5, 3);
  const GatingTable gates = GatingTable::all_on(g, d.size());
  const Matrix expect = g.edge(1).weight * g.edge(0).weight * d.inputs;
  EXPECT_LT((predict(g, gates, d) - expect).norm(), 1e-12);
  EXPECT_EQ(g.num_paths(), 1);
}

TEST(Gdln, ZeroWeightsLossIsHalfTargetPower) {
  const Dataset d = build_xor_margin(0.7);
  GatedGraph g = chain(3, 4, 1);
  const GatingTable gates = GatingTable::all_on(g, d.size());
  EXPECT_NEAR(loss(g, gates, d), 0.5, 1e-15);
  const auto grad = gradient(g, gates, d);
  EXPECT_TRUE(grad[0].isZero());
  EXPECT_TRUE(grad[1].isZero());
}

TEST(Gdln, GatedForwardMatchesManualSum) {
  const Dataset d = build_contextual_hierarchy(4, 3, std::nullopt);
  Diamond dm = diamond(d);
  init_weights(dm.g, 0.4, 9);
  const Matrix out = predict(dm.g, dm.gates, d);
  const auto& e = dm.g.edges();
  for (int i = 0; i < d.size(); ++i) {
    Vector y = Vector::Zero(d.output_dim());
    if (i != 1) y += e[2].weight * e[0].weight * d.inputs.col(i);
    if (i % 2 == 1) y += e[3].weight * e[1].weight * d.inputs.col(i);
    EXPECT_LT((out.col(i) - y).norm(), 1e-12) << "datapoint " << i;
  }
}

TEST(Gdln, GradientMatchesFiniteDifferences) {
  const Dataset d = build_contextual_hierarchy(4, 3, std::uint64_t{2});
  Diamond dm = diamond(d);
  init_weights(dm.g, 0.3, 4);
  const auto grad = gradient(dm.g, dm.gates, d);
  for (int e = 0; e < dm.g.num_edges(); ++e) {
    Matrix& w = dm.g.edge(e).weight;
    const Matrix fd = oracle::neg_fd_gradient([&] { return loss(dm.g, dm.gates, d); }, w);
    EXPECT_LT(oracle::rel_err(grad[e], fd), 1e-7) << "edge " << e;
  }
}

TEST(Gdln, LossFromStatsEqualsForwardLoss) {
  const Dataset d = build_contextual_hierarchy(4, 3, std::uint64_t{5});
  Diamond dm = diamond(d);
  init_weights(dm.g, 0.3, 8);
  const PathwayStats st = pathway_stats(dm.g, dm.gates, d);
  EXPECT_NEAR(loss_from_stats(dm.g, st), loss(dm.g, dm.gates, d), 1e-12);
}

TEST(Gdln, EffectiveStatsOfAlwaysOnPathAreDatasetStats) {
  const Dataset d = build_hierarchy_dataset(4);
  GatedGraph g = chain(4, 3, 7);
  const PathwayStats st = pathway_stats(g, GatingTable::all_on(g, 4), d);
  EXPECT_LT((st.sigma_yx[0] - oracle::outer_mean(d.targets, d.inputs, 4)).norm(), 1e-14);
  EXPECT_LT((st.sigma_x(0, 0) - oracle::outer_mean(d.inputs, d.inputs, 4)).norm(), 1e-14);
}

TEST(Gdln, GatedOffPathIsInert) {
  const Dataset d = build_hierarchy_dataset(4);
  GatedGraph g = chain(4, 3, 7);
  GatingTable gates(d.size(), g.num_nodes(), g.num_edges(), true);
  for (int i = 0; i < d.size(); ++i) gates.set_edge(i, 0, false);
  const PathwayStats st = pathway_stats(g, gates, d);
  EXPECT_TRUE(st.inert[0]);
  init_weights(g, 0.5, 1);
  for (const Matrix& m : gradient(g, gates, d)) EXPECT_TRUE(m.isZero());
}

TEST(Gdln, TrainingDescendsAndIsDeterministic) {
  const Dataset d = build_hierarchy_dataset(4);
  TrainConfig tc;
  tc.learning_rate = 0.01;
  tc.epochs = 500;
  tc.init_scale = 0.01;
  tc.seed = 3;
  tc.record_every = 50;
  GatedGraph a = chain(4, 8, 7), b = chain(4, 8, 7);
  const GatingTable gates = GatingTable::all_on(a, 4);
  const Trajectory ta = train(a, gates, d, tc);
  const Trajectory tb = train(b, gates, d, tc);
  EXPECT_EQ(ta.loss, tb.loss);
  EXPECT_LT(ta.loss.back(), ta.loss.front());
  EXPECT_EQ(ta.epochs.back(), 500);
}

TEST(Gdln, DivergenceIsReported) {
  const Dataset d = build_hierarchy_dataset(4);
  GatedGraph g = chain(4, 8, 7);
  TrainConfig tc;
  tc.learning_rate = 50.0;
  tc.epochs = 200;
  tc.init_scale = 0.5;
  EXPECT_THROW(train(g, GatingTable::all_on(g, 4), d, tc), DivergedError);
}

TEST(Gdln, ObserverSeesRecordedEpochs) {
  const Dataset d = build_hierarchy_dataset(4);
  GatedGraph g = chain(4, 8, 7);
  TrainConfig tc;
  tc.epochs = 30;
  tc.record_every = 10;
  std::vector<int> seen;
  tc.observer = [&](int e, const GatedGraph&) { seen.push_back(e); };
  train(g, GatingTable::all_on(g, 4), d, tc);
  EXPECT_EQ(seen, (std::vector<int>{0, 10, 20, 30}));
}

TEST(Gdln, UngatedChainFollowsLinearModeTrajectory) {
  const Dataset d = build_hierarchy_dataset(4);
  GatedGraph g = chain(4, 64, 7);
  const GatingTable gates = GatingTable::all_on(g, 4);
  init_weights(g, 1e-3, 2);
  const PathwayStats st = pathway_stats(g, gates, d);
  // top mode is nondegenerate; its balanced start is the mean of both layers' projections
  const Vector u = st.svd[0].U.col(0), v = st.svd[0].V.col(0);
  const Vector q = 0.5 * (g.edge(0).weight * v + g.edge(1).weight.transpose() * u);
  const double a0 = q.squaredNorm();
  TrainConfig tc;
  tc.learning_rate = 0.002;
  tc.epochs = 6000;
  tc.initialize = false;
  tc.record_every = 100;
  const double tau = 1.0 / (4 * tc.learning_rate);
  const double s = st.svd[0].S(0), dx = st.mode_variance[0](0);
  double worst = 0.0;
  tc.observer = [&](int e, const GatedGraph& now) {
    if (e < 300) return;
    const double sim = u.dot(now.path_product(0) * v);
    const double pred = linear_mode_trajectory({s, dx, a0, tau}, e);
    worst = std::max(worst, std::abs(sim - pred) / (s / dx));
  };
  train(g, gates, d, tc);
  EXPECT_LT(worst, 0.03);
}

TEST(Gdln, PresetPathCounts) {
  const Dataset c3 = build_contextual_hierarchy(8, 3, std::nullopt);
  EXPECT_EQ(build_reln_graph(c3, {RelnKind::kContextual, 3, 2, true}, 20).graph.num_paths(), 4);
  EXPECT_EQ(build_reln_graph(c3, {RelnKind::kContextual, 3, 2, false}, 20).graph.num_paths(), 3);
  EXPECT_EQ(build_reln_graph(c3, {RelnKind::kContextual, 3, 1, true}, 20).graph.num_paths(), 4);
  const RelnNetwork net = build_reln_graph(c3, {RelnKind::kContextual, 3, 2, true}, 20);
  const auto pats = path_gate_patterns(net);
  int always_on = 0;
  for (const auto& p : pats) {
    int on = 0;
    for (auto v : p) on += v;
    if (on == c3.size()) ++always_on;
    else EXPECT_EQ(on, 16);
  }
  EXPECT_EQ(always_on, 1);
  EXPECT_THROW(build_reln_graph(c3, {RelnKind::kContextual, 3, 2, true}, 2), Error);
}
