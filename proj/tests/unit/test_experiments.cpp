#include <cmath>

#include <gtest/gtest.h>

#include "reln/error.hpp"
#include "reln/experiments.hpp"

using namespace reln;

TEST(Experiments, SharpestBendFindsKink) {
  std::vector<double> x, y;
  for (int i = 0; i <= 15; ++i) {
    x.push_back(0.1 * i);
    y.push_back(std::min(60.0 - 5.0 * x.back(), 100.0 - 55.0 * x.back()));
  }
  EXPECT_NEAR(sharpest_bend(x, y), 0.8, 1e-12);
  EXPECT_THROW(sharpest_bend({0, 1}, {0, 1}), Error);
}

TEST(Experiments, XorInitialStrength) {
  EXPECT_DOUBLE_EQ(xor_initial_strength(128, 4e-8 / 128), 1e-8);
  EXPECT_THROW(xor_initial_strength(0, 1.0), Error);
}

TEST(Experiments, AnalyticXorKinkNearCrossover) {
  XorCrossoverConfig c;
  c.run_relu_on_grid = false;
  c.seeds = 1;
  c.probes = {0.4};
  const XorCrossoverResult r = run_xor_crossover(c);
  EXPECT_NEAR(r.analytic_kink, crossover_delta(), 0.1);
  EXPECT_FALSE(r.relu_kink.has_value());
  ASSERT_EQ(r.probes.size(), 1u);
  EXPECT_EQ(r.probes[0].relu.size(), 1u);
  EXPECT_EQ(r.curves.size(), r.curve_deltas.size());
  // linear gating beats XoR gating only past the crossover
  for (const XorPoint& p : r.grid) {
    if (p.linear && p.xor_) EXPECT_EQ(*p.linear < *p.xor_, p.delta > 0.85) << p.delta;
  }
}

TEST(Experiments, DeepLinearMatchesModeTrajectories) {
  const ModeComparison m = run_deep_linear({});
  ASSERT_EQ(m.max_rel_error.size(), 4u);
  for (double e : m.max_rel_error) EXPECT_LT(e, 0.02);
  EXPECT_EQ(m.simulated.mode_values.size(), m.simulated.epochs.size());
}

TEST(Experiments, ExpectedContextPatterns) {
  const Dataset d = build_contextual_hierarchy(8, 3, std::nullopt);
  const auto p = expected_context_patterns(d);
  ASSERT_EQ(p.size(), 4u);
  const RelnNetwork net = build_reln_graph(d, {RelnKind::kContextual, 3, 2, true}, 20);
  EXPECT_TRUE(same_patterns(p, path_gate_patterns(net)));
}

TEST(Experiments, GatingConformityClassifies) {
  const Dataset d = build_contextual_hierarchy(2, 3, std::nullopt);  // 6 datapoints
  BinaryMatrix p(5, 6);
  p << 1, 1, 0, 0, 1, 1,   // contexts 0 and 2
       0, 0, 0, 0, 0, 0,   // dead
       0, 0, 0, 1, 0, 0,   // single datapoint
       1, 0, 1, 0, 1, 0,   // item 0 everywhere
       1, 1, 1, 1, 1, 1;   // always on
  const GatingConformity g = gating_conformity(p, d);
  EXPECT_EQ(g.units, 5);
  EXPECT_EQ(g.dead, 1);
  EXPECT_EQ(g.context_only, 2);
  EXPECT_EQ(g.single_datapoint, 1);
  EXPECT_EQ(g.other, 1);
  EXPECT_DOUBLE_EQ(g.fraction(), 0.75);
}

TEST(Experiments, ConformityFromStateDropsNegligibleUnits) {
  const Dataset d = build_contextual_hierarchy(2, 3, std::nullopt);
  MlpState s = init_mlp(d.input_dim(), {3}, d.output_dim(), 1.0, 1);
  s.weights[0].setZero();
  s.weights[0](0, 2) = 1.0;  // context 0 unit
  s.weights[0](1, 0) = 1.0;  // item 0 unit, mixed across contexts
  s.weights[0](2, 3) = 1.0;  // context 1 unit
  s.weights[1].col(1) *= 1e-6;
  const GatingConformity g = gating_conformity(s, d, 1e-3);
  EXPECT_EQ(g.dead, 1);
  EXPECT_EQ(g.context_only, 2);
  EXPECT_EQ(g.other, 0);
}

TEST(Experiments, ClosedFormThreeContexts) {
  ClosedFormConfig c;
  c.contexts = {3};
  const auto cases = run_closed_forms(c);
  ASSERT_EQ(cases.size(), 1u);
  EXPECT_LT(cases[0].common_max_error, 0.03);
  EXPECT_LT(cases[0].contextual_max_error, 0.03);
  for (std::size_t a = 0; a < cases[0].context_S.size(); ++a) {
    EXPECT_GT(cases[0].context_S[a], 0.0);
  }
}

TEST(Experiments, PredictedDynamicsOfPlainChainIsSigmoidal) {
  const Dataset d = build_hierarchy_dataset(4);
  RelnNetwork net = preset_graphs(16)[2].second;
  ASSERT_EQ(preset_graphs(16)[2].first, "hierarchy");
  init_weights(net.graph, 1e-3, 1);
  const Trajectory t = predicted_dynamics(net.graph, net.gates, d, 0.002, 4000, 100);
  EXPECT_NEAR(t.loss.front(), 0.5 * correlation_stats(d).sigma_yx.size() * 0 +
                                  pathway_stats(net.graph, net.gates, d).sigma_y / 2, 1e-4);
  EXPECT_LT(t.loss.back(), 1e-3);
}

TEST(Experiments, VerificationSuiteSmall) {
  VerificationConfig c;
  c.random_matrices = 50;
  c.draws_per_preset = 5;
  c.gradient_points = 1;
  const VerificationResult r = run_verification(c);
  EXPECT_TRUE(r.interlacing_ok());
  EXPECT_TRUE(r.removal.holds);
  EXPECT_LT(r.worst_gradient_error(), 1e-5);
  EXPECT_EQ(r.random_checked, 50);
}
