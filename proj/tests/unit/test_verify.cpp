#include <random>

#include <gtest/gtest.h>

#include "reln/error.hpp"
#include "reln/verify.hpp"

using namespace reln;

TEST(Verify, InterlacingHoldsOnRandomSubmatrices) {
  std::mt19937 rng(12);
  std::normal_distribution<double> n;
  for (int t = 0; t < 200; ++t) {
    Matrix m(6, 5);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
    std::vector<int> rows, cols;
    for (int r = 0; r < 6; ++r) if (rng() % 2) rows.push_back(r);
    for (int c = 0; c < 5; ++c) if (rng() % 2) cols.push_back(c);
    if (rows.empty()) rows.push_back(0);
    if (cols.empty()) cols.push_back(4);
    const InterlacingReport rep = interlacing_check(m, rows, cols);
    EXPECT_TRUE(rep.holds);
    // independent restatement of the ordering
    for (Eigen::Index j = 0; j < rep.beta.size(); ++j) EXPECT_LE(rep.beta(j), rep.sigma(j) + 1e-10);
  }
}

TEST(Verify, InterlacingDetectsViolation) {
  Matrix m = Matrix::Identity(3, 3);
  const InterlacingReport ok = interlacing_check(m, {0, 1}, {0, 1});
  EXPECT_TRUE(ok.holds);
  EXPECT_THROW(interlacing_check(m, {}, {0}), Error);
  EXPECT_THROW(interlacing_check(m, {3}, {0}), Error);
}

TEST(Verify, RemovalNeverIncreasesTopSingularValue) {
  for (int c : {3, 4}) {
    const Dataset d = build_contextual_hierarchy(8, c, std::uint64_t{1});
    const RemovalReport rep = datapoint_removal_check(d);
    EXPECT_TRUE(rep.holds);
    EXPECT_LE(rep.max_removed_top, rep.full_top);
    EXPECT_GE(rep.worst_datapoint, 0);
  }
  EXPECT_THROW(datapoint_removal_check(build_xor_margin(1.0)), Error);
}

TEST(Verify, AlignmentDiagnostic) {
  Matrix w = Matrix::Zero(3, 3);
  EXPECT_DOUBLE_EQ(alignment_diagnostic(w, Matrix::Identity(3, 3), Matrix::Identity(3, 3)), 0.0);
  w.diagonal() << 1, 2, 3;
  EXPECT_DOUBLE_EQ(alignment_diagnostic(w, Matrix::Identity(3, 3), Matrix::Identity(3, 3)), 0.0);
  w(0, 1) = 2;
  EXPECT_NEAR(alignment_diagnostic(w, Matrix::Identity(3, 3), Matrix::Identity(3, 3)),
              2.0 / std::sqrt(18.0), 1e-15);
}

TEST(Verify, GradientCheckPassesAndRestoresWeights) {
  const Dataset d = build_contextual_hierarchy(8, 3, std::nullopt);
  RelnNetwork net = build_reln_graph(d, {RelnKind::kContextual, 3, 2, true}, 12);
  init_weights(net.graph, 0.1, 1);
  const auto before = net.graph.weights();
  GradientCheckOptions o;
  o.n_points = 3;
  const GradientCheckReport rep = gradient_check(net.graph, net.gates, d, o);
  EXPECT_LT(rep.max_rel_error, 1e-5);
  EXPECT_EQ(rep.points, 3);
  const auto after = net.graph.weights();
  for (std::size_t e = 0; e < before.size(); ++e) EXPECT_TRUE(before[e] == after[e]);
}
