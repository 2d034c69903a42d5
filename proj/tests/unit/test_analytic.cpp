#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "reln/analytic.hpp"
#include "reln/error.hpp"

using namespace reln;

TEST(Analytic, LinearModeMatchesOdeOracle) {
  // tau da/dt = 2 a (lambda - d a)
  for (const ModeParams p : {ModeParams{1.0, 1.0, 1e-4, 10.0}, ModeParams{0.3, 0.25, 1e-6, 2.5},
                             ModeParams{2.0, 3.0, 0.1, 1.0}}) {
    const auto rhs = [&](double, const oracle::State& a) {
      return oracle::State{2.0 * a[0] * (p.lambda - p.delta_x * a[0]) / p.tau};
    };
    for (double t : {0.5, 5.0, 20.0, 80.0}) {
      const double ode = oracle::rk4(rhs, {p.a0}, 0.0, t, 20000)[0];
      EXPECT_NEAR(linear_mode_trajectory(p, t), ode, 1e-9 * (p.lambda / p.delta_x));
    }
  }
}

TEST(Analytic, LinearModeLimits) {
  const ModeParams p{0.8, 0.5, 1e-5, 3.0};
  EXPECT_DOUBLE_EQ(linear_mode_trajectory(p, 0.0), p.a0);
  EXPECT_NEAR(linear_mode_trajectory(p, 1e4), p.lambda / p.delta_x, 1e-12);
  EXPECT_DOUBLE_EQ(linear_mode_trajectory({0.0, 1.0, 1e-3, 1.0}, 50.0), 1e-3);
  EXPECT_THROW(linear_mode_trajectory({1.0, 0.0, 1e-3, 1.0}, 1.0), Error);
  EXPECT_THROW(linear_mode_trajectory({1.0, 1.0, 1e-3, 1.0}, -1.0), Error);
}

TEST(Analytic, TimeToModeValueInvertsTrajectory) {
  const ModeParams p{0.6, 0.4, 1e-6, 7.0};
  for (double target : {1e-3, 0.5, 1.2, 1.49}) {
    const double bis = oracle::bisect(
        [&](double t) { return linear_mode_trajectory(p, t) - target; }, 0.0, 1e4);
    EXPECT_NEAR(time_to_mode_value(p, target), bis, 1e-8);
  }
  EXPECT_THROW(time_to_mode_value(p, 2.0), Error);
}

TEST(Analytic, XorCrossoverAtEqualSingularValues) {
  EXPECT_NEAR(crossover_delta(), std::sqrt(2.0 / 3.0), 1e-12);
  const double c = crossover_delta();
  const XorPathway lin = xor_pathway(c, XorVariant::kLinearGating);
  const XorPathway xr = xor_pathway(c, XorVariant::kXorGating);
  EXPECT_NEAR(lin.s, xr.s, 1e-12);
  EXPECT_LT(xor_pathway(c - 0.1, XorVariant::kLinearGating).s,
            xor_pathway(c - 0.1, XorVariant::kXorGating).s);
  EXPECT_GT(xor_pathway(c + 0.1, XorVariant::kLinearGating).s,
            xor_pathway(c + 0.1, XorVariant::kXorGating).s);
}

TEST(Analytic, XorLossStartsAtHalfAndFallsToThreshold) {
  const double a0 = 1e-8, tau = 2.5;
  for (double delta : {0.3, 0.8165, 1.4}) {
    for (auto v : {XorVariant::kLinearGating, XorVariant::kXorGating}) {
      EXPECT_NEAR(xor_gdln_loss(delta, 0.0, v, a0, tau).loss, 0.5, 1e-6);
      const auto t = xor_time_to_loss(delta, 0.2, v, a0, tau);
      ASSERT_TRUE(t.has_value());
      const double bis = oracle::bisect(
          [&](double x) { return 0.2 - xor_gdln_loss(delta, x, v, a0, tau).loss; }, 0.0, 1e4);
      EXPECT_NEAR(*t, bis, 1e-7);
    }
  }
  EXPECT_TRUE(xor_gdln_loss(0.0, 10.0, XorVariant::kLinearGating, a0, tau).degenerate);
  EXPECT_FALSE(xor_time_to_loss(0.0, 0.2, XorVariant::kLinearGating, a0, tau).has_value());
}

TEST(Analytic, ContextualClosedFormMatchesCoupledOde) {
  // C symmetric pathways, each coupled to the others through the output
  // overlap -1/(C-1) and input overlap (C-2)/(C-1).
  for (int c : {3, 4, 5}) {
    const double s = 0.35, d = 0.6, b0 = 1e-5, tau = 41.0;
    const double k_out = -1.0 / (c - 1), k_in = (c - 2.0) / (c - 1);
    const auto rhs = [&](double, const oracle::State& b) {
      oracle::State out(b.size());
      for (int p = 0; p < c; ++p) {
        double drive = s - d * b[p];
        for (int j = 0; j < c; ++j) {
          if (j != p) drive -= k_out * k_in * d * b[j];
        }
        out[p] = 2.0 * b[p] * drive / tau;
      }
      return out;
    };
    for (double t : {100.0, 400.0, 1500.0}) {
      const double ode = oracle::rk4(rhs, oracle::State(c, b0), 0.0, t, 60000)[0];
      const double cf = contextual_closed_form(c, s, d, b0, tau, t);
      EXPECT_NEAR(cf, ode, 1e-8 * std::abs(ode)) << "C=" << c << " t=" << t;
    }
    EXPECT_NEAR(contextual_closed_form(c, s, d, b0, tau, 1e6), (c - 1) * s / d, 1e-12);
  }
}

TEST(Analytic, CouplingMatchesResidualStatistics) {
  for (int c : {3, 4, 5}) {
    const Dataset data = build_contextual_hierarchy(8, c, std::nullopt);
    const Dataset res = residual_dataset(data);
    const RelnNetwork net = build_reln_graph(res, {RelnKind::kContextual, c, c - 1, false}, 40);
    const PathwayStats st = pathway_stats(net.graph, net.gates, res);
    const CouplingCoefficients k = coupling_coefficients(c);
    // input overlap of two gated pathways relative to a pathway's own covariance
    const Matrix& own = st.sigma_x(0, 0);
    const Matrix& cross = st.sigma_x(1, 0);
    EXPECT_LT((cross - k.input_overlap * own).norm(), 1e-12);
    // output singular vectors overlap by -1/(C-1) on the leading mode block
    const Matrix ov = st.svd[0].U.leftCols(1).transpose() * st.svd[1].U.leftCols(1);
    EXPECT_NEAR(ov(0, 0), k.output_overlap, 1e-9);
  }
}

TEST(Analytic, RaceReductionCollapsesToLinearMode) {
  RaceSystem sys;
  sys.depth = {2};
  sys.S = {Vector::Constant(1, 0.5)};
  sys.B0 = {Vector::Constant(1, 1e-4)};
  sys.overlap = {{Matrix::Identity(1, 1)}};
  sys.input_var = {{Matrix::Identity(1, 1)}};
  const double tau = 20.0;
  const Trajectory t = race_reduction_integrate(sys, tau, 0.002, 200000, 5000);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double pred = linear_mode_trajectory({0.5, 1.0, 1e-4, tau}, t.epochs[i]);
    EXPECT_NEAR(t.mode_values[i][0], pred, 1e-4);
  }
  EXPECT_THROW(race_reduction_integrate(sys, tau, 100.0, 10), Error);
}

TEST(Analytic, InertPathwayStaysNearZero) {
  RaceSystem sys;
  sys.depth = {2, 2};
  sys.S = {Vector::Constant(1, 0.5), Vector::Constant(1, 0.0)};
  sys.B0 = {Vector::Constant(1, 1e-4), Vector::Constant(1, 1e-4)};
  sys.overlap = {{Matrix::Identity(1, 1), Matrix::Identity(1, 1)},
                 {Matrix::Identity(1, 1), Matrix::Identity(1, 1)}};
  sys.input_var = {{Matrix::Constant(1, 1, 0.25), Matrix::Constant(1, 1, 0.25)},
                   {Matrix::Constant(1, 1, 0.25), Matrix::Constant(1, 1, 0.25)}};
  const Trajectory t = race_reduction_integrate(sys, 20.0, 0.05, 20000, 20000);
  EXPECT_LT(t.mode_values.back()[1], 1e-4);
  EXPECT_NEAR(t.mode_values.back()[0], 2.0, 1e-3);
}

TEST(Analytic, DegenerateGroupsAndBlockStrengths) {
  Vector s(5);
  s << 2.0, 1.0, 1.0 + 1e-9, 0.5, 0.5;
  const auto g = degenerate_groups(s);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g[1].begin, 1);
  EXPECT_EQ(g[1].end, 3);
  // a rotation inside a degenerate block leaves the block strengths unchanged
  Matrix u = Matrix::Identity(5, 5), v = Matrix::Identity(5, 5);
  Matrix w = Matrix::Zero(5, 5);
  w(0, 0) = 3;
  w.block(1, 1, 2, 2) << 0.6, -0.8, 0.8, 0.6;
  const Vector b = block_mode_strengths(w, u, v, g);
  EXPECT_NEAR(b(0), 3.0, 1e-12);
  EXPECT_NEAR(b(1), 1.0, 1e-12);
  EXPECT_NEAR(b(2), 1.0, 1e-12);
}
