#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "reln/dataset.hpp"
#include "reln/error.hpp"

using namespace reln;

TEST(Dataset, XorMarginShapeAndLabels) {
  const Dataset d = build_xor_margin(1.0);
  EXPECT_EQ(d.inputs.rows(), 3);
  EXPECT_EQ(d.size(), 4);
  EXPECT_EQ(d.output_dim(), 1);
  for (int i = 0; i < 4; ++i) {
    // label is the XoR of the first two inputs, the third carries the margin
    EXPECT_DOUBLE_EQ(d.targets(0, i), -d.inputs(0, i) * d.inputs(1, i));
    EXPECT_DOUBLE_EQ(d.inputs(2, i), d.targets(0, i) * 1.0);
  }
  EXPECT_THROW(build_xor_margin(-0.1), Error);
}

TEST(Dataset, HierarchyLabelsAreATree) {
  const Matrix l = build_hierarchy_labels(8);
  EXPECT_EQ(l.rows(), 15);
  EXPECT_EQ(l.cols(), 8);
  EXPECT_TRUE((l.row(0).array() == 1).all());
  EXPECT_TRUE((l.bottomRows(8) - Matrix::Identity(8, 8)).isZero());
  // every level partitions the items
  EXPECT_TRUE((l.middleRows(1, 2).colwise().sum().array() == 1).all());
  EXPECT_TRUE((l.middleRows(3, 4).colwise().sum().array() == 1).all());
  EXPECT_THROW(build_hierarchy_labels(6), Error);
}

TEST(Dataset, ContextualPresetShapes) {
  const Dataset d = build_contextual_hierarchy(8, 3, std::nullopt);
  EXPECT_EQ(d.input_dim(), 11);
  EXPECT_EQ(d.size(), 24);
  EXPECT_EQ(d.output_dim(), 60);
  EXPECT_EQ(d.num_contexts, 3);
  for (int i = 0; i < d.size(); ++i) {
    EXPECT_DOUBLE_EQ(d.inputs.col(i).sum(), 2.0);
    EXPECT_DOUBLE_EQ(d.inputs(d.item_ids[i], i), 1.0);
    EXPECT_DOUBLE_EQ(d.inputs(8 + d.context_ids[i], i), 1.0);
  }
  // context label blocks are zero outside their context
  for (const LabelBlock& b : d.label_blocks) {
    if (b.context == kSharedBlock) continue;
    for (int i = 0; i < d.size(); ++i) {
      if (d.context_ids[i] != b.context) {
        EXPECT_TRUE(d.targets.block(b.row_begin, i, b.row_end - b.row_begin, 1).isZero());
      }
    }
  }
}

TEST(Dataset, PermutedHierarchyPermutesColumns) {
  const Matrix base = build_hierarchy_labels(8);
  const Matrix p = permuted_hierarchy(8, 4);
  std::multiset<std::vector<double>> a, b;
  for (int c = 0; c < 8; ++c) {
    a.insert(std::vector<double>(base.col(c).data(), base.col(c).data() + base.rows()));
    b.insert(std::vector<double>(p.col(c).data(), p.col(c).data() + p.rows()));
  }
  EXPECT_EQ(a, b);
  EXPECT_TRUE(p.isApprox(permuted_hierarchy(8, 4)));
}

TEST(Dataset, CorrelationStatsMatchOuterProducts) {
  for (auto seed : {std::optional<std::uint64_t>{}, std::optional<std::uint64_t>{3}}) {
    const Dataset d = build_contextual_hierarchy(8, 3, seed);
    const CorrelationPair c = correlation_stats(d);
    EXPECT_LT((c.sigma_yx - oracle::outer_mean(d.targets, d.inputs, d.size())).norm(), 1e-12);
    EXPECT_LT((c.sigma_x - oracle::outer_mean(d.inputs, d.inputs, d.size())).norm(), 1e-12);
  }
}

TEST(Dataset, MaskedStatsKeepNormalization) {
  const Dataset d = build_contextual_hierarchy(8, 3, std::nullopt);
  DataMask m;
  std::vector<bool> keep(d.size());
  for (int i = 0; i < d.size(); ++i) keep[i] = d.context_ids[i] != 2;
  m.datapoints = keep;
  const CorrelationPair c = correlation_stats(d, m);
  Matrix x = d.inputs, y = d.targets;
  for (int i = 0; i < d.size(); ++i) {
    if (!keep[i]) {
      x.col(i).setZero();
      y.col(i).setZero();
    }
  }
  EXPECT_LT((c.sigma_yx - oracle::outer_mean(y, x, d.size())).norm(), 1e-12);
}

TEST(Dataset, HierarchyIsDiagonalizable) {
  const Dataset d = build_hierarchy_dataset(4);
  const CorrelationPair c = correlation_stats(d);
  EXPECT_TRUE(check_diagonalizable(c).diagonalizable);
  // identity inputs: mode variance is 1/N
  for (Eigen::Index a = 0; a < c.mode_variance.size(); ++a) {
    if (c.svd_yx.S(a) > 1e-12) EXPECT_NEAR(c.mode_variance(a), 0.25, 1e-12);
  }
}
