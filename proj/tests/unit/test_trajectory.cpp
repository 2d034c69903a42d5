#include <cmath>

#include <gtest/gtest.h>

#include "reln/error.hpp"
#include "reln/trajectory.hpp"

using namespace reln;

namespace {

Trajectory make(const std::vector<double>& e, const std::vector<double>& l) {
  Trajectory t;
  t.epochs = e;
  t.loss = l;
  return t;
}

}  // namespace

TEST(Trajectory, TimeToCriterionInterpolates) {
  const Trajectory t = make({0, 10, 20}, {1.0, 0.5, 0.1});
  EXPECT_DOUBLE_EQ(*time_to_criterion(t, 0.3), 15.0);
  EXPECT_DOUBLE_EQ(*time_to_criterion(t, 2.0), 0.0);
  EXPECT_FALSE(time_to_criterion(t, 0.05).has_value());
}

TEST(Trajectory, LossAtClampsAndResamples) {
  const Trajectory t = make({0, 10}, {1.0, 0.0});
  EXPECT_DOUBLE_EQ(loss_at(t, 5), 0.5);
  EXPECT_DOUBLE_EQ(loss_at(t, -3), 1.0);
  EXPECT_DOUBLE_EQ(loss_at(t, 30), 0.0);
  EXPECT_EQ(resample_loss(t, {0, 2.5, 10}), (std::vector<double>{1.0, 0.75, 0.0}));
}

TEST(Trajectory, L2DistanceSumsPointwiseGaps) {
  const Trajectory a = make({0, 1, 2}, {1.0, 0.5, 0.2});
  const Trajectory b = make({0, 1, 2}, {0.8, 0.5, 0.5});
  EXPECT_NEAR(l2_distance(a, b), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(l2_distance(a, a), 0.0);
  const Trajectory fine = make({0, 0.5, 1, 1.5, 2}, {0.8, 0.65, 0.5, 0.5, 0.5});
  EXPECT_NEAR(l2_distance(a, fine), 0.5, 1e-15);
  EXPECT_THROW(l2_distance(a, Trajectory{}), Error);
}

TEST(Trajectory, StereotypicalRunIsTheMedoid) {
  std::vector<Trajectory> runs{make({0, 1}, {1.0, 0.0}), make({0, 1}, {1.0, 0.4}),
                               make({0, 1}, {1.0, 0.5}), make({0, 1}, {1.0, 0.6})};
  // summed squared gaps: 0.77, 0.21, 0.27, 0.41
  EXPECT_EQ(select_stereotypical_run(runs), 1);
}

TEST(Trajectory, PlateausAreCounted) {
  // two flat stretches separated by drops, then a flat tail
  Trajectory t;
  double l = 1.0;
  for (int e = 0; e <= 3000; ++e) {
    if ((e > 500 && e <= 700) || (e > 1500 && e <= 1700)) l *= 0.99;
    t.push(e, l);
  }
  EXPECT_EQ(count_plateaus(t), 2);
  EXPECT_EQ(count_plateaus(make({0, 1}, {1, 1})), 0);
}
