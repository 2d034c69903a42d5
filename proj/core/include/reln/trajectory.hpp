#pragma once

#include <optional>
#include <string>
#include <vector>

#include "reln/linalg.hpp"

namespace reln {

/// Time-indexed record of a training run or an analytic curve.
struct Trajectory {
  std::string source = "gdln";  // gdln | relu | analytic | reduction
  int run_id = 0;
  std::vector<double> epochs;
  std::vector<double> loss;
  std::vector<std::string> mode_names;          // path<p>_mode<a>
  std::vector<std::vector<double>> mode_values;  // one row per recorded epoch
  std::vector<double> alignment;                 // off-diagonal mass ratio per recorded epoch

  // optional network outputs (p x N) at selected epochs
  std::vector<int> output_epochs;
  std::vector<Matrix> outputs;

  // optional weight snapshots, one vector of edge/layer matrices per epoch
  std::vector<int> snapshot_epochs;
  std::vector<std::vector<Matrix>> snapshots;

  std::size_t size() const { return loss.size(); }
  bool empty() const { return loss.empty(); }
  void push(double epoch, double value) {
    epochs.push_back(epoch);
    loss.push_back(value);
  }
  /// Output matrix recorded at `epoch`, if any.
  const Matrix* output_at(int epoch) const;
};

/// First (linearly interpolated) time the loss falls to or below `threshold`.
/// Returns epochs.front() when the initial loss already satisfies it, and
/// nullopt when the threshold is never reached.
std::optional<double> time_to_criterion(const Trajectory& traj, double threshold);

/// Loss at arbitrary time by linear interpolation (clamped at the ends).
double loss_at(const Trajectory& traj, double epoch);

/// Resample `traj` onto `grid` by linear interpolation.
std::vector<double> resample_loss(const Trajectory& traj, const std::vector<double>& grid);

/// Sum over time points of |loss_a - loss_b| (the scalar L2 distance), after
/// resampling b onto the epochs of a.
double l2_distance(const Trajectory& a, const Trajectory& b);

/// Index of the run minimizing the summed squared distance to all other runs.
/// Lowest index wins ties.
int select_stereotypical_run(const std::vector<Trajectory>& runs);

/// Count of plateau phases: maximal stretches where the relative per-epoch loss
/// decrease stays below `flat_rate`, lasting at least `min_length` epochs.
int count_plateaus(const Trajectory& traj, double flat_rate = 2e-4, int min_length = 200);

}  // namespace reln
