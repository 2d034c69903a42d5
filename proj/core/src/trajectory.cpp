#include "reln/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "reln/error.hpp"

namespace reln {

const Matrix* Trajectory::output_at(int epoch) const {
  for (std::size_t i = 0; i < output_epochs.size(); ++i) {
    if (output_epochs[i] == epoch) return &outputs[i];
  }
  return nullptr;
}

std::optional<double> time_to_criterion(const Trajectory& traj, double threshold) {
  require(threshold > 0.0, ErrorKind::kInvalidParameter, "threshold must be positive");
  if (traj.empty()) return std::nullopt;
  if (traj.loss.front() <= threshold) return traj.epochs.front();
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const double l0 = traj.loss[i - 1];
    const double l1 = traj.loss[i];
    if (l1 <= threshold) {
      const double t0 = traj.epochs[i - 1];
      const double t1 = traj.epochs[i];
      if (l0 == l1) return t1;
      return t0 + (l0 - threshold) / (l0 - l1) * (t1 - t0);
    }
  }
  return std::nullopt;
}

double loss_at(const Trajectory& traj, double epoch) {
  require(!traj.empty(), ErrorKind::kShape, "empty trajectory");
  if (epoch <= traj.epochs.front()) return traj.loss.front();
  if (epoch >= traj.epochs.back()) return traj.loss.back();
  const auto it = std::upper_bound(traj.epochs.begin(), traj.epochs.end(), epoch);
  const std::size_t i = static_cast<std::size_t>(it - traj.epochs.begin());
  const double t0 = traj.epochs[i - 1];
  const double t1 = traj.epochs[i];
  const double w = (epoch - t0) / (t1 - t0);
  return (1.0 - w) * traj.loss[i - 1] + w * traj.loss[i];
}

std::vector<double> resample_loss(const Trajectory& traj, const std::vector<double>& grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double t : grid) out.push_back(loss_at(traj, t));
  return out;
}

double l2_distance(const Trajectory& a, const Trajectory& b) {
  require(!a.empty() && !b.empty(), ErrorKind::kShape, "empty trajectory");
  const std::vector<double>* grid = &a.epochs;
  std::vector<double> vb;
  if (a.epochs == b.epochs) {
    vb = b.loss;
  } else {
    vb = resample_loss(b, a.epochs);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < grid->size(); ++i) acc += std::abs(a.loss[i] - vb[i]);
  return acc;
}

int select_stereotypical_run(const std::vector<Trajectory>& runs) {
  require(runs.size() >= 2, ErrorKind::kInvalidParameter, "need at least two runs");
  const std::size_t len = runs.front().size();
  for (const auto& r : runs) {
    require(r.size() == len, ErrorKind::kShape, "trajectories differ in length");
  }
  int best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    double cost = 0.0;
    for (std::size_t j = 0; j < runs.size(); ++j) {
      if (i == j) continue;
      for (std::size_t t = 0; t < len; ++t) {
        const double diff = runs[i].loss[t] - runs[j].loss[t];
        cost += diff * diff;
      }
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = static_cast<int>(i);
    }
  }
  return best;
}

int count_plateaus(const Trajectory& traj, double flat_rate, int min_length) {
  if (traj.size() < 3) return 0;
  int count = 0;
  double run_start = -1.0;
  bool in_flat = false;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const double dt = traj.epochs[i] - traj.epochs[i - 1];
    const double l0 = std::max(traj.loss[i - 1], 1e-300);
    const double rate = (traj.loss[i - 1] - traj.loss[i]) / (l0 * dt);
    const bool flat = rate < flat_rate;
    if (flat && !in_flat) {
      in_flat = true;
      run_start = traj.epochs[i - 1];
    } else if (!flat && in_flat) {
      in_flat = false;
      if (traj.epochs[i - 1] - run_start >= min_length) ++count;
    }
  }
  // a flat tail is convergence, not a plateau
  return count;
}

}  // namespace reln
