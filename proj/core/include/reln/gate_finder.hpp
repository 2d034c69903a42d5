#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reln/dataset.hpp"
#include "reln/gdln.hpp"
#include "reln/relu.hpp"

namespace reln {

/// Binary activation rows stacked across runs and sample epochs.
struct SampleStack {
  BinaryMatrix rows;                             // R x N
  std::vector<std::pair<int, int>> provenance;   // (run, epoch) per row

  int num_rows() const { return static_cast<int>(rows.rows()); }
  int num_datapoints() const { return static_cast<int>(rows.cols()); }
};

struct CollectOptions {
  int layer = 0;
  int min_epoch = 0;       // samples before this epoch are skipped
  bool drop_dead = true;   // rows that are never active carry no gate
};

/// Append every sample of the given hidden layer.
void append_samples(SampleStack& stack, const std::vector<ActivationSample>& samples,
                    const CollectOptions& opts = {});

/// Train `num_trainings` ReLU networks (seeds cfg.seed, cfg.seed+1, ...) and
/// stack step(preactivation) every `sample_every` epochs.
SampleStack collect_samples(const Dataset& data, const ReluConfig& cfg, int num_trainings,
                            int sample_every, const CollectOptions& opts = {});

struct GateClustering {
  int k = 0;
  Matrix centroids;          // k x N, entries in [0, 1]
  std::vector<int> assignments;
  std::vector<int> sizes;
  double inertia = 0.0;      // summed squared distance to assigned centroid
  int iterations = 0;
  std::optional<double> imitation_mse;
};

struct KMeansOptions {
  int max_iter = 300;
  int restarts = 8;
};

/// Lloyd's algorithm with k-means++ seeding; deterministic for a seed. An
/// emptied cluster is reseeded at the point farthest from its centroid.
GateClustering kmeans(const SampleStack& stack, int k, std::uint64_t seed,
                      const KMeansOptions& opts = {});

struct BinarizedGates {
  std::vector<std::vector<std::uint8_t>> patterns;  // k x N
  std::vector<double> consistency;                  // per centroid
  bool needs_more_clusters = false;                  // some consistency < 0.8
};

BinarizedGates binarize_centroids(const GateClustering& c, double threshold = 0.5);

/// One pathway x_all -> h_k -> y per pattern, node-gated by the pattern.
RelnNetwork build_reln(const Dataset& data, const std::vector<std::vector<std::uint8_t>>& patterns,
                       int hidden_per_pathway);

struct ElbowPoint {
  int k = 0;
  double imitation_mse = 0.0;
  bool failed = false;
  std::string error;
  GateClustering clustering;
};

struct ElbowOptions {
  double threshold = 0.5;
  int hidden_per_pathway = 100;
  std::uint64_t seed = 0;
  KMeansOptions kmeans;
};

/// For each k: cluster, binarize, build and train the ReLN with the
/// reference hyperparameters, and measure the mean squared difference to the
/// ReLU outputs recorded in `relu_reference`.
std::vector<ElbowPoint> elbow_scan(const Dataset& data, const SampleStack& stack,
                                   const std::vector<int>& k_range,
                                   const Trajectory& relu_reference, const ReluConfig& relu_cfg,
                                   const ElbowOptions& opts = {});

/// k with the sharpest drop-in over drop-out ratio among interior points.
int select_elbow(const std::vector<ElbowPoint>& scan);

/// Mean squared difference between two trajectories' stored outputs at the
/// epochs both recorded.
double imitation_mse(const Trajectory& a, const Trajectory& b);

/// True when the two pattern sets are equal up to reordering.
bool same_patterns(std::vector<std::vector<std::uint8_t>> a,
                   std::vector<std::vector<std::uint8_t>> b);

}  // namespace reln
