#pragma once

#include <cstdint>
#include <vector>

#include "reln/dataset.hpp"
#include "reln/linalg.hpp"
#include "reln/trajectory.hpp"

namespace reln {

using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Bias-free MLP: ReLU after every hidden layer, linear readout.
struct MlpState {
  std::vector<int> widths;       // input, hidden..., output
  std::vector<Matrix> weights;   // weights[l] is widths[l+1] x widths[l]
  std::uint64_t seed = 0;
  int epoch = 0;

  int num_hidden_layers() const { return static_cast<int>(widths.size()) - 2; }
};

/// step(preactivation) of one hidden layer, H x N.
struct ActivationSample {
  int epoch = 0;
  int run_id = 0;
  int layer = 0;
  BinaryMatrix active;
};

struct ReluConfig {
  std::vector<int> hidden_widths{700};
  double learning_rate = 0.001;  // per-datapoint rate, as for the GDLN
  int epochs = 8000;
  double init_scale = 1e-7;      // standard deviation of every weight entry
  std::uint64_t seed = 0;
  int sample_every = 0;          // 0 disables activation sampling
  int record_every = 1;
  int output_every = 0;
  std::vector<int> output_epochs;
  double divergence_loss = 1e6;
};

struct ReluRun {
  MlpState state;
  Trajectory trajectory;
  std::vector<ActivationSample> samples;
};

MlpState init_mlp(int input_dim, const std::vector<int>& hidden, int output_dim, double init_scale,
                  std::uint64_t seed);

/// Network output, p x N.
Matrix mlp_forward(const MlpState& state, const Matrix& inputs);

/// (1/2N) ||Y - f(X)||_F^2.
double mlp_loss(const MlpState& state, const Dataset& data);

/// Negative loss gradient per layer (same scaling as the GDLN gradient).
std::vector<Matrix> mlp_gradient(const MlpState& state, const Dataset& data);

/// Full-batch gradient descent from a fresh seeded initialization.
ReluRun train_relu(const Dataset& data, const ReluConfig& cfg);

/// Post-activation values of hidden layer `layer` (0-based), H x N.
Matrix export_latents(const MlpState& state, const Dataset& data, int layer = 0);

/// step(preactivation) of hidden layer `layer`, strict > 0.
BinaryMatrix activation_pattern(const MlpState& state, const Matrix& inputs, int layer = 0);

}  // namespace reln
