#include "reln/relu.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "reln/error.hpp"

namespace reln {

namespace {

struct ForwardCache {
  std::vector<Matrix> pre;   // preactivation of each hidden layer
  std::vector<Matrix> post;  // post[0] = inputs, post[l+1] = relu(pre[l])
  Matrix output;
};

ForwardCache run_forward(const MlpState& s, const Matrix& inputs) {
  require(inputs.rows() == s.widths.front(), ErrorKind::kShape, "input dimension mismatch");
  ForwardCache c;
  c.post.push_back(inputs);
  const int hidden = s.num_hidden_layers();
  for (int l = 0; l < hidden; ++l) {
    c.pre.push_back(s.weights[l] * c.post.back());
    c.post.push_back(c.pre.back().cwiseMax(0.0));
  }
  c.output = s.weights.back() * c.post.back();
  return c;
}

std::vector<Matrix> backward(const MlpState& s, const ForwardCache& c, const Matrix& targets) {
  const double inv_n = 1.0 / static_cast<double>(targets.cols());
  const int layers = static_cast<int>(s.weights.size());
  std::vector<Matrix> grad(layers);
  Matrix delta = targets - c.output;
  for (int l = layers - 1; l >= 0; --l) {
    grad[l].noalias() = inv_n * delta * c.post[l].transpose();
    if (l > 0) {
      Matrix back = s.weights[l].transpose() * delta;
      delta = back.cwiseProduct((c.pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return grad;
}

}  // namespace

MlpState init_mlp(int input_dim, const std::vector<int>& hidden, int output_dim, double init_scale,
                  std::uint64_t seed) {
  require(input_dim >= 1 && output_dim >= 1, ErrorKind::kInvalidParameter,
          "input and output widths must be positive");
  require(!hidden.empty(), ErrorKind::kInvalidParameter, "need at least one hidden layer");
  for (int h : hidden) require(h >= 1, ErrorKind::kInvalidParameter, "hidden widths must be >= 1");
  require(init_scale >= 0.0, ErrorKind::kInvalidParameter, "init_scale must be nonnegative");

  MlpState s;
  s.seed = seed;
  s.widths.push_back(input_dim);
  s.widths.insert(s.widths.end(), hidden.begin(), hidden.end());
  s.widths.push_back(output_dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (std::size_t l = 0; l + 1 < s.widths.size(); ++l) {
    Matrix w(s.widths[l + 1], s.widths[l]);
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = init_scale * dist(rng);
    }
    s.weights.push_back(std::move(w));
  }
  return s;
}

Matrix mlp_forward(const MlpState& state, const Matrix& inputs) {
  return run_forward(state, inputs).output;
}

double mlp_loss(const MlpState& state, const Dataset& data) {
  return (data.targets - mlp_forward(state, data.inputs)).squaredNorm() / (2.0 * data.size());
}

std::vector<Matrix> mlp_gradient(const MlpState& state, const Dataset& data) {
  return backward(state, run_forward(state, data.inputs), data.targets);
}

BinaryMatrix activation_pattern(const MlpState& state, const Matrix& inputs, int layer) {
  require(layer >= 0 && layer < state.num_hidden_layers(), ErrorKind::kInvalidParameter,
          "hidden layer index out of range");
  const ForwardCache c = run_forward(state, inputs);
  return (c.pre[layer].array() > 0.0).cast<std::uint8_t>().matrix();
}

Matrix export_latents(const MlpState& state, const Dataset& data, int layer) {
  require(layer >= 0 && layer < state.num_hidden_layers(), ErrorKind::kInvalidParameter,
          "hidden layer index out of range");
  return run_forward(state, data.inputs).post[layer + 1];
}

ReluRun train_relu(const Dataset& data, const ReluConfig& cfg) {
  require(cfg.learning_rate >= 0.0, ErrorKind::kInvalidParameter,
          "learning rate must be nonnegative");
  require(cfg.epochs >= 0, ErrorKind::kInvalidParameter, "epochs must be nonnegative");
  require(cfg.record_every >= 1, ErrorKind::kInvalidParameter, "record_every must be >= 1");

  ReluRun run;
  run.state = init_mlp(data.input_dim(), cfg.hidden_widths, data.output_dim(), cfg.init_scale,
                       cfg.seed);
  run.trajectory.source = "relu";
  run.trajectory.run_id = static_cast<int>(cfg.seed);
  const double step = data.size() * cfg.learning_rate;
  const double inv_2n = 1.0 / (2.0 * data.size());

  for (int epoch = 0;; ++epoch) {
    const ForwardCache c = run_forward(run.state, data.inputs);
    const double l = (data.targets - c.output).squaredNorm() * inv_2n;
    if (!std::isfinite(l) || l > cfg.divergence_loss) throw DivergedError(epoch, l);
    const bool last = epoch == cfg.epochs;
    if (epoch % cfg.record_every == 0 || last) run.trajectory.push(epoch, l);
    if ((cfg.output_every > 0 && epoch % cfg.output_every == 0) ||
        std::find(cfg.output_epochs.begin(), cfg.output_epochs.end(), epoch) !=
            cfg.output_epochs.end()) {
      run.trajectory.output_epochs.push_back(epoch);
      run.trajectory.outputs.push_back(c.output);
    }
    if (cfg.sample_every > 0 && epoch % cfg.sample_every == 0) {
      for (int layer = 0; layer < run.state.num_hidden_layers(); ++layer) {
        run.samples.push_back({epoch, static_cast<int>(cfg.seed), layer,
                               (c.pre[layer].array() > 0.0).cast<std::uint8_t>().matrix()});
      }
    }
    if (last) break;
    const std::vector<Matrix> grad = backward(run.state, c, data.targets);
    for (std::size_t w = 0; w < grad.size(); ++w) run.state.weights[w] += step * grad[w];
    run.state.epoch = epoch + 1;
  }
  return run;
}

}  // namespace reln
