#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reln/analytic.hpp"
#include "reln/dataset.hpp"
#include "reln/gate_finder.hpp"
#include "reln/gdln.hpp"
#include "reln/relu.hpp"
#include "reln/trajectory.hpp"
#include "reln/verify.hpp"

namespace reln {

// Reference experiments. Each returns every series a figure would plot plus
// the headline numbers; the CLI writes them out and the acceptance suite
// checks them.

// ---- XoR with margin -----------------------------------------------------

struct XorCrossoverConfig {
  std::vector<double> grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7,
                           0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5};
  std::vector<double> probes{0.0, 0.4, 0.8165, 1.2};
  int seeds = 3;
  int hidden = 128;
  double inv_tau = 0.4;                 // 1/tau = N * lr
  double init_variance = 4e-8 / 128.0;  // per weight entry
  int epochs = 400;
  double threshold = 0.2;
  std::uint64_t seed = 0;
  bool run_relu_on_grid = true;
};

struct XorPoint {
  double delta = 0.0;
  std::optional<double> linear;  // analytic time, linear gating
  std::optional<double> xor_;    // analytic time, XoR gating
  std::optional<double> fastest;
  std::vector<std::optional<double>> relu;  // per seed
  std::optional<double> relu_mean;
};

struct XorCrossoverResult {
  double tau = 0.0;
  double a0 = 0.0;
  std::vector<XorPoint> grid;
  std::vector<XorPoint> probes;
  double analytic_kink = 0.0;  // grid point of the sharpest bend in the fastest analytic time
  std::optional<double> relu_kink;
  std::vector<Trajectory> curves;  // probe curves: analytic (run 0 linear, 1 xor) and relu
  std::vector<double> curve_deltas;
};

/// Analytic initial mode strength for the XoR presets: on average half of the
/// hidden units see each datapoint, so a0 = hidden * variance / 4.
double xor_initial_strength(int hidden, double variance);

XorCrossoverResult run_xor_crossover(const XorCrossoverConfig& cfg);

/// Grid point with the largest absolute second difference.
double sharpest_bend(const std::vector<double>& x, const std::vector<double>& y);

// ---- deep linear hierarchy -----------------------------------------------

struct DeepLinearConfig {
  int n_items = 4;
  int hidden = 256;
  double learning_rate = 0.002;
  double init_scale = 3e-4;
  int epochs = 15000;
  int record_every = 10;
  double transient = 0.05;  // leading fraction of epochs excluded
  std::uint64_t seed = 1;
};

struct ModeComparison {
  std::vector<double> S;
  std::vector<double> D;
  std::vector<double> a0;
  std::vector<double> max_rel_error;  // per mode, relative to the mode's asymptote
  Trajectory simulated;               // block mode strengths over time
  Trajectory predicted;
};

ModeComparison run_deep_linear(const DeepLinearConfig& cfg);

/// Race reduction seeded with the balanced initial strengths of the graph's
/// current weights. Every path must have two edges. With one ungated path
/// this is the per-mode linear trajectory.
Trajectory predicted_dynamics(const GatedGraph& g, const GatingTable& gates, const Dataset& data,
                              double learning_rate, int epochs, int record_every);

// ---- three-context equivalence --------------------------------------------

struct ContextTaskConfig {
  int items = 8;
  int contexts = 3;
  std::optional<std::uint64_t> permute_seed = 1;
  int relu_hidden = 700;
  int reln_hidden = 100;
  double learning_rate = 0.001;
  double init_scale = 1e-7;
  int epochs = 8000;
  int record_every = 10;
  std::vector<int> output_epochs{2000, 5000, 8000};
  std::uint64_t seed = 0;
};

Dataset context_task_dataset(const ContextTaskConfig& cfg);

struct EquivalenceResult {
  Dataset data;
  ReluRun relu;
  Trajectory reln;
  Trajectory single;
  Trajectory reduction;
  double l2_reln = 0.0;
  double l2_single = 0.0;
  std::vector<int> output_epochs;
  std::vector<double> output_max_diff;  // ReLN vs ReLU per output epoch
};

EquivalenceResult run_context_equivalence(const ContextTaskConfig& cfg);

// ---- closed forms for C contexts ------------------------------------------

struct ClosedFormConfig {
  std::vector<int> contexts{3, 4, 5};
  int items = 8;
  int hidden = 100;
  double learning_rate = 0.0002;
  double init_scale = 1e-7;
  int epochs = 40000;
  int snapshot_every = 50;
  double transient = 0.05;
  std::uint64_t seed = 7;
};

struct ClosedFormCase {
  int contexts = 0;
  double tau = 0.0;
  ModeComparison common;
  ModeComparison contextual;  // mean over the C pathways
  double common_max_error = 0.0;
  double contextual_max_error = 0.0;
  std::vector<double> context_S;  // per mode of one contextual pathway
  std::vector<double> context_D;
};

std::vector<ClosedFormCase> run_closed_forms(const ClosedFormConfig& cfg);

// ---- gate recovery --------------------------------------------------------

struct GateRecoveryConfig {
  ContextTaskConfig task;
  int runs = 5;
  int sample_every = 100;
  std::vector<int> k_range{1, 2, 3, 4, 5, 6};
  int recovery_seeds = 10;
  int recovery_k = 4;
  int hidden_per_pathway = 100;
  double threshold = 0.5;
  std::uint64_t seed = 0;
};

struct GateRecoveryResult {
  std::vector<ElbowPoint> scan;
  int elbow_k = 0;
  double drop_in = 0.0;   // mse(k-1) - mse(k) at the recovery k
  double drop_out = 0.0;  // mse(k) - mse(k+1)
  std::vector<GateClustering> fig8;  // k = 2, 3, 4 on the first stack
  std::vector<bool> recovered;       // per recovery seed
  std::vector<std::vector<std::vector<std::uint8_t>>> recovered_patterns;
};

/// Gates of the contextual ReLN with arity C-1: the always-on pattern plus
/// one pattern per left-out context.
std::vector<std::vector<std::uint8_t>> expected_context_patterns(const Dataset& data);

GateRecoveryResult run_gate_recovery(const GateRecoveryConfig& cfg, bool scan = true);

// ---- gating conformity ----------------------------------------------------

struct GatingConformity {
  int units = 0;
  int dead = 0;
  int context_only = 0;
  int single_datapoint = 0;
  int other = 0;
  double fraction() const {
    const int live = units - dead;
    return live > 0 ? static_cast<double>(context_only + single_datapoint) / live : 1.0;
  }
};

/// Classifies hidden units by their binary pattern: constant within every
/// context block, active on one datapoint, or neither. Never-active units
/// are dead and excluded from the fraction.
GatingConformity gating_conformity(const BinaryMatrix& pattern, const Dataset& data);

/// Same for the first hidden layer of a trained network. Units whose
/// |w_in| * |w_out| is below dead_tol times the largest one also count as dead.
GatingConformity gating_conformity(const MlpState& state, const Dataset& data,
                                   double dead_tol = 1e-3);

// ---- depth-two ensembles --------------------------------------------------

struct DepthConfig {
  ContextTaskConfig task;
  int runs = 100;
  int hidden = 100;
  double init_scale = 3e-3;
  int epochs = 20000;
  int record_every = 10;
  bool train_gdln = true;
};

struct DepthResult {
  std::vector<Trajectory> relu;
  std::vector<Trajectory> gdln;
  int first_layer_units = 0;
  int first_layer_dead = 0;
  int first_layer_all_active = 0;
  int relu_stereotypical = 0;
  int gdln_stereotypical = 0;
  int relu_plateaus = 0;
  int gdln_plateaus = 0;
  double relu_final = 0.0;
  double gdln_final = 0.0;
  double first_layer_fraction() const {
    const int live = first_layer_units - first_layer_dead;
    return live > 0 ? static_cast<double>(first_layer_all_active) / live : 0.0;
  }
};

DepthResult run_depth_ensemble(const DepthConfig& cfg);

// ---- structural checks ----------------------------------------------------

struct VerificationConfig {
  int random_matrices = 1000;
  int max_dim = 8;
  int draws_per_preset = 50;
  int gradient_points = 5;
  std::uint64_t seed = 0;
};

struct NamedGradientCheck {
  std::string graph;
  GradientCheckReport report;
};

struct VerificationResult {
  int random_checked = 0;
  int random_passed = 0;
  int preset_checked = 0;
  int preset_passed = 0;
  double worst_violation = 0.0;
  RemovalReport removal;
  int removal_subsets = 0;  // datapoints dropped in turn
  std::vector<NamedGradientCheck> gradients;

  bool interlacing_ok() const {
    return random_passed == random_checked && preset_passed == preset_checked;
  }
  double worst_gradient_error() const;
};

/// Interlacing on random matrices and on random submatrix draws of every
/// preset's sigma_yx, removal on the 3-context task, and finite-difference
/// gradients on every preset graph.
VerificationResult run_verification(const VerificationConfig& cfg);

/// Datasets and gated graphs used by the checks, keyed by a short name.
std::vector<std::pair<std::string, Dataset>> preset_datasets();
std::vector<std::pair<std::string, RelnNetwork>> preset_graphs(int hidden);

}  // namespace reln
