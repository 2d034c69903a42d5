#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "reln/dataset.hpp"
#include "reln/trajectory.hpp"

namespace reln {

namespace fs = std::filesystem;

/// Flat experiment description. Presets fill the defaults; every field can be
/// overridden from a config file or the command line.
struct ExperimentConfig {
  std::string preset = "context3";  // xor | hierarchy | context3 | context4 | context5 | depth2
  std::string model = "relu";       // relu | linear | reln | single | xor_linear | analytic
  double learning_rate = 0.001;
  int epochs = 8000;
  double init_scale = 1e-7;
  std::vector<int> hidden_widths{700};
  int reln_hidden = 100;
  std::uint64_t seed = 0;
  int seeds = 1;
  int runs = 5;
  int sample_every = 100;
  int record_every = 10;
  double delta = 1.0;
  double threshold = 0.2;
  std::optional<std::uint64_t> permute_seed = 1;
  std::string out = "out";

  std::set<std::string> explicit_keys;  // keys set after the preset defaults
};

/// Defaults for a named preset. Throws kInvalidParameter for unknown names.
ExperimentConfig preset_config(const std::string& preset);
std::vector<std::string> preset_names();

/// Applies one key=value pair.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Parses the config text: `key = value` lines, `#` comments, and an optional
/// [overrides] section applied last. A top-level `preset` key selects the
/// defaults before anything else is applied.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const fs::path& path);
std::string format_config(const ExperimentConfig& cfg);

/// Dataset selected by the preset (xor uses cfg.delta).
Dataset preset_dataset(const ExperimentConfig& cfg);

/// Writes the preset dataset into `dir`.
void cmd_dataset(const ExperimentConfig& cfg, const fs::path& dir);

/// Trains or evaluates cfg.model for cfg.seeds seeds and writes the shared
/// trajectory CSV. Zero epochs writes the header only.
std::vector<Trajectory> cmd_run(const ExperimentConfig& cfg, const fs::path& csv);

struct ReproduceReport {
  std::string figure;
  bool accepted = false;
  std::vector<std::string> failures;  // run errors, recorded but not fatal
  std::string summary_json;
};

inline const std::vector<std::string> kFigures{"fig2", "fig4", "fig5", "fig7", "fig8"};

/// Runs the pipeline behind one figure and writes a self-contained bundle to
/// `dir`: config.txt, data/, the plotted series as CSV and summary.json.
/// Only explicitly set config keys change the figure's reference settings.
ReproduceReport cmd_reproduce(const std::string& figure, const ExperimentConfig& cfg,
                              const fs::path& dir);

/// Metric between two trajectories: l2_sum, final_loss (absolute difference)
/// or time_to(<threshold>) (absolute difference in epochs).
double compare_trajectories(const Trajectory& a, const Trajectory& b, const std::string& metric);

/// Reads both CSVs and compares their first trajectories, or the ones whose
/// source matches `source_a` / `source_b` when given.
double cmd_compare(const fs::path& a, const fs::path& b, const std::string& metric,
                   const std::string& source_a = "", const std::string& source_b = "");

struct FindGatesReport {
  int elbow_k = 0;
  std::vector<std::pair<int, double>> mse;  // per k
  std::vector<std::vector<std::uint8_t>> patterns;  // binarized at the elbow
  std::string summary_json;
};

/// Samples ReLU activations over cfg.runs trainings, scans k = 1..6 and
/// writes samples, the scan, the centroids and the recovered gates to `dir`.
FindGatesReport cmd_find_gates(const ExperimentConfig& cfg, const fs::path& dir);

struct VerifyReport {
  bool passed = false;
  std::string summary_json;
};

/// Interlacing, removal and gradient checks; writes summary.json to `dir`.
VerifyReport cmd_verify(const ExperimentConfig& cfg, const fs::path& dir);

}  // namespace reln
