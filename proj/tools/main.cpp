#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "reln/error.hpp"
#include "reln/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitDiverged = 2;
constexpr int kExitRejected = 3;

struct CommonFlags {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_out = true) {
  cmd->add_option("--config", f.config, "key=value config file")->check(CLI::ExistingFile);
  cmd->add_option("--preset", f.preset, "task preset");
  cmd->add_option("--seed", f.seed, "base seed");
  if (with_out) cmd->add_option("--out", f.out, "output path");
  cmd->add_option("--set", f.sets, "extra key=value override (repeatable)");
}

reln::ExperimentConfig resolve(const CommonFlags& f) {
  reln::ExperimentConfig cfg;
  if (!f.config.empty()) {
    cfg = reln::load_config(f.config);
    if (!f.preset.empty() && f.preset != cfg.preset) {
      reln::fail(reln::ErrorKind::kInvalidParameter,
                 "--preset " + f.preset + " conflicts with the config preset " + cfg.preset);
    }
  } else if (!f.preset.empty()) {
    cfg = reln::preset_config(f.preset);
  }
  for (const std::string& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      reln::fail(reln::ErrorKind::kInvalidParameter, "--set expects key=value, got " + kv);
    }
    reln::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.seed) reln::set_config_value(cfg, "seed", std::to_string(*f.seed));
  if (!f.out.empty()) reln::set_config_value(cfg, "out", f.out);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gated deep linear network experiments"};
  app.require_subcommand(1);

  CommonFlags dataset_f, run_f, repro_f, gates_f, verify_f;
  auto* dataset = app.add_subcommand("dataset", "write a preset dataset");
  add_common(dataset, dataset_f);

  auto* run = app.add_subcommand("run", "train or evaluate one model, write a trajectory CSV");
  add_common(run, run_f);

  std::string figure;
  auto* repro = app.add_subcommand("reproduce", "regenerate the data behind a figure");
  repro->add_option("figure", figure, "fig2 | fig4 | fig5 | fig7 | fig8")
      ->required()
      ->check(CLI::IsMember(reln::kFigures));
  add_common(repro, repro_f);

  std::string file_a, file_b, metric = "l2_sum", source_a, source_b;
  auto* compare = app.add_subcommand("compare", "compare two trajectory CSVs");
  compare->add_option("a", file_a)->required()->check(CLI::ExistingFile);
  compare->add_option("b", file_b)->required()->check(CLI::ExistingFile);
  compare->add_option("--metric", metric, "l2_sum | final_loss | time_to(<threshold>)");
  compare->add_option("--source-a", source_a, "pick the first trajectory with this source");
  compare->add_option("--source-b", source_b, "pick the first trajectory with this source");

  auto* gates = app.add_subcommand("find-gates", "cluster ReLU gates and pick the elbow");
  add_common(gates, gates_f);

  auto* verify = app.add_subcommand("verify", "interlacing, removal and gradient checks");
  add_common(verify, verify_f);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*dataset) {
      const auto cfg = resolve(dataset_f);
      reln::cmd_dataset(cfg, cfg.out);
      std::cout << "wrote " << cfg.out << "\n";
    } else if (*run) {
      auto cfg = resolve(run_f);
      const std::string path = run_f.out.empty() ? cfg.out + ".csv" : cfg.out;
      const auto trajs = reln::cmd_run(cfg, path);
      std::cout << "wrote " << trajs.size() << " trajectories to " << path << "\n";
    } else if (*repro) {
      const auto cfg = resolve(repro_f);
      const auto rep = reln::cmd_reproduce(figure, cfg, cfg.out);
      std::cout << rep.summary_json << "\n";
      if (!rep.accepted) return kExitRejected;
    } else if (*compare) {
      std::printf("%.17g\n", reln::cmd_compare(file_a, file_b, metric, source_a, source_b));
    } else if (*gates) {
      const auto cfg = resolve(gates_f);
      std::cout << reln::cmd_find_gates(cfg, cfg.out).summary_json << "\n";
    } else if (*verify) {
      const auto cfg = resolve(verify_f);
      const auto rep = reln::cmd_verify(cfg, cfg.out);
      std::cout << rep.summary_json << "\n";
      if (!rep.passed) return kExitRejected;
    }
  } catch (const reln::DivergedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitOk;
}
