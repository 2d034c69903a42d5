#include "reln/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "reln/analytic.hpp"
#include "reln/error.hpp"
#include "reln/experiments.hpp"
#include "reln/gate_finder.hpp"
#include "reln/gdln.hpp"
#include "reln/relu.hpp"
#include "reln/serialize.hpp"

namespace reln {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::kInvalidParameter, "'" + key + "' expects a number, got '" + v + "'");
}

long long to_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  require(ec == std::errc() && ptr == v.data() + v.size(), ErrorKind::kInvalidParameter,
          "'" + key + "' expects an integer, got '" + v + "'");
  return x;
}

int to_count(const std::string& key, const std::string& v, int min) {
  const long long x = to_int(key, v);
  require(x >= min && x <= 1000000000, ErrorKind::kInvalidParameter,
          "'" + key + "' must be >= " + std::to_string(min));
  return static_cast<int>(x);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

int preset_contexts(const std::string& preset) {
  if (preset == "context3" || preset == "depth2") return 3;
  if (preset == "context4") return 4;
  if (preset == "context5") return 5;
  return 0;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"xor", "hierarchy", "context3", "context4", "context5", "depth2"};
}

ExperimentConfig preset_config(const std::string& preset) {
  ExperimentConfig c;
  c.preset = preset;
  if (preset == "xor") {
    c.model = "relu";
    c.learning_rate = 0.1;  // 1/tau = 0.4 on four datapoints
    c.epochs = 400;
    c.init_scale = std::sqrt(4e-8 / 128.0);
    c.hidden_widths = {128};
    c.reln_hidden = 128;
    c.seeds = 3;
    c.record_every = 1;
  } else if (preset == "hierarchy") {
    c.model = "linear";
    c.learning_rate = 0.002;
    c.epochs = 15000;
    c.init_scale = 3e-4;
    c.hidden_widths = {256};
    c.seed = 1;
  } else if (preset_contexts(preset) > 0) {
    if (preset == "depth2") {
      c.hidden_widths = {100, 100};
      c.init_scale = 3e-3;
      c.epochs = 20000;
      c.runs = 100;
    }
  } else {
    fail(ErrorKind::kInvalidParameter, "unknown preset '" + preset + "'");
  }
  return c;
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "preset") {
    ExperimentConfig fresh = preset_config(v);
    fresh.out = cfg.out;
    fresh.explicit_keys = cfg.explicit_keys;
    cfg = std::move(fresh);
  } else if (key == "model") {
    static const std::vector<std::string> models{"relu", "linear", "reln",
                                                 "single", "xor_linear", "analytic"};
    require(std::find(models.begin(), models.end(), v) != models.end(),
            ErrorKind::kInvalidParameter, "unknown model '" + v + "'");
    cfg.model = v;
  } else if (key == "learning_rate") {
    cfg.learning_rate = to_double(key, v);
    require(cfg.learning_rate > 0.0, ErrorKind::kInvalidParameter, "learning_rate must be > 0");
  } else if (key == "epochs") {
    cfg.epochs = to_count(key, v, 0);
  } else if (key == "init_scale") {
    cfg.init_scale = to_double(key, v);
    require(cfg.init_scale > 0.0, ErrorKind::kInvalidParameter, "init_scale must be > 0");
  } else if (key == "hidden_widths") {
    cfg.hidden_widths.clear();
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) cfg.hidden_widths.push_back(to_count(key, trim(item), 1));
    require(!cfg.hidden_widths.empty(), ErrorKind::kInvalidParameter, "hidden_widths is empty");
  } else if (key == "reln_hidden") {
    cfg.reln_hidden = to_count(key, v, 1);
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(to_count(key, v, 0));
  } else if (key == "seeds") {
    cfg.seeds = to_count(key, v, 1);
  } else if (key == "runs") {
    cfg.runs = to_count(key, v, 1);
  } else if (key == "sample_every") {
    cfg.sample_every = to_count(key, v, 1);
  } else if (key == "record_every") {
    cfg.record_every = to_count(key, v, 1);
  } else if (key == "delta") {
    cfg.delta = to_double(key, v);
    require(cfg.delta >= 0.0, ErrorKind::kInvalidParameter, "delta must be >= 0");
  } else if (key == "threshold") {
    cfg.threshold = to_double(key, v);
  } else if (key == "permute_seed") {
    if (v == "none") {
      cfg.permute_seed.reset();
    } else {
      cfg.permute_seed = static_cast<std::uint64_t>(to_count(key, v, 0));
    }
  } else if (key == "out") {
    cfg.out = v;
  } else {
    fail(ErrorKind::kInvalidParameter, "unknown config key '" + key + "'");
  }
  if (key != "preset") cfg.explicit_keys.insert(key);
}

ExperimentConfig parse_config(const std::string& text) {
  struct Entry {
    int line;
    std::string key;
    std::string value;
    bool override_section;
  };
  std::vector<Entry> entries;
  std::istringstream in(text);
  std::string raw;
  bool overrides = false;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      require(line == "[overrides]", ErrorKind::kInvalidParameter,
              "line " + std::to_string(lineno) + ": unknown section " + line);
      overrides = true;
      continue;
    }
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::kInvalidParameter,
            "line " + std::to_string(lineno) + ": expected key = value");
    entries.push_back({lineno, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), overrides});
  }
  ExperimentConfig cfg;
  for (const Entry& e : entries) {
    if (!e.override_section && e.key == "preset") set_config_value(cfg, e.key, e.value);
  }
  for (bool pass : {false, true}) {
    for (const Entry& e : entries) {
      if (e.override_section != pass || (!pass && e.key == "preset")) continue;
      require(e.key != "preset", ErrorKind::kInvalidParameter,
              "line " + std::to_string(e.line) + ": preset cannot be overridden");
      set_config_value(cfg, e.key, e.value);
    }
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) { return parse_config(read_text(path)); }

std::string format_config(const ExperimentConfig& cfg) {
  std::ostringstream o;
  o << "preset = " << cfg.preset << "\n";
  o << "model = " << cfg.model << "\n";
  o << "learning_rate = " << fmt(cfg.learning_rate) << "\n";
  o << "epochs = " << cfg.epochs << "\n";
  o << "init_scale = " << fmt(cfg.init_scale) << "\n";
  o << "hidden_widths = ";
  for (std::size_t i = 0; i < cfg.hidden_widths.size(); ++i) {
    o << (i ? "," : "") << cfg.hidden_widths[i];
  }
  o << "\n";
  o << "reln_hidden = " << cfg.reln_hidden << "\n";
  o << "seed = " << cfg.seed << "\n";
  o << "seeds = " << cfg.seeds << "\n";
  o << "runs = " << cfg.runs << "\n";
  o << "sample_every = " << cfg.sample_every << "\n";
  o << "record_every = " << cfg.record_every << "\n";
  o << "delta = " << fmt(cfg.delta) << "\n";
  o << "threshold = " << fmt(cfg.threshold) << "\n";
  o << "permute_seed = " << (cfg.permute_seed ? std::to_string(*cfg.permute_seed) : "none")
    << "\n";
  o << "out = " << cfg.out << "\n";
  return o.str();
}

Dataset preset_dataset(const ExperimentConfig& cfg) {
  if (cfg.preset == "xor") return build_xor_margin(cfg.delta);
  if (cfg.preset == "hierarchy") return build_hierarchy_dataset(4);
  const int c = preset_contexts(cfg.preset);
  require(c > 0, ErrorKind::kInvalidParameter, "unknown preset '" + cfg.preset + "'");
  return build_contextual_hierarchy(8, c, cfg.permute_seed);
}

void cmd_dataset(const ExperimentConfig& cfg, const fs::path& dir) {
  write_dataset(preset_dataset(cfg), dir);
}

// ---- run ------------------------------------------------------------------

namespace {

RelnNetwork model_network(const ExperimentConfig& cfg, const Dataset& data) {
  const int c = preset_contexts(cfg.preset);
  const int h = cfg.reln_hidden;
  if (cfg.model == "linear") {
    RelnNetwork net;
    GatedGraph& g = net.graph;
    const int x = g.add_node("x", data.input_dim(), NodeRole::kInput);
    const int hid = g.add_node("h", cfg.hidden_widths.front(), NodeRole::kHidden);
    const int y = g.add_node("y", data.output_dim(), NodeRole::kOutput);
    g.add_edge("x->h", x, hid);
    g.add_edge("h->y", hid, y);
    g.finalize();
    net.gates = GatingTable::all_on(g, data.size());
    net.pathway_labels = {"x->y"};
    return net;
  }
  if (cfg.preset == "xor") {
    if (cfg.model == "reln") return build_reln_graph(data, {RelnKind::kXorPointwise}, h);
    if (cfg.model == "xor_linear") return build_reln_graph(data, {RelnKind::kXorLinear}, h);
  } else if (c > 0) {
    const RelnKind kind =
        cfg.preset == "depth2" ? RelnKind::kDepth2Contextual : RelnKind::kContextual;
    const int first = cfg.preset == "depth2" ? cfg.hidden_widths.front() : 0;
    if (cfg.model == "reln") return build_reln_graph(data, {kind, c, c - 1, true}, h, first);
    if (cfg.model == "single") return build_reln_graph(data, {kind, c, 1, true}, h, first);
  }
  fail(ErrorKind::kInvalidParameter,
       "model '" + cfg.model + "' is not defined for preset '" + cfg.preset + "'");
}

std::vector<Trajectory> analytic_curves(const ExperimentConfig& cfg, const Dataset& data,
                                        std::uint64_t seed) {
  if (cfg.preset == "xor") {
    const double a0 = xor_initial_strength(cfg.hidden_widths.front(),
                                           cfg.init_scale * cfg.init_scale);
    const double tau = 1.0 / (data.size() * cfg.learning_rate);
    std::vector<Trajectory> out;
    int run = 0;
    for (XorVariant v : {XorVariant::kLinearGating, XorVariant::kXorGating}) {
      Trajectory t;
      t.source = "analytic";
      t.run_id = run++;
      for (int e = 0; e <= cfg.epochs; e += cfg.record_every) {
        t.push(e, xor_gdln_loss(cfg.delta, e, v, a0, tau).loss);
      }
      if (t.epochs.back() != cfg.epochs) t.push(cfg.epochs, xor_gdln_loss(cfg.delta, cfg.epochs, v, a0, tau).loss);
      out.push_back(std::move(t));
    }
    return out;
  }
  ExperimentConfig net_cfg = cfg;
  net_cfg.model = cfg.preset == "hierarchy" ? "linear" : "reln";
  RelnNetwork net = model_network(net_cfg, data);
  init_weights(net.graph, cfg.init_scale, seed);
  Trajectory t = predicted_dynamics(net.graph, net.gates, data, cfg.learning_rate, cfg.epochs,
                                    cfg.record_every);
  t.source = "analytic";
  t.run_id = static_cast<int>(seed);
  return {std::move(t)};
}

}  // namespace

std::vector<Trajectory> cmd_run(const ExperimentConfig& cfg, const fs::path& csv) {
  const Dataset data = preset_dataset(cfg);
  std::vector<Trajectory> out;
  if (cfg.epochs == 0) {
    write_trajectories_csv(out, csv);
    return out;
  }
  for (int s = 0; s < cfg.seeds; ++s) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(s);
    if (cfg.model == "relu") {
      ReluConfig rc;
      rc.hidden_widths = cfg.hidden_widths;
      rc.learning_rate = cfg.learning_rate;
      rc.epochs = cfg.epochs;
      rc.init_scale = cfg.init_scale;
      rc.seed = seed;
      rc.record_every = cfg.record_every;
      out.push_back(train_relu(data, rc).trajectory);
    } else if (cfg.model == "analytic") {
      for (Trajectory& t : analytic_curves(cfg, data, seed)) out.push_back(std::move(t));
      if (cfg.preset == "xor") break;  // seed independent
    } else {
      RelnNetwork net = model_network(cfg, data);
      TrainConfig tc;
      tc.learning_rate = cfg.learning_rate;
      tc.epochs = cfg.epochs;
      tc.init_scale = cfg.init_scale;
      tc.seed = seed;
      tc.record_every = cfg.record_every;
      tc.track_modes = true;
      out.push_back(train(net.graph, net.gates, data, tc));
    }
  }
  write_trajectories_csv(out, csv);
  return out;
}

// ---- compare --------------------------------------------------------------

double compare_trajectories(const Trajectory& a, const Trajectory& b, const std::string& metric) {
  require(!a.empty() && !b.empty(), ErrorKind::kInvalidParameter, "empty trajectory");
  if (metric == "l2_sum") return l2_distance(a, b);
  if (metric == "final_loss") return std::abs(a.loss.back() - b.loss.back());
  const std::string prefix = "time_to(";
  if (metric.rfind(prefix, 0) == 0 && metric.back() == ')') {
    const double thr = to_double("time_to", metric.substr(prefix.size(),
                                                          metric.size() - prefix.size() - 1));
    const auto ta = time_to_criterion(a, thr);
    const auto tb = time_to_criterion(b, thr);
    require(ta && tb, ErrorKind::kDomain, "a trajectory never reaches the threshold");
    return std::abs(*ta - *tb);
  }
  fail(ErrorKind::kInvalidParameter, "unknown metric '" + metric + "'");
}

double cmd_compare(const fs::path& a, const fs::path& b, const std::string& metric,
                   const std::string& source_a, const std::string& source_b) {
  auto pick = [](const fs::path& p, const std::string& source) {
    const std::vector<Trajectory> ts = read_trajectories_csv(p);
    for (const Trajectory& t : ts) {
      if (source.empty() || t.source == source) return t;
    }
    fail(ErrorKind::kInvalidParameter, "no trajectory" +
                                           (source.empty() ? "" : " with source " + source) +
                                           " in " + p.string());
  };
  return compare_trajectories(pick(a, source_a), pick(b, source_b), metric);
}

// ---- reproduce ------------------------------------------------------------

namespace {

bool has(const ExperimentConfig& c, const char* key) { return c.explicit_keys.count(key) > 0; }

ContextTaskConfig task_from(const ExperimentConfig& c, ContextTaskConfig t) {
  if (preset_contexts(c.preset) > 0) t.contexts = preset_contexts(c.preset);
  if (has(c, "learning_rate")) t.learning_rate = c.learning_rate;
  if (has(c, "epochs")) t.epochs = c.epochs;
  if (has(c, "init_scale")) t.init_scale = c.init_scale;
  if (has(c, "hidden_widths")) t.relu_hidden = c.hidden_widths.front();
  if (has(c, "reln_hidden")) t.reln_hidden = c.reln_hidden;
  if (has(c, "seed")) t.seed = c.seed;
  if (has(c, "record_every")) t.record_every = c.record_every;
  if (has(c, "permute_seed")) t.permute_seed = c.permute_seed;
  t.output_epochs.erase(std::remove_if(t.output_epochs.begin(), t.output_epochs.end(),
                                       [&](int e) { return e > t.epochs; }),
                        t.output_epochs.end());
  return t;
}

json task_json(const ContextTaskConfig& t) {
  return {{"items", t.items},
          {"contexts", t.contexts},
          {"permute_seed", t.permute_seed ? json(*t.permute_seed) : json(nullptr)},
          {"relu_hidden", t.relu_hidden},
          {"reln_hidden", t.reln_hidden},
          {"learning_rate", t.learning_rate},
          {"init_scale", t.init_scale},
          {"epochs", t.epochs},
          {"record_every", t.record_every},
          {"output_epochs", t.output_epochs},
          {"seed", t.seed}};
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string csv_cell(const std::optional<double>& v) { return v ? fmt(*v) : ""; }

json clustering_json(const GateClustering& c, double threshold) {
  return json::parse(clustering_to_json(c, binarize_centroids(c, threshold)));
}

std::string pattern_string(const std::vector<std::uint8_t>& p) {
  std::string s;
  for (auto v : p) s += v ? '1' : '0';
  return s;
}

bool reproduce_fig2(const ExperimentConfig& c, const fs::path& dir, json& sum) {
  XorCrossoverConfig x;
  if (has(c, "seeds")) x.seeds = c.seeds;
  if (has(c, "epochs")) x.epochs = c.epochs;
  if (has(c, "hidden_widths")) x.hidden = c.hidden_widths.front();
  if (has(c, "learning_rate")) x.inv_tau = c.learning_rate * 4.0;
  if (has(c, "init_scale")) x.init_variance = c.init_scale * c.init_scale;
  if (has(c, "seed")) x.seed = c.seed;
  if (has(c, "threshold")) x.threshold = c.threshold;
  sum["settings"] = {{"grid", x.grid},       {"probes", x.probes},       {"seeds", x.seeds},
                     {"hidden", x.hidden},   {"inv_tau", x.inv_tau},     {"init_variance", x.init_variance},
                     {"epochs", x.epochs},   {"threshold", x.threshold}, {"seed", x.seed}};
  const XorCrossoverResult r = run_xor_crossover(x);

  std::ostringstream grid;
  grid << "delta,linear,xor,fastest,relu_mean";
  for (int s = 0; s < x.seeds; ++s) grid << ",relu_seed" << x.seed + s;
  grid << "\n";
  for (const XorPoint& p : r.grid) {
    grid << fmt(p.delta) << "," << csv_cell(p.linear) << "," << csv_cell(p.xor_) << ","
         << csv_cell(p.fastest) << "," << csv_cell(p.relu_mean);
    for (const auto& t : p.relu) grid << "," << csv_cell(t);
    grid << "\n";
  }
  write_text_atomic(dir / "crossover.csv", grid.str());
  for (const XorPoint& p : r.probes) {
    std::vector<Trajectory> curves;
    for (std::size_t i = 0; i < r.curves.size(); ++i) {
      if (r.curve_deltas[i] == p.delta) curves.push_back(r.curves[i]);
    }
    std::ostringstream name;
    name << "curves_delta_" << std::fixed;
    name.precision(4);
    name << p.delta << ".csv";
    write_trajectories_csv(curves, dir / name.str());
  }

  const double target = crossover_delta();
  bool ok = std::abs(r.analytic_kink - target) <= 0.1;
  json probes = json::array();
  for (const XorPoint& p : r.probes) {
    json j{{"delta", p.delta}, {"fastest_analytic", opt(p.fastest)}, {"relu_mean", opt(p.relu_mean)}};
    if (p.fastest && p.relu_mean) {
      const double rel = std::abs(*p.relu_mean - *p.fastest) / *p.fastest;
      j["relative_error"] = rel;
      ok = ok && rel <= 0.15;
    } else {
      ok = false;
    }
    probes.push_back(j);
  }
  sum["crossover_delta"] = target;
  sum["analytic_kink"] = r.analytic_kink;
  sum["relu_kink"] = opt(r.relu_kink);
  sum["a0"] = r.a0;
  sum["tau"] = r.tau;
  sum["probes"] = probes;
  return ok;
}

bool reproduce_fig4(const ExperimentConfig& c, const fs::path& dir, json& sum) {
  const ContextTaskConfig task = task_from(c, ContextTaskConfig{});
  sum["settings"] = task_json(task);
  const EquivalenceResult r = run_context_equivalence(task);
  write_dataset(r.data, dir / "data");
  write_trajectories_csv({r.relu.trajectory, r.reln, r.single, r.reduction}, dir / "loss.csv");
  for (std::size_t k = 0; k < r.output_epochs.size(); ++k) {
    const int e = r.output_epochs[k];
    write_matrix_csv(*r.relu.trajectory.output_at(e),
                     dir / ("relu_output_" + std::to_string(e) + ".csv"));
    write_matrix_csv(*r.reln.output_at(e), dir / ("reln_output_" + std::to_string(e) + ".csv"));
  }
  const GatingConformity g = gating_conformity(r.relu.state, r.data);
  const double ratio = r.l2_reln > 0.0 ? r.l2_single / r.l2_reln : INFINITY;
  sum["l2_reln"] = r.l2_reln;
  sum["l2_single"] = r.l2_single;
  sum["l2_ratio"] = ratio;
  sum["output_epochs"] = r.output_epochs;
  sum["output_max_diff"] = r.output_max_diff;
  sum["final_loss"] = {{"relu", r.relu.trajectory.loss.back()},
                       {"reln", r.reln.loss.back()},
                       {"single", r.single.loss.back()},
                       {"reduction", r.reduction.loss.back()}};
  sum["gating_conformity"] = {{"units", g.units},
                              {"dead", g.dead},
                              {"context_only", g.context_only},
                              {"single_datapoint", g.single_datapoint},
                              {"other", g.other},
                              {"fraction", g.fraction()}};
  bool ok = ratio >= 10.0;
  for (double d : r.output_max_diff) ok = ok && d <= 0.05;
  return ok;
}

bool reproduce_fig5(const ExperimentConfig& c, const fs::path& dir, json& sum) {
  ClosedFormConfig f;
  if (has(c, "epochs")) f.epochs = c.epochs;
  if (has(c, "learning_rate")) f.learning_rate = c.learning_rate;
  if (has(c, "init_scale")) f.init_scale = c.init_scale;
  if (has(c, "reln_hidden")) f.hidden = c.reln_hidden;
  if (has(c, "seed")) f.seed = c.seed;
  if (has(c, "record_every")) f.snapshot_every = c.record_every;
  sum["settings"] = {{"contexts", f.contexts},     {"items", f.items},
                     {"hidden", f.hidden},         {"learning_rate", f.learning_rate},
                     {"init_scale", f.init_scale}, {"epochs", f.epochs},
                     {"record_every", f.snapshot_every}, {"transient", f.transient},
                     {"seed", f.seed}};
  const std::vector<ClosedFormCase> cases = run_closed_forms(f);
  json per = json::array();
  bool ok = true;
  for (const ClosedFormCase& cs : cases) {
    const std::string tag = std::to_string(cs.contexts);
    write_dataset(build_contextual_hierarchy(f.items, cs.contexts, std::nullopt),
                  dir / "data" / ("context" + tag));
    Trajectory common_pred = cs.common.predicted;
    common_pred.run_id = 1;
    Trajectory ctx_sim = cs.contextual.simulated;
    ctx_sim.run_id = 2;
    Trajectory ctx_pred = cs.contextual.predicted;
    ctx_pred.run_id = 3;
    write_trajectories_csv({cs.common.simulated, common_pred, ctx_sim, ctx_pred},
                           dir / ("modes_c" + tag + ".csv"));
    json fixed = json::array();
    for (std::size_t a = 0; a < cs.context_S.size(); ++a) {
      fixed.push_back((cs.contexts - 1) * cs.context_S[a] / cs.context_D[a]);
    }
    per.push_back({{"contexts", cs.contexts},
                   {"tau", cs.tau},
                   {"common_max_error", cs.common_max_error},
                   {"contextual_max_error", cs.contextual_max_error},
                   {"contextual_S", cs.context_S},
                   {"contextual_D", cs.context_D},
                   {"contextual_fixed_points", fixed}});
    ok = ok && cs.common_max_error <= 0.03 && cs.contextual_max_error <= 0.03;
  }
  sum["run_ids"] = "0 common simulated, 1 common closed form, 2 contextual simulated, "
                   "3 contextual closed form";
  sum["cases"] = per;
  return ok;
}

bool reproduce_fig7(const ExperimentConfig& c, const fs::path& dir, json& sum) {
  DepthConfig d;
  d.task = task_from(c, d.task);
  if (has(c, "runs")) d.runs = c.runs;
  if (has(c, "hidden_widths")) d.hidden = c.hidden_widths.front();
  if (has(c, "init_scale")) d.init_scale = c.init_scale;
  if (has(c, "epochs")) d.epochs = c.epochs;
  sum["settings"] = {{"task", task_json(d.task)}, {"runs", d.runs},     {"hidden", d.hidden},
                     {"init_scale", d.init_scale},  {"epochs", d.epochs}, {"record_every", d.record_every}};
  const DepthResult r = run_depth_ensemble(d);
  write_dataset(context_task_dataset(d.task), dir / "data");
  write_trajectories_csv(r.relu, dir / "relu_runs.csv");
  write_trajectories_csv(r.gdln, dir / "gdln_runs.csv");
  sum["runs"] = d.runs;
  sum["first_layer"] = {{"units", r.first_layer_units},
                        {"dead", r.first_layer_dead},
                        {"all_active", r.first_layer_all_active},
                        {"fraction", r.first_layer_fraction()}};
  sum["relu"] = {{"stereotypical_run", r.relu_stereotypical},
                 {"plateaus", r.relu_plateaus},
                 {"final_loss", r.relu_final}};
  sum["gdln"] = {{"stereotypical_run", r.gdln_stereotypical},
                 {"plateaus", r.gdln_plateaus},
                 {"final_loss", r.gdln_final}};
  return r.first_layer_fraction() >= 0.95 && r.relu_plateaus == r.gdln_plateaus &&
         r.relu_final < 1e-2 && r.gdln_final < 1e-2;
}

bool reproduce_fig8(const ExperimentConfig& c, const fs::path& dir, json& sum) {
  GateRecoveryConfig g;
  g.task = task_from(c, g.task);
  if (has(c, "runs")) g.runs = c.runs;
  if (has(c, "sample_every")) g.sample_every = c.sample_every;
  if (has(c, "reln_hidden")) g.hidden_per_pathway = c.reln_hidden;
  if (has(c, "seeds")) g.recovery_seeds = c.seeds;
  if (has(c, "seed")) g.seed = c.seed;
  sum["settings"] = {{"task", task_json(g.task)},
                     {"runs", g.runs},
                     {"sample_every", g.sample_every},
                     {"k_range", g.k_range},
                     {"recovery_seeds", g.recovery_seeds},
                     {"recovery_k", g.recovery_k},
                     {"hidden_per_pathway", g.hidden_per_pathway},
                     {"threshold", g.threshold},
                     {"seed", g.seed}};
  const GateRecoveryResult r = run_gate_recovery(g);
  const Dataset data = context_task_dataset(g.task);
  write_dataset(data, dir / "data");
  std::ostringstream scan;
  scan << "k,imitation_mse,failed\n";
  for (const ElbowPoint& p : r.scan) {
    scan << p.k << "," << (p.failed ? "" : fmt(p.imitation_mse)) << "," << p.failed << "\n";
  }
  write_text_atomic(dir / "elbow.csv", scan.str());
  for (const GateClustering& cl : r.fig8) {
    write_text_atomic(dir / ("centroids_k" + std::to_string(cl.k) + ".json"),
                      clustering_json(cl, g.threshold).dump(2));
  }
  int hits = 0;
  json seeds = json::array();
  for (std::size_t i = 0; i < r.recovered.size(); ++i) {
    hits += r.recovered[i] ? 1 : 0;
    json pats = json::array();
    for (const auto& p : r.recovered_patterns[i]) pats.push_back(pattern_string(p));
    seeds.push_back({{"recovered", static_cast<bool>(r.recovered[i])}, {"patterns", pats}});
  }
  json expected = json::array();
  for (const auto& p : expected_context_patterns(data)) expected.push_back(pattern_string(p));
  sum["elbow_k"] = r.elbow_k;
  sum["drop_in"] = r.drop_in;
  sum["drop_out"] = r.drop_out;
  sum["expected_patterns"] = expected;
  sum["recovery"] = seeds;
  sum["recovered"] = hits;
  const int need = static_cast<int>(std::ceil(0.9 * static_cast<double>(r.recovered.size())));
  return r.elbow_k == g.recovery_k && r.drop_in > 5.0 * r.drop_out && hits >= need;
}

}  // namespace

ReproduceReport cmd_reproduce(const std::string& figure, const ExperimentConfig& cfg,
                              const fs::path& dir) {
  require(std::find(kFigures.begin(), kFigures.end(), figure) != kFigures.end(),
          ErrorKind::kInvalidParameter, "unknown figure '" + figure + "'");
  fs::create_directories(dir);
  write_text_atomic(dir / "config.txt", format_config(cfg));
  ReproduceReport rep;
  rep.figure = figure;
  json sum{{"figure", figure}};
  try {
    if (figure == "fig2") rep.accepted = reproduce_fig2(cfg, dir, sum);
    if (figure == "fig4") rep.accepted = reproduce_fig4(cfg, dir, sum);
    if (figure == "fig5") rep.accepted = reproduce_fig5(cfg, dir, sum);
    if (figure == "fig7") rep.accepted = reproduce_fig7(cfg, dir, sum);
    if (figure == "fig8") rep.accepted = reproduce_fig8(cfg, dir, sum);
  } catch (const std::exception& e) {
    rep.failures.push_back(e.what());
    rep.accepted = false;
  }
  sum["accepted"] = rep.accepted;
  sum["failures"] = rep.failures;
  rep.summary_json = sum.dump(2);
  write_text_atomic(dir / "summary.json", rep.summary_json + "\n");
  return rep;
}

// ---- find-gates -----------------------------------------------------------

FindGatesReport cmd_find_gates(const ExperimentConfig& cfg, const fs::path& dir) {
  require(preset_contexts(cfg.preset) > 0 && cfg.preset != "depth2",
          ErrorKind::kInvalidParameter, "find-gates needs a single-layer contextual preset");
  const Dataset data = preset_dataset(cfg);
  fs::create_directories(dir);
  write_text_atomic(dir / "config.txt", format_config(cfg));
  write_dataset(data, dir / "data");

  ReluConfig rc;
  rc.hidden_widths = cfg.hidden_widths;
  rc.learning_rate = cfg.learning_rate;
  rc.epochs = cfg.epochs;
  rc.init_scale = cfg.init_scale;
  rc.record_every = cfg.sample_every;
  rc.sample_every = cfg.sample_every;
  SampleStack stack;
  std::vector<ActivationSample> all;
  for (int r = 0; r < cfg.runs; ++r) {
    rc.seed = cfg.seed + static_cast<std::uint64_t>(r);
    ReluRun run = train_relu(data, rc);
    append_samples(stack, run.samples);
    all.insert(all.end(), std::make_move_iterator(run.samples.begin()),
               std::make_move_iterator(run.samples.end()));
  }
  write_activation_samples(all, dir / "samples.bin", dir / "samples.json");

  ReluConfig ref = rc;
  ref.seed = cfg.seed;
  ref.sample_every = 0;
  ref.output_every = cfg.sample_every;
  const ReluRun reference = train_relu(data, ref);
  rc.sample_every = 0;
  ElbowOptions eo;
  eo.hidden_per_pathway = cfg.reln_hidden;
  eo.seed = cfg.seed;
  const std::vector<ElbowPoint> scan =
      elbow_scan(data, stack, {1, 2, 3, 4, 5, 6}, reference.trajectory, rc, eo);

  FindGatesReport rep;
  rep.elbow_k = select_elbow(scan);
  std::ostringstream csv;
  csv << "k,imitation_mse,failed\n";
  json clusterings = json::array();
  for (const ElbowPoint& p : scan) {
    csv << p.k << "," << (p.failed ? "" : fmt(p.imitation_mse)) << "," << p.failed << "\n";
    if (p.failed) continue;
    rep.mse.emplace_back(p.k, p.imitation_mse);
    write_text_atomic(dir / ("centroids_k" + std::to_string(p.k) + ".json"),
                      clustering_json(p.clustering, eo.threshold).dump(2));
    if (p.k == rep.elbow_k) rep.patterns = binarize_centroids(p.clustering, eo.threshold).patterns;
  }
  write_text_atomic(dir / "elbow.csv", csv.str());
  json pats = json::array();
  for (const auto& p : rep.patterns) pats.push_back(pattern_string(p));
  json sum{{"rows", stack.num_rows()}, {"elbow_k", rep.elbow_k}, {"patterns", pats}};
  rep.summary_json = sum.dump(2);
  write_text_atomic(dir / "summary.json", rep.summary_json + "\n");
  return rep;
}

// ---- verify ---------------------------------------------------------------

VerifyReport cmd_verify(const ExperimentConfig& cfg, const fs::path& dir) {
  VerificationConfig vc;
  vc.seed = cfg.seed;
  const VerificationResult r = run_verification(vc);
  json grads = json::object();
  for (const NamedGradientCheck& g : r.gradients) grads[g.graph] = g.report.max_rel_error;
  VerifyReport rep;
  rep.passed = r.interlacing_ok() && r.removal.holds && r.worst_gradient_error() < 1e-5;
  json sum{{"interlacing",
            {{"random", {{"checked", r.random_checked}, {"passed", r.random_passed}}},
             {"preset", {{"checked", r.preset_checked}, {"passed", r.preset_passed}}},
             {"worst_violation", r.worst_violation}}},
           {"removal",
            {{"holds", r.removal.holds},
             {"full_top", r.removal.full_top},
             {"max_removed_top", r.removal.max_removed_top},
             {"worst_datapoint", r.removal.worst_datapoint}}},
           {"gradient_max_rel_error", grads},
           {"passed", rep.passed}};
  rep.summary_json = sum.dump(2);
  fs::create_directories(dir);
  write_text_atomic(dir / "summary.json", rep.summary_json + "\n");
  return rep;
}

}  // namespace reln
