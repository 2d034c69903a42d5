#include <algorithm>
#include <string>
#include <vector>

#include "reln/error.hpp"
#include "reln/gdln.hpp"

namespace reln {

namespace {

// All subsets of {0..n-1} of the given size, in lexicographic order.
std::vector<std::vector<int>> subsets_of_size(int n, int size) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(cur.size()) == size) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i < n; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

std::string subset_label(const std::vector<int>& s) {
  std::string out = "ctx";
  for (std::size_t i = 0; i < s.size(); ++i) {
    out += (i ? "_" : "") + std::to_string(s[i]);
  }
  return out;
}

bool contains(const std::vector<int>& s, int v) {
  for (int x : s) {
    if (x == v) return true;
  }
  return false;
}

void check_capacity(const RelnNetwork& net, const Dataset& data) {
  const PathwayStats st = pathway_stats(net.graph, net.gates, data);
  for (int p = 0; p < net.graph.num_paths(); ++p) {
    int width = 1 << 30;
    const std::vector<int> nodes = net.graph.path_nodes(p);
    for (std::size_t k = 1; k + 1 < nodes.size(); ++k) {
      width = std::min(width, net.graph.nodes()[nodes[k]].width);
    }
    require(width >= st.rank[p], ErrorKind::kUnderParameterized,
            "pathway '" + net.pathway_labels[p] + "' needs " + std::to_string(st.rank[p]) +
                " hidden units but has " + std::to_string(width));
  }
}

RelnNetwork xor_network(const Dataset& data, bool pointwise, int hidden) {
  require(data.input_dim() == 3 && data.output_dim() == 1 && data.size() == 4, ErrorKind::kShape,
          "xor presets need the 3x4 XoR-margin dataset");
  RelnNetwork net;
  GatedGraph& g = net.graph;
  const int x = g.add_node("x", 3, NodeRole::kInput);
  const int y = g.add_node("y", 1, NodeRole::kOutput);
  std::vector<int> hidden_nodes;
  if (pointwise) {
    for (int i = 0; i < 4; ++i) {
      hidden_nodes.push_back(g.add_node("h" + std::to_string(i), hidden, NodeRole::kHidden));
    }
  } else {
    hidden_nodes.push_back(g.add_node("h_pos", hidden, NodeRole::kHidden));
    hidden_nodes.push_back(g.add_node("h_neg", hidden, NodeRole::kHidden));
  }
  for (std::size_t k = 0; k < hidden_nodes.size(); ++k) {
    const std::string& name = g.nodes()[hidden_nodes[k]].name;
    g.add_edge("x->" + name, x, hidden_nodes[k]);
    g.add_edge(name + "->y", hidden_nodes[k], y);
  }
  g.finalize();
  net.gates = GatingTable::all_on(g, 4);
  for (int i = 0; i < 4; ++i) {
    for (std::size_t k = 0; k < hidden_nodes.size(); ++k) {
      bool on;
      if (pointwise) {
        on = static_cast<int>(k) == i;
      } else {
        on = (data.targets(0, i) > 0) == (k == 0);
      }
      net.gates.set_node(i, hidden_nodes[k], on);
    }
  }
  // paths are enumerated in edge order, matching hidden_nodes
  for (int p = 0; p < g.num_paths(); ++p) {
    net.pathway_labels.push_back(g.nodes()[g.path_nodes(p)[1]].name);
  }
  return net;
}

RelnNetwork contextual_network(const Dataset& data, int contexts, int arity, int hidden,
                               int first_layer, bool include_common) {
  require(data.contextual() && data.num_contexts == contexts, ErrorKind::kShape,
          "preset needs a contextual dataset with " + std::to_string(contexts) + " contexts");
  require(arity >= 1 && arity < contexts, ErrorKind::kInvalidParameter,
          "pathway arity must be in [1, contexts)");
  const int k = data.num_items;
  RelnNetwork net;
  GatedGraph& g = net.graph;
  const bool deep = first_layer > 0;
  const int x_all =
      deep || include_common ? g.add_node("x_all", data.input_dim(), NodeRole::kInput) : -1;
  const int x_item = deep ? -1 : g.add_node("x_item", k, NodeRole::kInput);
  const int y = g.add_node("y", data.output_dim(), NodeRole::kOutput);

  int shared = -1;
  if (deep) {
    shared = g.add_node("h1", first_layer, NodeRole::kHidden);
    g.add_edge("x_all->h1", x_all, shared);
  }
  if (include_common) {
    const int common = g.add_node("h_common", hidden, NodeRole::kHidden);
    g.add_edge(deep ? "h1->h_common" : "x_all->h_common", deep ? shared : x_all, common);
    g.add_edge("h_common->y", common, y);
  }

  const auto sets = subsets_of_size(contexts, arity);
  std::vector<int> ctx_nodes;
  for (const auto& s : sets) {
    const std::string label = subset_label(s);
    const int h = g.add_node("h_" + label, hidden, NodeRole::kHidden);
    ctx_nodes.push_back(h);
    if (deep) {
      g.add_edge("h1->h_" + label, shared, h);
    } else {
      g.add_edge("x_item->h_" + label, x_item, h);
    }
    g.add_edge("h_" + label + "->y", h, y);
  }
  g.finalize();

  net.gates = GatingTable::all_on(g, data.size());
  for (int i = 0; i < data.size(); ++i) {
    for (std::size_t s = 0; s < sets.size(); ++s) {
      net.gates.set_node(i, ctx_nodes[s], contains(sets[s], data.context_ids[i]));
    }
  }
  // path order follows input nodes then edge order; relabel from the graph
  std::vector<std::string> labels;
  for (int p = 0; p < g.num_paths(); ++p) {
    const std::vector<int> nodes = g.path_nodes(p);
    const std::string& name = g.nodes()[nodes[nodes.size() - 2]].name;
    labels.push_back(name == "h_common" ? "common" : name.substr(2));
  }
  net.pathway_labels = labels;
  return net;
}

}  // namespace

RelnNetwork build_reln_graph(const Dataset& data, const RelnPreset& preset, int hidden_width,
                             int first_layer_width) {
  require(hidden_width >= 1, ErrorKind::kInvalidParameter, "hidden width must be positive");
  RelnNetwork net;
  switch (preset.kind) {
    case RelnKind::kXorLinear:
      net = xor_network(data, false, hidden_width);
      break;
    case RelnKind::kXorPointwise:
      net = xor_network(data, true, hidden_width);
      break;
    case RelnKind::kContextual:
      net = contextual_network(data, preset.contexts, preset.arity, hidden_width, 0,
                               preset.include_common);
      break;
    case RelnKind::kDepth2Contextual:
      net = contextual_network(data, preset.contexts, preset.arity, hidden_width,
                               first_layer_width > 0 ? first_layer_width : hidden_width,
                               preset.include_common);
      break;
  }
  check_capacity(net, data);
  return net;
}

std::vector<std::vector<std::uint8_t>> path_gate_patterns(const RelnNetwork& net) {
  std::vector<std::vector<std::uint8_t>> out;
  for (int p = 0; p < net.graph.num_paths(); ++p) {
    std::vector<std::uint8_t> row(net.gates.datapoints());
    for (int i = 0; i < net.gates.datapoints(); ++i) row[i] = net.gates.path_gate(net.graph, i, p);
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace reln
