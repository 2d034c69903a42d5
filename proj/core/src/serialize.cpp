#include "reln/serialize.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "reln/error.hpp"

namespace reln {

using json = nlohmann::json;

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  require(out.good(), ErrorKind::kIo, "cannot write " + path.string());
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    require(used == s.size(), ErrorKind::kIo, "trailing characters in " + where);
    return v;
  } catch (const std::logic_error&) {
    fail(ErrorKind::kIo, "bad number '" + s + "' in " + where);
  }
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
  require(j.is_array() && static_cast<Eigen::Index>(j.size()) == rows, ErrorKind::kIo,
          "matrix row count mismatch");
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    require(static_cast<Eigen::Index>(j[r].size()) == cols, ErrorKind::kIo,
            "matrix column count mismatch");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

const char* role_name(NodeRole r) {
  switch (r) {
    case NodeRole::kInput:
      return "input";
    case NodeRole::kHidden:
      return "hidden";
    case NodeRole::kOutput:
      return "output";
  }
  return "hidden";
}

NodeRole role_from(const std::string& s) {
  if (s == "input") return NodeRole::kInput;
  if (s == "output") return NodeRole::kOutput;
  require(s == "hidden", ErrorKind::kIo, "unknown node role '" + s + "'");
  return NodeRole::kHidden;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  require(in.good(), ErrorKind::kIo, "truncated activation record");
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

}  // namespace

// ---- datasets ------------------------------------------------------------

void write_matrix_csv(const Matrix& m, const fs::path& path) {
  std::ostringstream out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << fmt_double(m(r, c));
    out << '\n';
  }
  write_text_atomic(path, out.str());
}

Matrix read_matrix_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const std::string& cell : split(line, ',')) row.push_back(parse_double(cell, path.string()));
    require(rows.empty() || row.size() == rows.front().size(), ErrorKind::kIo,
            "ragged rows in " + path.string());
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

void write_dataset(const Dataset& data, const fs::path& dir) {
  fs::create_directories(dir);
  write_matrix_csv(data.inputs, dir / "inputs.csv");
  write_matrix_csv(data.targets, dir / "targets.csv");
  json meta;
  meta["name"] = data.name;
  meta["num_items"] = data.num_items;
  meta["num_contexts"] = data.num_contexts;
  meta["seed"] = data.seed;
  meta["item_ids"] = data.item_ids;
  meta["context_ids"] = data.context_ids;
  json blocks = json::array();
  for (const LabelBlock& b : data.label_blocks) {
    blocks.push_back({{"row_begin", b.row_begin},
                      {"row_end", b.row_end},
                      {"context", b.context == kSharedBlock ? json("shared") : json(b.context)}});
  }
  meta["label_blocks"] = blocks;
  write_text_atomic(dir / "dataset.json", meta.dump(2) + "\n");
}

Dataset read_dataset(const fs::path& dir) {
  Dataset d;
  d.inputs = read_matrix_csv(dir / "inputs.csv");
  d.targets = read_matrix_csv(dir / "targets.csv");
  require(d.inputs.cols() == d.targets.cols(), ErrorKind::kShape,
          "inputs and targets disagree in datapoint count");
  const json meta = json::parse(read_text(dir / "dataset.json"));
  d.name = meta.value("name", "");
  d.num_items = meta.value("num_items", 0);
  d.num_contexts = meta.value("num_contexts", 0);
  d.seed = meta.value("seed", std::uint64_t{0});
  d.item_ids = meta.value("item_ids", std::vector<int>{});
  d.context_ids = meta.value("context_ids", std::vector<int>{});
  for (const json& b : meta.value("label_blocks", json::array())) {
    LabelBlock lb;
    lb.row_begin = b.at("row_begin").get<int>();
    lb.row_end = b.at("row_end").get<int>();
    lb.context = b.at("context").is_string() ? kSharedBlock : b.at("context").get<int>();
    d.label_blocks.push_back(lb);
  }
  return d;
}

// ---- graphs and gates ----------------------------------------------------

std::string to_hex_bits(const std::vector<bool>& bits) {
  static const char* digits = "0123456789abcdef";
  const std::size_t nibbles = std::max<std::size_t>(1, (bits.size() + 3) / 4);
  std::string out = "0x";
  for (std::size_t k = nibbles; k-- > 0;) {
    int v = 0;
    for (int b = 0; b < 4; ++b) {
      const std::size_t idx = 4 * k + b;
      if (idx < bits.size() && bits[idx]) v |= 1 << b;
    }
    out += digits[v];
  }
  return out;
}

std::vector<bool> from_hex_bits(const std::string& hex, std::size_t count) {
  std::string body = hex;
  if (body.rfind("0x", 0) == 0 || body.rfind("0X", 0) == 0) body = body.substr(2);
  std::vector<bool> bits(count, false);
  const std::size_t n = body.size();
  for (std::size_t i = 0; i < n; ++i) {
    const char ch = body[n - 1 - i];
    int v;
    if (ch >= '0' && ch <= '9') {
      v = ch - '0';
    } else if (ch >= 'a' && ch <= 'f') {
      v = ch - 'a' + 10;
    } else if (ch >= 'A' && ch <= 'F') {
      v = ch - 'A' + 10;
    } else {
      fail(ErrorKind::kIo, "bad hex digit in '" + hex + "'");
    }
    for (int b = 0; b < 4; ++b) {
      const std::size_t idx = 4 * i + b;
      if (v & (1 << b)) {
        require(idx < count, ErrorKind::kIo, "bitmask '" + hex + "' sets bits beyond its width");
        bits[idx] = true;
      }
    }
  }
  return bits;
}

std::string network_to_json(const RelnNetwork& net, bool include_weights) {
  const GatedGraph& g = net.graph;
  json j;
  json nodes = json::array();
  for (const Node& n : g.nodes()) {
    nodes.push_back({{"name", n.name},
                     {"width", n.width},
                     {"role", role_name(n.role)},
                     {"data_offset", n.data_offset}});
  }
  j["nodes"] = nodes;
  json edges = json::array();
  for (const Edge& e : g.edges()) {
    json je = {{"name", e.name},
               {"source", g.nodes()[e.source].name},
               {"target", g.nodes()[e.target].name},
               {"shape", {e.weight.rows(), e.weight.cols()}}};
    if (include_weights) je["weight"] = matrix_to_json(e.weight);
    edges.push_back(std::move(je));
  }
  j["edges"] = edges;
  json paths = json::array();
  for (int p = 0; p < g.num_paths(); ++p) {
    json edge_names = json::array();
    for (int e : g.paths()[p]) edge_names.push_back(g.edges()[e].name);
    paths.push_back({{"label", p < static_cast<int>(net.pathway_labels.size())
                                   ? net.pathway_labels[p]
                                   : "path" + std::to_string(p)},
                     {"edges", edge_names}});
  }
  j["paths"] = paths;
  json gates = json::array();
  for (int i = 0; i < net.gates.datapoints(); ++i) {
    std::vector<bool> nb(g.num_nodes()), eb(g.num_edges());
    for (int v = 0; v < g.num_nodes(); ++v) nb[v] = net.gates.node(i, v);
    for (int e = 0; e < g.num_edges(); ++e) eb[e] = net.gates.edge(i, e);
    gates.push_back({{"nodes", to_hex_bits(nb)}, {"edges", to_hex_bits(eb)}});
  }
  j["datapoints"] = net.gates.datapoints();
  j["gates"] = gates;
  return j.dump(2) + "\n";
}

RelnNetwork network_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kIo, std::string("graph JSON: ") + e.what());
  }
  RelnNetwork net;
  GatedGraph& g = net.graph;
  std::map<std::string, int> index;
  for (const json& n : j.at("nodes")) {
    const std::string name = n.at("name").get<std::string>();
    index[name] = g.add_node(name, n.at("width").get<int>(),
                             role_from(n.at("role").get<std::string>()),
                             n.value("data_offset", 0));
  }
  auto node_id = [&](const json& v) {
    const auto it = index.find(v.get<std::string>());
    require(it != index.end(), ErrorKind::kIo, "edge refers to unknown node");
    return it->second;
  };
  for (const json& e : j.at("edges")) {
    g.add_edge(e.at("name").get<std::string>(), node_id(e.at("source")), node_id(e.at("target")));
  }
  g.finalize();
  const json& edges = j.at("edges");
  for (int e = 0; e < g.num_edges(); ++e) {
    if (edges[e].contains("weight")) {
      Matrix& w = g.edge(e).weight;
      w = matrix_from_json(edges[e]["weight"], w.rows(), w.cols());
    }
  }
  for (const json& p : j.value("paths", json::array())) {
    net.pathway_labels.push_back(p.value("label", ""));
  }
  const int n = j.at("datapoints").get<int>();
  net.gates = GatingTable(n, g.num_nodes(), g.num_edges(), true);
  const json& gates = j.at("gates");
  require(static_cast<int>(gates.size()) == n, ErrorKind::kIo, "gate table length mismatch");
  for (int i = 0; i < n; ++i) {
    const std::vector<bool> nb = from_hex_bits(gates[i].at("nodes").get<std::string>(),
                                               static_cast<std::size_t>(g.num_nodes()));
    const std::vector<bool> eb = from_hex_bits(gates[i].at("edges").get<std::string>(),
                                               static_cast<std::size_t>(g.num_edges()));
    for (int v = 0; v < g.num_nodes(); ++v) net.gates.set_node(i, v, nb[v]);
    for (int e = 0; e < g.num_edges(); ++e) net.gates.set_edge(i, e, eb[e]);
  }
  return net;
}

// ---- trajectories --------------------------------------------------------

void write_trajectories_csv(const std::vector<Trajectory>& trajs, std::ostream& out) {
  std::vector<std::string> modes;
  std::map<std::string, std::size_t> col;
  for (const Trajectory& t : trajs) {
    for (const std::string& m : t.mode_names) {
      if (col.emplace(m, modes.size()).second) modes.push_back(m);
    }
  }
  out << "epoch,loss,source,run_id";
  for (const std::string& m : modes) out << ',' << m;
  out << '\n';
  for (const Trajectory& t : trajs) {
    const bool has_modes = t.mode_values.size() == t.size();
    std::vector<std::size_t> where(t.mode_names.size());
    for (std::size_t k = 0; k < t.mode_names.size(); ++k) where[k] = col[t.mode_names[k]];
    for (std::size_t i = 0; i < t.size(); ++i) {
      out << fmt_double(t.epochs[i]) << ',' << fmt_double(t.loss[i]) << ',' << t.source << ','
          << t.run_id;
      std::vector<std::string> cells(modes.size());
      if (has_modes) {
        for (std::size_t k = 0; k < where.size() && k < t.mode_values[i].size(); ++k) {
          cells[where[k]] = fmt_double(t.mode_values[i][k]);
        }
      }
      for (const std::string& c : cells) out << ',' << c;
      out << '\n';
    }
  }
}

void write_trajectories_csv(const std::vector<Trajectory>& trajs, const fs::path& path) {
  std::ostringstream out;
  write_trajectories_csv(trajs, out);
  write_text_atomic(path, out.str());
}

std::vector<Trajectory> read_trajectories_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::kIo,
          "empty trajectory file " + path.string());
  const std::vector<std::string> header = split(line, ',');
  require(header.size() >= 4 && header[0] == "epoch" && header[1] == "loss" &&
              header[2] == "source" && header[3] == "run_id",
          ErrorKind::kIo, "unexpected trajectory header in " + path.string());
  const std::vector<std::string> modes(header.begin() + 4, header.end());
  std::vector<Trajectory> out;
  std::map<std::pair<std::string, int>, std::size_t> index;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line, ',');
    require(cells.size() == header.size(), ErrorKind::kIo, "ragged row in " + path.string());
    const std::string source = cells[2];
    const int run = static_cast<int>(parse_double(cells[3], path.string()));
    auto [it, fresh] = index.emplace(std::make_pair(source, run), out.size());
    if (fresh) {
      Trajectory t;
      t.source = source;
      t.run_id = run;
      for (std::size_t k = 0; k < modes.size(); ++k) {
        if (!cells[4 + k].empty()) t.mode_names.push_back(modes[k]);
      }
      out.push_back(std::move(t));
    }
    Trajectory& t = out[it->second];
    t.push(parse_double(cells[0], path.string()), parse_double(cells[1], path.string()));
    if (!t.mode_names.empty()) {
      std::vector<double> row;
      for (std::size_t k = 0; k < modes.size(); ++k) {
        if (!cells[4 + k].empty()) row.push_back(parse_double(cells[4 + k], path.string()));
      }
      t.mode_values.push_back(std::move(row));
    }
  }
  return out;
}

// ---- activation samples --------------------------------------------------

void write_activation_samples(const std::vector<ActivationSample>& samples, const fs::path& bin,
                              const fs::path& index) {
  std::ostringstream out(std::ios::binary);
  json records = json::array();
  for (const ActivationSample& s : samples) {
    const auto h = static_cast<std::uint32_t>(s.active.rows());
    const auto n = static_cast<std::uint32_t>(s.active.cols());
    records.push_back({{"offset", static_cast<std::uint64_t>(out.tellp())},
                       {"run_id", s.run_id},
                       {"layer", s.layer},
                       {"epoch", s.epoch},
                       {"rows", h},
                       {"cols", n}});
    out.write(kActivationMagic, 4);
    put_u32(out, h);
    put_u32(out, n);
    put_u32(out, static_cast<std::uint32_t>(s.epoch));
    const std::size_t bits = static_cast<std::size_t>(h) * n;
    std::vector<unsigned char> bytes((bits + 7) / 8, 0);
    std::size_t k = 0;
    for (std::uint32_t r = 0; r < h; ++r) {
      for (std::uint32_t c = 0; c < n; ++c, ++k) {
        if (s.active(r, c)) bytes[k / 8] |= static_cast<unsigned char>(1u << (k % 8));
      }
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }
  write_text_atomic(bin, out.str());
  json idx;
  idx["file"] = bin.filename().string();
  idx["records"] = records;
  write_text_atomic(index, idx.dump(2) + "\n");
}

std::vector<ActivationSample> read_activation_samples(const fs::path& bin, const fs::path& index) {
  const json idx = json::parse(read_text(index));
  std::istringstream in(read_text(bin), std::ios::binary);
  std::vector<ActivationSample> out;
  for (const json& rec : idx.at("records")) {
    in.seekg(static_cast<std::streamoff>(rec.at("offset").get<std::uint64_t>()));
    char magic[4];
    in.read(magic, 4);
    require(in.good() && std::equal(magic, magic + 4, kActivationMagic), ErrorKind::kIo,
            "bad activation record magic");
    ActivationSample s;
    const std::uint32_t h = get_u32(in);
    const std::uint32_t n = get_u32(in);
    s.epoch = static_cast<std::int32_t>(get_u32(in));
    s.run_id = rec.value("run_id", 0);
    s.layer = rec.value("layer", 0);
    const std::size_t bits = static_cast<std::size_t>(h) * n;
    std::vector<unsigned char> bytes((bits + 7) / 8);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(in.good() || (in.eof() && bytes.empty()), ErrorKind::kIo,
            "truncated activation bits");
    s.active.resize(h, n);
    std::size_t k = 0;
    for (std::uint32_t r = 0; r < h; ++r) {
      for (std::uint32_t c = 0; c < n; ++c, ++k) s.active(r, c) = (bytes[k / 8] >> (k % 8)) & 1u;
    }
    out.push_back(std::move(s));
  }
  return out;
}

// ---- clustering ----------------------------------------------------------

std::string clustering_to_json(const GateClustering& c, const BinarizedGates& gates) {
  json j;
  j["k"] = c.k;
  j["centroids"] = matrix_to_json(c.centroids);
  j["assignments"] = c.assignments;
  j["sizes"] = c.sizes;
  j["inertia"] = c.inertia;
  j["iterations"] = c.iterations;
  j["consistency"] = gates.consistency;
  j["needs_more_clusters"] = gates.needs_more_clusters;
  json pats = json::array();
  for (const auto& p : gates.patterns) {
    std::string s;
    for (std::uint8_t v : p) s += v ? '1' : '0';
    pats.push_back(s);
  }
  j["patterns"] = pats;
  j["imitation_mse"] = c.imitation_mse ? json(*c.imitation_mse) : json(nullptr);
  return j.dump(2) + "\n";
}

// ---- misc ----------------------------------------------------------------

void write_text_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out = open_out(tmp, std::ios::out | std::ios::binary | std::ios::trunc);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    require(out.good(), ErrorKind::kIo, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  require(!ec, ErrorKind::kIo, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::kIo, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace reln
