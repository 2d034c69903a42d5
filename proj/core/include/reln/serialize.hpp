#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "reln/dataset.hpp"
#include "reln/gate_finder.hpp"
#include "reln/gdln.hpp"
#include "reln/relu.hpp"
#include "reln/trajectory.hpp"

namespace reln {

namespace fs = std::filesystem;

// ---- datasets ------------------------------------------------------------

/// Writes <dir>/inputs.csv, <dir>/targets.csv (one column per datapoint) and
/// <dir>/dataset.json with ids, label blocks and seed.
void write_dataset(const Dataset& data, const fs::path& dir);
Dataset read_dataset(const fs::path& dir);

void write_matrix_csv(const Matrix& m, const fs::path& path);
Matrix read_matrix_csv(const fs::path& path);

// ---- graphs and gates ----------------------------------------------------

/// Hex string of a bit vector, bit k of the value is element k. Nibbles are
/// written most significant first, so "0x3" means elements 0 and 1 are set.
std::string to_hex_bits(const std::vector<bool>& bits);
std::vector<bool> from_hex_bits(const std::string& hex, std::size_t count);

/// Graph structure, edge shapes and per-datapoint gate bitmasks as JSON.
std::string network_to_json(const RelnNetwork& net, bool include_weights = false);
RelnNetwork network_from_json(const std::string& text);

// ---- trajectories --------------------------------------------------------

/// Shared CSV schema: epoch,loss,source,run_id,<mode columns>. Rows of all
/// trajectories are appended in order; mode columns are the union of names.
void write_trajectories_csv(const std::vector<Trajectory>& trajs, std::ostream& out);
void write_trajectories_csv(const std::vector<Trajectory>& trajs, const fs::path& path);

/// Inverse of write_trajectories_csv, grouping rows by (source, run_id) in
/// order of first appearance.
std::vector<Trajectory> read_trajectories_csv(const fs::path& path);

// ---- activation samples --------------------------------------------------

inline constexpr char kActivationMagic[4] = {'R', 'L', 'A', 'S'};

/// Records of a 16-byte header (magic, H, N, epoch as little-endian 32-bit
/// values) followed by the H x N bits row-major, LSB first, padded to a byte.
/// A JSON index next to the file lists offset, run, layer and epoch per record.
void write_activation_samples(const std::vector<ActivationSample>& samples, const fs::path& bin,
                              const fs::path& index);
std::vector<ActivationSample> read_activation_samples(const fs::path& bin, const fs::path& index);

// ---- clustering ----------------------------------------------------------

std::string clustering_to_json(const GateClustering& c, const BinarizedGates& gates);

// ---- misc ----------------------------------------------------------------

/// Writes through a temporary file and renames it into place.
void write_text_atomic(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

}  // namespace reln
