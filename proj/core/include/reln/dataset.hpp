#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reln/linalg.hpp"

namespace reln {

inline constexpr int kSharedBlock = -1;

/// Rows [row_begin, row_end) of the target matrix; `context` is the id of the
/// only context the block is active in, or kSharedBlock.
struct LabelBlock {
  int row_begin = 0;
  int row_end = 0;
  int context = kSharedBlock;
};

/// Full-batch dataset, one column per datapoint.
struct Dataset {
  std::string name;
  Matrix inputs;   // d x N
  Matrix targets;  // p x N
  std::vector<int> item_ids;
  std::vector<int> context_ids;  // empty when the task has no contexts
  std::vector<LabelBlock> label_blocks;
  int num_items = 0;
  int num_contexts = 0;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(inputs.cols()); }
  int input_dim() const { return static_cast<int>(inputs.rows()); }
  int output_dim() const { return static_cast<int>(targets.rows()); }
  bool contextual() const { return !context_ids.empty(); }
};

/// XoR in the first two inputs with a linear margin of 2*delta in the third.
Dataset build_xor_margin(double delta);

/// Balanced binary-tree label matrix, (2n-1) x n, root row first, leaves last.
Matrix build_hierarchy_labels(int n_items);

/// Items-by-contexts task: item one-hots stacked over context one-hots, with a
/// shared label block over one block per context.
Dataset build_contextual(int items_per_context, int contexts, const Matrix& shared_labels,
                         const std::vector<Matrix>& context_labels);

/// Hierarchy with its leaf (column) order permuted by a seeded shuffle.
Matrix permuted_hierarchy(int n_items, std::uint64_t seed);

/// Contextual task with an 8-leaf style hierarchy in every block. When
/// `permute_seed` is set, each context block gets its own seeded leaf
/// permutation; otherwise all blocks are identical.
Dataset build_contextual_hierarchy(int items_per_context, int contexts,
                                   std::optional<std::uint64_t> permute_seed);

/// Identity inputs with hierarchical labels (the classic four-item tree).
Dataset build_hierarchy_dataset(int n_items);

/// Selects datapoints and/or input and output rows. Unset fields keep all.
struct DataMask {
  std::optional<std::vector<bool>> datapoints;
  std::optional<std::vector<bool>> input_rows;
  std::optional<std::vector<bool>> output_rows;
};

struct CorrelationPair {
  Matrix sigma_yx;  // p x d
  Matrix sigma_x;   // d x d
  Svd svd_yx;       // U p x k, S k, V d x k, jointly aligned with sigma_x
  SymEig eig_x;     // eigendecomposition of sigma_x
  Vector mode_variance;  // v_a^T sigma_x v_a for every column of svd_yx.V
  double diagonalizability_residual = 0.0;
};

/// Correlation statistics normalized by the full dataset size N.
CorrelationPair correlation_stats(const Dataset& data, const DataMask& mask = {});

/// Same statistics from raw matrices (normalization by n_total).
CorrelationPair correlation_stats(const Matrix& inputs, const Matrix& targets, int n_total);

/// Populate SVD factors and residual for a given correlation pair.
CorrelationPair decompose(const Matrix& sigma_yx, const Matrix& sigma_x);

struct DiagonalizabilityResult {
  bool diagonalizable = false;
  double residual = 0.0;
};

inline constexpr double kDefaultDiagTol = 1e-8;

DiagonalizabilityResult check_diagonalizable(const CorrelationPair& stats,
                                             double tol = kDefaultDiagTol);

}  // namespace reln
