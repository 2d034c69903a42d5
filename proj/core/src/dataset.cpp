#include "reln/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "reln/error.hpp"

namespace reln {

Dataset build_xor_margin(double delta) {
  require(delta >= 0.0, ErrorKind::kInvalidParameter, "delta must be nonnegative");
  Dataset d;
  d.name = "xor";
  d.inputs.resize(3, 4);
  d.inputs << -1, 1, -1, 1,
              -1, -1, 1, 1,
              -delta, delta, delta, -delta;
  d.targets.resize(1, 4);
  d.targets << -1, 1, 1, -1;
  d.item_ids = {0, 1, 2, 3};
  d.label_blocks = {{0, 1, kSharedBlock}};
  d.num_items = 4;
  return d;
}

Matrix build_hierarchy_labels(int n_items) {
  require(n_items >= 2 && (n_items & (n_items - 1)) == 0, ErrorKind::kInvalidParameter,
          "hierarchy needs a power-of-two item count >= 2");
  Matrix labels = Matrix::Zero(2 * n_items - 1, n_items);
  int row = 0;
  for (int group = n_items; group >= 1; group /= 2) {
    for (int start = 0; start < n_items; start += group) {
      labels.block(row, start, 1, group).setOnes();
      ++row;
    }
  }
  return labels;
}

Dataset build_contextual(int items_per_context, int contexts, const Matrix& shared_labels,
                         const std::vector<Matrix>& context_labels) {
  require(contexts >= 2, ErrorKind::kInvalidParameter, "need at least two contexts");
  require(items_per_context >= 1, ErrorKind::kInvalidParameter, "need at least one item");
  require(static_cast<int>(context_labels.size()) == contexts, ErrorKind::kShape,
          "one label matrix per context required");
  require(shared_labels.cols() == items_per_context, ErrorKind::kShape,
          "shared label width must equal items_per_context");
  for (const auto& m : context_labels) {
    require(m.cols() == items_per_context, ErrorKind::kShape,
            "context label width must equal items_per_context");
  }

  const int k = items_per_context;
  const int n = k * contexts;
  Dataset d;
  d.name = "contextual";
  d.num_items = k;
  d.num_contexts = contexts;
  d.inputs = Matrix::Zero(k + contexts, n);
  for (int c = 0; c < contexts; ++c) {
    for (int i = 0; i < k; ++i) {
      const int col = c * k + i;
      d.inputs(i, col) = 1.0;
      d.inputs(k + c, col) = 1.0;
      d.item_ids.push_back(i);
      d.context_ids.push_back(c);
    }
  }

  Eigen::Index rows = shared_labels.rows();
  for (const auto& m : context_labels) rows += m.rows();
  d.targets = Matrix::Zero(rows, n);

  int r = 0;
  if (shared_labels.rows() > 0) {
    for (int c = 0; c < contexts; ++c) {
      d.targets.block(0, c * k, shared_labels.rows(), k) = shared_labels;
    }
    d.label_blocks.push_back({0, static_cast<int>(shared_labels.rows()), kSharedBlock});
    r = static_cast<int>(shared_labels.rows());
  }
  for (int c = 0; c < contexts; ++c) {
    const auto& m = context_labels[c];
    d.targets.block(r, c * k, m.rows(), k) = m;
    d.label_blocks.push_back({r, r + static_cast<int>(m.rows()), c});
    r += static_cast<int>(m.rows());
  }
  return d;
}

Matrix permuted_hierarchy(int n_items, std::uint64_t seed) {
  const Matrix base = build_hierarchy_labels(n_items);
  std::vector<int> order(n_items);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  Matrix out(base.rows(), base.cols());
  for (int j = 0; j < n_items; ++j) out.col(j) = base.col(order[j]);
  return out;
}

Dataset build_contextual_hierarchy(int items_per_context, int contexts,
                                   std::optional<std::uint64_t> permute_seed) {
  const Matrix shared = build_hierarchy_labels(items_per_context);
  std::vector<Matrix> blocks;
  blocks.reserve(contexts);
  for (int c = 0; c < contexts; ++c) {
    if (permute_seed) {
      blocks.push_back(permuted_hierarchy(items_per_context, *permute_seed + 7919ULL * c));
    } else {
      blocks.push_back(shared);
    }
  }
  Dataset d = build_contextual(items_per_context, contexts, shared, blocks);
  d.name = permute_seed ? "contextual_permuted" : "contextual_symmetric";
  d.seed = permute_seed.value_or(0);
  return d;
}

Dataset build_hierarchy_dataset(int n_items) {
  Dataset d;
  d.name = "hierarchy";
  d.inputs = Matrix::Identity(n_items, n_items);
  d.targets = build_hierarchy_labels(n_items);
  d.num_items = n_items;
  for (int i = 0; i < n_items; ++i) d.item_ids.push_back(i);
  d.label_blocks = {{0, static_cast<int>(d.targets.rows()), kSharedBlock}};
  return d;
}

CorrelationPair decompose(const Matrix& sigma_yx, const Matrix& sigma_x) {
  CorrelationPair out;
  out.sigma_yx = sigma_yx;
  out.sigma_x = sigma_x;
  const JointBasis jb = joint_basis(sigma_yx, sigma_x);
  const Eigen::Index k = jb.S.size();
  out.svd_yx.U = jb.U;
  out.svd_yx.S = jb.S;
  out.svd_yx.V = jb.V.leftCols(k);
  out.eig_x = sym_eig(sigma_x);
  out.mode_variance.resize(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    out.mode_variance(a) = out.svd_yx.V.col(a).dot(sigma_x * out.svd_yx.V.col(a));
  }
  out.diagonalizability_residual = jb.residual;
  return out;
}

CorrelationPair correlation_stats(const Matrix& inputs, const Matrix& targets, int n_total) {
  require(inputs.cols() == targets.cols(), ErrorKind::kShape,
          "inputs and targets need equal column counts");
  require(n_total > 0, ErrorKind::kDegenerateStatistics, "empty dataset");
  const double inv_n = 1.0 / n_total;
  return decompose(inv_n * targets * inputs.transpose(), inv_n * inputs * inputs.transpose());
}

CorrelationPair correlation_stats(const Dataset& data, const DataMask& mask) {
  const int n = data.size();
  Matrix x = data.inputs;
  Matrix y = data.targets;
  if (mask.datapoints) {
    require(static_cast<int>(mask.datapoints->size()) == n, ErrorKind::kShape,
            "datapoint mask length must equal N");
    int active = 0;
    for (int i = 0; i < n; ++i) {
      if ((*mask.datapoints)[i]) {
        ++active;
      } else {
        x.col(i).setZero();
        y.col(i).setZero();
      }
    }
    require(active > 0, ErrorKind::kDegenerateStatistics, "mask selects no datapoints");
  }
  if (mask.input_rows) {
    require(static_cast<int>(mask.input_rows->size()) == data.input_dim(), ErrorKind::kShape,
            "input-row mask length must equal d");
    for (int r = 0; r < data.input_dim(); ++r) {
      if (!(*mask.input_rows)[r]) x.row(r).setZero();
    }
  }
  if (mask.output_rows) {
    require(static_cast<int>(mask.output_rows->size()) == data.output_dim(), ErrorKind::kShape,
            "output-row mask length must equal p");
    for (int r = 0; r < data.output_dim(); ++r) {
      if (!(*mask.output_rows)[r]) y.row(r).setZero();
    }
  }
  return correlation_stats(x, y, n);
}

DiagonalizabilityResult check_diagonalizable(const CorrelationPair& stats, double tol) {
  const JointBasis jb = joint_basis(stats.sigma_yx, stats.sigma_x);
  return {jb.residual <= tol, jb.residual};
}

}  // namespace reln
