#pragma once

#include <cstdint>
#include <vector>

#include "reln/dataset.hpp"
#include "reln/gdln.hpp"
#include "reln/linalg.hpp"

namespace reln {

struct InterlacingReport {
  Vector sigma;  // singular values of M
  Vector alpha;  // of M restricted to the column subset
  Vector beta;   // of M restricted to both subsets
  double max_violation = 0.0;
  bool holds = true;
};

/// beta_j <= alpha_j <= sigma_j for every valid j.
InterlacingReport interlacing_check(const Matrix& m, const std::vector<int>& row_subset,
                                    const std::vector<int>& col_subset, double tol = 1e-10);

struct RemovalReport {
  double full_top = 0.0;
  double max_removed_top = 0.0;
  int worst_datapoint = -1;
  bool holds = true;
};

/// Top singular value of sigma_yx never grows when one datapoint is dropped.
/// Requires elementwise-nonnegative inputs and targets.
RemovalReport datapoint_removal_check(const Dataset& data, double tol = 1e-12);

/// ||offdiag(U^T W V)||_F / ||U^T W V||_F, 0 for zero weights.
double alignment_diagnostic(const Matrix& w, const Matrix& u, const Matrix& v);

struct GradientCheckReport {
  double max_rel_error = 0.0;
  int points = 0;
  int entries_checked = 0;
};

struct GradientCheckOptions {
  int n_points = 20;
  double fd_step = 1e-6;
  double weight_scale = 0.3;
  int entries_per_edge = 24;  // sampled entries per edge; <= 0 checks all
  std::uint64_t seed = 0;
};

/// Analytic gradient against central finite differences of the forward loss
/// at random weights. The graph's weights are restored afterwards.
GradientCheckReport gradient_check(GatedGraph& g, const GatingTable& gates, const Dataset& data,
                                   const GradientCheckOptions& opts = {});

}  // namespace reln
