#include "reln/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "reln/error.hpp"

namespace reln {

namespace {

Matrix select(const Matrix& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = m(rows[r], cols[c]);
  }
  return out;
}

std::vector<int> all_indices(Eigen::Index n) {
  std::vector<int> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out[i] = static_cast<int>(i);
  return out;
}

}  // namespace

InterlacingReport interlacing_check(const Matrix& m, const std::vector<int>& row_subset,
                                    const std::vector<int>& col_subset, double tol) {
  require(!row_subset.empty() && !col_subset.empty(), ErrorKind::kInvalidParameter,
          "subsets must be nonempty");
  for (int r : row_subset) {
    require(r >= 0 && r < m.rows(), ErrorKind::kShape, "row index out of range");
  }
  for (int c : col_subset) {
    require(c >= 0 && c < m.cols(), ErrorKind::kShape, "column index out of range");
  }
  InterlacingReport rep;
  const Matrix a = select(m, all_indices(m.rows()), col_subset);
  const Matrix b = select(m, row_subset, col_subset);
  rep.sigma = singular_values(m);
  rep.alpha = singular_values(a);
  rep.beta = singular_values(b);
  for (Eigen::Index j = 0; j < rep.alpha.size(); ++j) {
    rep.max_violation = std::max(rep.max_violation, rep.alpha(j) - rep.sigma(j));
  }
  for (Eigen::Index j = 0; j < rep.beta.size(); ++j) {
    rep.max_violation = std::max(rep.max_violation, rep.beta(j) - rep.alpha(j));
  }
  rep.holds = rep.max_violation <= tol;
  return rep;
}

RemovalReport datapoint_removal_check(const Dataset& data, double tol) {
  require(data.inputs.minCoeff() >= 0.0 && data.targets.minCoeff() >= 0.0,
          ErrorKind::kInapplicable, "positivity argument needs nonnegative inputs and targets");
  RemovalReport rep;
  const int n = data.size();
  auto top = [&](const std::vector<bool>& keep) {
    Matrix x = data.inputs;
    Matrix y = data.targets;
    for (int i = 0; i < n; ++i) {
      if (!keep[i]) {
        x.col(i).setZero();
        y.col(i).setZero();
      }
    }
    const Vector s = singular_values(y * x.transpose() / static_cast<double>(n));
    return s.size() ? s(0) : 0.0;
  };
  rep.full_top = top(std::vector<bool>(n, true));
  for (int i = 0; i < n; ++i) {
    std::vector<bool> keep(n, true);
    keep[i] = false;
    const double t = top(keep);
    if (t > rep.max_removed_top || rep.worst_datapoint < 0) {
      rep.max_removed_top = t;
      rep.worst_datapoint = i;
    }
  }
  rep.holds = rep.max_removed_top <= rep.full_top + tol;
  return rep;
}

double alignment_diagnostic(const Matrix& w, const Matrix& u, const Matrix& v) {
  require(u.rows() == w.rows() && v.rows() == w.cols(), ErrorKind::kShape,
          "U and V must match the weight shape");
  const Matrix proj = u.transpose() * w * v;
  const double total = proj.norm();
  return total == 0.0 ? 0.0 : offdiag_norm(proj) / total;
}

GradientCheckReport gradient_check(GatedGraph& g, const GatingTable& gates, const Dataset& data,
                                   const GradientCheckOptions& opts) {
  require(opts.n_points >= 1, ErrorKind::kInvalidParameter, "n_points must be >= 1");
  require(opts.fd_step > 0.0, ErrorKind::kInvalidParameter, "fd_step must be positive");
  const std::vector<Matrix> saved = g.weights();
  std::mt19937_64 rng(opts.seed);
  GradientCheckReport rep;
  for (int point = 0; point < opts.n_points; ++point) {
    init_weights(g, opts.weight_scale, rng());
    const std::vector<Matrix> grad = gradient(g, gates, data);
    for (int e = 0; e < g.num_edges(); ++e) {
      Matrix& w = g.edge(e).weight;
      const Eigen::Index total = w.size();
      std::vector<Eigen::Index> entries;
      if (opts.entries_per_edge <= 0 || opts.entries_per_edge >= total) {
        for (Eigen::Index i = 0; i < total; ++i) entries.push_back(i);
      } else {
        std::uniform_int_distribution<Eigen::Index> pick(0, total - 1);
        for (int s = 0; s < opts.entries_per_edge; ++s) entries.push_back(pick(rng));
      }
      Vector analytic(static_cast<Eigen::Index>(entries.size()));
      Vector numeric(static_cast<Eigen::Index>(entries.size()));
      for (std::size_t s = 0; s < entries.size(); ++s) {
        double& x = w.data()[entries[s]];
        const double orig = x;
        x = orig + opts.fd_step;
        const double lp = loss(g, gates, data);
        x = orig - opts.fd_step;
        const double lm = loss(g, gates, data);
        x = orig;
        numeric(s) = -(lp - lm) / (2.0 * opts.fd_step);
        analytic(s) = grad[e].data()[entries[s]];
      }
      const double scale = std::max(analytic.norm(), numeric.norm());
      if (scale > 0.0) {
        rep.max_rel_error = std::max(rep.max_rel_error, (analytic - numeric).norm() / scale);
      }
      rep.entries_checked += static_cast<int>(entries.size());
    }
    ++rep.points;
  }
  g.set_weights(saved);
  return rep;
}

}  // namespace reln
