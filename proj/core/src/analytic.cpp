#include "reln/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "reln/error.hpp"

namespace reln {

void validate(const ModeParams& p) {
  require(p.lambda >= 0.0, ErrorKind::kInvalidParameter, "lambda must be nonnegative");
  require(p.delta_x > 0.0, ErrorKind::kInvalidParameter, "delta_x must be positive");
  require(p.a0 > 0.0, ErrorKind::kInvalidParameter, "a0 must be positive");
  require(p.tau > 0.0, ErrorKind::kInvalidParameter, "tau must be positive");
}

double linear_mode_trajectory(const ModeParams& p, double t) {
  validate(p);
  require(t >= 0.0, ErrorKind::kDomain, "time must be nonnegative");
  if (p.lambda == 0.0) return p.a0;
  const double fixed = p.lambda / p.delta_x;
  return fixed / (1.0 - (1.0 - fixed / p.a0) * std::exp(-2.0 * p.lambda * t / p.tau));
}

double time_to_mode_value(const ModeParams& p, double omega_f) {
  validate(p);
  require(p.lambda > 0.0, ErrorKind::kDomain, "mode without drive never moves");
  const double fixed = p.lambda / p.delta_x;
  require(omega_f > p.a0 && omega_f < fixed, ErrorKind::kDomain,
          "omega_f must lie strictly between a0 and lambda/delta_x");
  const double num = omega_f * (p.lambda - p.a0 * p.delta_x);
  const double den = p.a0 * (p.lambda - omega_f * p.delta_x);
  return p.tau / (2.0 * p.lambda) * std::log(num / den);
}

XorPathway xor_pathway(double delta, XorVariant variant) {
  require(delta >= 0.0, ErrorKind::kInvalidParameter, "delta must be nonnegative");
  if (variant == XorVariant::kLinearGating) return {delta / 2.0, delta * delta / 2.0, 2};
  // one datapoint x per pathway: s = |x|/4, d = |x|^2/4 = 4 s^2
  const double s = std::sqrt(0.125 + delta * delta / 16.0);
  return {s, 4.0 * s * s, 4};
}

namespace {

// Total loss of `pathways` identical pathways, each holding 1/pathways of the
// unit target variance: L = 1/2 - P*s*a + P*d*a^2/2.
double pathway_loss(const XorPathway& xp, double a) {
  return 0.5 - xp.pathways * xp.s * a + 0.5 * xp.pathways * xp.d * a * a;
}

}  // namespace

XorLoss xor_gdln_loss(double delta, double t, XorVariant variant, double a0, double tau) {
  const XorPathway xp = xor_pathway(delta, variant);
  if (xp.s == 0.0) return {0.5, true};
  const double a = linear_mode_trajectory({xp.s, xp.d, a0, tau}, t);
  return {pathway_loss(xp, a), false};
}

std::optional<double> xor_time_to_loss(double delta, double threshold, XorVariant variant,
                                       double a0, double tau) {
  require(threshold > 0.0, ErrorKind::kInvalidParameter, "threshold must be positive");
  const XorPathway xp = xor_pathway(delta, variant);
  if (xp.s == 0.0) return threshold >= 0.5 ? std::optional<double>(0.0) : std::nullopt;
  if (pathway_loss(xp, a0) <= threshold) return 0.0;
  // smaller root of P*d/2 a^2 - P*s a + (1/2 - threshold) = 0
  const double qa = 0.5 * xp.pathways * xp.d;
  const double qb = -xp.pathways * xp.s;
  const double qc = 0.5 - threshold;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) return std::nullopt;
  const double a_star = (-qb - std::sqrt(disc)) / (2.0 * qa);
  return time_to_mode_value({xp.s, xp.d, a0, tau}, a_star);
}

double crossover_delta() { return std::sqrt(2.0 / 3.0); }

RaceSystem race_system_from_stats(const GatedGraph& g, const PathwayStats& stats, double b0) {
  require(b0 > 0.0, ErrorKind::kInvalidParameter, "initial mode strength must be positive");
  const int np = stats.num_paths;
  RaceSystem sys;
  sys.sigma_y = stats.sigma_y;
  sys.overlap.assign(np, std::vector<Matrix>(np));
  sys.input_var.assign(np, std::vector<Matrix>(np));
  for (int p = 0; p < np; ++p) {
    const int r = stats.rank[p];
    sys.depth.push_back(static_cast<int>(g.paths()[p].size()));
    sys.S.push_back(stats.svd[p].S.head(r));
    sys.B0.push_back(Vector::Constant(r, b0));
  }
  for (int p = 0; p < np; ++p) {
    const int rp = stats.rank[p];
    for (int j : stats.same_terminal[p]) {
      const int rj = stats.rank[j];
      sys.overlap[j][p] = stats.svd[p].U.leftCols(rp).transpose() * stats.svd[j].U.leftCols(rj);
      sys.input_var[j][p] = stats.svd[j].V.leftCols(rj).transpose() * stats.sigma_x(j, p) *
                            stats.svd[p].V.leftCols(rp);
    }
  }
  return sys;
}

Trajectory race_reduction_integrate(const RaceSystem& sys, double tau, double dt, int steps,
                                    int record_every) {
  require(tau > 0.0 && dt > 0.0, ErrorKind::kInvalidParameter, "tau and dt must be positive");
  require(steps >= 0 && record_every >= 1, ErrorKind::kInvalidParameter,
          "steps must be >= 0 and record_every >= 1");
  const int np = sys.num_paths();
  require(static_cast<int>(sys.depth.size()) == np && static_cast<int>(sys.B0.size()) == np,
          ErrorKind::kShape, "race system fields disagree in path count");
  double max_s = 0.0;
  for (const Vector& s : sys.S) {
    if (s.size() > 0) max_s = std::max(max_s, s.maxCoeff());
  }
  require(max_s == 0.0 || dt <= tau / (10.0 * max_s), ErrorKind::kStability,
          "Euler step too large: need dt <= tau / (10 max S)");

  std::vector<Vector> b(np);
  for (int p = 0; p < np; ++p) {
    require(sys.B0[p].size() == sys.S[p].size(), ErrorKind::kShape, "B0 and S size mismatch");
    b[p] = sys.B0[p].array().pow(1.0 / sys.depth[p]).matrix();
  }

  Trajectory traj;
  traj.source = "reduction";
  for (int p = 0; p < np; ++p) {
    for (Eigen::Index a = 0; a < sys.S[p].size(); ++a) {
      traj.mode_names.push_back("path" + std::to_string(p) + "_mode" + std::to_string(a));
    }
  }

  std::vector<Vector> B(np);
  auto strengths = [&] {
    for (int p = 0; p < np; ++p) B[p] = b[p].array().pow(sys.depth[p]).matrix();
  };
  auto drive = [&](int p) {
    Vector out = sys.S[p];
    for (int j = 0; j < np; ++j) {
      const Matrix& k = sys.overlap[j][p];
      if (k.size() == 0 || B[j].size() == 0) continue;
      out -= (k * B[j].asDiagonal() * sys.input_var[j][p]).diagonal();
    }
    return out;
  };
  auto loss_now = [&] {
    double acc = sys.sigma_y;
    for (int p = 0; p < np; ++p) {
      acc -= 2.0 * B[p].dot(sys.S[p]);
      for (int j = 0; j < np; ++j) {
        const Matrix& k = sys.overlap[j][p];
        if (k.size() == 0 || B[j].size() == 0 || B[p].size() == 0) continue;
        acc += (B[p].asDiagonal() * k * B[j].asDiagonal() * sys.input_var[j][p]).trace();
      }
    }
    return 0.5 * acc;
  };

  const double h = dt / tau;
  for (int step = 0;; ++step) {
    strengths();
    const bool last = step == steps;
    if (step % record_every == 0 || last) {
      std::vector<double> row;
      for (int p = 0; p < np; ++p) row.insert(row.end(), B[p].data(), B[p].data() + B[p].size());
      for (double v : row) {
        if (!std::isfinite(v)) throw DivergedError(step, v);
      }
      traj.push(step * dt, sys.sigma_y > 0.0 ? loss_now() : 0.0);
      traj.mode_values.push_back(std::move(row));
    }
    if (last) break;
    std::vector<Vector> next(np);
    for (int p = 0; p < np; ++p) {
      const int depth = sys.depth[p];
      const Vector lead = b[p].array().pow(depth - 1).matrix();
      next[p] = b[p] + h * lead.cwiseProduct(drive(p));
    }
    b = std::move(next);
  }
  return traj;
}

double contextual_closed_form(int contexts, double s_alpha, double d_alpha, double b0, double tau,
                              double t) {
  require(contexts >= 3, ErrorKind::kUnsupported, "closed form needs at least three contexts");
  require(d_alpha > 0.0 && b0 > 0.0 && tau > 0.0 && s_alpha >= 0.0,
          ErrorKind::kInvalidParameter, "need s >= 0 and d, b0, tau > 0");
  require(t >= 0.0, ErrorKind::kDomain, "time must be nonnegative");
  if (s_alpha == 0.0) return b0 / (1.0 + 2.0 * b0 * d_alpha * t / ((contexts - 1) * tau));
  const double fixed = (contexts - 1) * s_alpha / d_alpha;
  return fixed / (1.0 - (1.0 - fixed / b0) * std::exp(-2.0 * s_alpha * t / tau));
}

CouplingCoefficients coupling_coefficients(int contexts) {
  require(contexts >= 3, ErrorKind::kUnsupported, "coupling needs at least three contexts");
  const double c = contexts;
  return {(c - 2.0) / (c - 1.0), -1.0 / (c - 1.0), -1.0 / ((c - 1.0) * (c - 2.0))};
}

Matrix common_pathway_residual(const Dataset& data, const CorrelationPair& common_stats) {
  const Svd& f = common_stats.svd_yx;
  const double tol = 1e-10 * std::max(1.0, f.S.size() ? f.S(0) : 0.0);
  Matrix w = Matrix::Zero(data.output_dim(), data.input_dim());
  for (Eigen::Index a = 0; a < f.S.size(); ++a) {
    const double d = common_stats.mode_variance(a);
    if (f.S(a) <= tol || d <= tol) continue;
    w += (f.S(a) / d) * f.U.col(a) * f.V.col(a).transpose();
  }
  return data.targets - w * data.inputs;
}

Dataset residual_dataset(const Dataset& data) {
  Dataset out = data;
  out.targets = common_pathway_residual(data, correlation_stats(data));
  out.name = data.name + "_residual";
  return out;
}

std::vector<ModeGroup> degenerate_groups(const Vector& s, double rel_tol) {
  std::vector<ModeGroup> out;
  const double scale = s.size() ? std::max(std::abs(s(0)), 1e-300) : 1.0;
  int begin = 0;
  for (int a = 1; a <= s.size(); ++a) {
    if (a == s.size() || std::abs(s(a) - s(begin)) > rel_tol * scale) {
      out.push_back({begin, a});
      begin = a;
    }
  }
  return out;
}

Vector block_mode_strengths(const Matrix& w, const Matrix& u, const Matrix& v,
                            const std::vector<ModeGroup>& groups) {
  require(u.rows() == w.rows() && v.rows() == w.cols(), ErrorKind::kShape,
          "U and V must match the weight shape");
  std::vector<double> out;
  for (const ModeGroup& gr : groups) {
    const int n = gr.end - gr.begin;
    const Matrix block =
        u.middleCols(gr.begin, n).transpose() * w * v.middleCols(gr.begin, n);
    const Vector sv = singular_values(block);
    out.insert(out.end(), sv.data(), sv.data() + sv.size());
  }
  return Eigen::Map<Vector>(out.data(), static_cast<Eigen::Index>(out.size()));
}

Vector balanced_initial_strengths(const Matrix& w1, const Matrix& w2, const Matrix& u,
                                  const Matrix& v, const std::vector<ModeGroup>& groups) {
  require(w2.cols() == w1.rows() && u.rows() == w2.rows() && v.rows() == w1.cols(),
          ErrorKind::kShape, "layer shapes do not chain");
  std::vector<double> out;
  Matrix taken(w1.rows(), 0);  // orthonormal hidden directions of stronger modes
  for (const ModeGroup& gr : groups) {
    const int n = gr.end - gr.begin;
    Matrix q = 0.5 * (w1 * v.middleCols(gr.begin, n) + w2.transpose() * u.middleCols(gr.begin, n));
    const Matrix raw = q;
    if (taken.cols() > 0) q -= taken * (taken.transpose() * q);
    Vector ev = sym_eig(q.transpose() * q).D;
    std::sort(ev.data(), ev.data() + ev.size(), std::greater<double>());
    out.insert(out.end(), ev.data(), ev.data() + ev.size());
    Matrix grown(w1.rows(), taken.cols() + n);
    grown << taken, raw;
    Eigen::HouseholderQR<Matrix> qr(grown);
    const int k = std::min<int>(static_cast<int>(grown.cols()), static_cast<int>(w1.rows()));
    taken = qr.householderQ() * Matrix::Identity(w1.rows(), k);
  }
  return Eigen::Map<Vector>(out.data(), static_cast<Eigen::Index>(out.size()));
}

}  // namespace reln
