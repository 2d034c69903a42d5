#pragma once

#include <optional>
#include <vector>

#include "reln/dataset.hpp"
#include "reln/gdln.hpp"
#include "reln/linalg.hpp"
#include "reln/trajectory.hpp"

namespace reln {

/// One decoupled mode of a deep linear pathway.
struct ModeParams {
  double lambda = 0.0;   // input-output singular value
  double delta_x = 1.0;  // input variance along the mode
  double a0 = 1e-6;      // initial mode strength
  double tau = 1.0;      // 1 / (N * lr)
};

void validate(const ModeParams& p);

/// Sigmoidal mode strength of a two-layer balanced pathway at time t (epochs).
double linear_mode_trajectory(const ModeParams& p, double t);

/// Time at which the mode strength reaches omega_f, for a0 < omega_f < lambda/delta_x.
double time_to_mode_value(const ModeParams& p, double omega_f);

enum class XorVariant { kLinearGating, kXorGating };

/// Singular value s and input variance d of one pathway of the XoR-margin GDLN.
struct XorPathway {
  double s = 0.0;
  double d = 0.0;
  int pathways = 0;
};

XorPathway xor_pathway(double delta, XorVariant variant);

struct XorLoss {
  double loss = 0.5;
  bool degenerate = false;  // linear gating at delta = 0 has no drive
};

XorLoss xor_gdln_loss(double delta, double t, XorVariant variant, double a0, double tau);

/// Analytic time for xor_gdln_loss to fall to `threshold` (inverts the mode
/// trajectory). nullopt when the pathway never gets there.
std::optional<double> xor_time_to_loss(double delta, double threshold, XorVariant variant,
                                       double a0, double tau);

/// Margin at which linear and XoR pathways have equal singular values.
double crossover_delta();

/// Mode-level description of competing pathways sharing output nodes.
/// Every path has its own edges; each edge is assumed balanced with the
/// others on its path, so B_p = b_p^depth.
struct RaceSystem {
  std::vector<int> depth;        // edges per path
  std::vector<Vector> S;         // per path: singular values of sigma_yx(p)
  std::vector<Vector> B0;        // per path: initial mode strengths
  // overlap[j][p] = U_p^T U_j (r_p x r_j); input_var[j][p] = V_j^T sigma_x(j,p) V_p
  // (r_j x r_p). Empty matrices mark pairs that do not share a terminal node.
  std::vector<std::vector<Matrix>> overlap;
  std::vector<std::vector<Matrix>> input_var;
  double sigma_y = 0.0;  // enables loss reporting when positive

  int num_paths() const { return static_cast<int>(S.size()); }
};

/// Race system read off a graph's pathway statistics, starting every mode at b0.
RaceSystem race_system_from_stats(const GatedGraph& g, const PathwayStats& stats, double b0);

/// Explicit Euler integration of the race reduction. Output mode columns are
/// named path<p>_mode<a>; loss is filled when system.sigma_y > 0.
Trajectory race_reduction_integrate(const RaceSystem& system, double tau, double dt, int steps,
                                    int record_every = 1);

/// Mode strength of a pathway gated on in C-1 of C contexts, trained on the
/// residual left by the common pathway.
double contextual_closed_form(int contexts, double s_alpha, double d_alpha, double b0, double tau,
                              double t);

struct CouplingCoefficients {
  double input_overlap = 0.0;   // sigma_x(j,p) = input_overlap * sigma_x(p,p)
  double output_overlap = 0.0;  // U_p^T U_j restricted to a mode block
  double alt_output_overlap = 0.0;  // -1/((C-1)(C-2)), kept for comparison
};

CouplingCoefficients coupling_coefficients(int contexts);

/// Y - U diag(S/D) V^T X over modes with nonzero input variance.
Matrix common_pathway_residual(const Dataset& data, const CorrelationPair& common_stats);

/// Dataset with its targets replaced by the common-pathway residual.
Dataset residual_dataset(const Dataset& data);

/// Half-open index range of singular values that agree within rel_tol.
struct ModeGroup {
  int begin = 0;
  int end = 0;
};

std::vector<ModeGroup> degenerate_groups(const Vector& s, double rel_tol = 1e-6);

/// Singular values of U_g^T W V_g for every group, concatenated in group
/// order. Within a degenerate group the network may rotate freely, so these
/// are the basis-independent mode strengths.
Vector block_mode_strengths(const Matrix& w, const Matrix& u, const Matrix& v,
                            const std::vector<ModeGroup>& groups);

/// Initial mode strengths of a two-layer pathway y = W2 W1 x under the
/// balanced ansatz: eigenvalues (descending) of Q^T Q per group, with
/// Q = (W1 V_g + W2^T U_g) / 2.
Vector balanced_initial_strengths(const Matrix& w1, const Matrix& w2, const Matrix& u,
                                  const Matrix& v, const std::vector<ModeGroup>& groups);

}  // namespace reln
