#pragma once

#include <Eigen/Dense>

namespace reln {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thin singular value decomposition M = U diag(S) V^T with S descending.
/// Each (u, v) pair is sign-fixed so the largest-magnitude entry of v is
/// positive (u is flipped with it).
struct Svd {
  Matrix U;
  Vector S;
  Matrix V;
};

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
struct SymEig {
  Matrix V;
  Vector D;
};

Svd thin_svd(const Matrix& m);
SymEig sym_eig(const Matrix& m);

/// Singular values only, descending.
Vector singular_values(const Matrix& m);

/// Numerical rank using a relative tolerance on the singular values.
int numerical_rank(const Matrix& m, double rel_tol = 1e-10);

/// Frobenius norm of the off-diagonal part of a (possibly rectangular) matrix.
double offdiag_norm(const Matrix& m);

/// Flip columns so each one's largest-magnitude entry is positive; `partner`
/// columns (if non-null) are flipped alongside. Ties go to the lowest index.
void fix_signs(Matrix& cols, Matrix* partner = nullptr);

/// Right singular basis of sigma_yx completed to the full input space and
/// rotated inside degenerate singular-value clusters so that it also
/// diagonalizes sigma_x whenever that is possible. U is rotated to match.
struct JointBasis {
  Matrix U;      // p x k, k = min(p, d)
  Vector S;      // k
  Matrix V;      // d x d, first k columns pair with U
  double residual = 0.0;  // ||offdiag(V^T sigma_x V)||_F
};

JointBasis joint_basis(const Matrix& sigma_yx, const Matrix& sigma_x, double cluster_tol = 1e-9);

}  // namespace reln
