#include "reln/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "reln/error.hpp"

namespace reln {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidParameter: return "invalid parameter";
    case ErrorKind::kShape: return "shape error";
    case ErrorKind::kDegenerateStatistics: return "degenerate statistics";
    case ErrorKind::kDiverged: return "diverged";
    case ErrorKind::kDomain: return "domain error";
    case ErrorKind::kUnsupported: return "unsupported";
    case ErrorKind::kUnderParameterized: return "under-parameterized";
    case ErrorKind::kInapplicable: return "inapplicable";
    case ErrorKind::kStability: return "stability guard";
    case ErrorKind::kIo: return "io error";
  }
  return "error";
}

void fix_signs(Matrix& cols, Matrix* partner) {
  for (Eigen::Index c = 0; c < cols.cols(); ++c) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index r = 0; r < cols.rows(); ++r) {
      // strict comparison keeps the lowest index on ties
      if (std::abs(cols(r, c)) > best_abs + 1e-12) {
        best_abs = std::abs(cols(r, c));
        best = r;
      }
    }
    if (cols.rows() > 0 && cols(best, c) < 0.0) {
      cols.col(c) *= -1.0;
      if (partner != nullptr && c < partner->cols()) partner->col(c) *= -1.0;
    }
  }
}

Svd thin_svd(const Matrix& m) {
  Svd out;
  if (m.size() == 0) {
    out.U = Matrix::Zero(m.rows(), 0);
    out.V = Matrix::Zero(m.cols(), 0);
    out.S = Vector::Zero(0);
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.U = svd.matrixU();
  out.S = svd.singularValues();
  out.V = svd.matrixV();
  fix_signs(out.V, &out.U);
  return out;
}

SymEig sym_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  const Eigen::Index n = m.rows();
  SymEig out;
  out.V.resize(n, n);
  out.D.resize(n);
  // Eigen returns ascending order
  for (Eigen::Index i = 0; i < n; ++i) {
    out.D(i) = es.eigenvalues()(n - 1 - i);
    out.V.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  fix_signs(out.V);
  return out;
}

Vector singular_values(const Matrix& m) {
  if (m.size() == 0) return Vector::Zero(0);
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues();
}

int numerical_rank(const Matrix& m, double rel_tol) {
  const Vector s = singular_values(m);
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++r;
  }
  return r;
}

double offdiag_norm(const Matrix& m) {
  double acc = 0.0;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      if (r != c) acc += m(r, c) * m(r, c);
    }
  }
  return std::sqrt(acc);
}

JointBasis joint_basis(const Matrix& sigma_yx, const Matrix& sigma_x, double cluster_tol) {
  require(sigma_x.rows() == sigma_x.cols(), ErrorKind::kShape, "sigma_x must be square");
  require(sigma_yx.cols() == sigma_x.rows(), ErrorKind::kShape,
          "sigma_yx columns must match sigma_x size");
  const Eigen::Index p = sigma_yx.rows();
  const Eigen::Index d = sigma_yx.cols();
  const Eigen::Index k = std::min(p, d);

  JointBasis out;
  if (d == 0) {
    out.U = Matrix::Zero(p, 0);
    out.S = Vector::Zero(0);
    out.V = Matrix::Zero(0, 0);
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(sigma_yx, Eigen::ComputeThinU | Eigen::ComputeFullV);
  out.U = svd.matrixU();
  out.S = svd.singularValues();
  out.V = svd.matrixV();

  // singular value per right-basis column; columns past k belong to the null space
  Vector s_full = Vector::Zero(d);
  s_full.head(k) = out.S;
  const double scale = std::max(1.0, k > 0 ? out.S(0) : 0.0);
  const double tol = cluster_tol * scale;

  Eigen::Index begin = 0;
  while (begin < d) {
    Eigen::Index end = begin + 1;
    while (end < d && std::abs(s_full(end) - s_full(begin)) <= tol) ++end;
    const Eigen::Index len = end - begin;
    if (len > 1) {
      const Matrix vb = out.V.middleCols(begin, len);
      const SymEig e = sym_eig(vb.transpose() * sigma_x * vb);
      out.V.middleCols(begin, len) = vb * e.V;
      // a zero cluster running past k pairs with zero singular values only,
      // so its U columns carry no signal and are left alone
      if (end <= k) {
        out.U.middleCols(begin, len) = out.U.middleCols(begin, len) * e.V;
      }
    }
    begin = end;
  }
  Matrix u_full = Matrix::Zero(p, d);
  u_full.leftCols(k) = out.U;
  fix_signs(out.V, &u_full);
  out.U = u_full.leftCols(k);
  out.residual = offdiag_norm(out.V.transpose() * sigma_x * out.V);
  return out;
}

}  // namespace reln
