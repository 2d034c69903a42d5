#include <random>

#include <gtest/gtest.h>

#include "reln/linalg.hpp"

using namespace reln;

namespace {

Matrix random_matrix(int r, int c, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n;
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

}  // namespace

TEST(Linalg, ThinSvdReconstructs) {
  for (unsigned s = 0; s < 20; ++s) {
    const Matrix m = random_matrix(3 + s % 4, 2 + s % 5, s);
    const Svd f = thin_svd(m);
    EXPECT_LT((f.U * f.S.asDiagonal() * f.V.transpose() - m).norm(), 1e-12 * (1 + m.norm()));
    for (Eigen::Index a = 1; a < f.S.size(); ++a) EXPECT_GE(f.S(a - 1), f.S(a));
    EXPECT_LT((f.U.transpose() * f.U - Matrix::Identity(f.S.size(), f.S.size())).norm(), 1e-12);
  }
}

TEST(Linalg, SingularValuesMatchGramEigenvalues) {
  const Matrix m = random_matrix(5, 3, 11);
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.transpose() * m);
  Vector ev = es.eigenvalues().cwiseSqrt().reverse();
  EXPECT_LT((singular_values(m) - ev).norm(), 1e-12);
}

TEST(Linalg, SignConventionPutsLargestEntryPositive) {
  const Svd f = thin_svd(random_matrix(4, 4, 3));
  for (Eigen::Index a = 0; a < f.V.cols(); ++a) {
    Eigen::Index idx = 0;
    f.V.col(a).cwiseAbs().maxCoeff(&idx);
    EXPECT_GT(f.V(idx, a), 0.0);
  }
}

TEST(Linalg, SymEigDescendingAndReconstructs) {
  const Matrix a = random_matrix(6, 6, 5);
  const Matrix s = a + a.transpose();
  const SymEig e = sym_eig(s);
  for (Eigen::Index i = 1; i < e.D.size(); ++i) EXPECT_GE(e.D(i - 1), e.D(i));
  EXPECT_LT((e.V * e.D.asDiagonal() * e.V.transpose() - s).norm(), 1e-10);
}

TEST(Linalg, NumericalRankAndOffdiag) {
  const Matrix u = random_matrix(6, 2, 1);
  const Matrix v = random_matrix(5, 2, 2);
  EXPECT_EQ(numerical_rank(u * v.transpose()), 2);
  EXPECT_EQ(numerical_rank(Matrix::Zero(3, 3)), 0);
  Matrix d = Matrix::Zero(3, 4);
  d(0, 0) = 2;
  d(1, 1) = -1;
  EXPECT_DOUBLE_EQ(offdiag_norm(d), 0.0);
  d(2, 3) = 3;
  d(0, 1) = 4;
  EXPECT_DOUBLE_EQ(offdiag_norm(d), 5.0);
}

TEST(Linalg, JointBasisDiagonalizesWhenPossible) {
  // identity-like input covariance with a degenerate cluster in sigma_yx
  Matrix syx = Matrix::Zero(3, 3);
  syx(0, 0) = 1;
  syx(1, 1) = 1;
  syx(2, 2) = 0.5;
  Matrix sx = Matrix::Identity(3, 3);
  sx(0, 1) = sx(1, 0) = 0.3;
  const JointBasis jb = joint_basis(syx, sx);
  EXPECT_LT(jb.residual, 1e-9);
  EXPECT_LT((jb.U * jb.S.asDiagonal() * jb.V.leftCols(jb.S.size()).transpose() - syx).norm(),
            1e-10);
}
