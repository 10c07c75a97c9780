#include <gtest/gtest.h>

#include "rkcat/rkcat.hpp"

using namespace rkcat;

namespace {

Matrix random_pd(Index n, Rng& rng) {
  const Matrix a = random_matrix(n, n, rng);
  return a.adjoint() * a + identity(n);
}

// (x|y)_G = y^dagger G x
Complex pair(const Matrix& g, const Vector& x, const Vector& y) { return (y.adjoint() * g * x)(0, 0); }

}  // namespace

TEST(Psd, DetectsNegativeAndNonHermitian) {
  Matrix m = identity(3);
  EXPECT_TRUE(psd_check(m).is_psd);
  m(2, 2) = -0.5;
  const PsdReport r = psd_check(m);
  EXPECT_FALSE(r.is_psd);
  EXPECT_NEAR(r.min_eigenvalue, -0.5, 1e-14);
  Matrix n = identity(2);
  n(0, 1) = 1.0;
  EXPECT_FALSE(psd_check(n).is_hermitian);
  EXPECT_FALSE(psd_check(n).is_psd);
}

TEST(Psd, EmptyMatrixIsPositive) { EXPECT_TRUE(psd_check(Matrix(0, 0)).is_psd); }

TEST(OrthonormalBasis, RankAndProjection) {
  Rng rng(3);
  const Matrix a = random_matrix(5, 2, rng);
  Matrix v(5, 3);
  v << a, a.col(0) * Complex(2.0, -1.0) + a.col(1);
  const Subspace s = orthonormal_basis(v);
  EXPECT_EQ(s.dim(), 2);
  EXPECT_LT(max_abs(s.basis().adjoint() * s.basis() - identity(2)), 1e-13);
  const Matrix p = projection(s);
  EXPECT_LT(max_abs(p * v - v), 1e-12);
  EXPECT_LT(subspace_distance(s, orthonormal_basis(a)), 1e-12);
}

TEST(OrthonormalBasis, OrthogonalSubspacesAreFarApart) {
  Matrix e0 = Matrix::Zero(2, 1), e1 = Matrix::Zero(2, 1);
  e0(0, 0) = 1.0;
  e1(1, 0) = 1.0;
  EXPECT_NEAR(subspace_distance(Subspace(e0), Subspace(e1)), 1.0, 1e-15);
}

TEST(GramQuotient, FactorsGramAndDropsNullDirections) {
  Rng rng(5);
  const Matrix x = random_matrix(2, 4, rng);  // 4 vectors in C^2
  const Matrix gram = x.adjoint() * x;
  const GramQuotient q = gram_quotient(gram);
  EXPECT_EQ(q.rank, 2);
  EXPECT_LT(max_abs(q.embedding.adjoint() * q.embedding - gram), 1e-12);
  EXPECT_LT(max_abs(q.embedding * q.lift - identity(2)), 1e-12);
}

TEST(GramQuotient, RejectsIndefiniteGram) {
  Matrix g = identity(2);
  g(1, 1) = -1.0;
  EXPECT_THROW(gram_quotient(g), PositivityError);
}

TEST(PairingAdjoint, DefiningIdentityLinear) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Index m = random_index(1, 4, rng), n = random_index(1, 4, rng);
    const Matrix gs = random_matrix(m, m, rng) + 3.0 * identity(m);
    const Matrix gt = random_matrix(n, n, rng) + 3.0 * identity(n);
    const SemilinearMap op{random_matrix(n, m, rng), false};
    const SemilinearMap a = pairing_adjoint(op, gs, gt);
    const Vector x = random_matrix(m, 1, rng), y = random_matrix(n, 1, rng);
    EXPECT_LT(std::abs(pair(gt, op.apply(x), y) - pair(gs, x, a.apply(y))), 1e-10);
  }
}

TEST(PairingAdjoint, DefiningIdentityAntilinear) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Index m = random_index(1, 4, rng), n = random_index(1, 4, rng);
    const Matrix gs = random_matrix(m, m, rng) + 3.0 * identity(m);
    const Matrix gt = random_matrix(n, n, rng) + 3.0 * identity(n);
    const SemilinearMap op{random_matrix(n, m, rng), true};
    const SemilinearMap a = pairing_adjoint(op, gs, gt);
    EXPECT_TRUE(a.antilinear);
    const Vector x = random_matrix(m, 1, rng), y = random_matrix(n, 1, rng);
    EXPECT_LT(std::abs(pair(gt, op.apply(x), y) - std::conj(pair(gs, x, a.apply(y)))), 1e-10);
  }
}

TEST(PairingAdjoint, SingularPairingThrows) {
  EXPECT_THROW(pairing_adjoint(identity(2), Matrix::Zero(2, 2), identity(2)), PairingError);
}

TEST(SemilinearMap, CompositionMatchesSequentialApplication) {
  Rng rng(9);
  for (bool a : {false, true})
    for (bool b : {false, true}) {
      const SemilinearMap outer{random_matrix(3, 2, rng), a}, inner{random_matrix(2, 4, rng), b};
      const Vector x = random_matrix(4, 1, rng);
      const SemilinearMap c = compose(outer, inner);
      EXPECT_EQ(c.antilinear, a != b);
      EXPECT_LT(max_abs(c.apply(x) - outer.apply(inner.apply(x))), 1e-12);
    }
}

// Oracle: with S = L L^dagger, the least M is the top eigenvalue of L^{-1} P L^{-dagger}.
TEST(FormBound, MatchesCholeskyOracle) {
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = random_index(1, 5, rng);
    const Matrix s = random_pd(n, rng);
    const Matrix y = random_matrix(n, n, rng);
    const Matrix p = y.adjoint() * y;
    const Eigen::LLT<Matrix> llt(s);
    const Matrix linv = llt.matrixL().solve(identity(n));
    Eigen::SelfAdjointEigenSolver<Matrix> es(linv * p * linv.adjoint(), Eigen::EigenvaluesOnly);
    const FormBound fb = form_bound(p, s);
    ASSERT_TRUE(fb.bounded);
    EXPECT_NEAR(fb.least_M, es.eigenvalues().maxCoeff(), 1e-9 * std::max(1.0, fb.least_M));
  }
}

TEST(FormBound, ScaledFormAndNullViolation) {
  Rng rng(11);
  const Matrix s = random_pd(3, rng);
  EXPECT_NEAR(form_bound(0.25 * s, s).least_M, 0.25, 1e-12);
  Matrix deg = Matrix::Zero(2, 2);
  deg(0, 0) = 1.0;
  Matrix p = identity(2);
  const FormBound fb = form_bound(p, deg);
  EXPECT_FALSE(fb.bounded);
  EXPECT_NEAR(fb.null_violation, 1.0, 1e-12);
}

TEST(Report, AppendPrefixesNames) {
  Report inner;
  inner.add("x", true, 0.0);
  Report outer;
  outer.append(inner, "suite");
  ASSERT_NE(outer.find("suite.x"), nullptr);
  EXPECT_TRUE(outer.pass());
  outer.add("y", false, 1.0, "broken");
  EXPECT_FALSE(outer.pass());
}
