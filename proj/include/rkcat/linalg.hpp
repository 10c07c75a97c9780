#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "rkcat/errors.hpp"

namespace rkcat {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr double kDefaultTol = 1e-9;
inline constexpr double kEps = std::numeric_limits<double>::epsilon();

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Deviation of a from b scaled by max(1, |b|_max).
inline double rel_residual(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return std::numeric_limits<double>::infinity();
  return max_abs(a - b) / std::max(1.0, max_abs(b));
}

inline void require_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) throw DimensionError(what + ": non-finite entry");
}

inline void require_square(const Matrix& m, const std::string& what) {
  if (m.rows() != m.cols())
    throw DimensionError(what + ": expected square matrix, got " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
}

inline double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

inline double smallest_singular_value(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

inline Matrix identity(Index n) { return Matrix::Identity(n, n); }

struct PsdReport {
  bool is_hermitian = false;
  bool is_psd = false;
  double min_eigenvalue = 0.0;
};

inline PsdReport psd_check(const Matrix& m, double tol = kDefaultTol) {
  require_square(m, "psd_check");
  PsdReport r;
  if (m.size() == 0) {
    r.is_hermitian = r.is_psd = true;
    return r;
  }
  const double scale = max_abs(m);
  r.is_hermitian = max_abs(m - m.adjoint()) <= tol * scale;
  const Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  r.min_eigenvalue = es.eigenvalues()(0);
  r.is_psd = r.is_hermitian && r.min_eigenvalue >= -tol * std::max(1.0, spectral_norm(m));
  return r;
}

class Subspace {
 public:
  Subspace() = default;
  explicit Subspace(Matrix basis) : basis_(std::move(basis)) {}
  static Subspace zero(Index ambient) { return Subspace(Matrix(ambient, 0)); }

  const Matrix& basis() const { return basis_; }
  Index ambient_dim() const { return basis_.rows(); }
  Index dim() const { return basis_.cols(); }

 private:
  Matrix basis_;
};

// Columns with singular value below tol * sigma_max are dropped.
inline Subspace orthonormal_basis(const Matrix& vectors, double tol = kDefaultTol) {
  const Index n = vectors.rows();
  if (vectors.cols() == 0 || max_abs(vectors) == 0.0) return Subspace::zero(n);
  Eigen::JacobiSVD<Matrix> svd(vectors, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  Index k = 0;
  while (k < sv.size() && sv(k) > tol * sv(0)) ++k;
  return Subspace(svd.matrixU().leftCols(k));
}

inline Matrix projection(const Subspace& s) { return s.basis() * s.basis().adjoint(); }

inline double subspace_distance(const Subspace& a, const Subspace& b) {
  if (a.ambient_dim() != b.ambient_dim()) return std::numeric_limits<double>::infinity();
  return max_abs(projection(a) - projection(b));
}

struct GramQuotient {
  Matrix gram;
  Index rank = 0;
  Matrix embedding;  // rank x n, column i = coordinates of generator i
  Matrix lift;       // n x rank, embedding * lift = identity
};

inline GramQuotient gram_quotient(const Matrix& gram, double tol = kDefaultTol) {
  require_square(gram, "gram_quotient");
  require_finite(gram, "gram_quotient");
  const PsdReport pr = psd_check(gram, tol);
  if (!pr.is_psd)
    throw PositivityError("gram_quotient: Gram matrix is not positive semidefinite (min eigenvalue " +
                              std::to_string(pr.min_eigenvalue) + ")",
                          pr.min_eigenvalue);
  GramQuotient q;
  q.gram = gram;
  const Index n = gram.rows();
  if (n == 0) {
    q.embedding = Matrix(0, 0);
    q.lift = Matrix(0, 0);
    return q;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (gram + gram.adjoint()));
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double lmax = lam(n - 1);
  const double cutoff = static_cast<double>(n) * kEps * lmax;
  Index r = 0;
  for (Index i = 0; i < n; ++i)
    if (lmax > 0.0 && lam(i) > cutoff) ++r;
  q.rank = r;
  q.embedding = Matrix(r, n);
  q.lift = Matrix(n, r);
  // eigenvalues ascend; keep the top r, largest first
  for (Index j = 0; j < r; ++j) {
    const Index i = n - 1 - j;
    const double s = std::sqrt(lam(i));
    q.embedding.row(j) = s * es.eigenvectors().col(i).adjoint();
    q.lift.col(j) = es.eigenvectors().col(i) / s;
  }
  return q;
}

inline void require_invertible(const Matrix& g, const std::string& what, double tol = kDefaultTol) {
  require_square(g, what);
  if (g.size() == 0) return;
  Eigen::JacobiSVD<Matrix> svd(g);
  const auto& sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > tol * sv(0)))
    throw PairingError(what + ": singular pairing (smallest singular value " +
                       std::to_string(sv(sv.size() - 1)) + ")");
}

// apply(x) = matrix * x, or matrix * conj(x) when antilinear.
struct SemilinearMap {
  Matrix matrix;
  bool antilinear = false;

  Vector apply(const Vector& x) const { return antilinear ? Vector(matrix * x.conjugate()) : Vector(matrix * x); }
  Matrix apply(const Matrix& x) const { return antilinear ? Matrix(matrix * x.conjugate()) : Matrix(matrix * x); }
  Index rows() const { return matrix.rows(); }
  Index cols() const { return matrix.cols(); }
};

// outer o inner
inline SemilinearMap compose(const SemilinearMap& outer, const SemilinearMap& inner) {
  if (outer.cols() != inner.rows())
    throw DimensionError("compose: inner map has " + std::to_string(inner.rows()) +
                         " rows, outer map expects " + std::to_string(outer.cols()));
  SemilinearMap r;
  r.matrix = outer.antilinear ? Matrix(outer.matrix * inner.matrix.conjugate()) : Matrix(outer.matrix * inner.matrix);
  r.antilinear = outer.antilinear != inner.antilinear;
  return r;
}

// The unique A with (op x | y)_target = (x | A y)_source, pairings (x|y) = y^† G x.
// Antilinear op: (op x | y)_target = conj((x | A y)_source), A antilinear.
inline SemilinearMap pairing_adjoint(const SemilinearMap& op, const Matrix& g_source, const Matrix& g_target,
                                     double tol = kDefaultTol) {
  require_invertible(g_source, "pairing_adjoint source", tol);
  require_invertible(g_target, "pairing_adjoint target", tol);
  if (op.cols() != g_source.cols() || op.rows() != g_target.cols())
    throw DimensionError("pairing_adjoint: operator is " + std::to_string(op.rows()) + "x" +
                         std::to_string(op.cols()) + ", pairings expect " + std::to_string(g_target.cols()) +
                         "x" + std::to_string(g_source.cols()));
  const Matrix rhs = op.antilinear ? Matrix(op.matrix.transpose() * g_target.transpose())
                                   : Matrix(op.matrix.adjoint() * g_target.adjoint());
  SemilinearMap a;
  a.matrix = g_source.adjoint().fullPivLu().solve(rhs);
  a.antilinear = op.antilinear;
  return a;
}

inline Matrix pairing_adjoint(const Matrix& op, const Matrix& g_source, const Matrix& g_target,
                              double tol = kDefaultTol) {
  return pairing_adjoint(SemilinearMap{op, false}, g_source, g_target, tol).matrix;
}

struct FormBound {
  bool bounded = false;
  double least_M = 0.0;
  double null_violation = 0.0;  // largest pulled value on the numerical null space of the source form
};

// Smallest M with c^† P c <= M c^† S c for all c. Directions where S is
// numerically null must be null for P too.
inline FormBound form_bound(const Matrix& pulled, const Matrix& source, double tol = kDefaultTol) {
  require_square(source, "form_bound");
  if (pulled.rows() != source.rows() || pulled.cols() != source.cols())
    throw DimensionError("form_bound: pulled and source forms differ in size");
  FormBound fb;
  const Index n = source.rows();
  if (n == 0) {
    fb.bounded = true;
    return fb;
  }
  const Matrix s = 0.5 * (source + source.adjoint());
  const Matrix p = 0.5 * (pulled + pulled.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double smax = std::max(0.0, lam(n - 1));
  Eigen::SelfAdjointEigenSolver<Matrix> ep(p, Eigen::EigenvaluesOnly);
  const double pmax = std::max(0.0, ep.eigenvalues()(n - 1));
  Index r = 0;
  for (Index i = 0; i < n; ++i)
    if (smax > 0.0 && lam(i) > tol * smax) ++r;
  const Matrix null = es.eigenvectors().leftCols(n - r);
  if (n - r > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> en(null.adjoint() * p * null, Eigen::EigenvaluesOnly);
    fb.null_violation = std::max(0.0, en.eigenvalues()(n - r - 1));
  }
  const double scale = std::max(smax, pmax);
  fb.bounded = fb.null_violation <= std::sqrt(tol) * scale;
  if (!fb.bounded) {
    fb.least_M = std::numeric_limits<double>::infinity();
    return fb;
  }
  if (r == 0) return fb;
  Matrix w = es.eigenvectors().rightCols(r);
  for (Index j = 0; j < r; ++j) w.col(j) /= std::sqrt(lam(n - r + j));
  Eigen::SelfAdjointEigenSolver<Matrix> eg(w.adjoint() * p * w, Eigen::EigenvaluesOnly);
  fb.least_M = std::max(0.0, eg.eigenvalues()(r - 1));
  return fb;
}

}  // namespace rkcat
