#pragma once

#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "rkcat/linalg.hpp"

namespace rkcat {

// Direct sum of full matrix blocks, embedded block-diagonally in M_N.
// Basis: the matrix units inside the blocks, ordered block by block, row-major.
class MatrixAlgebra {
 public:
  MatrixAlgebra() = default;

  explicit MatrixAlgebra(std::vector<Index> blocks) : blocks_(std::move(blocks)) {
    if (blocks_.empty()) throw DimensionError("MatrixAlgebra: at least one block required");
    Index start = 0;
    for (Index b : blocks_) {
      if (b <= 0) throw DimensionError("MatrixAlgebra: block sizes must be positive");
      for (Index i = 0; i < b; ++i)
        for (Index j = 0; j < b; ++j) units_.push_back({start + i, start + j});
      start += b;
    }
    n_ = start;
    index_ = std::vector<Index>(static_cast<std::size_t>(n_ * n_), -1);
    for (std::size_t k = 0; k < units_.size(); ++k)
      index_[static_cast<std::size_t>(units_[k].first * n_ + units_[k].second)] = static_cast<Index>(k);
  }

  static MatrixAlgebra full(Index n) { return MatrixAlgebra({n}); }
  static MatrixAlgebra diagonal(Index n) { return MatrixAlgebra(std::vector<Index>(static_cast<std::size_t>(n), 1)); }

  const std::vector<Index>& blocks() const { return blocks_; }
  Index size() const { return n_; }  // N of the embedding M_N
  Index dim() const { return static_cast<Index>(units_.size()); }
  std::pair<Index, Index> unit(Index k) const { return units_.at(static_cast<std::size_t>(k)); }

  // -1 when e_{ij} is not in the algebra.
  Index unit_index(Index i, Index j) const { return index_.at(static_cast<std::size_t>(i * n_ + j)); }

  Matrix basis(Index k) const {
    Matrix e = Matrix::Zero(n_, n_);
    const auto [i, j] = unit(k);
    e(i, j) = 1.0;
    return e;
  }

  Matrix one() const { return identity(n_); }

  Vector coefficients(const Matrix& a) const {
    check(a);
    Vector c(dim());
    for (Index k = 0; k < dim(); ++k) c(k) = a(units_[static_cast<std::size_t>(k)].first, units_[static_cast<std::size_t>(k)].second);
    return c;
  }

  Matrix element(const Vector& c) const {
    if (c.size() != dim()) throw DimensionError("MatrixAlgebra::element: wrong coefficient count");
    Matrix a = Matrix::Zero(n_, n_);
    for (Index k = 0; k < dim(); ++k) a(units_[static_cast<std::size_t>(k)].first, units_[static_cast<std::size_t>(k)].second) = c(k);
    return a;
  }

  // Largest entry of a outside the blocks.
  double outside_residual(const Matrix& a) const {
    check(a);
    double r = 0.0;
    for (Index i = 0; i < n_; ++i)
      for (Index j = 0; j < n_; ++j)
        if (unit_index(i, j) < 0) r = std::max(r, std::abs(a(i, j)));
    return r;
  }

  bool contains(const Matrix& a, double tol = kDefaultTol) const {
    return outside_residual(a) <= tol * std::max(1.0, max_abs(a));
  }

  // Coefficient matrix of x -> a x (left = true) or x -> x a.
  Matrix multiplication(const Matrix& a, bool left = true) const {
    Matrix l(dim(), dim());
    for (Index k = 0; k < dim(); ++k) l.col(k) = coefficients(left ? Matrix(a * basis(k)) : Matrix(basis(k) * a));
    return l;
  }

  // Coefficient permutation of the adjoint: coefficients(a^dagger) = conj(P c).
  Matrix adjoint_permutation() const {
    Matrix p = Matrix::Zero(dim(), dim());
    for (Index k = 0; k < dim(); ++k) {
      const auto [i, j] = unit(k);
      p(unit_index(j, i), k) = 1.0;
    }
    return p;
  }

  template <class Rng>
  Matrix random_element(Rng& rng) const {
    std::normal_distribution<double> nd;
    Vector c(dim());
    for (Index k = 0; k < dim(); ++k) c(k) = Complex(nd(rng), nd(rng));
    return element(c);
  }

 private:
  void check(const Matrix& a) const {
    if (a.rows() != n_ || a.cols() != n_)
      throw DimensionError("MatrixAlgebra: element must be " + std::to_string(n_) + "x" + std::to_string(n_));
  }

  std::vector<Index> blocks_;
  Index n_ = 0;
  std::vector<std::pair<Index, Index>> units_;
  std::vector<Index> index_;
};

// Linear map from a matrix algebra to operators on C^m, stored on the basis.
class CpMap {
 public:
  CpMap() = default;

  CpMap(MatrixAlgebra domain, Index codomain_dim, std::vector<Matrix> images)
      : domain_(std::move(domain)), m_(codomain_dim), images_(std::move(images)) {
    if (static_cast<Index>(images_.size()) != domain_.dim())
      throw DimensionError("CpMap: one image per basis element required");
    for (const auto& x : images_) {
      if (x.rows() != m_ || x.cols() != m_) throw DimensionError("CpMap: image has wrong shape");
      require_finite(x, "CpMap image");
    }
  }

  static CpMap from_function(const MatrixAlgebra& domain, Index m, const std::function<Matrix(const Matrix&)>& f) {
    std::vector<Matrix> images;
    for (Index k = 0; k < domain.dim(); ++k) images.push_back(f(domain.basis(k)));
    return CpMap(domain, m, std::move(images));
  }

  // a -> sum_i V_i^dagger a V_i, V_i: C^m -> C^N.
  static CpMap from_kraus(const MatrixAlgebra& domain, const std::vector<Matrix>& kraus) {
    if (kraus.empty()) throw DimensionError("CpMap::from_kraus: no Kraus operators");
    const Index m = kraus.front().cols();
    for (const auto& v : kraus)
      if (v.rows() != domain.size() || v.cols() != m) throw DimensionError("CpMap::from_kraus: Kraus shape mismatch");
    return from_function(domain, m, [&](const Matrix& a) {
      Matrix s = Matrix::Zero(m, m);
      for (const auto& v : kraus) s += v.adjoint() * a * v;
      return s;
    });
  }

  const MatrixAlgebra& domain() const { return domain_; }
  Index codomain_dim() const { return m_; }
  const std::vector<Matrix>& images() const { return images_; }

  Matrix operator()(const Matrix& a) const {
    const Vector c = domain_.coefficients(a);
    Matrix s = Matrix::Zero(m_, m_);
    for (Index k = 0; k < domain_.dim(); ++k) s += c(k) * images_[static_cast<std::size_t>(k)];
    return s;
  }

  double unital_residual() const { return max_abs((*this)(domain_.one()) - identity(m_)); }

  double adjoint_residual() const {
    double r = 0.0;
    for (Index k = 0; k < domain_.dim(); ++k) {
      const Matrix b = domain_.basis(k);
      r = std::max(r, max_abs((*this)(b.adjoint()) - (*this)(b).adjoint()));
    }
    return r;
  }

 private:
  MatrixAlgebra domain_;
  Index m_ = 0;
  std::vector<Matrix> images_;
};

// [Phi(e_ij)]_{ij}; pairs outside the algebra's blocks contribute zero blocks.
inline Matrix choi_matrix(const CpMap& phi) {
  const MatrixAlgebra& a = phi.domain();
  const Index n = a.size();
  const Index m = phi.codomain_dim();
  Matrix c = Matrix::Zero(n * m, n * m);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const Index k = a.unit_index(i, j);
      if (k >= 0) c.block(i * m, j * m, m, m) = phi.images()[static_cast<std::size_t>(k)];
    }
  return c;
}

struct CpReport {
  bool completely_positive = false;
  double min_eigenvalue = 0.0;
};

inline CpReport cp_report(const CpMap& phi, double tol = kDefaultTol) {
  const PsdReport p = psd_check(choi_matrix(phi), tol);
  return {p.is_psd, p.min_eigenvalue};
}

inline bool is_completely_positive(const CpMap& phi, double tol = kDefaultTol) {
  return cp_report(phi, tol).completely_positive;
}

// Smallest eigenvalue of Phi_n(X) over random positive X = Y^dagger Y in M_n(A),
// scaled by |Phi_n(X)|. Definition-level cross-check of the Choi criterion.
template <class Rng>
double amplification_min_eigenvalue(const CpMap& phi, Index n, int trials, Rng& rng) {
  const MatrixAlgebra& a = phi.domain();
  const Index N = a.size();
  const Index m = phi.codomain_dim();
  double worst = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < trials; ++trial) {
    Matrix y = Matrix::Zero(n * N, n * N);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) y.block(i * N, j * N, N, N) = a.random_element(rng);
    const Matrix x = y.adjoint() * y;
    Matrix px(n * m, n * m);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) px.block(i * m, j * m, m, m) = phi(x.block(i * N, j * N, N, N));
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (px + px.adjoint()), Eigen::EigenvaluesOnly);
    worst = std::min(worst, es.eigenvalues()(0) / std::max(1.0, max_abs(px)));
  }
  return worst;
}

}  // namespace rkcat
