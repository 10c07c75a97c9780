#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rkcat/grassmann.hpp"
#include "rkcat/report.hpp"

namespace rkcat {

// Quotient of A (x) H0 by the null space of (sum b_j(x)y_j | sum a_i(x)x_i) = sum (Phi(a_i^* b_j) y_j | x_i).
// Generator (k, m) = a_k (x) e_m sits at index k * dim H0 + m.
struct StinespringData {
  MatrixAlgebra algebra;
  Index h0_dim = 0;
  GramQuotient quotient;
  Matrix v;                // dim K0 x dim H0
  std::vector<Matrix> rep;  // pi(a_k) in quotient coordinates

  Index dim() const { return quotient.rank; }

  Matrix pi(const Matrix& a) const {
    const Vector c = algebra.coefficients(a);
    Matrix s = Matrix::Zero(dim(), dim());
    for (Index k = 0; k < algebra.dim(); ++k) s += c(k) * rep[static_cast<std::size_t>(k)];
    return s;
  }

  // Coordinates of the class of a (x) h.
  Vector class_of(const Matrix& a, const Vector& h) const {
    return quotient.embedding * kron(algebra.coefficients(a), h);
  }

  static Vector kron(const Vector& a, const Vector& b) {
    Vector r(a.size() * b.size());
    for (Index i = 0; i < a.size(); ++i) r.segment(i * b.size(), b.size()) = a(i) * b;
    return r;
  }
};

inline Matrix stinespring_gram(const CpMap& phi) {
  const MatrixAlgebra& a = phi.domain();
  const Index m = phi.codomain_dim();
  Matrix g(a.dim() * m, a.dim() * m);
  for (Index k = 0; k < a.dim(); ++k)
    for (Index l = 0; l < a.dim(); ++l) g.block(k * m, l * m, m, m) = phi(a.basis(k).adjoint() * a.basis(l));
  return g;
}

inline Matrix kron_identity(const Matrix& x, Index m) {
  Matrix r = Matrix::Zero(x.rows() * m, x.cols() * m);
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j) r.block(i * m, j * m, m, m) = x(i, j) * identity(m);
  return r;
}

inline StinespringData stinespring(const CpMap& phi, double tol = kDefaultTol) {
  const double unital = phi.unital_residual();
  if (unital > tol) throw PreconditionError("stinespring: Phi is not unital", unital);
  const CpReport cp = cp_report(phi, tol);
  if (!cp.completely_positive)
    throw PreconditionError("stinespring: Phi is not completely positive (Choi min eigenvalue " +
                                std::to_string(cp.min_eigenvalue) + ")",
                            cp.min_eigenvalue);
  StinespringData s;
  s.algebra = phi.domain();
  s.h0_dim = phi.codomain_dim();
  s.quotient = gram_quotient(stinespring_gram(phi), tol);
  const Index m = s.h0_dim;
  s.v = Matrix(s.dim(), m);
  for (Index j = 0; j < m; ++j) s.v.col(j) = s.class_of(s.algebra.one(), Vector::Unit(m, j));
  for (Index k = 0; k < s.algebra.dim(); ++k)
    s.rep.push_back(s.quotient.embedding * kron_identity(s.algebra.multiplication(s.algebra.basis(k)), m) *
                    s.quotient.lift);
  return s;
}

// Linear functional a -> tr(density a) restricted to the algebra.
struct State {
  MatrixAlgebra algebra;
  Matrix density;

  Complex operator()(const Matrix& a) const { return (density * a).trace(); }

  CpMap as_cp_map() const {
    return CpMap::from_function(algebra, 1, [this](const Matrix& a) {
      Matrix r(1, 1);
      r(0, 0) = (*this)(a);
      return r;
    });
  }
};

inline StinespringData gns(const State& phi, double tol = kDefaultTol) {
  const MatrixAlgebra& a = phi.algebra;
  if (phi.density.rows() != a.size() || phi.density.cols() != a.size())
    throw DimensionError("gns: density has the wrong size");
  // phi only sees the block-diagonal part of the density
  const Matrix rho = a.element(a.coefficients(phi.density));
  const PsdReport p = psd_check(rho, tol);
  const double norm = std::abs(phi(a.one()) - 1.0);
  if (!p.is_psd) throw PreconditionError("gns: functional is not positive", p.min_eigenvalue);
  if (norm > tol) throw PreconditionError("gns: phi(1) != 1", norm);
  return stinespring(phi.as_cp_map(), tol);
}

inline Report verify_stinespring(const CpMap& phi, const StinespringData& s, double tol = kDefaultTol) {
  Report r;
  r.id = "stinespring";
  const MatrixAlgebra& a = s.algebra;
  const double iso = max_abs(s.v.adjoint() * s.v - identity(s.h0_dim));
  r.add("isometry", iso <= tol, iso, "V^dagger V = I");
  double dil = 0.0, mult = 0.0, adj = 0.0;
  Matrix choi_dil = Matrix::Zero(choi_matrix(phi).rows(), choi_matrix(phi).cols());
  for (Index k = 0; k < a.dim(); ++k) {
    const Matrix ak = a.basis(k);
    const Matrix pk = s.pi(ak);
    dil = std::max(dil, max_abs(phi(ak) - s.v.adjoint() * pk * s.v));
    adj = std::max(adj, max_abs(s.pi(ak.adjoint()) - pk.adjoint()));
    for (Index l = 0; l < a.dim(); ++l) mult = std::max(mult, max_abs(s.pi(ak * a.basis(l)) - pk * s.pi(a.basis(l))));
  }
  const CpMap dilated = CpMap::from_function(a, s.h0_dim, [&](const Matrix& x) { return Matrix(s.v.adjoint() * s.pi(x) * s.v); });
  const double choi = max_abs(choi_matrix(dilated) - choi_matrix(phi));
  const double unit = max_abs(s.pi(a.one()) - identity(s.dim()));
  r.add("dilation", dil <= tol, dil, "Phi(a) = V^dagger pi(a) V on the basis");
  r.add("multiplicative", mult <= tol, mult);
  r.add("adjoint", adj <= tol, adj);
  r.add("unital", unit <= tol, unit);
  r.add("choi", choi <= tol, choi, "Choi of V^dagger pi(.) V against Choi of Phi");
  return r;
}

// *-homomorphism given on the basis of its domain, into M_N.
struct AlgebraHom {
  MatrixAlgebra domain;
  std::vector<Matrix> images;

  Matrix operator()(const Matrix& a) const {
    const Vector c = domain.coefficients(a);
    Matrix s = Matrix::Zero(images.front().rows(), images.front().cols());
    for (Index k = 0; k < domain.dim(); ++k) s += c(k) * images[static_cast<std::size_t>(k)];
    return s;
  }

  static AlgebraHom identity_on(const MatrixAlgebra& a) {
    AlgebraHom h{a, {}};
    for (Index k = 0; k < a.dim(); ++k) h.images.push_back(a.basis(k));
    return h;
  }

  double homomorphism_residual() const {
    double r = max_abs((*this)(domain.one()) - rkcat::identity(images.front().rows()));
    for (Index k = 0; k < domain.dim(); ++k) {
      const Matrix ak = domain.basis(k);
      r = std::max(r, max_abs((*this)(ak.adjoint()) - (*this)(ak).adjoint()));
      for (Index l = 0; l < domain.dim(); ++l)
        r = std::max(r, max_abs((*this)(ak * domain.basis(l)) - (*this)(ak) * (*this)(domain.basis(l))));
    }
    return r;
  }
};

struct CposBound {
  bool is_morphism = false;
  double least_M = 0.0;
  double equality_residual = 0.0;  // |pulled form - source form|, zero for extremal morphisms
};

// Pulled form ((k,m),(k',m')) -> (T^dagger Phi(alpha(a_k)^* alpha(a_k')) T)_{m m'} against the Stinespring Gram of phi_src.
inline Matrix cpos_pulled_gram(const AlgebraHom& alpha, const Matrix& t, const CpMap& phi_src, const CpMap& phi) {
  const MatrixAlgebra& a = phi_src.domain();
  const Index m = phi_src.codomain_dim();
  Matrix p(a.dim() * m, a.dim() * m);
  for (Index k = 0; k < a.dim(); ++k)
    for (Index l = 0; l < a.dim(); ++l)
      p.block(k * m, l * m, m, m) = t.adjoint() * phi(alpha(a.basis(k)).adjoint() * alpha(a.basis(l))) * t;
  return p;
}

inline void require_cpos_data(const AlgebraHom& alpha, const Matrix& t, const CpMap& phi_src, const CpMap& phi,
                              double tol) {
  if (alpha.domain.blocks() != phi_src.domain().blocks()) throw DimensionError("cpos: alpha must start at the source algebra");
  if (alpha.images.empty() || alpha.images.front().rows() != phi.domain().size())
    throw DimensionError("cpos: alpha must land in the target algebra");
  if (t.rows() != phi.codomain_dim() || t.cols() != phi_src.codomain_dim())
    throw DimensionError("cpos: T must map the source H0 into the target H0");
  for (const auto& img : alpha.images)
    if (!phi.domain().contains(img, tol)) throw PreconditionError("cpos: alpha leaves the target algebra", phi.domain().outside_residual(img));
  const double hom = alpha.homomorphism_residual();
  if (hom > tol) throw PreconditionError("cpos: alpha is not a unital *-homomorphism", hom);
}

inline CposBound cpos_morphism_bound(const AlgebraHom& alpha, const Matrix& t, const CpMap& phi_src, const CpMap& phi,
                                     double tol = kDefaultTol) {
  require_cpos_data(alpha, t, phi_src, phi, tol);
  const Matrix p = cpos_pulled_gram(alpha, t, phi_src, phi);
  const Matrix s = stinespring_gram(phi_src);
  const FormBound fb = form_bound(p, s, tol);
  return {fb.bounded, fb.least_M, rel_residual(p, s)};
}

struct TensorMorphism {
  InducedOperator op;
  double intertwining_residual = 0.0;
};

// alpha (x) T on Stinespring spaces: [a (x) h] -> [alpha(a) (x) T h].
inline TensorMorphism tensor_morphism(const AlgebraHom& alpha, const Matrix& t, const CpMap& phi_src, const CpMap& phi,
                                      double tol = kDefaultTol) {
  const CposBound b = cpos_morphism_bound(alpha, t, phi_src, phi, tol);
  if (!b.is_morphism) throw MorphismError("tensor_morphism: (alpha, T) violates the CPos bound");
  const StinespringData s_src = stinespring(phi_src, tol);
  const StinespringData s = stinespring(phi, tol);
  const MatrixAlgebra& a = phi_src.domain();
  const Index m = phi_src.codomain_dim();
  Matrix w(s.dim(), a.dim() * m);
  for (Index k = 0; k < a.dim(); ++k)
    for (Index j = 0; j < m; ++j) w.col(k * m + j) = s.class_of(alpha(a.basis(k)), t.col(j));
  TensorMorphism out;
  out.op.map = {w * s_src.quotient.lift, false};
  out.op.least_M = b.least_M;
  out.op.norm = spectral_norm(out.op.map.matrix);
  out.op.fit_residual = max_abs(out.op.map.matrix * s_src.quotient.embedding - w) / std::max(1.0, max_abs(w));
  for (Index k = 0; k < a.dim(); ++k) {
    const Matrix u = a.basis(k);
    out.intertwining_residual =
        std::max(out.intertwining_residual, max_abs(out.op.map.matrix * s_src.pi(u) - s.pi(alpha(u)) * out.op.map.matrix));
  }
  return out;
}

// Phi(a) = V^* Phi_{V(H0)}(pi(a)) V, and (pi, V) is an extremal CPos morphism.
inline Report compression_factorization(const CpMap& phi, double tol = kDefaultTol) {
  Report r;
  r.id = "compression_factorization";
  const StinespringData s = stinespring(phi, tol);
  const Subspace range = orthonormal_basis(s.v);
  const CpMap compress = compression_map(range);
  const Matrix t = range.basis().adjoint() * s.v;  // V as a map H0 -> V(H0)
  const MatrixAlgebra& a = phi.domain();
  double fac = 0.0;
  for (Index k = 0; k < a.dim(); ++k)
    fac = std::max(fac, max_abs(phi(a.basis(k)) - t.adjoint() * compress(s.pi(a.basis(k))) * t));
  r.add("factorization", fac <= tol, fac, "Phi(a) = V^* Phi_{V(H0)}(pi(a)) V");
  AlgebraHom pi{a, s.rep};
  const CposBound b = cpos_morphism_bound(pi, t, phi, compress, tol);
  r.add("morphism", b.is_morphism, b.is_morphism ? 0.0 : 1.0, "(pi_A, V) satisfies the CPos bound");
  r.add("least-M", std::abs(b.least_M - 1.0) <= tol, std::abs(b.least_M - 1.0),
        "least M = " + std::to_string(b.least_M));
  r.add("equality", b.equality_residual <= tol, b.equality_residual, "both sides of the CPos bound agree");
  return r;
}

// Conditional expectation checks: range in B, idempotent, fixes B, unital, bimodule property.
template <class Rng>
Report validate_expectation(const CpMap& e, const MatrixAlgebra& b, int triples, Rng& rng, double tol = kDefaultTol) {
  Report r;
  const MatrixAlgebra& a = e.domain();
  if (e.codomain_dim() != a.size() || b.size() != a.size())
    throw DimensionError("expectation: A, B and E must share the embedding size");
  double sub = 0.0, range = 0.0, idem = 0.0, fix = 0.0, mod = 0.0;
  for (Index k = 0; k < b.dim(); ++k) sub = std::max(sub, a.outside_residual(b.basis(k)));
  for (Index k = 0; k < a.dim(); ++k) {
    const Matrix ea = e(a.basis(k));
    range = std::max(range, b.outside_residual(ea));
    idem = std::max(idem, max_abs(e(ea) - ea));
  }
  for (Index k = 0; k < b.dim(); ++k) fix = std::max(fix, max_abs(e(b.basis(k)) - b.basis(k)));
  for (int i = 0; i < triples; ++i) {
    const Matrix b1 = b.random_element(rng), b2 = b.random_element(rng), x = a.random_element(rng);
    const Matrix lhs = e(b1 * x * b2);
    mod = std::max(mod, max_abs(lhs - b1 * e(x) * b2) / std::max(1.0, max_abs(lhs)));
  }
  const double unit = e.unital_residual();
  r.add("pre.subalgebra", sub <= tol, sub, "B inside A");
  r.add("pre.range", range <= tol, range, "E(A) inside B");
  r.add("pre.idempotent", idem <= tol, idem);
  r.add("pre.fixes-B", fix <= tol, fix);
  r.add("pre.unital", unit <= tol, unit);
  r.add("pre.bimodule", mod <= tol, mod, "E(b1 a b2) = b1 E(a) b2 on random triples");
  return r;
}

inline CpMap restrict_map(const CpMap& phi, const MatrixAlgebra& b) {
  return CpMap::from_function(b, phi.codomain_dim(), [&](const Matrix& x) { return phi(x); });
}

struct CommutingSquares {
  Report report;
  StinespringData h_a;
  StinespringData h_b;
  Matrix j;  // H_B -> H_A
  Matrix p;  // H_A -> H_B
};

inline CommutingSquares commuting_squares(const CpMap& e, const MatrixAlgebra& b, const CpMap& phi, std::uint64_t seed = 1,
                              double tol = kDefaultTol) {
  CommutingSquares out;
  Report& r = out.report;
  r.id = "commuting_squares";
  std::mt19937_64 rng(seed);
  r.append(validate_expectation(e, b, 16, rng, tol));
  const MatrixAlgebra& a = phi.domain();
  if (e.domain().blocks() != a.blocks()) throw DimensionError("commuting_squares: E and Phi must share the domain");
  double inv = 0.0;
  for (Index k = 0; k < a.dim(); ++k) inv = std::max(inv, max_abs(phi(e(a.basis(k))) - phi(a.basis(k))));
  r.add("pre.phi-invariant", inv <= tol, inv, "Phi o E = Phi");
  const double unital = phi.unital_residual();
  r.add("pre.phi-unital", unital <= tol, unital);
  const CpReport cp = cp_report(phi, tol);
  r.add("pre.phi-cp", cp.completely_positive, std::max(0.0, -cp.min_eigenvalue));
  if (!r.pass()) return out;

  const Index m = phi.codomain_dim();
  out.h_a = stinespring(phi, tol);
  out.h_b = stinespring(restrict_map(phi, b), tol);
  Matrix x(a.dim() * m, b.dim() * m), y(b.dim() * m, a.dim() * m);
  for (Index k = 0; k < b.dim(); ++k)
    x.middleCols(k * m, m) = kron_identity(a.coefficients(b.basis(k)), m);
  for (Index k = 0; k < a.dim(); ++k)
    y.middleCols(k * m, m) = kron_identity(b.coefficients(e(a.basis(k))), m);
  out.j = out.h_a.quotient.embedding * x * out.h_b.quotient.lift;
  out.p = out.h_b.quotient.embedding * y * out.h_a.quotient.lift;
  const Matrix& j = out.j;
  const Matrix& p = out.p;
  const double iso = max_abs(j.adjoint() * j - identity(out.h_b.dim()));
  r.add("inclusion-isometric", iso <= tol, iso, "H_B inside H_A");
  const double left = max_abs(p * j - identity(out.h_b.dim()));
  const Matrix jp = j * p;
  const double orth = max_abs(jp - jp.adjoint());
  r.add("projection", std::max(left, orth) <= tol, std::max(left, orth), "P is the orthogonal projection onto H_B");
  double sq1 = 0.0, sq2 = 0.0;
  for (Index k = 0; k < a.dim(); ++k)
    for (Index h = 0; h < m; ++h) {
      const Vector eh = Vector::Unit(m, h);
      sq1 = std::max(sq1, max_abs(p * out.h_a.class_of(a.basis(k), eh) - out.h_b.class_of(e(a.basis(k)), eh)));
    }
  for (Index k = 0; k < b.dim(); ++k) {
    const Matrix bk = b.basis(k);
    sq2 = std::max(sq2, max_abs(p * out.h_a.pi(bk) - out.h_b.pi(bk) * p));
  }
  r.add("square-iota", sq1 <= tol, sq1, "P o iota_h0 = iota_h0 o E");
  r.add("square-pi", sq2 <= tol, sq2, "P o pi_A(b) = pi_B(b) o P");
  return out;
}

}  // namespace rkcat
