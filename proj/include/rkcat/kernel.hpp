#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rkcat/bundle.hpp"

namespace rkcat {

// Blocks K(s,t): C^{d(t)} -> C^{d(s)} for every ordered pair of points.
class Kernel {
 public:
  Kernel() = default;

  Kernel(Bundle bundle, std::vector<Matrix> blocks) : bundle_(std::move(bundle)), blocks_(std::move(blocks)) {
    const Index n = bundle_.size();
    if (static_cast<Index>(blocks_.size()) != n * n)
      throw KernelError("Kernel: expected " + std::to_string(n * n) + " blocks, got " +
                        std::to_string(blocks_.size()));
    for (Index s = 0; s < n; ++s)
      for (Index t = 0; t < n; ++t) check_shape(s, t, block(s, t));
  }

  Kernel(Bundle bundle, const std::map<std::pair<Index, Index>, Matrix>& blocks) : bundle_(std::move(bundle)) {
    const Index n = bundle_.size();
    for (Index s = 0; s < n; ++s)
      for (Index t = 0; t < n; ++t) {
        auto it = blocks.find({s, t});
        if (it == blocks.end())
          throw KernelError("Kernel: missing block (" + bundle_.name(s) + "," + bundle_.name(t) + ")");
        check_shape(s, t, it->second);
        blocks_.push_back(it->second);
      }
  }

  const Bundle& bundle() const { return bundle_; }
  Index size() const { return bundle_.size(); }
  const Matrix& block(Index s, Index t) const { return blocks_.at(static_cast<std::size_t>(s * size() + t)); }
  const std::vector<Matrix>& blocks() const { return blocks_; }

  double max_entry() const {
    double m = 0.0;
    for (const auto& b : blocks_) m = std::max(m, max_abs(b));
    return m;
  }

 private:
  void check_shape(Index s, Index t, const Matrix& b) const {
    if (b.rows() != bundle_.fiber_dim(s) || b.cols() != bundle_.fiber_dim(t))
      throw DimensionError("Kernel: block (" + bundle_.name(s) + "," + bundle_.name(t) + ") is " +
                           std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + ", expected " +
                           std::to_string(bundle_.fiber_dim(s)) + "x" + std::to_string(bundle_.fiber_dim(t)));
    require_finite(b, "Kernel block (" + bundle_.name(s) + "," + bundle_.name(t) + ")");
  }

  Bundle bundle_;
  std::vector<Matrix> blocks_;
};

inline Kernel operator+(const Kernel& a, const Kernel& b) {
  if (!same_bundle(a.bundle(), b.bundle())) throw KernelError("kernel sum: bundles differ");
  std::vector<Matrix> blocks;
  for (std::size_t i = 0; i < a.blocks().size(); ++i) blocks.push_back(a.blocks()[i] + b.blocks()[i]);
  return Kernel(a.bundle(), std::move(blocks));
}

inline Kernel operator*(double c, const Kernel& a) {
  std::vector<Matrix> blocks;
  for (const auto& b : a.blocks()) blocks.push_back(c * b);
  return Kernel(a.bundle(), std::move(blocks));
}

// Generator blocks G_a K(a, b^{-*}) over the basis vectors of D_{a^{-*}}.
inline Matrix positivity_matrix(const Kernel& k) {
  const Bundle& b = k.bundle();
  const Index n = b.size();
  std::vector<Index> off(static_cast<std::size_t>(n + 1), 0);
  for (Index a = 0; a < n; ++a) off[static_cast<std::size_t>(a + 1)] = off[static_cast<std::size_t>(a)] + b.fiber_dim(b.star(a));
  Matrix m(off.back(), off.back());
  for (Index a = 0; a < n; ++a)
    for (Index c = 0; c < n; ++c)
      m.block(off[static_cast<std::size_t>(a)], off[static_cast<std::size_t>(c)], b.fiber_dim(b.star(a)),
              b.fiber_dim(b.star(c))) = b.pairing(a) * k.block(a, b.star(c));
  return m;
}

struct PositivityReport {
  bool positive = false;
  bool hermitian = false;
  double min_eigenvalue = 0.0;
};

inline PositivityReport check_positive(const Kernel& k, double tol = kDefaultTol) {
  const PsdReport p = psd_check(positivity_matrix(k), tol);
  return {p.is_psd, p.is_hermitian, p.min_eigenvalue};
}

// K(s,t)^{-*}: D_{s^{-*}} -> D_{t^{-*}}.
inline Matrix kernel_adjoint(const Kernel& k, Index s, Index t, double tol = kDefaultTol) {
  return pairing_adjoint(k.block(s, t), k.bundle().pairing(t), k.bundle().pairing(s), tol);
}

inline double exchange_residual(const Kernel& k, double tol = kDefaultTol) {
  double r = 0.0;
  const Bundle& b = k.bundle();
  for (Index s = 0; s < k.size(); ++s)
    for (Index t = 0; t < k.size(); ++t)
      r = std::max(r, max_abs(kernel_adjoint(k, s, t, tol) - k.block(b.star(t), b.star(s))));
  return r / std::max(1.0, k.max_entry());
}

struct Generator {
  Index point;
  Index index;
};

struct Rkhs {
  Kernel kernel;
  std::vector<Generator> generators;
  Matrix gram;  // gram(i,j) = (K_{g_j} | K_{g_i})
  GramQuotient quotient;

  Index dim() const { return quotient.rank; }
  Index offset(Index s) const { return kernel.bundle().offset(s); }
  // Columns: coordinates of K_{e_i}, e_i the basis of D_s.
  Matrix coords(Index s) const { return quotient.embedding.middleCols(offset(s), kernel.bundle().fiber_dim(s)); }
  Vector section(Index s, const Vector& xi) const { return coords(s) * xi; }
};

// Block (a,b) of the generator Gram: G_{a^{-*}} K(a^{-*}, b).
inline Matrix rkhs_gram(const Kernel& k) {
  const Bundle& b = k.bundle();
  const Index n = b.size();
  Matrix g(b.total_dim(), b.total_dim());
  for (Index a = 0; a < n; ++a)
    for (Index c = 0; c < n; ++c)
      g.block(b.offset(a), b.offset(c), b.fiber_dim(a), b.fiber_dim(c)) =
          b.pairing(b.star(a)) * k.block(b.star(a), c);
  return g;
}

inline Rkhs build_rkhs(const Kernel& k, double tol = kDefaultTol) {
  const PositivityReport p = check_positive(k, tol);
  if (!p.positive)
    throw PositivityError("build_rkhs: kernel is not (-*)-positive (min eigenvalue " +
                              std::to_string(p.min_eigenvalue) + ")",
                          p.min_eigenvalue);
  Rkhs r;
  r.kernel = k;
  for (Index s = 0; s < k.size(); ++s)
    for (Index i = 0; i < k.bundle().fiber_dim(s); ++i) r.generators.push_back({s, i});
  r.gram = rkhs_gram(k);
  r.quotient = gram_quotient(r.gram, tol);
  return r;
}

// F(t) from the reproducing property (F(t)|y)_{t,t^{-*}} = (F | K_y).
inline Vector evaluate(const Rkhs& r, const Vector& f, Index t) {
  const Bundle& b = r.kernel.bundle();
  if (t < 0 || t >= b.size()) throw DimensionError("evaluate: unknown point " + std::to_string(t));
  if (f.size() != r.dim())
    throw DimensionError("evaluate: coordinate vector has length " + std::to_string(f.size()) + ", H^K has dimension " +
                         std::to_string(r.dim()));
  const Vector c = r.coords(b.star(t)).adjoint() * f;
  return b.pairing(t).fullPivLu().solve(c);
}

// Target Gram pulled back to source generators; conjugated for antimorphisms
// so that c^dagger P c is the pulled quadratic form.
inline Matrix pulled_gram(const BundleMorphism& m, const Kernel& k_tgt) {
  const Bundle& src = m.source();
  const Matrix gt = rkhs_gram(k_tgt);
  const Bundle& tb = k_tgt.bundle();
  Matrix d = Matrix::Zero(tb.total_dim(), src.total_dim());
  for (Index s = 0; s < src.size(); ++s)
    d.block(tb.offset(m.zeta(s)), src.offset(s), tb.fiber_dim(m.zeta(s)), src.fiber_dim(s)) = m.delta(s);
  Matrix p = d.adjoint() * gt * d;
  if (m.antilinear()) p = p.conjugate().eval();
  return p;
}

inline void require_kernel_pair(const BundleMorphism& m, const Kernel& k_src, const Kernel& k_tgt,
                                const std::string& what) {
  if (!same_bundle(m.source(), k_src.bundle())) throw KernelError(what + ": source kernel lives on another bundle");
  if (!same_bundle(m.target(), k_tgt.bundle())) throw KernelError(what + ": target kernel lives on another bundle");
}

struct HomBound {
  bool is_morphism = false;
  double least_M = 0.0;
  double null_violation = 0.0;
};

inline HomBound hom_bound(const BundleMorphism& m, const Kernel& k_src, const Kernel& k_tgt,
                          double tol = kDefaultTol) {
  require_kernel_pair(m, k_src, k_tgt, "hom_bound");
  const FormBound fb = form_bound(pulled_gram(m, k_tgt), rkhs_gram(k_src), tol);
  return {fb.bounded, fb.least_M, fb.null_violation};
}

struct InducedOperator {
  SemilinearMap map;
  double least_M = 0.0;
  double norm = 0.0;          // measured operator norm
  double fit_residual = 0.0;  // |H(K~_xi) - K_{delta xi}| over generators
};

// Target coordinates of K_{delta(e)} for every source generator e.
inline Matrix image_coords(const BundleMorphism& m, const Rkhs& r_tgt) {
  const Bundle& src = m.source();
  Matrix w(r_tgt.dim(), src.total_dim());
  for (Index s = 0; s < src.size(); ++s)
    w.middleCols(src.offset(s), src.fiber_dim(s)) = r_tgt.coords(m.zeta(s)) * m.delta(s);
  return w;
}

inline InducedOperator induced_operator(const BundleMorphism& m, const Rkhs& r_src, const Rkhs& r_tgt,
                                        double tol = kDefaultTol) {
  const HomBound hb = hom_bound(m, r_src.kernel, r_tgt.kernel, tol);
  if (!hb.is_morphism)
    throw MorphismError("induced_operator: not a morphism of kernels (pulled form nonzero on the null space, " +
                        std::to_string(hb.null_violation) + ")");
  const Matrix w = image_coords(m, r_tgt);
  const Matrix& a = r_src.quotient.embedding;
  InducedOperator op;
  op.least_M = hb.least_M;
  op.map.antilinear = m.antilinear();
  op.map.matrix = m.antilinear() ? Matrix(w * r_src.quotient.lift.conjugate()) : Matrix(w * r_src.quotient.lift);
  op.norm = spectral_norm(op.map.matrix);
  op.fit_residual = max_abs(op.map.apply(a) - w) / std::max(1.0, max_abs(w));
  return op;
}

inline Kernel pullback(const BundleMorphism& m, const Kernel& k, double tol = kDefaultTol) {
  if (!same_bundle(m.target(), k.bundle())) throw KernelError("pullback: kernel lives on another bundle");
  const Bundle& src = m.source();
  const Index n = src.size();
  std::vector<SemilinearMap> qa;
  for (Index s = 0; s < n; ++s) qa.push_back(quasi_adjoint(m, src.star(s), tol));
  std::vector<Matrix> blocks;
  blocks.reserve(static_cast<std::size_t>(n * n));
  for (Index s = 0; s < n; ++s)
    for (Index t = 0; t < n; ++t) {
      const SemilinearMap inner = compose(SemilinearMap{k.block(m.zeta(s), m.zeta(t)), false}, m.fiber_map(t));
      blocks.push_back(compose(qa[static_cast<std::size_t>(s)], inner).matrix);
    }
  return Kernel(src, std::move(blocks));
}

inline double kernel_residual(const Kernel& a, const Kernel& b) {
  double r = 0.0;
  for (std::size_t i = 0; i < a.blocks().size(); ++i) r = std::max(r, max_abs(a.blocks()[i] - b.blocks()[i]));
  return r / std::max(1.0, b.max_entry());
}

struct PullbackCharacterization {
  bool equal = false;
  double residual = 0.0;
  bool isometry = false;
  double isometry_residual = 0.0;
  bool morphism = false;
  double least_M = 0.0;
  bool consistent = false;  // equal <=> (morphism and isometry)
};

inline PullbackCharacterization pullback_characterization(const BundleMorphism& m, const Kernel& k_src,
                                                          const Kernel& k_tgt, double tol = kDefaultTol) {
  require_kernel_pair(m, k_src, k_tgt, "pullback_characterization");
  PullbackCharacterization c;
  c.residual = kernel_residual(pullback(m, k_tgt, tol), k_src);
  c.equal = c.residual <= tol;
  const Matrix s = rkhs_gram(k_src);
  const Matrix p = pulled_gram(m, k_tgt);
  c.isometry_residual = rel_residual(p, s);
  c.isometry = c.isometry_residual <= tol;
  const FormBound fb = form_bound(p, s, tol);
  c.morphism = fb.bounded;
  c.least_M = fb.least_M;
  c.consistent = c.equal == (c.morphism && c.isometry);
  return c;
}

struct ConjugationResult {
  Report report;
  std::optional<SemilinearMap> tau_bar;
};

// tau: antilinear, onto the kernel's own bundle, base map = involution.
inline ConjugationResult conjugation(const Kernel& k, const BundleMorphism& tau, double tol = kDefaultTol) {
  ConjugationResult out;
  Report& rep = out.report;
  rep.id = "conjugation";
  const Bundle& b = k.bundle();
  if (!tau.antilinear()) {
    rep.add("antilinear", false, 1.0, "tau must be antilinear");
    return out;
  }
  if (!same_bundle(tau.source(), b) || !same_bundle(tau.target(), b))
    throw KernelError("conjugation: tau must map the kernel's bundle to itself");
  for (Index z = 0; z < b.size(); ++z)
    if (tau.zeta(z) != b.star(z)) {
      rep.add("base-map", false, 1.0, "tau does not cover the involution at '" + b.name(z) + "'");
      return out;
    }
  double inv = 0.0;
  for (Index z = 0; z < b.size(); ++z) {
    const SemilinearMap sq = compose(tau.fiber_map(b.star(z)), tau.fiber_map(z));
    inv = std::max(inv, max_abs(sq.matrix - identity(b.fiber_dim(z))));
  }
  rep.add("tau-involutive", inv <= tol, inv);
  const IsometryReport iso = is_isometry(tau, tol);
  rep.add("tau-isometry", iso.isometry, iso.residual);
  if (!rep.pass()) return out;

  double symm = 0.0;
  std::string where;
  for (Index s = 0; s < b.size(); ++s)
    for (Index t = 0; t < b.size(); ++t) {
      const SemilinearMap rhs =
          compose(tau.fiber_map(b.star(s)),
                  compose(SemilinearMap{k.block(b.star(s), b.star(t)), false}, tau.fiber_map(t)));
      const double d = max_abs(rhs.matrix - k.block(s, t));
      if (d > symm) {
        symm = d;
        where = "(" + b.name(s) + "," + b.name(t) + ")";
      }
    }
  symm /= std::max(1.0, k.max_entry());
  rep.add("symmetry", symm <= tol, symm, symm <= tol ? "" : "largest violation at block " + where);
  if (!rep.pass()) return out;

  const Rkhs r = build_rkhs(k, tol);
  const InducedOperator op = induced_operator(tau, r, r, tol);
  const Matrix& t = op.map.matrix;
  const Index d = r.dim();
  rep.add("tau-bar-generators", op.fit_residual <= tol, op.fit_residual, "tau_bar(K_xi) = K_{tau xi}");
  const double sq = max_abs(t * t.conjugate() - identity(d));
  rep.add("tau-bar-involutive", sq <= tol, sq);
  const double un = max_abs(t.adjoint() * t - identity(d));
  rep.add("tau-bar-antiunitary", un <= tol, un, "(tau_bar F | tau_bar G) = conj((F|G))");
  double ev = 0.0;
  for (Index j = 0; j < d; ++j) {
    const Vector f = Vector::Unit(d, j);
    const Vector tf = op.map.apply(f);
    for (Index z = 0; z < b.size(); ++z)
      ev = std::max(ev, max_abs(evaluate(r, tf, z) - tau.fiber_map(b.star(z)).apply(evaluate(r, f, b.star(z)))));
  }
  rep.add("tau-bar-evaluation", ev <= tol, ev, "(tau_bar F)(t) = tau(F(t^{-*}))");
  out.tau_bar = op.map;
  return out;
}

// One sampled group element: nu(u,.) as a base permutation, mu(u,.) fiberwise.
struct GroupSample {
  std::string label;
  std::vector<Index> perm;
  std::vector<Matrix> mu;  // mu[s]: D_s -> D_{perm[s]}
};

inline void validate_action(const Bundle& b, const std::vector<GroupSample>& action) {
  for (const auto& g : action) {
    if (static_cast<Index>(g.perm.size()) != b.size() || static_cast<Index>(g.mu.size()) != b.size())
      throw DimensionError("group sample '" + g.label + "' does not cover the base set");
    std::vector<bool> hit(static_cast<std::size_t>(b.size()), false);
    for (Index s = 0; s < b.size(); ++s) {
      const Index w = g.perm[static_cast<std::size_t>(s)];
      if (w < 0 || w >= b.size() || hit[static_cast<std::size_t>(w)])
        throw DimensionError("group sample '" + g.label + "' is not closed over the base set");
      hit[static_cast<std::size_t>(w)] = true;
      const Matrix& mu = g.mu[static_cast<std::size_t>(s)];
      if (mu.rows() != b.fiber_dim(w) || mu.cols() != b.fiber_dim(s))
        throw DimensionError("group sample '" + g.label + "': fiber map at '" + b.name(s) + "' has wrong shape");
    }
  }
}

inline std::vector<Index> inverse_perm(const std::vector<Index>& p) {
  std::vector<Index> q(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) q[static_cast<std::size_t>(p[i])] = static_cast<Index>(i);
  return q;
}

// K(t, nu(u,s)) mu(u,.) = mu(u,.) K(nu(u^{-1},t), s) on every sample.
inline Report equivariance_check(const Kernel& k, const std::vector<GroupSample>& action, double tol = kDefaultTol) {
  validate_action(k.bundle(), action);
  Report rep;
  rep.id = "equivariance";
  double worst = 0.0;
  std::string where;
  for (const auto& g : action) {
    const std::vector<Index> inv = inverse_perm(g.perm);
    for (Index s = 0; s < k.size(); ++s)
      for (Index t = 0; t < k.size(); ++t) {
        const Index ti = inv[static_cast<std::size_t>(t)];
        const Matrix lhs = k.block(t, g.perm[static_cast<std::size_t>(s)]) * g.mu[static_cast<std::size_t>(s)];
        const Matrix rhs = g.mu[static_cast<std::size_t>(ti)] * k.block(ti, s);
        const double d = max_abs(lhs - rhs);
        if (d > worst) {
          worst = d;
          where = "u=" + g.label + " at (" + k.bundle().name(t) + "," + k.bundle().name(s) + ")";
        }
      }
  }
  worst /= std::max(1.0, k.max_entry());
  rep.add("equivariance", worst <= tol, worst, worst <= tol ? "" : "largest violation for " + where);
  return rep;
}

}  // namespace rkcat
