#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rkcat/linalg.hpp"
#include "rkcat/report.hpp"

namespace rkcat {

// Finite like-Hermitian bundle. Point z carries C^{d(z)} and the pairing
// matrix G_z of (.|.)_{z,z^{-*}}, of size d(z^{-*}) x d(z).
class Bundle {
 public:
  Bundle() = default;

  Bundle(std::vector<std::string> names, std::vector<Index> involution, std::vector<Index> fiber_dims,
         std::vector<Matrix> pairings)
      : names_(std::move(names)),
        involution_(std::move(involution)),
        dims_(std::move(fiber_dims)),
        pairings_(std::move(pairings)) {
    const std::size_t n = dims_.size();
    if (names_.empty()) {
      for (std::size_t i = 0; i < n; ++i) names_.push_back(std::to_string(i));
    }
    if (names_.size() != n || involution_.size() != n || pairings_.size() != n)
      throw DimensionError("Bundle: names, involution, fiber dims and pairings must have equal length");
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j)
        if (names_[i] == names_[j]) throw DimensionError("Bundle: duplicate point id '" + names_[i] + "'");
      if (involution_[i] < 0 || static_cast<std::size_t>(involution_[i]) >= n)
        throw DimensionError("Bundle: involution of point '" + names_[i] + "' is out of range");
      if (dims_[i] < 0) throw DimensionError("Bundle: negative fiber dimension at '" + names_[i] + "'");
    }
    for (std::size_t i = 0; i < n; ++i) {
      const Matrix& g = pairings_[i];
      const Index rows = dims_[static_cast<std::size_t>(involution_[i])];
      if (g.rows() != rows || g.cols() != dims_[i])
        throw DimensionError("Bundle: pairing at '" + names_[i] + "' is " + std::to_string(g.rows()) + "x" +
                             std::to_string(g.cols()) + ", expected " + std::to_string(rows) + "x" +
                             std::to_string(dims_[i]));
      require_finite(g, "Bundle pairing at '" + names_[i] + "'");
    }
  }

  // sigma = id and standard inner products.
  static Bundle hermitian(const std::vector<Index>& dims, std::vector<std::string> names = {}) {
    std::vector<Index> inv(dims.size());
    std::vector<Matrix> g;
    for (std::size_t i = 0; i < dims.size(); ++i) {
      inv[i] = static_cast<Index>(i);
      g.push_back(identity(dims[i]));
    }
    return Bundle(std::move(names), std::move(inv), dims, std::move(g));
  }

  Index size() const { return static_cast<Index>(dims_.size()); }
  Index star(Index z) const { return involution_[at(z)]; }
  Index fiber_dim(Index z) const { return dims_[at(z)]; }
  const Matrix& pairing(Index z) const { return pairings_[at(z)]; }
  const std::string& name(Index z) const { return names_[at(z)]; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<Index>& involution() const { return involution_; }
  const std::vector<Index>& fiber_dims() const { return dims_; }
  const std::vector<Matrix>& pairings() const { return pairings_; }

  Index index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return static_cast<Index>(i);
    throw DimensionError("unknown point '" + name + "'");
  }

  bool is_hermitian_involution() const {
    for (Index z = 0; z < size(); ++z)
      if (star(z) != z) return false;
    return true;
  }

  Index total_dim() const {
    Index t = 0;
    for (Index d : dims_) t += d;
    return t;
  }

  // Offset of the fiber of z in the concatenation of all fibers.
  Index offset(Index z) const {
    Index t = 0;
    for (Index i = 0; i < z; ++i) t += dims_[static_cast<std::size_t>(i)];
    return t;
  }

 private:
  std::size_t at(Index z) const {
    if (z < 0 || z >= size()) throw DimensionError("point index " + std::to_string(z) + " out of range");
    return static_cast<std::size_t>(z);
  }

  std::vector<std::string> names_;
  std::vector<Index> involution_;
  std::vector<Index> dims_;
  std::vector<Matrix> pairings_;
};

inline bool same_bundle(const Bundle& a, const Bundle& b, double tol = kDefaultTol) {
  if (a.size() != b.size() || a.involution() != b.involution() || a.fiber_dims() != b.fiber_dims()) return false;
  for (Index z = 0; z < a.size(); ++z)
    if (rel_residual(a.pairing(z), b.pairing(z)) > tol) return false;
  return true;
}

// Checks Def like: involutive base map, G_{z^{-*}} = G_z^dagger, invertible G_z.
inline Report validate_bundle(const Bundle& b, double tol = kDefaultTol) {
  Report r;
  r.id = "validate_bundle";
  for (Index z = 0; z < b.size(); ++z) {
    const Index w = b.star(z);
    if (b.star(w) != z) {
      r.add("involution", false, 1.0, "point '" + b.name(z) + "': (z^{-*})^{-*} = '" + b.name(b.star(w)) + "'");
      continue;
    }
    const double sym = rel_residual(b.pairing(w), Matrix(b.pairing(z).adjoint()));
    if (sym > tol)
      r.add("conjugate-symmetry", false, sym, "point '" + b.name(z) + "': G_{z^{-*}} differs from G_z^dagger");
    const Matrix& g = b.pairing(z);
    if (g.size() > 0) {
      Eigen::JacobiSVD<Matrix> svd(g);
      const auto& sv = svd.singularValues();
      const double smin = sv(sv.size() - 1);
      if (!(smin > tol * sv(0)))
        r.add("duality", false, smin, "point '" + b.name(z) + "': singular pairing, smallest singular value " +
                                          std::to_string(smin));
    }
  }
  if (r.checks.empty()) r.add("bundle", true, 0.0, "all invariants hold");
  return r;
}

class BundleMorphism {
 public:
  BundleMorphism() = default;

  BundleMorphism(Bundle source, Bundle target, std::vector<Index> base_map, std::vector<Matrix> fiber_maps,
                 bool antilinear)
      : source_(std::move(source)),
        target_(std::move(target)),
        zeta_(std::move(base_map)),
        delta_(std::move(fiber_maps)),
        antilinear_(antilinear) {
    const Index n = source_.size();
    if (static_cast<Index>(zeta_.size()) != n || static_cast<Index>(delta_.size()) != n)
      throw MorphismError("BundleMorphism: base map and fiber maps must cover every source point");
    for (Index z = 0; z < n; ++z) {
      const Index w = zeta_[static_cast<std::size_t>(z)];
      if (w < 0 || w >= target_.size())
        throw MorphismError("BundleMorphism: image of '" + source_.name(z) + "' is not a target point");
      const Matrix& d = delta_[static_cast<std::size_t>(z)];
      if (d.rows() != target_.fiber_dim(w) || d.cols() != source_.fiber_dim(z))
        throw MorphismError("BundleMorphism: fiber map at '" + source_.name(z) + "' is " +
                            std::to_string(d.rows()) + "x" + std::to_string(d.cols()) + ", expected " +
                            std::to_string(target_.fiber_dim(w)) + "x" + std::to_string(source_.fiber_dim(z)));
      require_finite(d, "BundleMorphism fiber map at '" + source_.name(z) + "'");
    }
    for (Index z = 0; z < n; ++z) {
      const Index lhs = zeta_[static_cast<std::size_t>(source_.star(z))];
      const Index rhs = target_.star(zeta_[static_cast<std::size_t>(z)]);
      if (lhs != rhs)
        throw MorphismError("BundleMorphism: zeta(z^{-*}) != zeta(z)^{-*} at '" + source_.name(z) + "'");
    }
  }

  static BundleMorphism identity(const Bundle& b, bool antilinear = false) {
    std::vector<Index> zeta(static_cast<std::size_t>(b.size()));
    std::vector<Matrix> delta;
    for (Index z = 0; z < b.size(); ++z) {
      zeta[static_cast<std::size_t>(z)] = z;
      delta.push_back(rkcat::identity(b.fiber_dim(z)));
    }
    return BundleMorphism(b, b, std::move(zeta), std::move(delta), antilinear);
  }

  const Bundle& source() const { return source_; }
  const Bundle& target() const { return target_; }
  bool antilinear() const { return antilinear_; }
  Index zeta(Index z) const { return zeta_.at(static_cast<std::size_t>(z)); }
  const std::vector<Index>& base_map() const { return zeta_; }
  const Matrix& delta(Index z) const { return delta_.at(static_cast<std::size_t>(z)); }
  SemilinearMap fiber_map(Index z) const { return SemilinearMap{delta(z), antilinear_}; }
  const std::vector<Matrix>& fiber_maps() const { return delta_; }

 private:
  Bundle source_;
  Bundle target_;
  std::vector<Index> zeta_;
  std::vector<Matrix> delta_;
  bool antilinear_ = false;
};

// (delta_z)^{-*}: D_{zeta(z)^{-*}} -> D~_{z^{-*}}.
inline SemilinearMap quasi_adjoint(const BundleMorphism& m, Index z, double tol = kDefaultTol) {
  return pairing_adjoint(m.fiber_map(z), m.source().pairing(z), m.target().pairing(m.zeta(z)), tol);
}

struct IsometryReport {
  bool isometry = false;
  double residual = 0.0;
};

inline IsometryReport is_isometry(const BundleMorphism& m, double tol = kDefaultTol) {
  IsometryReport r;
  double scale = 1.0;
  for (Index z = 0; z < m.source().size(); ++z) {
    const Index zs = m.source().star(z);
    const Matrix& g_src = m.source().pairing(z);
    const Matrix& g_tgt = m.target().pairing(m.zeta(z));
    Matrix pulled = m.delta(zs).adjoint() * g_tgt * m.delta(z);
    if (m.antilinear()) pulled = pulled.conjugate().eval();
    r.residual = std::max(r.residual, max_abs(pulled - g_src));
    scale = std::max(scale, max_abs(g_src));
  }
  r.isometry = r.residual <= tol * scale;
  return r;
}

// outer o inner
inline BundleMorphism compose(const BundleMorphism& outer, const BundleMorphism& inner,
                              double tol = kDefaultTol) {
  if (!same_bundle(inner.target(), outer.source(), tol))
    throw MorphismError("compose: target of the inner morphism is not the source of the outer one");
  std::vector<Index> zeta;
  std::vector<Matrix> delta;
  for (Index z = 0; z < inner.source().size(); ++z) {
    const Index w = inner.zeta(z);
    zeta.push_back(outer.zeta(w));
    delta.push_back(compose(outer.fiber_map(w), inner.fiber_map(z)).matrix);
  }
  return BundleMorphism(inner.source(), outer.target(), std::move(zeta), std::move(delta),
                        outer.antilinear() != inner.antilinear());
}

inline std::pair<Index, Vector> apply_morphism(const BundleMorphism& m, Index z, const Vector& xi) {
  if (xi.size() != m.source().fiber_dim(z))
    throw DimensionError("apply_morphism: vector has length " + std::to_string(xi.size()) + ", fiber at '" +
                         m.source().name(z) + "' has dimension " + std::to_string(m.source().fiber_dim(z)));
  return {m.zeta(z), m.fiber_map(z).apply(xi)};
}

}  // namespace rkcat
