#pragma once

#include <string>
#include <vector>

#include "rkcat/grassmann.hpp"
#include "rkcat/report.hpp"

namespace rkcat {

// K^ and zeta_K of a positive kernel in quotient coordinates of H^K.
struct UniversalMorphism {
  Kernel kernel;
  Rkhs rkhs;
  std::vector<Subspace> zeta;
  std::vector<Matrix> delta;  // delta[s]: D_s -> C^{dim H^K}, columns K_{e_i}

  Matrix delta_in_zeta(Index s) const {
    return zeta[static_cast<std::size_t>(s)].basis().adjoint() * delta[static_cast<std::size_t>(s)];
  }

  // Delta_K into a kernel over the subspace list {zeta(s)}, indexed like the base.
  BundleMorphism morphism(const Bundle& target) const {
    std::vector<Index> base;
    std::vector<Matrix> fibers;
    for (Index s = 0; s < kernel.size(); ++s) {
      base.push_back(s);
      fibers.push_back(delta_in_zeta(s));
    }
    return BundleMorphism(kernel.bundle(), target, std::move(base), std::move(fibers), false);
  }
};

inline UniversalMorphism build_universal_morphism(const Kernel& k, double tol = kDefaultTol) {
  UniversalMorphism u;
  u.kernel = k;
  u.rkhs = build_rkhs(k, tol);
  for (Index s = 0; s < k.size(); ++s) {
    u.delta.push_back(u.rkhs.coords(s));
    u.zeta.push_back(orthonormal_basis(u.delta.back(), tol));
  }
  return u;
}

struct UniversalityCheck {
  bool hypothesis = true;  // false: compatibility or input hypothesis failed, no verdict
  bool pass = false;
  double residual = 0.0;
  std::string details;
};

inline void require_hermitian_bundle(const Bundle& b, double tol) {
  for (Index z = 0; z < b.size(); ++z) {
    if (b.star(z) != z) throw PreconditionError("Hermitian bundle required: involution moves '" + b.name(z) + "'", 1.0);
    const PsdReport p = psd_check(b.pairing(z), tol);
    if (!p.is_hermitian || !(p.min_eigenvalue > 0.0))
      throw PreconditionError("Hermitian bundle required: pairing at '" + b.name(z) + "' is not positive definite",
                              p.min_eigenvalue);
  }
}

inline UniversalityCheck verify_universal_hermitian(const Kernel& k, double tol = kDefaultTol,
                                                    double tol_residual = 1e-8) {
  require_hermitian_bundle(k.bundle(), tol);
  const UniversalMorphism u = build_universal_morphism(k, tol);
  const Kernel q = universal_kernel(u.zeta);
  UniversalityCheck c;
  c.residual = kernel_residual(pullback(u.morphism(q.bundle()), q, tol), k);
  c.pass = c.residual <= tol_residual;
  c.details = "dim H^K = " + std::to_string(u.rkhs.dim());
  return c;
}

// Q_{H,C} over a subspace list with a prescribed base involution.
inline Kernel involutive_kernel_on(const std::vector<Subspace>& points, const Matrix& c, const std::vector<Index>& inv) {
  std::vector<Index> dims;
  std::vector<Matrix> pairings;
  for (const auto& s : points) dims.push_back(s.dim());
  for (std::size_t i = 0; i < points.size(); ++i)
    pairings.push_back(points[static_cast<std::size_t>(inv[i])].basis().adjoint() * c.adjoint() * points[i].basis());
  std::vector<Matrix> blocks;
  for (const auto& a : points)
    for (const auto& b : points) blocks.push_back(a.basis().adjoint() * c * b.basis());
  return Kernel(Bundle({}, inv, dims, std::move(pairings)), std::move(blocks));
}

// Isometry J: H^K -> C^N with J K_{g} = x_g, given vectors x_g realizing the generator Gram.
inline Matrix transport_operator(const Rkhs& r, const Matrix& realization, double tol = kDefaultTol) {
  if (realization.cols() != static_cast<Index>(r.generators.size()))
    throw DimensionError("transport_operator: one vector per generator required");
  const double g = rel_residual(Matrix(realization.adjoint() * realization), r.gram);
  if (g > tol) throw PreconditionError("transport_operator: vectors do not realize the Gram matrix", g);
  return realization * r.quotient.lift;
}

// Universality with a user supplied linear isometric involution C of H^K.
inline UniversalityCheck verify_universal_involutive(const Kernel& k, const SemilinearMap& c, double tol = kDefaultTol,
                                                     double tol_residual = 1e-8) {
  UniversalityCheck out;
  const UniversalMorphism u = build_universal_morphism(k, tol);
  const Index r = u.rkhs.dim();
  if (c.antilinear) {
    out.hypothesis = false;
    out.details = "antilinear C gives no duality pairing on the tautological bundle";
    return out;
  }
  if (c.rows() != r || c.cols() != r) throw DimensionError("verify_universal_involutive: C must act on H^K");
  try {
    validate_involution_isometry(c, r, tol);
  } catch (const PreconditionError& e) {
    out.hypothesis = false;
    out.residual = e.residual();
    out.details = e.what();
    return out;
  }
  const Bundle& b = k.bundle();
  double compat = 0.0;
  std::string where;
  for (Index s = 0; s < b.size(); ++s) {
    const Subspace img = image_subspace(c, u.zeta[static_cast<std::size_t>(s)]);
    const Subspace& other = u.zeta[static_cast<std::size_t>(b.star(s))];
    const double d = img.dim() == other.dim() ? subspace_distance(img, other) : 1.0;
    if (d > compat) {
      compat = d;
      where = b.name(s);
    }
  }
  if (compat > tol) {
    out.hypothesis = false;
    out.residual = compat;
    out.details = "zeta(s^{-*}) != C(zeta(s)) at '" + where + "'";
    return out;
  }
  const Kernel q = involutive_kernel_on(u.zeta, c.matrix, b.involution());
  out.residual = kernel_residual(pullback(u.morphism(q.bundle()), q, tol), k);
  out.pass = out.residual <= tol_residual;
  out.details = "dim H^K = " + std::to_string(r);
  return out;
}

struct PointRank {
  Index point = 0;
  Index fiber_dim = 0;
  Index zeta_dim = 0;
  double min_singular_value = 0.0;  // of K(s,s)
  bool invertible = false;
  double round_trip = 0.0;  // |K^-1 K^ xi - xi| when invertible
  bool consistent = true;   // invertible implies zeta_dim == fiber_dim
};

inline std::vector<PointRank> invertibility_and_rank(const Kernel& k, double tol = kDefaultTol) {
  const UniversalMorphism u = build_universal_morphism(k, tol);
  std::vector<PointRank> out;
  for (Index s = 0; s < k.size(); ++s) {
    PointRank p;
    p.point = s;
    p.fiber_dim = k.bundle().fiber_dim(s);
    p.zeta_dim = u.zeta[static_cast<std::size_t>(s)].dim();
    const Matrix& kss = k.block(s, s);
    if (kss.size() > 0) {
      Eigen::JacobiSVD<Matrix> svd(kss);
      const auto& sv = svd.singularValues();
      p.min_singular_value = sv(sv.size() - 1);
      p.invertible = p.min_singular_value > tol * std::max(1.0, sv(0));
    } else {
      p.invertible = true;
    }
    if (p.invertible && p.fiber_dim > 0) {
      const Matrix& d = u.delta[static_cast<std::size_t>(s)];
      const Matrix back = d.completeOrthogonalDecomposition().pseudoInverse() * d;
      p.round_trip = max_abs(back - identity(p.fiber_dim));
    }
    p.consistent = !p.invertible || p.zeta_dim == p.fiber_dim;
    out.push_back(p);
  }
  return out;
}

// K^R(s,t) = (R_{s^{-*}})^{-*} R_t for R_s: D_s -> C^h fiberwise isometric.
inline Kernel transfer_kernel(const std::vector<Matrix>& r, const Bundle& b, double tol = kDefaultTol) {
  if (static_cast<Index>(r.size()) != b.size()) throw DimensionError("transfer_kernel: one map per point required");
  const Index h = r.empty() ? 0 : r.front().rows();
  for (Index s = 0; s < b.size(); ++s) {
    const Matrix& rs = r[static_cast<std::size_t>(s)];
    if (rs.rows() != h || rs.cols() != b.fiber_dim(s))
      throw DimensionError("transfer_kernel: map at '" + b.name(s) + "' has the wrong shape");
    if (rs.cols() > 0) {
      Eigen::JacobiSVD<Matrix> svd(rs);
      const auto& sv = svd.singularValues();
      if (!(sv(sv.size() - 1) > tol * sv(0)))
        throw PreconditionError("transfer_kernel: R is not injective at '" + b.name(s) + "'", sv(sv.size() - 1));
    }
  }
  for (Index s = 0; s < b.size(); ++s) {
    const Matrix pulled = r[static_cast<std::size_t>(b.star(s))].adjoint() * r[static_cast<std::size_t>(s)];
    const double d = rel_residual(pulled, b.pairing(s));
    if (d > tol) throw PreconditionError("transfer_kernel: R is not isometric at '" + b.name(s) + "'", d);
  }
  std::vector<Matrix> left;
  for (Index s = 0; s < b.size(); ++s)
    left.push_back(pairing_adjoint(r[static_cast<std::size_t>(b.star(s))], b.pairing(b.star(s)), identity(h), tol));
  std::vector<Matrix> blocks;
  for (Index s = 0; s < b.size(); ++s)
    for (Index t = 0; t < b.size(); ++t) blocks.push_back(left[static_cast<std::size_t>(s)] * r[static_cast<std::size_t>(t)]);
  return Kernel(b, std::move(blocks));
}

// R_K(xi) = K_xi in quotient coordinates.
inline std::vector<Matrix> canonical_transfer(const Rkhs& r) {
  std::vector<Matrix> out;
  for (Index s = 0; s < r.kernel.size(); ++s) out.push_back(r.coords(s));
  return out;
}

inline Kernel restrict_kernel(const Kernel& k, const std::vector<Index>& points) {
  const Bundle& b = k.bundle();
  std::vector<Index> where(static_cast<std::size_t>(b.size()), -1);
  for (std::size_t i = 0; i < points.size(); ++i) where[static_cast<std::size_t>(points[i])] = static_cast<Index>(i);
  std::vector<std::string> names;
  std::vector<Index> inv, dims;
  std::vector<Matrix> pairings, blocks;
  for (Index p : points) {
    const Index w = where[static_cast<std::size_t>(b.star(p))];
    if (w < 0) throw DimensionError("restrict_kernel: point set not closed under the involution");
    names.push_back(b.name(p));
    inv.push_back(w);
    dims.push_back(b.fiber_dim(p));
    pairings.push_back(b.pairing(p));
  }
  for (Index s : points)
    for (Index t : points) blocks.push_back(k.block(s, t));
  return Kernel(Bundle(names, inv, dims, pairings), std::move(blocks));
}

}  // namespace rkcat
