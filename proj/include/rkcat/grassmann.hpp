#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rkcat/algebra.hpp"
#include "rkcat/kernel.hpp"

namespace rkcat {

struct GrassKernelSpec {
  Index ambient_dim = 0;
  std::vector<Subspace> points;
  std::optional<SemilinearMap> involution_isometry;  // C
  std::vector<std::string> names;
};

inline void require_common_ambient(const GrassKernelSpec& spec) {
  for (std::size_t i = 0; i < spec.points.size(); ++i)
    if (spec.points[i].ambient_dim() != spec.ambient_dim)
      throw DimensionError("Grassmannian point " + std::to_string(i) + " lives in C^" +
                           std::to_string(spec.points[i].ambient_dim()) + ", expected C^" +
                           std::to_string(spec.ambient_dim));
}

// Q_H(S1,S2) = p_{S1}|_{S2} in the stored bases.
inline Kernel universal_kernel(const GrassKernelSpec& spec) {
  require_common_ambient(spec);
  std::vector<Index> dims;
  for (const auto& s : spec.points) dims.push_back(s.dim());
  std::vector<Matrix> blocks;
  for (const auto& a : spec.points)
    for (const auto& b : spec.points) blocks.push_back(a.basis().adjoint() * b.basis());
  return Kernel(Bundle::hermitian(dims, spec.names), std::move(blocks));
}

inline Kernel universal_kernel(const std::vector<Subspace>& points) {
  GrassKernelSpec spec;
  spec.ambient_dim = points.empty() ? 0 : points.front().ambient_dim();
  spec.points = points;
  return universal_kernel(spec);
}

// C^2 = id and C isometric (antiunitary when antilinear).
inline void validate_involution_isometry(const SemilinearMap& c, Index ambient, double tol = kDefaultTol) {
  if (c.rows() != ambient || c.cols() != ambient)
    throw DimensionError("involution isometry must be " + std::to_string(ambient) + "x" + std::to_string(ambient));
  const double sq = max_abs(compose(c, c).matrix - identity(ambient));
  if (sq > tol) throw PreconditionError("involution isometry: C^2 != id", sq);
  const double iso = max_abs(c.matrix.adjoint() * c.matrix - identity(ambient));
  if (iso > tol) throw PreconditionError("involution isometry: C is not isometric", iso);
}

inline Subspace image_subspace(const SemilinearMap& c, const Subspace& s) {
  return orthonormal_basis(c.apply(s.basis()));
}

// Index of C(S_i) in the list, for every i.
inline std::vector<Index> grassmann_involution(const GrassKernelSpec& spec, double tol = kDefaultTol) {
  const SemilinearMap& c = *spec.involution_isometry;
  std::vector<Index> inv;
  for (std::size_t i = 0; i < spec.points.size(); ++i) {
    const Subspace img = image_subspace(c, spec.points[i]);
    Index found = -1;
    for (std::size_t j = 0; j < spec.points.size() && found < 0; ++j)
      if (img.dim() == spec.points[j].dim() && subspace_distance(img, spec.points[j]) <= tol)
        found = static_cast<Index>(j);
    if (found < 0)
      throw PreconditionError("subspace list is not closed under C: no match for C(S_" + std::to_string(i) + ")",
                              1.0);
    inv.push_back(found);
  }
  return inv;
}

// Q_{H,C}(S_a,S_b) = p_{S_a} o C restricted to S_b, in stored coordinates. Antilinear when C is.
inline std::vector<SemilinearMap> involutive_blocks(const GrassKernelSpec& spec, double tol = kDefaultTol) {
  require_common_ambient(spec);
  if (!spec.involution_isometry) throw DimensionError("involutive_blocks: C missing");
  const SemilinearMap& c = *spec.involution_isometry;
  validate_involution_isometry(c, spec.ambient_dim, tol);
  grassmann_involution(spec, tol);
  std::vector<SemilinearMap> out;
  for (const auto& a : spec.points)
    for (const auto& b : spec.points) {
      const SemilinearMap restricted = compose(c, SemilinearMap{b.basis(), false});
      out.push_back({a.basis().adjoint() * restricted.matrix, c.antilinear});
    }
  return out;
}

// Like-Hermitian kernel Q_{H,C} with pairings (x|y)_{S,C(S)} = (x | C y)_H. Linear C only:
// for antilinear C that form is bilinear, so only involutive_blocks applies.
inline Kernel involutive_kernel(const GrassKernelSpec& spec, double tol = kDefaultTol) {
  require_common_ambient(spec);
  if (!spec.involution_isometry) return universal_kernel(spec);
  const SemilinearMap& c = *spec.involution_isometry;
  if (c.antilinear)
    throw PreconditionError(
        "involutive_kernel: antilinear C gives a bilinear form, not a duality pairing; use involutive_blocks", 0.0);
  validate_involution_isometry(c, spec.ambient_dim, tol);
  const std::vector<Index> inv = grassmann_involution(spec, tol);
  std::vector<Index> dims;
  std::vector<Matrix> pairings;
  for (std::size_t i = 0; i < spec.points.size(); ++i) dims.push_back(spec.points[i].dim());
  for (std::size_t i = 0; i < spec.points.size(); ++i) {
    const Matrix& bi = spec.points[i].basis();
    const Matrix& bj = spec.points[static_cast<std::size_t>(inv[i])].basis();
    pairings.push_back(bj.adjoint() * c.matrix.adjoint() * bi);
  }
  std::vector<Matrix> blocks;
  for (const auto& a : spec.points)
    for (const auto& b : spec.points) blocks.push_back(a.basis().adjoint() * c.matrix * b.basis());
  return Kernel(Bundle(spec.names, inv, dims, std::move(pairings)), std::move(blocks));
}

inline void require_projection(const Matrix& p, const std::string& what, double tol = kDefaultTol) {
  require_square(p, what);
  const double idem = max_abs(p * p - p);
  const double herm = max_abs(p - p.adjoint());
  if (idem > tol || herm > tol) throw PreconditionError(what + ": not an orthogonal projection", std::max(idem, herm));
}

// E_p(T) = pTp + (1-p)T(1-p).
class ConditionalExpectation {
 public:
  explicit ConditionalExpectation(Matrix p, double tol = kDefaultTol) : p_(std::move(p)) {
    require_projection(p_, "conditional_expectation", tol);
    q_ = identity(p_.rows()) - p_;
  }
  Matrix operator()(const Matrix& t) const {
    if (t.rows() != p_.rows() || t.cols() != p_.cols()) throw DimensionError("conditional_expectation: size mismatch");
    return p_ * t * p_ + q_ * t * q_;
  }
  const Matrix& projection() const { return p_; }

 private:
  Matrix p_;
  Matrix q_;
};

inline ConditionalExpectation conditional_expectation(const Matrix& p, double tol = kDefaultTol) {
  return ConditionalExpectation(p, tol);
}

// Phi_K(T) = p_K T iota_K on the full matrix algebra of the ambient space.
inline CpMap compression_map(const Subspace& k, const Subspace& s0, double tol = kDefaultTol) {
  if (k.ambient_dim() != s0.ambient_dim()) throw DimensionError("compression_map: ambient mismatch");
  const double out = max_abs(projection(s0) * k.basis() - k.basis());
  if (out > tol) throw PreconditionError("compression_map: K is not contained in S0", out);
  return CpMap::from_kraus(MatrixAlgebra::full(k.ambient_dim()), {k.basis()});
}

inline CpMap compression_map(const Subspace& k) {
  return compression_map(k, Subspace(identity(k.ambient_dim())));
}

}  // namespace rkcat
