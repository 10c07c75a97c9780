#pragma once

#include <random>
#include <vector>

#include "rkcat/algebra.hpp"
#include "rkcat/kernel.hpp"

namespace rkcat {

using Rng = std::mt19937_64;

inline Matrix random_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> nd;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = Complex(nd(rng), nd(rng));
  return m;
}

inline Index random_index(Index lo, Index hi, Rng& rng) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

inline Matrix random_unitary(Index n, Rng& rng) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(n, n, rng));
  return qr.householderQ() * identity(n);
}

// Random involution on n points: each point is fixed or paired with a neighbour.
inline std::vector<Index> random_involution(Index n, bool hermitian, Rng& rng) {
  std::vector<Index> inv(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) inv[static_cast<std::size_t>(i)] = i;
  if (hermitian) return inv;
  for (Index i = 0; i + 1 < n; i += 2)
    if (std::bernoulli_distribution(0.6)(rng)) {
      inv[static_cast<std::size_t>(i)] = i + 1;
      inv[static_cast<std::size_t>(i + 1)] = i;
    }
  return inv;
}

// Positive kernel K(s,t) = G_s^{-1} R_{s*}^dagger M R_t with pairings G_z = R_{z*}^dagger R_z, M = Y^dagger Y.
// Paired points share a fiber dimension. A small Y rank makes H^K smaller than the fibers.
struct RandomKernelSpec {
  Index max_points = 5;
  Index max_fiber = 3;
  bool hermitian = true;
};

inline Kernel random_positive_kernel(const RandomKernelSpec& spec, Rng& rng) {
  const Index n = random_index(1, spec.max_points, rng);
  const std::vector<Index> inv = random_involution(n, spec.hermitian, rng);
  std::vector<Index> dims(static_cast<std::size_t>(n));
  Index total = 0;
  for (Index z = 0; z < n; ++z) {
    const Index w = inv[static_cast<std::size_t>(z)];
    dims[static_cast<std::size_t>(z)] = w < z ? dims[static_cast<std::size_t>(w)] : random_index(1, spec.max_fiber, rng);
    total += dims[static_cast<std::size_t>(z)];
  }
  const Index h = std::max<Index>(spec.max_fiber, total);
  std::vector<Matrix> r;
  for (Index z = 0; z < n; ++z) r.push_back(random_matrix(h, dims[static_cast<std::size_t>(z)], rng));
  std::vector<Matrix> g;
  for (Index z = 0; z < n; ++z) g.push_back(r[static_cast<std::size_t>(inv[static_cast<std::size_t>(z)])].adjoint() * r[static_cast<std::size_t>(z)]);
  const Matrix y = random_matrix(random_index(1, h, rng), h, rng);
  const Matrix m = y.adjoint() * y / static_cast<double>(h);
  std::vector<Matrix> blocks;
  for (Index s = 0; s < n; ++s) {
    const auto ss = static_cast<std::size_t>(s);
    const Matrix left = g[ss].fullPivLu().solve(Matrix(r[static_cast<std::size_t>(inv[ss])].adjoint() * m));
    for (Index t = 0; t < n; ++t) blocks.push_back(left * r[static_cast<std::size_t>(t)]);
  }
  return Kernel(Bundle({}, inv, dims, g), std::move(blocks));
}

// Base map compatible with the involutions: fixed points go to fixed points, pairs anywhere.
inline std::vector<Index> random_equivariant_map(const std::vector<Index>& src, const std::vector<Index>& tgt, Rng& rng) {
  std::vector<Index> fixed;
  for (std::size_t w = 0; w < tgt.size(); ++w)
    if (tgt[w] == static_cast<Index>(w)) fixed.push_back(static_cast<Index>(w));
  std::vector<Index> zeta(src.size(), -1);
  for (std::size_t z = 0; z < src.size(); ++z) {
    if (zeta[z] >= 0) continue;
    const Index zs = src[z];
    if (zs == static_cast<Index>(z)) {
      if (fixed.empty()) throw DimensionError("random_equivariant_map: target has no fixed point");
      zeta[z] = fixed[static_cast<std::size_t>(random_index(0, static_cast<Index>(fixed.size()) - 1, rng))];
    } else {
      const Index w = random_index(0, static_cast<Index>(tgt.size()) - 1, rng);
      zeta[z] = w;
      zeta[static_cast<std::size_t>(zs)] = tgt[static_cast<std::size_t>(w)];
    }
  }
  return zeta;
}

// Random morphism into `target` from a freshly drawn source bundle whose pairings are
// random (invertible, conjugate symmetric).
inline BundleMorphism random_morphism_into(const Bundle& target, Index max_points, Index max_fiber, bool antilinear,
                                           Rng& rng) {
  bool has_fixed = false;
  for (Index w = 0; w < target.size(); ++w) has_fixed = has_fixed || target.star(w) == w;
  const Index n = random_index(1, max_points, rng);
  std::vector<Index> inv = random_involution(n, false, rng);
  if (!has_fixed) {
    // fixed source points need fixed targets; pair everything, drop a trailing singleton
    std::vector<Index> paired;
    for (Index i = 0; i + 1 < std::max<Index>(n, 2); i += 2) {
      paired.push_back(i + 1);
      paired.push_back(i);
    }
    inv = paired;
  }
  const Index m = static_cast<Index>(inv.size());
  std::vector<Index> dims(static_cast<std::size_t>(m));
  for (Index z = 0; z < m; ++z) {
    const Index w = inv[static_cast<std::size_t>(z)];
    dims[static_cast<std::size_t>(z)] = w < z ? dims[static_cast<std::size_t>(w)] : random_index(1, max_fiber, rng);
  }
  std::vector<Matrix> g(static_cast<std::size_t>(m));
  for (Index z = 0; z < m; ++z) {
    const auto zz = static_cast<std::size_t>(z);
    const Index w = inv[zz];
    if (w == z) {
      const Matrix a = random_matrix(dims[zz], dims[zz], rng);
      g[zz] = a.adjoint() * a + identity(dims[zz]);
    } else if (w > z) {
      g[zz] = random_matrix(dims[static_cast<std::size_t>(w)], dims[zz], rng) + 2.0 * identity(dims[zz]);
      g[static_cast<std::size_t>(w)] = g[zz].adjoint();
    }
  }
  const Bundle src({}, inv, dims, g);
  const std::vector<Index> zeta = random_equivariant_map(inv, target.involution(), rng);
  std::vector<Matrix> delta;
  for (Index z = 0; z < m; ++z)
    delta.push_back(random_matrix(target.fiber_dim(zeta[static_cast<std::size_t>(z)]), dims[static_cast<std::size_t>(z)], rng));
  return BundleMorphism(src, target, zeta, std::move(delta), antilinear);
}

// Unital CP map a -> sum V_i^dagger a V_i on M_n with V_i = W_i S^{-1/2}, S = sum W_i^dagger W_i.
inline CpMap random_unital_cp(Index n, Index kraus, Rng& rng) {
  std::vector<Matrix> w;
  Matrix s = Matrix::Zero(n, n);
  for (Index i = 0; i < kraus; ++i) {
    w.push_back(random_matrix(n, n, rng));
    s += w.back().adjoint() * w.back();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  const Matrix inv_sqrt = es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                          es.eigenvectors().adjoint();
  for (auto& x : w) x = x * inv_sqrt;
  return CpMap::from_kraus(MatrixAlgebra::full(n), w);
}

}  // namespace rkcat
