#include <gtest/gtest.h>

#include "rkcat/demos.hpp"
#include "rkcat/rkcat.hpp"

using namespace rkcat;

namespace {

Kernel scalar(const Matrix& k) {
  std::vector<Matrix> blocks;
  for (Index s = 0; s < k.rows(); ++s)
    for (Index t = 0; t < k.cols(); ++t) blocks.push_back(Matrix::Constant(1, 1, k(s, t)));
  return Kernel(Bundle::hermitian(std::vector<Index>(static_cast<std::size_t>(k.rows()), 1)), blocks);
}

Matrix hermitian_pd(Index n, Rng& rng) {
  const Matrix a = random_matrix(n, n, rng);
  return a.adjoint() * a + identity(n);
}

struct Algebra2 {
  MatrixAlgebra a = MatrixAlgebra::full(2), b = MatrixAlgebra::diagonal(2);
  State phi{a, identity(2) / 2.0};
  CpMap e = CpMap::from_function(a, 2, [](const Matrix& x) {
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = x(0, 0);
    d(1, 1) = x(1, 1);
    return d;
  });
  GnsPair pair() const {
    const CommutingSquares sq = commuting_squares(e, b, phi.as_cp_map());
    return {sq.h_a, sq.h_b, sq.j, gns_conjugation(sq.h_a), gns_conjugation(sq.h_b)};
  }
};

Matrix col3(double a, double b, double c) {
  Matrix v(3, 1);
  v << a, b, c;
  return v;
}

std::vector<Matrix> clifford_cosets(const SampledHomogeneous& h) {
  return enumerate_cosets(h, {demo_detail::hadamard(), demo_detail::phase()});
}

}  // namespace

TEST(UniversalMorphism, AllOnesKernelHasOneDimensionalSpace) {
  const UniversalMorphism u = build_universal_morphism(scalar(Matrix::Ones(3, 3)));
  EXPECT_EQ(u.rkhs.dim(), 1);
  for (const auto& z : u.zeta) EXPECT_LT(subspace_distance(z, u.zeta.front()), 1e-12);
}

TEST(UniversalMorphism, IdentityKernelHasOrthogonalFibers) {
  const UniversalMorphism u = build_universal_morphism(scalar(identity(3)));
  EXPECT_EQ(u.rkhs.dim(), 3);
  EXPECT_LT(max_abs(u.zeta[0].basis().adjoint() * u.zeta[1].basis()), 1e-12);
}

// Oracle for the Hermitian case: Delta~^* Q_H (s,t) = G_s^{-1} D_s^dagger Z_s Z_s^dagger Z_t Z_t^dagger D_t,
// with D_s the coordinates of K_{e_i}; this collapses to G_s^{-1} (Gram block) = K(s,t).
TEST(UniversalMorphism, ManualPullbackOfQH) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = random_index(1, 4, rng);
    std::vector<Index> dims;
    std::vector<Matrix> g;
    for (Index s = 0; s < n; ++s) {
      dims.push_back(random_index(1, 3, rng));
      g.push_back(hermitian_pd(dims.back(), rng));
    }
    Index total = 0;
    for (Index d : dims) total += d;
    const Matrix x = random_matrix(random_index(1, total, rng), total, rng);
    std::vector<Matrix> blocks;
    Index os = 0;
    for (Index s = 0; s < n; ++s) {
      Index ot = 0;
      for (Index t = 0; t < n; ++t) {
        blocks.push_back(g[static_cast<std::size_t>(s)].inverse() * x.middleCols(os, dims[static_cast<std::size_t>(s)]).adjoint() *
                         x.middleCols(ot, dims[static_cast<std::size_t>(t)]));
        ot += dims[static_cast<std::size_t>(t)];
      }
      os += dims[static_cast<std::size_t>(s)];
    }
    const Kernel k(Bundle({}, [&] {
      std::vector<Index> id;
      for (Index s = 0; s < n; ++s) id.push_back(s);
      return id;
    }(), dims, g), blocks);
    const UniversalMorphism u = build_universal_morphism(k);
    for (Index s = 0; s < n; ++s)
      for (Index t = 0; t < n; ++t) {
        const Matrix& zs = u.zeta[static_cast<std::size_t>(s)].basis();
        const Matrix& zt = u.zeta[static_cast<std::size_t>(t)].basis();
        const Matrix manual = g[static_cast<std::size_t>(s)].inverse() * u.delta[static_cast<std::size_t>(s)].adjoint() * zs *
                              zs.adjoint() * zt * zt.adjoint() * u.delta[static_cast<std::size_t>(t)];
        EXPECT_LT(max_abs(manual - k.block(s, t)), 1e-8 * std::max(1.0, k.max_entry()));
      }
    EXPECT_TRUE(verify_universal_hermitian(k).pass);
  }
}

TEST(UniversalMorphism, RandomHermitianKernels) {
  Rng rng(2);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const UniversalityCheck c = verify_universal_hermitian(random_positive_kernel({5, 3, true}, rng));
    EXPECT_TRUE(c.pass);
    worst = std::max(worst, c.residual);
  }
  EXPECT_LE(worst, 1e-8);
}

TEST(UniversalMorphism, DeltaIsAnIsometricMorphism) {
  Rng rng(3);
  const Kernel k = random_positive_kernel({4, 3, true}, rng);
  const UniversalMorphism u = build_universal_morphism(k);
  const Kernel q = universal_kernel(u.zeta);
  const PullbackCharacterization c = pullback_characterization(u.morphism(q.bundle()), k, q);
  EXPECT_TRUE(c.equal && c.isometry && c.morphism);
  EXPECT_NEAR(c.least_M, 1.0, 1e-9);
}

TEST(UniversalMorphism, RequiresHermitianBundle) {
  Rng rng(4);
  Kernel k = random_positive_kernel({5, 2, false}, rng);
  while (k.bundle().is_hermitian_involution()) k = random_positive_kernel({5, 2, false}, rng);
  EXPECT_THROW(verify_universal_hermitian(k), PreconditionError);
}

// C on H^K transported from the realization H^K ~ C^h of the Grassmannian data itself.
TEST(Involutive, SwapOnTautologicalLines) {
  GrassKernelSpec spec;
  spec.ambient_dim = 3;
  Matrix c = Matrix::Zero(3, 3);
  c(0, 1) = c(1, 0) = c(2, 2) = 1.0;
  spec.involution_isometry = SemilinearMap{c, false};
  for (const Matrix& v : {col3(1, 1, 1), col3(1, 2, 0), col3(2, 1, 0), col3(0, 0, 1)}) spec.points.push_back(orthonormal_basis(v));
  const Kernel k = involutive_kernel(spec);
  Matrix x(3, 0);
  for (const auto& p : spec.points) {
    x.conservativeResize(3, x.cols() + p.dim());
    x.rightCols(p.dim()) = p.basis();
  }
  const Rkhs r = build_rkhs(k);
  // X^dagger C X is the Gram of the involutive kernel, so realize with X and transport C
  const Matrix j = x * r.quotient.lift;
  const SemilinearMap c_hk{Matrix(j.adjoint() * c * j), false};
  const UniversalityCheck u = verify_universal_involutive(k, c_hk);
  EXPECT_TRUE(u.hypothesis);
  EXPECT_TRUE(u.pass) << u.details;
}

TEST(Involutive, AntilinearCReportsNoHypothesis) {
  const Kernel k = scalar(Matrix::Ones(2, 2));
  const UniversalityCheck u = verify_universal_involutive(k, SemilinearMap{identity(1), true});
  EXPECT_FALSE(u.hypothesis);
}

TEST(Rank, InvertibleBlocksRoundTrip) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial)
    for (const PointRank& p : invertibility_and_rank(random_positive_kernel({4, 3, true}, rng))) {
      EXPECT_TRUE(p.consistent);
      if (p.invertible) EXPECT_LT(p.round_trip, 1e-6);
    }
}

TEST(Rank, SingularBlockShrinksZeta) {
  Kernel k(Bundle::hermitian({2}), std::vector<Matrix>{Matrix::Ones(2, 2)});
  const std::vector<PointRank> r = invertibility_and_rank(k);
  EXPECT_FALSE(r.front().invertible);
  EXPECT_EQ(r.front().zeta_dim, 1);
}

TEST(Transfer, DiagonalBlocksAreIdentityForHermitianIsometries) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Matrix> r;
    std::vector<Index> dims;
    for (Index s = 0; s < 4; ++s) {
      dims.push_back(random_index(1, 3, rng));
      r.push_back(orthonormal_basis(random_matrix(5, dims.back(), rng)).basis());
    }
    const Kernel k = transfer_kernel(r, Bundle::hermitian(dims));
    for (Index s = 0; s < 4; ++s) EXPECT_LT(max_abs(k.block(s, s) - identity(dims[static_cast<std::size_t>(s)])), 1e-10);
    std::vector<Subspace> pts;
    for (const auto& x : r) pts.push_back(Subspace(x));
    EXPECT_LT(kernel_residual(k, universal_kernel(pts)), 1e-10);
  }
}

TEST(Transfer, CanonicalTransferReproducesKernel) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Kernel k = random_positive_kernel({4, 3, trial % 2 == 0}, rng);
    const Rkhs r = build_rkhs(k);
    const std::vector<Matrix> rk = canonical_transfer(r);
    const Bundle& b = k.bundle();
    // (R_K xi | R_K eta) = (K xi | eta); a generator at s pairs through the fiber at s*
    for (Index s = 0; s < k.size(); ++s) {
      const Matrix& rs = rk[static_cast<std::size_t>(s)];
      const Matrix expected = b.pairing(b.star(s)) * k.block(b.star(s), s);
      EXPECT_LT(rel_residual(Matrix(rs.adjoint() * rs), expected), 1e-8) << s;
    }
    // R_K is generally not isometric, so rebuild K(s,t) = R_{s*}^+ R_t directly
    for (Index s = 0; s < k.size(); ++s)
      for (Index t = 0; t < k.size(); ++t) {
        const Matrix left = pairing_adjoint(rk[static_cast<std::size_t>(b.star(s))], b.pairing(b.star(s)), identity(r.dim()));
        EXPECT_LT(rel_residual(Matrix(left * rk[static_cast<std::size_t>(t)]), k.block(s, t)), 1e-8) << s << "," << t;
      }
  }
}

TEST(Transfer, PreconditionsAreEnforced) {
  Matrix r(2, 1);
  r << 1.0, 0.0;
  EXPECT_THROW(transfer_kernel({Matrix(2.0 * r)}, Bundle::hermitian({1})), PreconditionError);
  EXPECT_THROW(transfer_kernel({Matrix::Zero(2, 1)}, Bundle::hermitian({1})), PreconditionError);
}

TEST(Homogeneous, CliffordGroupOnM2) {
  const Algebra2 alg;
  const GnsPair g = alg.pair();
  for (RegularRep kind : {RegularRep::left, RegularRep::right, RegularRep::conjugation}) {
    const SampledHomogeneous h = regular_homogeneous(g, alg.b, kind);
    const std::vector<Matrix> cosets = clifford_cosets(h);
    EXPECT_GE(cosets.size(), 4u);
    EXPECT_TRUE(validate_homogeneous(h, cosets).pass());
    const Kernel k = homogeneous_kernel(h, cosets);
    EXPECT_TRUE(validate_bundle(k.bundle()).pass());
    EXPECT_TRUE(check_positive(k).positive) << rep_name(kind);
    EXPECT_LT(kernel_residual(k, transfer_kernel(homogeneous_transfer(h, cosets), k.bundle())), 1e-9);
    EXPECT_LT(exchange_residual(k), 1e-9);
  }
}

TEST(Homogeneous, DuplicateCosetsRejected) {
  const Algebra2 alg;
  const SampledHomogeneous h = regular_homogeneous(alg.pair(), alg.b, RegularRep::left);
  Matrix d = identity(2);
  d(1, 1) = Complex(0.0, 1.0);  // in the diagonal group, same coset as the identity
  EXPECT_THROW(homogeneous_kernel(h, {identity(2), d}), KernelError);
}

TEST(Homogeneous, InvertSampleInvertsTheAction) {
  const Algebra2 alg;
  const SampledHomogeneous h = regular_homogeneous(alg.pair(), alg.b, RegularRep::left);
  const std::vector<Matrix> cosets = clifford_cosets(h);
  const Kernel k = homogeneous_kernel(h, cosets);
  for (const GroupSample& g : homogeneous_action(h, cosets, {demo_detail::hadamard(), demo_detail::phase()})) {
    const BundleMorphism fwd = action_morphism(k.bundle(), g), back = action_morphism(k.bundle(), invert_sample(g));
    const BundleMorphism loop = compose(back, fwd);
    for (Index s = 0; s < k.size(); ++s) {
      EXPECT_EQ(loop.zeta(s), s);
      EXPECT_LT(max_abs(loop.delta(s) - identity(k.bundle().fiber_dim(s))), 1e-10);
    }
    EXPECT_LT(kernel_residual(pullback(fwd, k), k), 1e-9);
  }
}

TEST(Complexified, CliffordAndPermutationGroups) {
  const Algebra2 alg;
  const SampledHomogeneous h = regular_homogeneous(alg.pair(), alg.b, RegularRep::left);
  const std::vector<Matrix> gens{demo_detail::hadamard(), demo_detail::phase()};
  const ComplexifiedResult c = complexified_universality(h, enumerate_cosets(h, gens), gens);
  EXPECT_TRUE(c.report.pass());
  EXPECT_LE(c.report.find("pullback")->residual, 1e-8);
  EXPECT_LE(c.report.find("orbit-covariance")->residual, 1e-9);

  const SampledHomogeneous h3 = demo_detail::left_regular(3);
  Matrix cyc = Matrix::Zero(3, 3), swp = Matrix::Zero(3, 3);
  cyc(1, 0) = cyc(2, 1) = cyc(0, 2) = 1.0;
  swp(1, 0) = swp(0, 1) = swp(2, 2) = 1.0;
  const ComplexifiedResult c3 = complexified_universality(h3, enumerate_cosets(h3, {cyc, swp}), {cyc, swp});
  EXPECT_TRUE(c3.report.pass());
}

TEST(Complexified, BrokenEquivarianceStopsAtTheGate) {
  const Algebra2 alg;
  const SampledHomogeneous h = regular_homogeneous(alg.pair(), alg.b, RegularRep::left);
  const std::vector<Matrix> gens{demo_detail::hadamard(), demo_detail::phase()};
  const std::vector<Matrix> cosets = enumerate_cosets(h, gens);
  std::vector<GroupSample> action = homogeneous_action(h, cosets, gens);
  action.front().mu.front() *= 2.0;
  const ComplexifiedResult c = complexified_universality(homogeneous_kernel(h, cosets), action, 0);
  EXPECT_FALSE(c.report.pass());
  EXPECT_NE(c.report.checks.back().details.find("equivariance gate failed"), std::string::npos);
}

// Four tetrahedral lines in C^3 permuted by the diagonal sign matrices.
TEST(OrbitCompare, TetrahedralLines) {
  std::vector<Matrix> r;
  for (const Matrix& v : {col3(1, 1, 1), col3(1, -1, -1), col3(-1, 1, -1), col3(-1, -1, 1)}) r.push_back(v / std::sqrt(3.0));
  const Bundle b = Bundle::hermitian({1, 1, 1, 1});
  std::vector<GroupSample> action;
  std::vector<Matrix> pi;
  const double signs[4][3] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  for (const auto& sg : signs) {
    Matrix d = Matrix::Zero(3, 3);
    for (int i = 0; i < 3; ++i) d(i, i) = sg[i];
    GroupSample g{"diag", {}, {}};
    for (const auto& rz : r) {
      const Matrix img = d * rz;
      for (std::size_t j = 0; j < r.size(); ++j) {
        const Complex c = (r[j].adjoint() * img)(0, 0);
        if (std::abs(std::abs(c) - 1.0) < 1e-12) {
          g.perm.push_back(static_cast<Index>(j));
          g.mu.push_back(Matrix::Constant(1, 1, c));
        }
      }
    }
    action.push_back(g);
    pi.push_back(d);
  }
  const Report rep = orbit_compare(b, action, pi, r, 0);
  EXPECT_TRUE(rep.pass());
  EXPECT_LE(rep.find("pullback")->residual, 1e-9);

  std::vector<Matrix> bad = r;
  bad[1] *= 2.0;
  EXPECT_FALSE(orbit_compare(b, action, pi, bad, 0).find("transfer-isometric")->pass);
}

TEST(Tracial, M2DiagonalSuite) {
  const Algebra2 alg;
  const GnsPair g = alg.pair();
  const SampledHomogeneous h = regular_homogeneous(g, alg.b, RegularRep::left);
  const TracialSuite t = tracial_gns_suite(alg.a, alg.b, alg.e, alg.phi, clifford_cosets(h));
  EXPECT_TRUE(t.report.pass());
  ASSERT_TRUE(t.tau_bar.has_value());
  EXPECT_LT(max_abs(t.tau_bar->matrix * t.tau_bar->matrix.conjugate() - identity(t.tau_bar->rows())), 1e-10);
  for (const char* name : {"theta1", "theta2", "theta3"}) EXPECT_LE(t.report.find(name)->residual, 1e-8);
}

TEST(Tracial, NonTracialStateIsRejected) {
  Algebra2 alg;
  Matrix rho = Matrix::Zero(2, 2);
  rho(0, 0) = 0.75;
  rho(1, 1) = 0.25;
  alg.phi = State{alg.a, rho};
  const TracialSuite t = tracial_gns_suite(alg.a, alg.b, alg.e, alg.phi, {identity(2)});
  EXPECT_FALSE(t.report.pass());
  const Check* c = t.report.find("pre.tracial");
  ASSERT_NE(c, nullptr);
  EXPECT_NE(c->details.find("not tracial"), std::string::npos);
}

// Dropping C_B from Theta3 must break the identity the suite certifies.
TEST(Tracial, ThetaNeedsTheCosetCorrection) {
  const Algebra2 alg;
  const GnsPair g = alg.pair();
  const SampledHomogeneous hl = regular_homogeneous(g, alg.b, RegularRep::left);
  const std::vector<Matrix> cosets = close_under_involution(hl, clifford_cosets(hl));
  const Kernel kp = regular_kernel(g, alg.b, RegularRep::conjugation, cosets);
  const BundleMorphism good = theta_map(g, alg.b, RegularRep::conjugation, kp, kp, cosets);
  EXPECT_LT(kernel_residual(pullback(good, kp), kp), 1e-8);
  const SampledHomogeneous hp = regular_homogeneous(g, alg.b, RegularRep::conjugation);
  std::vector<Matrix> fibers;
  for (Index i = 0; i < kp.size(); ++i) {
    // skip the u_{s*}^{-1} factor that brings the fiber back to the base coset
    fibers.push_back(hp.restricted(group_star(cosets[static_cast<std::size_t>(i)])) * g.c_b);
  }
  const BundleMorphism bad(kp.bundle(), kp.bundle(), kp.bundle().involution(), fibers, true);
  EXPECT_GT(kernel_residual(pullback(bad, kp), kp), 1e-3);
}
