#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rkcat/cpmap.hpp"
#include "rkcat/universality.hpp"

namespace rkcat {

// Group elements are invertible matrices; u^{-*} = (u^{-1})^dagger.
inline Matrix group_star(const Matrix& u) { return u.inverse().adjoint(); }

// Data of a homogeneous bundle G_A x_{pi} H_B -> G_A/G_B, sampled.
struct SampledHomogeneous {
  std::function<Matrix(const Matrix&)> rep;          // pi_A(u) on H_A
  std::function<bool(const Matrix&)> in_subgroup;    // u in G_B
  Matrix hb;                                         // orthonormal basis of H_B inside H_A

  Matrix projection() const { return hb * hb.adjoint(); }
  Matrix restricted(const Matrix& u) const { return hb.adjoint() * rep(u) * hb; }  // pi_B(u) for u in G_B
};

// Membership in the invertible group of a block subalgebra.
inline std::function<bool(const Matrix&)> algebra_subgroup(const MatrixAlgebra& b, double tol = kDefaultTol) {
  return [b, tol](const Matrix& w) {
    if (!b.contains(w, tol)) return false;
    return smallest_singular_value(w) > tol * std::max(1.0, spectral_norm(w));
  };
}

inline Index coset_index(const SampledHomogeneous& h, const std::vector<Matrix>& cosets, const Matrix& v) {
  for (std::size_t i = 0; i < cosets.size(); ++i)
    if (h.in_subgroup(cosets[i].inverse() * v)) return static_cast<Index>(i);
  return -1;
}

// pi multiplicative and *-preserving on sample pairs, H_B invariant under subgroup samples.
inline Report validate_homogeneous(const SampledHomogeneous& h, const std::vector<Matrix>& samples,
                                   double tol = kDefaultTol) {
  Report r;
  r.id = "homogeneous";
  double mult = 0.0, star = 0.0, inv = 0.0;
  const Matrix q = identity(h.hb.rows()) - h.projection();
  for (const auto& u : samples) {
    const Matrix pu = h.rep(u);
    star = std::max(star, max_abs(h.rep(u.adjoint()) - pu.adjoint()) / std::max(1.0, max_abs(pu)));
    for (const auto& v : samples) mult = std::max(mult, max_abs(h.rep(u * v) - pu * h.rep(v)) / std::max(1.0, max_abs(pu)));
    if (h.in_subgroup(u)) inv = std::max(inv, max_abs(q * pu * h.hb));
  }
  r.add("multiplicative", mult <= tol, mult);
  r.add("star", star <= tol, star, "pi(u^*) = pi(u)^dagger");
  r.add("subgroup-invariance", inv <= tol, inv, "pi(G_B) leaves H_B invariant");
  return r;
}

// Appends u^{-*} for every coset whose image under the involution is missing.
inline std::vector<Matrix> close_under_involution(const SampledHomogeneous& h, std::vector<Matrix> cosets) {
  for (std::size_t i = 0; i < cosets.size(); ++i) {
    const Matrix s = group_star(cosets[i]);
    if (coset_index(h, cosets, s) < 0) cosets.push_back(s);
  }
  return cosets;
}

// Orbit of the identity coset under the group generated by the given elements.
inline std::vector<Matrix> enumerate_cosets(const SampledHomogeneous& h, const std::vector<Matrix>& generators,
                                            Index max_cosets = 64) {
  if (generators.empty()) throw DimensionError("enumerate_cosets: no generators");
  std::vector<Matrix> out{identity(generators.front().rows())};
  for (std::size_t i = 0; i < out.size(); ++i)
    for (const auto& g : generators) {
      const Matrix v = g * out[i];
      if (coset_index(h, out, v) < 0) {
        if (static_cast<Index>(out.size()) >= max_cosets)
          throw PreconditionError("enumerate_cosets: orbit exceeds " + std::to_string(max_cosets) + " cosets", 0.0);
        out.push_back(v);
      }
    }
  return close_under_involution(h, std::move(out));
}

// Blocks B^dagger U_s^{-1} U_t B with pairings B^dagger U_{s*}^dagger U_s B.
inline Kernel homogeneous_blocks(const std::vector<Matrix>& reps, const std::vector<Matrix>& inverse_reps,
                                 const std::vector<Index>& involution, const Matrix& b,
                                 std::vector<std::string> names = {}) {
  const std::size_t n = reps.size();
  std::vector<Index> dims(n, b.cols());
  std::vector<Matrix> pairings, blocks;
  std::vector<Matrix> rb;
  for (const auto& u : reps) rb.push_back(u * b);
  for (std::size_t i = 0; i < n; ++i) pairings.push_back(rb[static_cast<std::size_t>(involution[i])].adjoint() * rb[i]);
  for (std::size_t s = 0; s < n; ++s) {
    const Matrix left = b.adjoint() * inverse_reps[s];
    for (std::size_t t = 0; t < n; ++t) blocks.push_back(left * rb[t]);
  }
  return Kernel(Bundle(std::move(names), involution, dims, std::move(pairings)), std::move(blocks));
}

// Coset involution u_i G_B -> u_i^{-*} G_B as an index map.
inline std::vector<Index> coset_involution(const SampledHomogeneous& h, const std::vector<Matrix>& cosets) {
  std::vector<Index> inv;
  for (std::size_t i = 0; i < cosets.size(); ++i) {
    const Index j = coset_index(h, cosets, group_star(cosets[i]));
    if (j < 0)
      throw PreconditionError("homogeneous_kernel: coset list not closed under u -> u^{-*} (coset " + std::to_string(i) + ")",
                              1.0);
    inv.push_back(j);
  }
  return inv;
}

inline Kernel homogeneous_kernel(const SampledHomogeneous& h, const std::vector<Matrix>& cosets,
                                 double tol = kDefaultTol) {
  if (cosets.empty()) throw DimensionError("homogeneous_kernel: no cosets");
  for (std::size_t i = 0; i < cosets.size(); ++i)
    for (std::size_t j = i + 1; j < cosets.size(); ++j)
      if (h.in_subgroup(cosets[i].inverse() * cosets[j]))
        throw KernelError("homogeneous_kernel: coset list contains duplicates (" + std::to_string(i) + " and " +
                          std::to_string(j) + ")");
  const std::vector<Index> inv = coset_involution(h, cosets);
  const Matrix q = identity(h.hb.rows()) - h.projection();
  for (std::size_t i = 0; i < cosets.size(); ++i) {
    const Matrix w = cosets[static_cast<std::size_t>(inv[i])].inverse() * group_star(cosets[i]);
    const double leak = max_abs(q * h.rep(w) * h.hb);
    if (leak > tol)
      throw PreconditionError("homogeneous_kernel: subgroup test inconsistent, pi(w) moves H_B at coset " + std::to_string(i),
                              leak);
  }
  std::vector<Matrix> reps, inverse_reps;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < cosets.size(); ++i) {
    reps.push_back(h.rep(cosets[i]));
    inverse_reps.push_back(h.rep(cosets[i].inverse()));
    names.push_back("u" + std::to_string(i) + "G");
  }
  return homogeneous_blocks(reps, inverse_reps, inv, h.hb, std::move(names));
}

// R([(u,f)]) = pi_A(u) f.
inline std::vector<Matrix> homogeneous_transfer(const SampledHomogeneous& h, const std::vector<Matrix>& cosets) {
  std::vector<Matrix> r;
  for (const auto& u : cosets) r.push_back(h.rep(u) * h.hb);
  return r;
}

// Left translation g u_i = u_j w, acting on fibers by pi_B(w).
inline std::vector<GroupSample> homogeneous_action(const SampledHomogeneous& h, const std::vector<Matrix>& cosets,
                                                   const std::vector<Matrix>& elements) {
  std::vector<GroupSample> out;
  for (std::size_t e = 0; e < elements.size(); ++e) {
    GroupSample g;
    g.label = "g" + std::to_string(e);
    for (std::size_t i = 0; i < cosets.size(); ++i) {
      const Matrix v = elements[e] * cosets[i];
      const Index j = coset_index(h, cosets, v);
      if (j < 0) throw PreconditionError("homogeneous_action: coset list not closed under " + g.label, 1.0);
      g.perm.push_back(j);
      g.mu.push_back(h.restricted(cosets[static_cast<std::size_t>(j)].inverse() * v));
    }
    out.push_back(std::move(g));
  }
  return out;
}

// nu(u^{-1},.) and mu(u^{-1},t) = mu(u, nu(u^{-1},t))^{-1}.
inline GroupSample invert_sample(const GroupSample& g) {
  GroupSample r;
  r.label = g.label + "^-1";
  r.perm = inverse_perm(g.perm);
  for (std::size_t t = 0; t < r.perm.size(); ++t) {
    const Matrix& m = g.mu[static_cast<std::size_t>(r.perm[t])];
    r.mu.push_back(m.size() == 0 ? m : Matrix(m.fullPivLu().inverse()));
  }
  return r;
}

inline BundleMorphism action_morphism(const Bundle& b, const GroupSample& g) {
  return BundleMorphism(b, b, g.perm, g.mu, false);
}

struct ComplexifiedResult {
  Report report;
  double residual = 0.0;
  bool pass = false;
};

// K = Delta~^* Q^C over the orbit of s0, Q^C realized in H^K with p = projection onto zeta(s0).
inline ComplexifiedResult complexified_universality(const Kernel& k, const std::vector<GroupSample>& action, Index s0,
                                                    double tol = kDefaultTol, double tol_residual = 1e-8) {
  ComplexifiedResult out;
  Report& rep = out.report;
  rep.id = "complexified_universality";
  const Bundle& b = k.bundle();
  const Index n = b.size();
  if (s0 < 0 || s0 >= n) throw DimensionError("complexified_universality: s0 outside the base");
  rep.append(equivariance_check(k, action, tol));
  if (!rep.pass()) {
    rep.checks.back().details = "equivariance gate failed before verification: " + rep.checks.back().details;
    return out;
  }
  rep.add("s0-fixed", b.star(s0) == s0, b.star(s0) == s0 ? 0.0 : 1.0, "s0^{-*} = s0");
  std::vector<Index> carrier(static_cast<std::size_t>(n), -1);
  for (std::size_t e = 0; e < action.size(); ++e) {
    const Index s = action[e].perm[static_cast<std::size_t>(s0)];
    if (carrier[static_cast<std::size_t>(s)] < 0) carrier[static_cast<std::size_t>(s)] = static_cast<Index>(e);
  }
  std::string missing;
  for (Index s = 0; s < n; ++s)
    if (carrier[static_cast<std::size_t>(s)] < 0) missing += (missing.empty() ? "" : ",") + b.name(s);
  rep.add("transitive", missing.empty(), missing.empty() ? 0.0 : 1.0,
          missing.empty() ? "" : "no sampled u moves s0 to " + missing);
  if (!rep.pass()) return out;

  const UniversalMorphism um = build_universal_morphism(k, tol);
  const Rkhs& r = um.rkhs;
  std::vector<Matrix> ops(action.size()), inv_ops(action.size());
  std::vector<GroupSample> inverses;
  double fit = 0.0;
  for (std::size_t e = 0; e < action.size(); ++e) {
    inverses.push_back(invert_sample(action[e]));
    const InducedOperator f = induced_operator(action_morphism(b, action[e]), r, r, tol);
    const InducedOperator g = induced_operator(action_morphism(b, inverses.back()), r, r, tol);
    ops[e] = f.map.matrix;
    inv_ops[e] = g.map.matrix;
    fit = std::max({fit, f.fit_residual, g.fit_residual});
  }
  rep.add("induced-action", fit <= tol, fit, "u . K_xi = K_{mu(u,xi)} on generators");

  double orbit = 0.0;
  std::string where;
  for (std::size_t e = 0; e < action.size(); ++e)
    for (Index s = 0; s < n; ++s) {
      const Subspace moved = orthonormal_basis(ops[e] * um.zeta[static_cast<std::size_t>(s)].basis(), tol);
      const Subspace& target = um.zeta[static_cast<std::size_t>(action[e].perm[static_cast<std::size_t>(s)])];
      const double d = moved.dim() == target.dim() ? subspace_distance(moved, target) : 1.0;
      if (d > orbit) {
        orbit = d;
        where = action[e].label + " at '" + b.name(s) + "'";
      }
    }
  rep.add("orbit-covariance", orbit <= tol, orbit, orbit <= tol ? "u.zeta(s) = zeta(nu(u,s))" : "largest gap for " + where);

  const Matrix& z0 = um.zeta[static_cast<std::size_t>(s0)].basis();
  const Index d0 = z0.cols();
  const Matrix p0 = z0 * z0.adjoint();
  std::vector<Matrix> u_s, u_s_inv;
  for (Index s = 0; s < n; ++s) {
    const auto e = static_cast<std::size_t>(carrier[static_cast<std::size_t>(s)]);
    u_s.push_back(ops[e]);
    u_s_inv.push_back(inv_ops[e]);
  }
  double coset = 0.0;
  for (Index s = 0; s < n; ++s) {
    const auto ss = static_cast<std::size_t>(s);
    const auto st = static_cast<std::size_t>(b.star(s));
    // U_{s*}^{-1} U_s^{-*} must stabilize p0
    const Matrix w = u_s_inv[st] * u_s_inv[ss].adjoint();
    coset = std::max(coset, max_abs(w * p0 - p0 * w));
  }
  rep.add("target-involution", coset <= tol, coset, "U_{s*} G(p) = U_s^{-*} G(p)");

  std::vector<Matrix> pairings, blocks, fibers;
  std::vector<Index> dims(static_cast<std::size_t>(n), d0), base;
  for (Index s = 0; s < n; ++s) {
    const auto ss = static_cast<std::size_t>(s);
    const Matrix rs = u_s[ss] * z0;
    pairings.push_back((u_s[static_cast<std::size_t>(b.star(s))] * z0).adjoint() * rs);
    const Matrix left = z0.adjoint() * u_s_inv[ss];
    for (Index t = 0; t < n; ++t) blocks.push_back(left * u_s[static_cast<std::size_t>(t)] * z0);
    const GroupSample& back = inverses[static_cast<std::size_t>(carrier[ss])];
    fibers.push_back(z0.adjoint() * r.coords(s0) * back.mu[ss]);
    base.push_back(s);
  }
  const Kernel qc(Bundle(b.names(), b.involution(), dims, std::move(pairings)), std::move(blocks));
  const BundleMorphism delta(b, qc.bundle(), base, fibers, false);
  out.residual = kernel_residual(pullback(delta, qc, tol), k);
  rep.add("pullback", out.residual <= tol_residual, out.residual, "K = Delta~^* Q^C");
  out.pass = rep.pass();
  return out;
}

// K^pi from homogeneous data, acted on by the cosets themselves and the extra elements.
inline ComplexifiedResult complexified_universality(const SampledHomogeneous& h, const std::vector<Matrix>& cosets,
                                                    const std::vector<Matrix>& extra = {}, double tol = kDefaultTol,
                                                    double tol_residual = 1e-8) {
  const Kernel k = homogeneous_kernel(h, cosets, tol);
  std::vector<Matrix> elements = cosets;
  elements.insert(elements.end(), extra.begin(), extra.end());
  const Index s0 = coset_index(h, cosets, identity(cosets.front().rows()));
  if (s0 < 0) throw PreconditionError("complexified_universality: identity coset not sampled", 1.0);
  return complexified_universality(k, homogeneous_action(h, cosets, elements), s0, tol, tol_residual);
}

// theta([(u,f)]) = R_{nu(u,z0)}^{-1} pi(u) f compared against the transfer kernel.
inline Report orbit_compare(const Bundle& b, const std::vector<GroupSample>& action, const std::vector<Matrix>& pi,
                            const std::vector<Matrix>& r, Index z0, double tol = kDefaultTol) {
  Report rep;
  rep.id = "orbit_compare";
  validate_action(b, action);
  if (pi.size() != action.size()) throw DimensionError("orbit_compare: one pi(u) per sample required");
  if (static_cast<Index>(r.size()) != b.size()) throw DimensionError("orbit_compare: one R_z per point required");
  rep.add("z0-fixed", b.star(z0) == z0, b.star(z0) == z0 ? 0.0 : 1.0);
  double iso = 0.0, inter = 0.0;
  for (Index z = 0; z < b.size(); ++z)
    iso = std::max(iso, rel_residual(Matrix(r[static_cast<std::size_t>(b.star(z))].adjoint() * r[static_cast<std::size_t>(z)]),
                                     b.pairing(z)));
  for (std::size_t e = 0; e < action.size(); ++e)
    for (Index z = 0; z < b.size(); ++z) {
      const auto zz = static_cast<std::size_t>(z);
      const Matrix lhs = r[static_cast<std::size_t>(action[e].perm[zz])] * action[e].mu[zz];
      inter = std::max(inter, max_abs(lhs - pi[e] * r[zz]));
    }
  rep.add("transfer-isometric", iso <= tol, iso, "(xi|eta) = (R xi|R eta)");
  rep.add("transfer-intertwines", inter <= tol, inter, "R mu(u,.) = pi(u) R");
  if (!rep.pass()) return rep;

  std::vector<Index> orbit, carrier;
  for (std::size_t e = 0; e < action.size(); ++e) {
    const Index z = action[e].perm[static_cast<std::size_t>(z0)];
    if (std::find(orbit.begin(), orbit.end(), z) == orbit.end()) {
      orbit.push_back(z);
      carrier.push_back(static_cast<Index>(e));
    }
  }
  if (std::find(orbit.begin(), orbit.end(), z0) == orbit.end()) {
    orbit.insert(orbit.begin(), z0);
    carrier.insert(carrier.begin(), -1);
  }
  const Kernel kr = restrict_kernel(transfer_kernel(r, b, tol), orbit);
  const Matrix b0 = orthonormal_basis(r[static_cast<std::size_t>(z0)], tol).basis();
  const Index h = b0.rows();
  std::vector<Matrix> reps, inv_reps, theta;
  double fit = 0.0;
  std::string bad;
  for (std::size_t i = 0; i < orbit.size(); ++i) {
    const Matrix u = carrier[i] < 0 ? identity(h) : pi[static_cast<std::size_t>(carrier[i])];
    reps.push_back(u);
    inv_reps.push_back(u.inverse());
    const Matrix& rz = r[static_cast<std::size_t>(orbit[i])];
    const Matrix img = u * b0;
    Eigen::JacobiSVD<Matrix> svd(rz);
    if (rz.cols() > 0 && !(svd.singularValues()(rz.cols() - 1) > tol * svd.singularValues()(0))) {
      bad = b.name(orbit[i]);
      break;
    }
    const Matrix t = rz.completeOrthogonalDecomposition().solve(img);
    theta.push_back(t);
    fit = std::max(fit, max_abs(rz * t - img));
  }
  if (!bad.empty()) {
    rep.add("R-injective", false, 1.0, "R is not injective at '" + bad + "', cannot invert");
    return rep;
  }
  rep.add("R-theta", fit <= tol, fit, "R o theta = R0");
  const Kernel kpi = homogeneous_blocks(reps, inv_reps, kr.bundle().involution(), b0, kr.bundle().names());
  std::vector<Index> base;
  for (std::size_t i = 0; i < orbit.size(); ++i) base.push_back(static_cast<Index>(i));
  const BundleMorphism th(kpi.bundle(), kr.bundle(), base, theta, false);
  const IsometryReport ir = is_isometry(th, tol);
  rep.add("theta-isometric", ir.isometry, ir.residual);
  const double res = kernel_residual(pullback(th, kr, tol), kpi);
  rep.add("pullback", res <= tol, res, "K^pi = theta^* K^R");
  return rep;
}

enum class RegularRep { left, right, conjugation };

inline const char* rep_name(RegularRep k) {
  switch (k) {
    case RegularRep::left: return "lambda";
    case RegularRep::right: return "rho";
    default: return "pi";
  }
}

// GNS spaces of phi on A and phi|_B with the conjugations [f] -> [f^*].
struct GnsPair {
  StinespringData h_a;
  StinespringData h_b;
  Matrix j;    // H_B -> H_A
  Matrix c_a;  // antilinear: C_A x = c_a conj(x)
  Matrix c_b;

  Matrix rep(RegularRep kind, const Matrix& u) const {
    const MatrixAlgebra& a = h_a.algebra;
    const Matrix l = h_a.pi(u);
    if (kind == RegularRep::left) return l;
    const Matrix r = h_a.quotient.embedding * a.multiplication(u.inverse(), false) * h_a.quotient.lift;
    return kind == RegularRep::right ? r : Matrix(l * r);
  }
};

inline Matrix gns_conjugation(const StinespringData& s) {
  if (s.h0_dim != 1) throw DimensionError("gns_conjugation: state required");
  return s.quotient.embedding * s.algebra.adjoint_permutation() * s.quotient.lift.conjugate();
}

inline SampledHomogeneous regular_homogeneous(const GnsPair& g, const MatrixAlgebra& b, RegularRep kind,
                                              double tol = kDefaultTol) {
  SampledHomogeneous h;
  h.rep = [g, kind](const Matrix& u) { return g.rep(kind, u); };
  h.in_subgroup = algebra_subgroup(b, tol);
  h.hb = g.j;
  return h;
}

struct TracialSuite {
  Report report;
  std::optional<GnsPair> gns;
  std::vector<Matrix> cosets;
  std::optional<SemilinearMap> tau_bar;
};

inline Kernel regular_kernel(const GnsPair& g, const MatrixAlgebra& b, RegularRep kind, const std::vector<Matrix>& cosets,
                             double tol = kDefaultTol) {
  return homogeneous_kernel(regular_homogeneous(g, b, kind, tol), cosets, tol);
}

// [(u,f)] -> [(u^{-*}, C_B f)] from the src-bundle to the tgt-bundle, in coset coordinates.
inline BundleMorphism theta_map(const GnsPair& g, const MatrixAlgebra& b, RegularRep tgt, const Kernel& k_src,
                                const Kernel& k_tgt, const std::vector<Matrix>& cosets, double tol = kDefaultTol) {
  const SampledHomogeneous h = regular_homogeneous(g, b, tgt, tol);
  const Bundle& bs = k_src.bundle();
  std::vector<Matrix> fibers;
  for (Index i = 0; i < bs.size(); ++i) {
    const Matrix& ui = cosets[static_cast<std::size_t>(i)];
    const Matrix w = cosets[static_cast<std::size_t>(bs.star(i))].inverse() * group_star(ui);
    fibers.push_back(h.restricted(w) * g.c_b);
  }
  return BundleMorphism(bs, k_tgt.bundle(), bs.involution(), std::move(fibers), true);
}

inline TracialSuite tracial_gns_suite(const MatrixAlgebra& a, const MatrixAlgebra& b, const CpMap& e, const State& phi,
                                      const std::vector<Matrix>& cosets, std::uint64_t seed = 1,
                                      double tol = kDefaultTol, double tol_residual = 1e-8) {
  TracialSuite out;
  Report& rep = out.report;
  rep.id = "tracial_gns";
  if (phi.algebra.blocks() != a.blocks()) throw DimensionError("tracial_gns_suite: phi must be a state of A");
  double trace = 0.0;
  for (Index k = 0; k < a.dim(); ++k)
    for (Index l = 0; l < a.dim(); ++l)
      trace = std::max(trace, std::abs(phi(a.basis(k) * a.basis(l)) - phi(a.basis(l) * a.basis(k))));
  rep.add("pre.tracial", trace <= tol, trace, trace <= tol ? "" : "phi is not tracial: rho is ill-defined");
  if (!rep.pass()) return out;

  const CommutingSquares sq = commuting_squares(e, b, phi.as_cp_map(), seed, tol);
  rep.append(sq.report, "gns");
  if (!rep.pass()) return out;
  GnsPair g{sq.h_a, sq.h_b, sq.j, gns_conjugation(sq.h_a), gns_conjugation(sq.h_b)};
  const double conj = max_abs(g.c_b.conjugate() * g.c_b - identity(g.h_b.dim()));
  rep.add("C_B-involutive", conj <= tol, conj);

  const SampledHomogeneous hl = regular_homogeneous(g, b, RegularRep::left, tol);
  out.cosets = close_under_involution(hl, cosets);
  const Kernel kl = regular_kernel(g, b, RegularRep::left, out.cosets, tol);
  const Kernel kr = regular_kernel(g, b, RegularRep::right, out.cosets, tol);
  const Kernel kp = regular_kernel(g, b, RegularRep::conjugation, out.cosets, tol);
  for (const auto* k : {&kl, &kr, &kp}) {
    const PositivityReport p = check_positive(*k, tol);
    rep.add(std::string("positive.") + (k == &kl ? "lambda" : k == &kr ? "rho" : "pi"), p.positive,
            std::max(0.0, -p.min_eigenvalue));
  }
  const BundleMorphism t1 = theta_map(g, b, RegularRep::right, kl, kr, out.cosets, tol);
  const BundleMorphism t2 = theta_map(g, b, RegularRep::left, kr, kl, out.cosets, tol);
  const BundleMorphism t3 = theta_map(g, b, RegularRep::conjugation, kp, kp, out.cosets, tol);
  const double r1 = kernel_residual(pullback(t1, kr, tol), kl);
  const double r2 = kernel_residual(pullback(t2, kl, tol), kr);
  const double r3 = kernel_residual(pullback(t3, kp, tol), kp);
  rep.add("theta1", r1 <= tol_residual, r1, "Theta1^* K_rho = K_lambda");
  rep.add("theta2", r2 <= tol_residual, r2, "Theta2^* K_lambda = K_rho");
  rep.add("theta3", r3 <= tol_residual, r3, "Theta3^* K_pi = K_pi");
  for (const auto* t : {&t1, &t2, &t3}) {
    const IsometryReport ir = is_isometry(*t, tol);
    rep.add(std::string("isometric.theta") + (t == &t1 ? "1" : t == &t2 ? "2" : "3"), ir.isometry, ir.residual);
  }
  ConjugationResult c = conjugation(kp, t3, tol);
  rep.append(c.report, "tau");
  out.tau_bar = c.tau_bar;
  out.gns = std::move(g);
  return out;
}

}  // namespace rkcat
