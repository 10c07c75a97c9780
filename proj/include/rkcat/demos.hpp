#pragma once

// Built-in demo scenarios. `rkcat demo <name> --emit <file>` writes them as fixtures.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "rkcat/scenario.hpp"

namespace rkcat {

inline std::vector<std::string> demo_names() {
  return {"szego", "gaussian", "gns-m2", "kraus", "tautological", "clifford-m2", "permutation-m3", "pullback"};
}

namespace demo_detail {

inline Json scalar_kernel(const std::string& id, const std::vector<std::string>& names,
                          const std::function<Complex(Index, Index)>& k) {
  const auto n = static_cast<Index>(names.size());
  Kernel kern(Bundle::hermitian(std::vector<Index>(names.size(), 1), names), [&] {
    std::vector<Matrix> blocks;
    for (Index s = 0; s < n; ++s)
      for (Index t = 0; t < n; ++t) blocks.push_back(Matrix::Constant(1, 1, k(s, t)));
    return blocks;
  }());
  Json j;
  j["kind"] = "kernel";
  j["id"] = id;
  j["suites"] = {"validate", "positivity", "exchange", "rkhs", "universality", "rank"};
  j["bundle"] = bundle_json(kern.bundle());
  j["blocks"] = kernel_blocks_json(kern);
  return j;
}

inline Matrix hadamard() {
  Matrix h(2, 2);
  h << 1.0, 1.0, 1.0, -1.0;
  return h / std::sqrt(2.0);
}

inline Matrix phase() {
  Matrix s(2, 2);
  s << 1.0, 0.0, 0.0, Complex(0.0, 1.0);
  return s;
}

inline Json algebra_scenario(const std::string& kind, const std::string& id, Index n, const std::vector<Matrix>& cosets,
                             const std::vector<Matrix>& generators) {
  Json j;
  j["kind"] = kind;
  j["id"] = id;
  j["algebra"] = algebra_json(MatrixAlgebra::full(n));
  j["subalgebra"] = algebra_json(MatrixAlgebra::diagonal(n));
  j["state"] = matrix_json(identity(n) / static_cast<double>(n));
  j["expectation"] = "block-diagonal";
  if (kind == "homogeneous") j["representation"] = "lambda";
  j["cosets"] = matrix_list_json(cosets);
  if (!generators.empty()) j["generators"] = matrix_list_json(generators);
  return j;
}

inline SampledHomogeneous left_regular(Index n) {
  const MatrixAlgebra a = MatrixAlgebra::full(n), b = MatrixAlgebra::diagonal(n);
  const State phi{a, identity(n) / static_cast<double>(n)};
  const CpMap e = CpMap::from_function(a, n, [n](const Matrix& x) {
    Matrix d = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) d(i, i) = x(i, i);
    return d;
  });
  const CommutingSquares sq = commuting_squares(e, b, phi.as_cp_map());
  const GnsPair g{sq.h_a, sq.h_b, sq.j, gns_conjugation(sq.h_a), gns_conjugation(sq.h_b)};
  return regular_homogeneous(g, b, RegularRep::left);
}

}  // namespace demo_detail

inline Json demo_scenario(const std::string& name) {
  using namespace demo_detail;
  if (name == "szego") {
    const std::vector<Complex> z{{0.0, 0.0}, {0.5, 0.0}, {0.3, 0.4}};
    return scalar_kernel("szego", {"z0", "z1", "z2"},
                         [&](Index s, Index t) { return 1.0 / (1.0 - z[static_cast<std::size_t>(s)] * std::conj(z[static_cast<std::size_t>(t)])); });
  }
  if (name == "gaussian") {
    const std::vector<double> x{0.0, 0.5, 1.3, 2.0};
    return scalar_kernel("gaussian", {"x0", "x1", "x2", "x3"}, [&](Index s, Index t) {
      const double d = x[static_cast<std::size_t>(s)] - x[static_cast<std::size_t>(t)];
      return Complex(std::exp(-d * d), 0.0);
    });
  }
  if (name == "gns-m2") {
    Matrix u1(2, 2), u2(2, 2);
    u1 << 1.0, 1.0, 0.0, 1.0;
    u2 << 2.0, 0.0, 1.0, 1.0;
    Json j = algebra_scenario("gns", "gns-m2", 2, {identity(2), hadamard(), u1, u2}, {});
    j["suites"] = {"gns", "tracial"};
    return j;
  }
  if (name == "kraus") {
    Rng rng(2026);
    std::vector<Matrix> w;
    Matrix s = Matrix::Zero(2, 2);
    for (int i = 0; i < 3; ++i) {
      w.push_back(random_matrix(2, 2, rng));
      s += w.back().adjoint() * w.back();
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    const Matrix inv_sqrt = es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                            es.eigenvectors().adjoint();
    for (auto& x : w) x = x * inv_sqrt;
    Json j;
    j["kind"] = "cpmap";
    j["id"] = "kraus";
    j["suites"] = {"cp", "stinespring", "compression"};
    j["algebra"] = algebra_json(MatrixAlgebra::full(2));
    j["kraus"] = matrix_list_json(w);
    return j;
  }
  if (name == "tautological") {
    Json j;
    j["kind"] = "grassmann";
    j["id"] = "tautological";
    j["suites"] = {"grassmann", "positivity", "universality"};
    j["ambient_dim"] = 3;
    Json pts = Json::array();
    auto line = [](double a, double b, double c) {
      Matrix v(3, 1);
      v << a, b, c;
      return v;
    };
    const std::vector<std::pair<std::string, Matrix>> lines{
        {"l0", line(1, 1, 1)}, {"l1", line(1, -1, -1)}, {"l2", line(-1, 1, -1)}, {"l3", line(-1, -1, 1)}, {"e3", line(0, 0, 1)}};
    for (const auto& [n, v] : lines) pts.push_back(Json{{"name", n}, {"span", matrix_json(v)}});
    Matrix plane = Matrix::Zero(3, 2);
    plane(0, 0) = 1.0;
    plane(1, 1) = 1.0;
    pts.push_back(Json{{"name", "p12"}, {"span", matrix_json(plane)}});
    j["points"] = pts;
    Matrix swap = Matrix::Zero(3, 3);
    swap(0, 1) = swap(1, 0) = swap(2, 2) = 1.0;
    j["C"] = Json{{"matrix", matrix_json(swap)}, {"antilinear", false}};
    return j;
  }
  if (name == "clifford-m2") {
    const SampledHomogeneous h = left_regular(2);
    const std::vector<Matrix> gens{hadamard(), phase()};
    Json j = algebra_scenario("homogeneous", "clifford-m2", 2, enumerate_cosets(h, gens), gens);
    j["suites"] = {"homogeneous", "complexified"};
    return j;
  }
  if (name == "permutation-m3") {
    const SampledHomogeneous h = left_regular(3);
    Matrix cyc = Matrix::Zero(3, 3), swp = Matrix::Zero(3, 3);
    cyc(1, 0) = cyc(2, 1) = cyc(0, 2) = 1.0;
    swp(1, 0) = swp(0, 1) = swp(2, 2) = 1.0;
    const std::vector<Matrix> gens{cyc, swp};
    Json j = algebra_scenario("homogeneous", "permutation-m3", 3, enumerate_cosets(h, gens), gens);
    j["suites"] = {"homogeneous", "complexified"};
    return j;
  }
  if (name == "pullback") {
    Rng rng(11);
    Kernel k = random_positive_kernel({4, 2, false}, rng);
    while (k.bundle().is_hermitian_involution()) k = random_positive_kernel({4, 2, false}, rng);
    const BundleMorphism m = random_morphism_into(k.bundle(), 3, 2, false, rng);
    Json j;
    j["kind"] = "kernel";
    j["id"] = "pullback";
    j["suites"] = {"validate", "positivity", "exchange", "rkhs", "pullback", "rank"};
    j["bundle"] = bundle_json(k.bundle());
    j["blocks"] = kernel_blocks_json(k);
    Json mj;
    Bundle src = m.source();
    std::vector<std::string> names;
    for (Index z = 0; z < src.size(); ++z) names.push_back("a" + std::to_string(z));
    src = Bundle(names, src.involution(), src.fiber_dims(), src.pairings());
    mj["source"] = bundle_json(src);
    Json bm = Json::object(), fm = Json::object();
    for (Index z = 0; z < src.size(); ++z) {
      bm[src.name(z)] = k.bundle().name(m.zeta(z));
      fm[src.name(z)] = matrix_json(m.delta(z));
    }
    mj["base_map"] = bm;
    mj["fibers"] = fm;
    mj["antilinear"] = false;
    j["morphism"] = mj;
    return j;
  }
  throw ScenarioError("unknown demo '" + name + "'");
}

}  // namespace rkcat
