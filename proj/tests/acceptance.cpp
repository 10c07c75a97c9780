// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "rkcat/demos.hpp"
#include "rkcat/rkcat.hpp"

using namespace rkcat;

namespace {

constexpr double kUniversalityTol = 1e-8;
constexpr double kUniversalitySeconds = 10.0;
constexpr double kComplexifiedTol = 1e-8;
constexpr double kDilationTol = 1e-8;
constexpr double kIsometryTol = 1e-10;
constexpr double kChoiTol = 1e-8;
constexpr double kFactorizationTol = 1e-8;
constexpr double kThetaTol = 1e-8;
constexpr double kTauSquareTol = 1e-10;
constexpr double kExchangeTol = 1e-9;
constexpr double kFunctorTol = 1e-10;
constexpr double kPullbackEigTol = 1e-9;
constexpr double kTransferDiagTol = 1e-10;
constexpr double kStructureTol = 1e-9;
constexpr double kCliSeconds = 60.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::string summary;
};

// Every positive kernel built along the way, for the exchange law.
std::vector<Kernel> g_kernels;

Kernel keep(Kernel k) {
  g_kernels.push_back(k);
  return k;
}

std::vector<CpMap> g_cp_maps;

const std::vector<CpMap>& cp_maps() {
  if (g_cp_maps.empty()) {
    Rng rng(303);
    for (int i = 0; i < 50; ++i) g_cp_maps.push_back(random_unital_cp(random_index(2, 3, rng), random_index(1, 3, rng), rng));
  }
  return g_cp_maps;
}

MatrixAlgebra diag(Index n) { return MatrixAlgebra::diagonal(n); }

CpMap diagonal_expectation(Index n) {
  return CpMap::from_function(MatrixAlgebra::full(n), n, [n](const Matrix& x) {
    Matrix d = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) d(i, i) = x(i, i);
    return d;
  });
}

GnsPair trace_gns(Index n) {
  const MatrixAlgebra a = MatrixAlgebra::full(n);
  const CommutingSquares sq = commuting_squares(diagonal_expectation(n), diag(n), State{a, identity(n) / double(n)}.as_cp_map());
  return {sq.h_a, sq.h_b, sq.j, gns_conjugation(sq.h_a), gns_conjugation(sq.h_b)};
}

std::vector<Matrix> clifford_gens() { return {demo_detail::hadamard(), demo_detail::phase()}; }

std::vector<Matrix> permutation_gens() {
  Matrix cyc = Matrix::Zero(3, 3), swp = Matrix::Zero(3, 3);
  cyc(1, 0) = cyc(2, 1) = cyc(0, 2) = 1.0;
  swp(1, 0) = swp(0, 1) = swp(2, 2) = 1.0;
  return {cyc, swp};
}

struct GroupCase {
  std::string name;
  Index n;
  std::vector<Matrix> gens;
};

const std::vector<GroupCase>& group_cases() {
  static const std::vector<GroupCase> cases{{"M2/Clifford", 2, clifford_gens()}, {"M3/permutations", 3, permutation_gens()}};
  return cases;
}

Outcome criterion1() {
  Rng rng(101);
  double worst = 0.0;
  const auto t0 = Clock::now();
  for (int i = 0; i < 100; ++i) {
    const Kernel k = keep(random_positive_kernel({5, 3, true}, rng));
    worst = std::max(worst, verify_universal_hermitian(k, kDefaultTol, kUniversalityTol).residual);
  }
  const double dt = seconds_since(t0);
  return {worst <= kUniversalityTol && dt < kUniversalitySeconds,
          "100 Hermitian kernels, max residual " + sci(worst) + ", " + sci(dt) + " s"};
}

Outcome criterion2() {
  Outcome o;
  for (const auto& gc : group_cases()) {
    const SampledHomogeneous h = regular_homogeneous(trace_gns(gc.n), diag(gc.n), RegularRep::left);
    const std::vector<Matrix> cosets = enumerate_cosets(h, gc.gens);
    g_kernels.push_back(homogeneous_kernel(h, cosets));
    const ComplexifiedResult c = complexified_universality(h, cosets, gc.gens, kDefaultTol, kComplexifiedTol);
    const bool ok = cosets.size() >= 4 && c.report.pass() && c.residual <= kComplexifiedTol;
    o.pass = o.pass && ok;
    if (!o.summary.empty()) o.summary += "; ";
    o.summary += gc.name + " " + std::to_string(cosets.size()) + " cosets residual " + sci(c.residual);
  }
  return o;
}

// Hand-built GNS of tr/2 on M2: H = M2, (x|y) = tr(y^dagger x)/2, pi(x) = left multiplication.
double hand_built_gns_gap() {
  const MatrixAlgebra m2 = MatrixAlgebra::full(2);
  const StinespringData s = gns(State{m2, identity(2) / 2.0});
  if (s.dim() != 4) return 1.0;
  Rng rng(7);
  const Matrix x = random_matrix(2, 2, rng);
  double gap = 0.0;
  for (Index k = 0; k < m2.dim(); ++k)
    for (Index l = 0; l < m2.dim(); ++l) {
      const Matrix a = m2.basis(k), b = m2.basis(l);
      const Vector fa = s.class_of(a, Vector::Ones(1)), fb = s.class_of(b, Vector::Ones(1));
      gap = std::max(gap, std::abs((fa.adjoint() * fb)(0, 0) - (a.adjoint() * b).trace() / 2.0));
      gap = std::max(gap, std::abs((fa.adjoint() * s.pi(x) * fb)(0, 0) - (a.adjoint() * x * b).trace() / 2.0));
    }
  return gap;
}

Outcome criterion3() {
  double dil = 0.0, iso = 0.0, choi = 0.0;
  for (const CpMap& phi : cp_maps()) {
    const Report r = verify_stinespring(phi, stinespring(phi));
    dil = std::max(dil, r.find("dilation")->residual);
    iso = std::max(iso, r.find("isometry")->residual);
    choi = std::max(choi, r.find("choi")->residual);
  }
  const double gns_gap = hand_built_gns_gap();
  return {dil <= kDilationTol && iso <= kIsometryTol && choi <= kChoiTol && gns_gap <= kDilationTol,
          "50 maps: dilation " + sci(dil) + ", V^dagger V " + sci(iso) + ", Choi " + sci(choi) + "; GNS tr/2 dim 4, gap " +
              sci(gns_gap)};
}

Outcome criterion4() {
  double fac = 0.0, m = 0.0, eq = 0.0;
  bool morphism = true;
  for (const CpMap& phi : cp_maps()) {
    const Report r = compression_factorization(phi, kDefaultTol);
    fac = std::max(fac, r.find("factorization")->residual);
    m = std::max(m, r.find("least-M")->residual);
    eq = std::max(eq, r.find("equality")->residual);
    morphism = morphism && r.find("morphism")->pass;
  }
  return {morphism && fac <= kFactorizationTol && m <= kFactorizationTol && eq <= kFactorizationTol,
          "50 maps: factorization " + sci(fac) + ", |least M - 1| " + sci(m) + ", equality " + sci(eq)};
}

Outcome criterion5() {
  const MatrixAlgebra a = MatrixAlgebra::full(2);
  const GnsPair g = trace_gns(2);
  const SampledHomogeneous hl = regular_homogeneous(g, diag(2), RegularRep::left);
  const TracialSuite t =
      tracial_gns_suite(a, diag(2), diagonal_expectation(2), State{a, identity(2) / 2.0}, enumerate_cosets(hl, clifford_gens()),
                        1, kDefaultTol, kThetaTol);
  if (!t.report.pass() || !t.tau_bar) return {false, "suite failed"};
  for (RegularRep kind : {RegularRep::left, RegularRep::right, RegularRep::conjugation})
    g_kernels.push_back(regular_kernel(g, diag(2), kind, t.cosets));
  double theta = 0.0;
  for (const char* n : {"theta1", "theta2", "theta3"}) theta = std::max(theta, t.report.find(n)->residual);
  const Matrix& tb = t.tau_bar->matrix;
  const double sq = max_abs(tb * tb.conjugate() - identity(tb.rows()));
  return {t.cosets.size() >= 4 && theta <= kThetaTol && sq <= kTauSquareTol,
          std::to_string(t.cosets.size()) + " cosets, theta residual " + sci(theta) + ", tau_bar^2 - id " + sci(sq)};
}

Outcome criterion6() {
  double ex = 0.0;
  for (const Kernel& k : g_kernels) ex = std::max(ex, exchange_residual(k));

  Rng rng(606);
  double funct = 0.0, eig = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Kernel k3 = random_positive_kernel({4, 3, i % 2 == 0}, rng);
    const BundleMorphism t2 = random_morphism_into(k3.bundle(), 4, 3, i % 3 == 0, rng);
    const Kernel k2 = pullback(t2, k3);
    const BundleMorphism t1 = random_morphism_into(k2.bundle(), 4, 3, i % 5 == 0, rng);
    const Kernel k1 = pullback(t1, k2);
    eig = std::min({eig, check_positive(k2).min_eigenvalue, check_positive(k1).min_eigenvalue});
    const Rkhs r1 = build_rkhs(k1), r2 = build_rkhs(k2), r3 = build_rkhs(k3);
    const SemilinearMap prod = compose(induced_operator(t2, r2, r3).map, induced_operator(t1, r1, r2).map);
    const SemilinearMap whole = induced_operator(compose(t2, t1), r1, r3).map;
    funct = std::max(funct, prod.antilinear == whole.antilinear ? rel_residual(prod.matrix, whole.matrix) : 1.0);
  }
  return {ex <= kExchangeTol && funct <= kFunctorTol && eig >= -kPullbackEigTol,
          "exchange " + sci(ex) + " over " + std::to_string(g_kernels.size()) + " kernels, functoriality " + sci(funct) +
              " over 50 pairs, pull-back min eigenvalue " + sci(eig)};
}

Outcome criterion7() {
  Rng rng(707);
  double diag_gap = 0.0, qh = 0.0, transfer = 0.0, orbits = 0.0;
  for (int i = 0; i < 20; ++i) {
    // like-Hermitian transfer data: R random injective, pairings pulled back through R
    const Kernel k = random_positive_kernel({5, 3, i % 2 == 0}, rng);
    const Bundle& b = k.bundle();
    std::vector<Matrix> r;
    for (Index z = 0; z < b.size(); ++z) r.push_back(random_matrix(8, b.fiber_dim(z), rng));
    std::vector<Matrix> g;
    for (Index z = 0; z < b.size(); ++z) g.push_back(r[static_cast<std::size_t>(b.star(z))].adjoint() * r[static_cast<std::size_t>(z)]);
    const Kernel kr = transfer_kernel(r, Bundle(b.names(), b.involution(), b.fiber_dims(), g));
    for (Index s = 0; s < kr.size(); ++s) diag_gap = std::max(diag_gap, max_abs(kr.block(s, s) - identity(b.fiber_dim(s))));
    std::vector<Subspace> pts;
    for (Index s = 0; s < 3; ++s) pts.push_back(orthonormal_basis(random_matrix(5, random_index(1, 3, rng), rng)));
    const Kernel q = universal_kernel(pts);
    for (Index s = 0; s < q.size(); ++s) qh = std::max(qh, max_abs(q.block(s, s) - identity(q.bundle().fiber_dim(s))));
  }
  for (const auto& gc : group_cases()) {
    const GnsPair g = trace_gns(gc.n);
    for (RegularRep kind : {RegularRep::left, RegularRep::right, RegularRep::conjugation}) {
      const SampledHomogeneous h = regular_homogeneous(g, diag(gc.n), kind);
      const std::vector<Matrix> cosets = enumerate_cosets(h, gc.gens);
      const Kernel k = homogeneous_kernel(h, cosets);
      transfer = std::max(transfer, kernel_residual(k, transfer_kernel(homogeneous_transfer(h, cosets), k.bundle())));
      const ComplexifiedResult c = complexified_universality(h, cosets, gc.gens);
      const Check* oc = c.report.find("orbit-covariance");
      orbits = std::max(orbits, oc ? oc->residual : 1.0);
    }
  }
  return {diag_gap <= kTransferDiagTol && qh <= kStructureTol && transfer <= kStructureTol && orbits <= kStructureTol,
          "K^R(s,s) " + sci(diag_gap) + ", Q_H(S,S) " + sci(qh) + ", homogeneous vs transfer " + sci(transfer) +
              ", orbit covariance " + sci(orbits)};
}

Outcome criterion8() {
  std::vector<std::string> bad;
  const CpMap transpose =
      CpMap::from_function(MatrixAlgebra::full(2), 2, [](const Matrix& x) { return Matrix(x.transpose()); });
  const CpReport t = cp_report(transpose);
  if (is_completely_positive(transpose) || !(t.min_eigenvalue < -0.5)) bad.push_back("transpose");

  const Kernel k(Bundle::hermitian({1, 1}), std::vector<Matrix>{identity(1), Matrix::Zero(1, 1), Matrix::Zero(1, 1), -identity(1)});
  const PositivityReport p = check_positive(k);
  if (p.positive || std::abs(p.min_eigenvalue + 1.0) > 1e-12) bad.push_back("negative block");

  Matrix rho = Matrix::Zero(2, 2);
  rho(0, 0) = 0.75;
  rho(1, 1) = 0.25;
  const MatrixAlgebra a = MatrixAlgebra::full(2);
  const TracialSuite s = tracial_gns_suite(a, diag(2), diagonal_expectation(2), State{a, rho}, {identity(2)});
  const Check* c = s.report.find("pre.tracial");
  if (s.report.pass() || !c || c->pass || c->details.find("not tracial") == std::string::npos) bad.push_back("non-tracial");

  std::string summary = "transpose Choi min eigenvalue " + sci(t.min_eigenvalue) + ", -1 block min eigenvalue " +
                        sci(p.min_eigenvalue) + ", non-tracial: " + (c ? c->details : std::string("no check"));
  for (const auto& b : bad) summary += " [wrong reason: " + b + "]";
  return {bad.empty(), summary};
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(RKCAT_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome criterion9() {
  const auto t0 = Clock::now();
  int runs = 0;
  std::vector<std::string> failed;
  for (const auto& n : demo_names()) {
    ++runs;
    if (run_cli("demo " + n) != 0) failed.push_back("demo " + n);
    ++runs;
    if (run_cli(std::string("check ") + RKCAT_FIXTURE_DIR + "/" + n + ".json") != 0) failed.push_back("fixture " + n);
  }
  const double dt = seconds_since(t0);
  std::string summary = std::to_string(runs) + " CLI runs in " + sci(dt) + " s";
  for (const auto& f : failed) summary += " [nonzero exit: " + f + "]";
  return {failed.empty() && dt < kCliSeconds, summary};
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                       criterion6, criterion7, criterion8, criterion9};
  int passed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    passed += o.pass;
    std::printf("criterion %zu: %s  %s\n", i + 1, o.pass ? "PASS" : "FAIL", o.summary.c_str());
    std::fflush(stdout);
  }
  std::printf("acceptance: %d/%zu criteria pass\n", passed, criteria.size());
  return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
