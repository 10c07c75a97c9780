#pragma once

// Scenario files: JSON with explicit [re, im] complex entries, row-major matrices,
// kernel blocks keyed "(s,t)" by point name.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rkcat/rkcat.hpp"

namespace rkcat {

using Json = nlohmann::ordered_json;

// Malformed input. Maps to exit code 2.
class ScenarioError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline const Json& field(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw ScenarioError("field '" + path + "': expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ScenarioError("field '" + (path.empty() ? key : path + "." + key) + "' is missing");
  return *it;
}

inline std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

inline std::string get_string(const Json& j, const std::string& path) {
  if (!j.is_string()) throw ScenarioError("field '" + path + "': expected a string");
  return j.get<std::string>();
}

inline double get_number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ScenarioError("field '" + path + "': expected a number");
  return j.get<double>();
}

inline Index get_index(const Json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0)
    throw ScenarioError("field '" + path + "': expected a non-negative integer");
  return static_cast<Index>(j.get<long long>());
}

}  // namespace detail

inline Complex parse_complex(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ScenarioError("field '" + path + "': complex entry must be a two-element array [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

// Row-major nested arrays; [] is the empty matrix, reshaped to (rows, cols) when given.
inline Matrix parse_matrix(const Json& j, const std::string& path, Index rows = -1, Index cols = -1) {
  if (!j.is_array()) throw ScenarioError("field '" + path + "': matrix must be an array of rows");
  if (j.empty()) {
    if ((rows > 0 && cols > 0)) throw ScenarioError("field '" + path + "': empty matrix, expected " +
                                                     std::to_string(rows) + "x" + std::to_string(cols));
    return Matrix(std::max<Index>(rows, 0), std::max<Index>(cols, 0));
  }
  const Index r = static_cast<Index>(j.size());
  if (!j[0].is_array()) throw ScenarioError("field '" + path + "[0]': row must be an array");
  const Index c = static_cast<Index>(j[0].size());
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    const std::string rp = path + "[" + std::to_string(i) + "]";
    if (!row.is_array() || static_cast<Index>(row.size()) != c)
      throw ScenarioError("field '" + rp + "': ragged matrix, expected " + std::to_string(c) + " entries");
    for (Index k = 0; k < c; ++k)
      m(i, k) = parse_complex(row[static_cast<std::size_t>(k)], rp + "[" + std::to_string(k) + "]");
  }
  if ((rows >= 0 && r != rows) || (cols >= 0 && c != cols))
    throw ScenarioError("field '" + path + "': matrix is " + std::to_string(r) + "x" + std::to_string(c) + ", expected " +
                        std::to_string(rows) + "x" + std::to_string(cols));
  return m;
}

inline Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index k = 0; k < m.cols(); ++k) row.push_back(Json::array({m(i, k).real(), m(i, k).imag()}));
    rows.push_back(row);
  }
  return rows;
}

inline std::vector<Matrix> parse_matrix_list(const Json& j, const std::string& path, Index rows = -1, Index cols = -1) {
  if (!j.is_array()) throw ScenarioError("field '" + path + "': expected a list of matrices");
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(parse_matrix(j[i], path + "[" + std::to_string(i) + "]", rows, cols));
  return out;
}

inline Json matrix_list_json(const std::vector<Matrix>& ms) {
  Json out = Json::array();
  for (const auto& m : ms) out.push_back(matrix_json(m));
  return out;
}

// {"points": [...], "fibers": [...], "involution"?: {name: name}, "pairings"?: {name: matrix}}
inline Bundle parse_bundle(const Json& j, const std::string& path) {
  using namespace detail;
  const Json& pts = field(j, "points", path);
  const Json& fib = field(j, "fibers", path);
  if (!pts.is_array() || !fib.is_array() || pts.size() != fib.size())
    throw ScenarioError("field '" + join(path, "fibers") + "': one fiber dimension per point required");
  std::vector<std::string> names;
  std::vector<Index> dims;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    names.push_back(get_string(pts[i], join(path, "points") + "[" + std::to_string(i) + "]"));
    dims.push_back(get_index(fib[i], join(path, "fibers") + "[" + std::to_string(i) + "]"));
  }
  auto index_of = [&](const std::string& name, const std::string& where) {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<Index>(i);
    throw ScenarioError("field '" + where + "': unknown point '" + name + "'");
  };
  std::vector<Index> inv(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) inv[i] = static_cast<Index>(i);
  if (j.contains("involution")) {
    const Json& ij = j["involution"];
    if (!ij.is_object()) throw ScenarioError("field '" + join(path, "involution") + "': expected an object");
    for (auto it = ij.begin(); it != ij.end(); ++it) {
      const std::string where = join(path, "involution") + "." + it.key();
      inv[static_cast<std::size_t>(index_of(it.key(), where))] = index_of(get_string(it.value(), where), where);
    }
  }
  std::vector<Matrix> g;
  const Json* pj = j.contains("pairings") ? &j["pairings"] : nullptr;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const Index rows = dims[static_cast<std::size_t>(inv[i])];
    if (pj && pj->contains(names[i])) {
      g.push_back(parse_matrix((*pj)[names[i]], join(path, "pairings") + "." + names[i], rows, dims[i]));
    } else {
      if (rows != dims[i])
        throw ScenarioError("field '" + join(path, "pairings") + "." + names[i] + "' is missing and the default identity does not fit");
      g.push_back(identity(dims[i]));
    }
  }
  if (pj)
    for (auto it = pj->begin(); it != pj->end(); ++it) index_of(it.key(), join(path, "pairings") + "." + it.key());
  try {
    return Bundle(names, inv, dims, g);
  } catch (const DimensionError& e) {
    throw ScenarioError("field '" + path + "': " + e.what());
  }
}

inline Json bundle_json(const Bundle& b) {
  Json j;
  j["points"] = b.names();
  j["fibers"] = b.fiber_dims();
  Json inv = Json::object();
  for (Index z = 0; z < b.size(); ++z)
    if (b.star(z) != z) inv[b.name(z)] = b.name(b.star(z));
  if (!inv.empty()) j["involution"] = inv;
  Json g = Json::object();
  for (Index z = 0; z < b.size(); ++z)
    if (b.star(z) != z || max_abs(b.pairing(z) - identity(b.fiber_dim(z))) != 0.0) g[b.name(z)] = matrix_json(b.pairing(z));
  if (!g.empty()) j["pairings"] = g;
  return j;
}

inline std::string block_key(const std::string& s, const std::string& t) { return "(" + s + "," + t + ")"; }

inline Kernel parse_kernel(const Bundle& b, const Json& blocks, const std::string& path) {
  if (!blocks.is_object()) throw ScenarioError("field '" + path + "': expected an object keyed \"(s,t)\"");
  std::vector<Matrix> out;
  for (Index s = 0; s < b.size(); ++s)
    for (Index t = 0; t < b.size(); ++t) {
      const std::string key = block_key(b.name(s), b.name(t));
      if (!blocks.contains(key)) throw ScenarioError("field '" + path + "." + key + "' is missing");
      out.push_back(parse_matrix(blocks[key], path + "." + key, b.fiber_dim(s), b.fiber_dim(t)));
    }
  if (static_cast<Index>(blocks.size()) != b.size() * b.size())
    for (auto it = blocks.begin(); it != blocks.end(); ++it) {
      bool known = false;
      for (Index s = 0; s < b.size() && !known; ++s)
        for (Index t = 0; t < b.size() && !known; ++t) known = it.key() == block_key(b.name(s), b.name(t));
      if (!known) throw ScenarioError("field '" + path + "." + it.key() + "': not a block of this bundle");
    }
  return Kernel(b, std::move(out));
}

inline Json kernel_blocks_json(const Kernel& k) {
  Json j = Json::object();
  const Bundle& b = k.bundle();
  for (Index s = 0; s < b.size(); ++s)
    for (Index t = 0; t < b.size(); ++t) j[block_key(b.name(s), b.name(t))] = matrix_json(k.block(s, t));
  return j;
}

inline MatrixAlgebra parse_algebra(const Json& j, const std::string& path) {
  const Json& bl = detail::field(j, "blocks", path);
  if (!bl.is_array() || bl.empty()) throw ScenarioError("field '" + detail::join(path, "blocks") + "': expected a non-empty list");
  std::vector<Index> blocks;
  for (std::size_t i = 0; i < bl.size(); ++i) {
    const Index b = detail::get_index(bl[i], detail::join(path, "blocks") + "[" + std::to_string(i) + "]");
    if (b == 0) throw ScenarioError("field '" + detail::join(path, "blocks") + "': block sizes must be positive");
    blocks.push_back(b);
  }
  return MatrixAlgebra(blocks);
}

inline Json algebra_json(const MatrixAlgebra& a) { return Json{{"blocks", a.blocks()}}; }

struct KernelData {
  Kernel kernel;
  std::optional<BundleMorphism> morphism;     // into the kernel's bundle
  std::optional<Kernel> source_kernel;        // expected pull-back, when given
  // C on an ambient C^N plus vectors x_g realizing the generator Gram; transported to H^K
  std::optional<Matrix> realization;
  std::optional<SemilinearMap> ambient_involution;
};

struct GrassData {
  GrassKernelSpec spec;
};

struct CpData {
  CpMap phi;
};

// Shared by the "homogeneous" and "gns" kinds.
struct AlgebraData {
  MatrixAlgebra a;
  MatrixAlgebra b;
  State phi;
  CpMap e;
  RegularRep rep = RegularRep::left;
  std::vector<Matrix> cosets;
  std::vector<Matrix> generators;
};

struct Scenario {
  std::string id;
  std::string kind;
  std::optional<double> tolerance;
  std::vector<std::string> suites;
  std::variant<KernelData, GrassData, CpData, AlgebraData> data;
};

inline std::vector<std::string> default_suites(const std::string& kind) {
  if (kind == "kernel") return {"validate", "positivity", "exchange", "rkhs", "universality"};
  if (kind == "grassmann") return {"grassmann", "positivity", "universality"};
  if (kind == "cpmap") return {"cp", "stinespring", "compression"};
  if (kind == "homogeneous") return {"homogeneous", "complexified"};
  return {"gns", "tracial"};
}

inline std::vector<std::string> known_suites(const std::string& kind) {
  if (kind == "kernel") return {"validate", "positivity", "exchange", "rkhs", "universality", "rank", "pullback"};
  if (kind == "grassmann") return {"grassmann", "positivity", "universality"};
  if (kind == "cpmap") return {"cp", "stinespring", "compression"};
  if (kind == "homogeneous") return {"homogeneous", "complexified"};
  return {"gns", "tracial"};
}

inline CpMap parse_expectation(const Json& j, const MatrixAlgebra& a, const MatrixAlgebra& b, const std::string& path) {
  if (j.is_string()) {
    if (j.get<std::string>() != "block-diagonal")
      throw ScenarioError("field '" + path + "': unknown expectation '" + j.get<std::string>() + "'");
    if (a.size() != b.size()) throw ScenarioError("field '" + path + "': A and B must share the embedding size");
    return CpMap::from_function(a, a.size(), [&b](const Matrix& x) {
      Matrix y = Matrix::Zero(x.rows(), x.cols());
      for (Index k = 0; k < b.dim(); ++k) {
        const auto [i, l] = b.unit(k);
        y(i, l) = x(i, l);
      }
      return y;
    });
  }
  const Json& im = detail::field(j, "images", path);
  return CpMap(a, a.size(), parse_matrix_list(im, detail::join(path, "images"), a.size(), a.size()));
}

inline Scenario parse_scenario(const Json& j) {
  using namespace detail;
  if (!j.is_object()) throw ScenarioError("scenario must be a JSON object");
  Scenario s;
  s.kind = get_string(field(j, "kind", ""), "kind");
  if (s.kind == "bundle+kernel") s.kind = "kernel";
  s.id = j.contains("id") ? get_string(j["id"], "id") : s.kind;
  if (j.contains("tolerance")) {
    s.tolerance = get_number(j["tolerance"], "tolerance");
    if (!(*s.tolerance > 0.0)) throw ScenarioError("field 'tolerance': must be positive");
  }
  if (j.contains("suites")) {
    const Json& sj = j["suites"];
    if (!sj.is_array()) throw ScenarioError("field 'suites': expected a list of names");
    for (std::size_t i = 0; i < sj.size(); ++i) s.suites.push_back(get_string(sj[i], "suites[" + std::to_string(i) + "]"));
  }
  try {
    if (s.kind == "kernel") {
      KernelData d;
      const Bundle b = parse_bundle(field(j, "bundle", ""), "bundle");
      d.kernel = parse_kernel(b, field(j, "blocks", ""), "blocks");
      if (j.contains("morphism")) {
        const Json& mj = j["morphism"];
        const Bundle src = parse_bundle(field(mj, "source", "morphism"), "morphism.source");
        const Json& bm = field(mj, "base_map", "morphism");
        const Json& fm = field(mj, "fibers", "morphism");
        std::vector<Index> zeta;
        std::vector<Matrix> delta;
        for (Index z = 0; z < src.size(); ++z) {
          const std::string p = "morphism.base_map." + src.name(z);
          if (!bm.contains(src.name(z))) throw ScenarioError("field '" + p + "' is missing");
          const std::string tname = get_string(bm[src.name(z)], p);
          Index w = -1;
          for (Index t = 0; t < b.size(); ++t)
            if (b.name(t) == tname) w = t;
          if (w < 0) throw ScenarioError("field '" + p + "': unknown target point '" + tname + "'");
          zeta.push_back(w);
          const std::string fp = "morphism.fibers." + src.name(z);
          if (!fm.contains(src.name(z))) throw ScenarioError("field '" + fp + "' is missing");
          delta.push_back(parse_matrix(fm[src.name(z)], fp, b.fiber_dim(w), src.fiber_dim(z)));
        }
        const bool anti = mj.contains("antilinear") && mj["antilinear"].is_boolean() && mj["antilinear"].get<bool>();
        try {
          d.morphism = BundleMorphism(src, b, zeta, delta, anti);
        } catch (const MorphismError& e) {
          throw ScenarioError(std::string("field 'morphism': ") + e.what());
        }
        if (mj.contains("expected_blocks")) d.source_kernel = parse_kernel(src, mj["expected_blocks"], "morphism.expected_blocks");
      }
      if (j.contains("involution_isometry")) {
        const Json& cj = j["involution_isometry"];
        const Matrix x = parse_matrix(field(cj, "realization", "involution_isometry"), "involution_isometry.realization",
                                      -1, b.total_dim());
        const Matrix c = parse_matrix(field(cj, "matrix", "involution_isometry"), "involution_isometry.matrix", x.rows(),
                                      x.rows());
        const bool anti = cj.contains("antilinear") && cj["antilinear"].is_boolean() && cj["antilinear"].get<bool>();
        d.realization = x;
        d.ambient_involution = SemilinearMap{c, anti};
      }
      s.data = std::move(d);
    } else if (s.kind == "grassmann") {
      GrassData d;
      d.spec.ambient_dim = get_index(field(j, "ambient_dim", ""), "ambient_dim");
      const Json& pts = field(j, "points", "");
      if (!pts.is_array()) throw ScenarioError("field 'points': expected a list");
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::string p = "points[" + std::to_string(i) + "]";
        d.spec.names.push_back(get_string(field(pts[i], "name", p), p + ".name"));
        const Matrix span = parse_matrix(field(pts[i], "span", p), p + ".span", d.spec.ambient_dim, -1);
        d.spec.points.push_back(orthonormal_basis(span));
      }
      if (j.contains("C")) {
        const Json& cj = j["C"];
        const bool anti = cj.contains("antilinear") && cj["antilinear"].is_boolean() && cj["antilinear"].get<bool>();
        d.spec.involution_isometry =
            SemilinearMap{parse_matrix(field(cj, "matrix", "C"), "C.matrix", d.spec.ambient_dim, d.spec.ambient_dim), anti};
      }
      s.data = std::move(d);
    } else if (s.kind == "cpmap") {
      const MatrixAlgebra a = parse_algebra(field(j, "algebra", ""), "algebra");
      if (j.contains("kraus")) {
        const std::vector<Matrix> v = parse_matrix_list(j["kraus"], "kraus", a.size(), -1);
        if (v.empty()) throw ScenarioError("field 'kraus': at least one operator required");
        for (std::size_t i = 1; i < v.size(); ++i)
          if (v[i].cols() != v[0].cols()) throw ScenarioError("field 'kraus[" + std::to_string(i) + "]': column count differs");
        s.data = CpData{CpMap::from_kraus(a, v)};
      } else {
        const Json& im = field(j, "images", "");
        const Index m = detail::get_index(field(j, "codomain_dim", ""), "codomain_dim");
        s.data = CpData{CpMap(a, m, parse_matrix_list(im, "images", m, m))};
      }
    } else if (s.kind == "homogeneous" || s.kind == "gns") {
      AlgebraData d;
      d.a = parse_algebra(field(j, "algebra", ""), "algebra");
      d.b = parse_algebra(field(j, "subalgebra", ""), "subalgebra");
      if (d.b.size() != d.a.size()) throw ScenarioError("field 'subalgebra': must share the embedding size of 'algebra'");
      d.phi = State{d.a, parse_matrix(field(j, "state", ""), "state", d.a.size(), d.a.size())};
      d.e = parse_expectation(field(j, "expectation", ""), d.a, d.b, "expectation");
      if (j.contains("representation")) {
        const std::string r = get_string(j["representation"], "representation");
        if (r == "lambda") d.rep = RegularRep::left;
        else if (r == "rho") d.rep = RegularRep::right;
        else if (r == "pi") d.rep = RegularRep::conjugation;
        else throw ScenarioError("field 'representation': expected lambda, rho or pi");
      }
      d.cosets = parse_matrix_list(field(j, "cosets", ""), "cosets", d.a.size(), d.a.size());
      if (d.cosets.empty()) throw ScenarioError("field 'cosets': at least one coset required");
      if (j.contains("generators")) d.generators = parse_matrix_list(j["generators"], "generators", d.a.size(), d.a.size());
      s.data = std::move(d);
    } else {
      throw ScenarioError("field 'kind': unknown kind '" + s.kind + "'");
    }
  } catch (const DimensionError& e) {
    throw ScenarioError(e.what());
  } catch (const KernelError& e) {
    throw ScenarioError(e.what());
  }
  const std::vector<std::string> known = known_suites(s.kind);
  for (const auto& name : s.suites)
    if (std::find(known.begin(), known.end(), name) == known.end())
      throw ScenarioError("field 'suites': unknown suite '" + name + "' for kind " + s.kind);
  return s;
}

inline Scenario parse_scenario_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError("parse error at " + detail::line_col(text, e.byte) + ": " + e.what());
  }
  return parse_scenario(j);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str());
}

// ---------------------------------------------------------------- suites

struct RunOptions {
  std::optional<double> tolerance;  // overrides the scenario value
  std::uint64_t seed = 1;
};

inline double effective_tolerance(const Scenario& s, const RunOptions& o) {
  if (o.tolerance) return *o.tolerance;
  if (s.tolerance) return *s.tolerance;
  return kDefaultTol;
}

inline std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline SemilinearMap involution_on_rkhs(const KernelData& d, const Rkhs& r, double tol) {
  const Matrix j = transport_operator(r, *d.realization, tol);
  const Matrix& c = d.ambient_involution->matrix;
  if (d.ambient_involution->antilinear) return {Matrix(j.adjoint() * c * j.conjugate()), true};
  return {Matrix(j.adjoint() * c * j), false};
}

inline void add_universality(Report& rep, const Kernel& k, const std::optional<KernelData>& kd, double tol) {
  if (k.bundle().is_hermitian_involution()) {
    const UniversalityCheck c = verify_universal_hermitian(k, tol);
    rep.add("residual", c.pass, c.residual, "K = Delta_K^* Q_{H^K}, " + c.details);
    const UniversalMorphism u = build_universal_morphism(k, tol);
    const Kernel q = universal_kernel(u.zeta);
    const PullbackCharacterization pc = pullback_characterization(u.morphism(q.bundle()), k, q, tol);
    rep.add("isometry", pc.isometry, pc.isometry_residual, "Delta_K is isometric");
    rep.add("least-M", pc.morphism && std::abs(pc.least_M - 1.0) <= tol, std::abs(pc.least_M - 1.0),
            "least M = " + fmt(pc.least_M));
    return;
  }
  if (!kd || !kd->ambient_involution) {
    rep.add("no-verdict", true, 0.0, "non-trivial involution and no involution isometry supplied");
    return;
  }
  const Rkhs r = build_rkhs(k, tol);
  const SemilinearMap c = involution_on_rkhs(*kd, r, tol);
  const UniversalityCheck u = verify_universal_involutive(k, c, tol);
  if (!u.hypothesis) {
    rep.add("hypothesis", false, u.residual, "compatibility hypothesis violated, no verdict: " + u.details);
    return;
  }
  rep.add("residual", u.pass, u.residual, "K = Delta_K^* Q_{H^K,C}, " + u.details);
}

inline Report kernel_suite(const std::string& suite, const KernelData& d, double tol) {
  Report rep;
  const Kernel& k = d.kernel;
  if (suite == "validate") {
    rep.append(validate_bundle(k.bundle(), tol));
  } else if (suite == "positivity") {
    const PositivityReport p = check_positive(k, tol);
    rep.add("positive", p.positive, std::max(0.0, -p.min_eigenvalue),
            (p.positive ? "min eigenvalue " : "not positive: min eigenvalue ") + fmt(p.min_eigenvalue) +
                (p.hermitian ? "" : " (positivity matrix not Hermitian)"));
  } else if (suite == "exchange") {
    const double e = exchange_residual(k, tol);
    rep.add("exchange", e <= tol, e, "K(s,t)^{-*} = K(t^{-*},s^{-*})");
  } else if (suite == "rkhs") {
    const Rkhs r = build_rkhs(k, tol);
    rep.add("dimension", true, 0.0, "dim H^K = " + std::to_string(r.dim()) + " from " +
                                        std::to_string(r.generators.size()) + " generators");
    double repro = 0.0;
    for (Index s = 0; s < k.size(); ++s)
      for (Index i = 0; i < k.bundle().fiber_dim(s); ++i) {
        const Vector f = r.coords(s).col(i);
        for (Index t = 0; t < k.size(); ++t)
          repro = std::max(repro, max_abs(evaluate(r, f, t) - k.block(t, s).col(i)));
      }
    repro /= std::max(1.0, k.max_entry());
    rep.add("reproducing", repro <= tol, repro, "K_xi(t) = K(t,s) xi");
  } else if (suite == "universality") {
    add_universality(rep, k, d, tol);
  } else if (suite == "rank") {
    for (const PointRank& p : invertibility_and_rank(k, tol))
      rep.add(k.bundle().name(p.point), p.consistent && p.round_trip <= std::sqrt(tol), p.round_trip,
              "dim zeta " + std::to_string(p.zeta_dim) + " / fiber " + std::to_string(p.fiber_dim) +
                  (p.invertible ? ", K(s,s) invertible" : ", K(s,s) singular") + ", sigma_min " +
                  fmt(p.min_singular_value));
  } else if (suite == "pullback") {
    if (!d.morphism) {
      rep.add("morphism", false, 1.0, "scenario has no 'morphism'");
      return rep;
    }
    const Kernel pb = pullback(*d.morphism, k, tol);
    const PositivityReport p = check_positive(pb, tol);
    rep.add("positive", p.positive, std::max(0.0, -p.min_eigenvalue), "pull-back min eigenvalue " + fmt(p.min_eigenvalue));
    const PullbackCharacterization c = pullback_characterization(*d.morphism, pb, k, tol);
    rep.add("characterization", c.equal && c.isometry && c.morphism && c.consistent, c.isometry_residual,
            "Theta^* K is isometrically pulled back, least M = " + fmt(c.least_M));
    if (d.source_kernel) {
      const double res = kernel_residual(pb, *d.source_kernel);
      rep.add("expected", res <= tol, res, "pull-back against 'expected_blocks'");
    }
  }
  return rep;
}

inline Kernel grass_kernel(const GrassKernelSpec& spec, double tol) {
  if (spec.involution_isometry && !spec.involution_isometry->antilinear) return involutive_kernel(spec, tol);
  return universal_kernel(spec);
}

inline Report grass_suite(const std::string& suite, const GrassData& d, double tol) {
  Report rep;
  const GrassKernelSpec& spec = d.spec;
  require_common_ambient(spec);
  if (suite == "grassmann") {
    const Kernel q = universal_kernel(spec);
    double diag = 0.0;
    for (Index s = 0; s < q.size(); ++s) diag = std::max(diag, max_abs(q.block(s, s) - identity(q.bundle().fiber_dim(s))));
    rep.add("diagonal", diag <= tol, diag, "Q_H(S,S) = id_S");
    if (spec.involution_isometry) {
      validate_involution_isometry(*spec.involution_isometry, spec.ambient_dim, tol);
      rep.add("involution", true, 0.0, "C^2 = id, C isometric, list closed under C");
      const std::vector<SemilinearMap> blocks = involutive_blocks(spec, tol);
      const std::vector<Index> inv = grassmann_involution(spec, tol);
      double fixed = 0.0;
      const std::size_t n = spec.points.size();
      for (std::size_t s = 0; s < n; ++s) {
        // Q_{H,C}(S, C(S)) restricted back through C is the identity of S
        const SemilinearMap& b = blocks[s * n + static_cast<std::size_t>(inv[s])];
        const Subspace& t = spec.points[static_cast<std::size_t>(inv[s])];
        const SemilinearMap back = compose(b, compose(SemilinearMap{t.basis().adjoint(), false},
                                                      compose(*spec.involution_isometry, SemilinearMap{spec.points[s].basis(), false})));
        fixed = std::max(fixed, max_abs(back.matrix - identity(spec.points[s].dim())));
      }
      rep.add("involutive-diagonal", fixed <= tol, fixed, "Q_{H,C}(S, C S) o C = id_S");
    }
  } else if (suite == "positivity") {
    const Kernel q = grass_kernel(spec, tol);
    const PositivityReport p = check_positive(q, tol);
    rep.add("positive", p.positive, std::max(0.0, -p.min_eigenvalue), "min eigenvalue " + fmt(p.min_eigenvalue));
  } else if (suite == "universality") {
    const Kernel q = grass_kernel(spec, tol);
    std::optional<KernelData> kd;
    if (!q.bundle().is_hermitian_involution()) {
      KernelData x;
      x.kernel = q;
      Matrix real(spec.ambient_dim, q.bundle().total_dim());
      for (Index s = 0; s < q.size(); ++s)
        real.middleCols(q.bundle().offset(s), q.bundle().fiber_dim(s)) = spec.points[static_cast<std::size_t>(s)].basis();
      x.realization = real;
      x.ambient_involution = spec.involution_isometry;
      kd = std::move(x);
    }
    add_universality(rep, q, kd, tol);
  }
  return rep;
}

inline Report cp_suite(const std::string& suite, const CpData& d, double tol, std::uint64_t seed) {
  Report rep;
  if (suite == "cp") {
    const CpReport c = cp_report(d.phi, tol);
    rep.add("choi", c.completely_positive, std::max(0.0, -c.min_eigenvalue),
            (c.completely_positive ? "Choi matrix PSD, min eigenvalue " : "not completely positive: Choi min eigenvalue ") +
                fmt(c.min_eigenvalue));
    std::mt19937_64 rng(seed);
    const double amp = amplification_min_eigenvalue(d.phi, 2, 8, rng);
    // sampled Phi_2 must not contradict the Choi verdict
    rep.add("amplification-agrees", amp >= -tol || !c.completely_positive, std::max(0.0, -amp),
            "Phi_2 on random positive elements, min eigenvalue " + fmt(amp) +
                (c.completely_positive ? "" : " (expected: Phi is not CP)"));
  } else if (suite == "stinespring") {
    const StinespringData s = stinespring(d.phi, tol);
    rep.add("dimension", true, 0.0, "dim K0 = " + std::to_string(s.dim()));
    rep.append(verify_stinespring(d.phi, s, tol));
  } else if (suite == "compression") {
    rep.append(compression_factorization(d.phi, tol));
  }
  return rep;
}

inline Report algebra_suite(const std::string& suite, const AlgebraData& d, double tol, std::uint64_t seed) {
  Report rep;
  if (suite == "gns") {
    const StinespringData s = gns(d.phi, tol);
    rep.add("dimension", true, 0.0, "dim H_phi = " + std::to_string(s.dim()));
    rep.append(verify_stinespring(d.phi.as_cp_map(), s, tol));
    rep.append(commuting_squares(d.e, d.b, d.phi.as_cp_map(), seed, tol).report, "squares");
  } else if (suite == "tracial") {
    rep.append(tracial_gns_suite(d.a, d.b, d.e, d.phi, d.cosets, seed, tol).report);
  } else if (suite == "homogeneous" || suite == "complexified") {
    const CommutingSquares sq = commuting_squares(d.e, d.b, d.phi.as_cp_map(), seed, tol);
    if (!sq.report.pass()) {
      rep.append(sq.report);
      return rep;
    }
    const GnsPair g{sq.h_a, sq.h_b, sq.j, gns_conjugation(sq.h_a), gns_conjugation(sq.h_b)};
    const SampledHomogeneous h = regular_homogeneous(g, d.b, d.rep, tol);
    if (suite == "homogeneous") {
      std::vector<Matrix> samples = d.cosets;
      samples.insert(samples.end(), d.generators.begin(), d.generators.end());
      rep.append(validate_homogeneous(h, samples, tol));
      const Kernel k = homogeneous_kernel(h, d.cosets, tol);
      rep.append(validate_bundle(k.bundle(), tol), "bundle");
      const PositivityReport p = check_positive(k, tol);
      rep.add("positive", p.positive, std::max(0.0, -p.min_eigenvalue), "min eigenvalue " + fmt(p.min_eigenvalue));
      const double tr = kernel_residual(k, transfer_kernel(homogeneous_transfer(h, d.cosets), k.bundle(), tol));
      rep.add("transfer", tr <= tol, tr, std::string("K^") + rep_name(d.rep) + " = K^R");
    } else {
      const ComplexifiedResult c = complexified_universality(h, d.cosets, d.generators, tol);
      rep.append(c.report);
    }
  }
  return rep;
}

inline Report run_suite(const Scenario& s, const std::string& suite, const RunOptions& o = {}) {
  const std::vector<std::string> known = known_suites(s.kind);
  if (std::find(known.begin(), known.end(), suite) == known.end())
    throw ScenarioError("unknown suite '" + suite + "' for kind " + s.kind);
  const double tol = effective_tolerance(s, o);
  Report inner;
  try {
    if (const auto* k = std::get_if<KernelData>(&s.data)) inner = kernel_suite(suite, *k, tol);
    else if (const auto* g = std::get_if<GrassData>(&s.data)) inner = grass_suite(suite, *g, tol);
    else if (const auto* c = std::get_if<CpData>(&s.data)) inner = cp_suite(suite, *c, tol, o.seed);
    else inner = algebra_suite(suite, std::get<AlgebraData>(s.data), tol, o.seed);
  } catch (const DimensionError& e) {
    throw ScenarioError(e.what());
  } catch (const ScenarioError&) {
    throw;
  } catch (const Error& e) {
    inner = Report{};
    inner.add("error", false, 0.0, e.what());
  }
  Report rep;
  rep.id = s.id;
  rep.append(inner, suite);
  return rep;
}

inline Report run_suites(const Scenario& s, const std::vector<std::string>& suites, const RunOptions& o = {}) {
  Report rep;
  rep.id = s.id;
  for (const auto& name : suites) rep.append(run_suite(s, name, o));
  return rep;
}

inline std::vector<std::string> suites_for(const Scenario& s, const std::optional<std::string>& requested) {
  if (requested) return {*requested};
  return s.suites.empty() ? default_suites(s.kind) : s.suites;
}

// ---------------------------------------------------------------- output

inline Json report_json(const Report& r, const std::string& kind, double tol) {
  Json j;
  j["scenario"] = r.id;
  j["kind"] = kind;
  j["tolerance"] = fmt(tol);
  j["pass"] = r.pass();
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    Json x;
    x["name"] = c.name;
    x["pass"] = c.pass;
    x["residual"] = fmt(c.residual);
    x["details"] = c.details;
    checks.push_back(x);
  }
  j["checks"] = checks;
  return j;
}

inline std::string report_human(const Report& r, const std::string& kind, double tol) {
  std::ostringstream out;
  out << "scenario " << r.id << " [" << kind << "], tolerance " << fmt(tol) << "\n";
  std::size_t width = 0;
  for (const auto& c : r.checks) width = std::max(width, c.name.size());
  for (const auto& c : r.checks) {
    char res[32];
    std::snprintf(res, sizeof res, "%.3e", c.residual);
    out << (c.pass ? "  PASS  " : "  FAIL  ") << c.name << std::string(width - c.name.size() + 2, ' ') << res;
    if (!c.details.empty()) out << "  " << c.details;
    out << "\n";
  }
  out << "verdict: " << (r.pass() ? "PASS" : "FAIL") << "\n";
  return out.str();
}

}  // namespace rkcat
