// JSON parsing and serialization for instances, family specs, tracked
// snapshot families and result reports.
#pragma once

#include <json.hpp>

#include <algorithm>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "kcurv/adapted_basis.hpp"
#include "kcurv/families.hpp"
#include "kcurv/identities.hpp"
#include "kcurv/manifold_fd.hpp"
#include "kcurv/phi_optimizer.hpp"
#include "kcurv/tensor_core.hpp"

namespace kcurv {

using json = nlohmann::json;

namespace jio {

inline json to_json(const VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline json to_json(const MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

inline VectorXd vector_from(const json& a, const char* what) {
  if (!a.is_array()) throw validation_error(std::string(what) + ": expected an array");
  VectorXd v(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number())
      throw validation_error(std::string(what) + ": non-numeric entry");
    v[static_cast<int>(i)] = a[i].get<double>();
  }
  return v;
}

inline MatrixXd matrix_from(const json& a, const char* what) {
  if (!a.is_array() || a.empty())
    throw validation_error(std::string(what) + ": expected a non-empty array of rows");
  const size_t n = a.size();
  MatrixXd m(n, n);
  for (size_t i = 0; i < n; ++i) {
    if (!a[i].is_array() || a[i].size() != n)
      throw validation_error(std::string(what) + ": rows must all have length " +
                             std::to_string(n));
    for (size_t j = 0; j < n; ++j) {
      if (!a[i][j].is_number())
        throw validation_error(std::string(what) + ": non-numeric entry");
      m(static_cast<int>(i), static_cast<int>(j)) = a[i][j].get<double>();
    }
  }
  return m;
}

}  // namespace jio

// { "dim": n, "metric": [[...]] (optional), "cubic": [{"idx":[i,j,k],"val":x}, ...] }
inline StatStructure structure_from_json(const json& j) {
  if (!j.is_object()) throw validation_error("instance: expected a JSON object");
  if (!j.contains("dim") || !j["dim"].is_number_integer())
    throw validation_error("instance: missing integer 'dim'");
  const int n = j["dim"].get<int>();
  if (n < 1 || n > kMaxDim)
    throw validation_error("instance: dim out of supported range");
  Metric g = j.contains("metric") ? Metric(jio::matrix_from(j["metric"], "metric"))
                                  : Metric::identity(n);
  if (g.dim() != n) throw validation_error("instance: metric size != dim");
  SymCubic c(n);
  if (j.contains("cubic")) {
    if (!j["cubic"].is_array())
      throw validation_error("instance: 'cubic' must be an array");
    std::set<std::array<int, 3>> seen;
    for (const json& e : j["cubic"]) {
      if (!e.is_object() || !e.contains("idx") || !e.contains("val") ||
          !e["idx"].is_array() || e["idx"].size() != 3 || !e["val"].is_number())
        throw validation_error("instance: cubic entries need 'idx' [i,j,k] and numeric 'val'");
      std::array<int, 3> idx{};
      for (int t = 0; t < 3; ++t) {
        if (!e["idx"][t].is_number_integer())
          throw validation_error("instance: non-integer cubic index");
        idx[t] = e["idx"][t].get<int>();
        if (idx[t] < 0 || idx[t] >= n)
          throw validation_error("instance: cubic index out of range");
      }
      if (!(idx[0] <= idx[1] && idx[1] <= idx[2]))
        throw validation_error("instance: cubic indices must satisfy i <= j <= k");
      if (!seen.insert(idx).second)
        throw validation_error("instance: duplicate cubic index (" +
                               std::to_string(idx[0]) + "," + std::to_string(idx[1]) +
                               "," + std::to_string(idx[2]) + ")");
      c.at(idx[0], idx[1], idx[2]) = e["val"].get<double>();
    }
  }
  return StatStructure(std::move(g), std::move(c));
}

inline json structure_to_json(const StatStructure& s) {
  json j;
  j["dim"] = s.dim();
  if (!s.metric().is_identity()) j["metric"] = jio::to_json(s.metric().gram());
  json cub = json::array();
  const int n = s.dim();
  for (int i = 0; i < n; ++i)
    for (int jj = i; jj < n; ++jj)
      for (int k = jj; k < n; ++k) {
        const double v = s.cubic()(i, jj, k);
        if (v != 0.0) cub.push_back({{"idx", {i, jj, k}}, {"val", v}});
      }
  j["cubic"] = std::move(cub);
  return j;
}

// { "kind": "...", "dim": n, "params": {...}, "values": [...], "seed": ... }
inline FamilySpec family_spec_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw validation_error("family: expected an object with string 'kind'");
  FamilySpec f;
  f.kind = family_kind_from_string(j["kind"].get<std::string>());
  if (j.contains("dim")) {
    if (!j["dim"].is_number_integer())
      throw validation_error("family: 'dim' must be an integer");
    f.dim = j["dim"].get<int>();
  }
  if (j.contains("params")) {
    if (!j["params"].is_object())
      throw validation_error("family: 'params' must be an object");
    for (auto it = j["params"].begin(); it != j["params"].end(); ++it) {
      if (!it.value().is_number())
        throw validation_error("family: non-numeric parameter '" + it.key() + "'");
      f.params[it.key()] = it.value().get<double>();
    }
  }
  if (j.contains("values")) {
    f.values = jio::vector_from(j["values"], "family values");
    if (f.kind == FamilyKind::diagonal) f.dim = static_cast<int>(f.values.size());
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer())
      throw validation_error("family: 'seed' must be an integer");
    f.seed = j["seed"].get<std::uint64_t>();
  }
  return f;
}

// JSON array of instance snapshots carrying "t" in [0,1]; intermediate t is
// linearly interpolated entrywise (metric and cubic).
inline std::function<StatStructure(double)> family_from_snapshots(const json& j) {
  if (!j.is_array() || j.size() < 2)
    throw validation_error("track: expected an array of at least two snapshots");
  struct Node {
    double t;
    MatrixXd g;
    std::vector<double> c;
    int dim;
  };
  std::vector<Node> nodes;
  for (const json& e : j) {
    if (!e.is_object() || !e.contains("t") || !e["t"].is_number())
      throw validation_error("track: every snapshot needs a numeric 't'");
    const StatStructure s = structure_from_json(e);
    nodes.push_back({e["t"].get<double>(), s.metric().gram(),
                     s.cubic().entries(), s.dim()});
  }
  std::sort(nodes.begin(), nodes.end(),
            [](const Node& a, const Node& b) { return a.t < b.t; });
  for (size_t i = 1; i < nodes.size(); ++i) {
    if (nodes[i].dim != nodes[0].dim)
      throw validation_error("track: snapshot dimensions differ");
    if (nodes[i].t <= nodes[i - 1].t)
      throw validation_error("track: snapshot times must be strictly increasing");
  }
  if (std::abs(nodes.front().t) > 1e-12 || std::abs(nodes.back().t - 1.0) > 1e-12)
    throw validation_error("track: snapshots must span t = 0 to t = 1");

  return [nodes](double t) {
    if (t < nodes.front().t) t = nodes.front().t;
    if (t > nodes.back().t) t = nodes.back().t;
    size_t hi = 1;
    while (hi + 1 < nodes.size() && nodes[hi].t < t) ++hi;
    const Node& a = nodes[hi - 1];
    const Node& b = nodes[hi];
    const double w = (t - a.t) / (b.t - a.t);
    MatrixXd g = (1.0 - w) * a.g + w * b.g;
    SymCubic c(a.dim);
    // packed entries interpolate entrywise
    SymCubic tmp(a.dim);
    for (int i = 0; i < a.dim; ++i)
      for (int jj = i; jj < a.dim; ++jj)
        for (int k = jj; k < a.dim; ++k) {
          const int idx = tmp.packed_index(i, jj, k);
          c.at(i, jj, k) = (1.0 - w) * a.c[idx] + w * b.c[idx];
        }
    return StatStructure(Metric(std::move(g)), std::move(c));
  };
}

// ---- report serialization ---------------------------------------------

inline json critical_point_to_json(const CriticalPoint& cp) {
  return {{"x", jio::to_json(cp.x)},
          {"value", cp.value},
          {"multiplier", cp.multiplier},
          {"kind", to_string(cp.kind)},
          {"gap", cp.gap}};
}

inline json decomposition_to_json(const AdaptedDecomposition& d) {
  return {{"A", d.As.size() ? d.As[0] : 0.0},
          {"basis", jio::to_json(d.basis)},
          {"lambdas", jio::to_json(d.lambdas)},
          {"mus", jio::to_json(d.mus)},
          {"As", jio::to_json(d.As)},
          {"residual", d.residual}};
}

inline json frame_path_to_json(const FramePath& p) {
  json nodes = json::array();
  for (size_t i = 0; i < p.ts.size(); ++i) {
    json n = critical_point_to_json(p.points[i]);
    n["t"] = p.ts[i];
    n["residual"] = p.residuals[i];
    nodes.push_back(std::move(n));
  }
  return {{"nodes", std::move(nodes)}};
}

inline json rigidity_to_json(const RigidityReport& r) {
  json j{{"k_min", r.k_min},
         {"k_max", r.k_max},
         {"null_dimension", r.null_dimension},
         {"smallest_kept_sv", r.smallest_kept_sv},
         {"sv_threshold", r.sv_threshold},
         {"negative_curvature_asserted", r.negative_curvature_asserted}};
  if (r.constant_curvature) j["constant_curvature"] = *r.constant_curvature;
  return j;
}

inline json canonical_to_json(const CanonicalVerdict& v) {
  json j{{"canonical", v.canonical}};
  if (v.canonical)
    j["lambda"] = v.lambda;
  else {
    j["failed_condition"] = v.failed_condition;
    j["detail"] = v.detail;
  }
  return j;
}

inline json curvature_like_to_json(const CurvatureLikeResiduals& r) {
  return {{"antisymmetry", r.antisymmetry},
          {"bianchi", r.bianchi},
          {"skewness", r.skewness},
          {"scale", r.scale}};
}

inline json identity_report_to_json(const IdentityReport& r) {
  json j{{"duality", r.duality},
         {"sum_identity", r.sum_identity},
         {"bianchi", r.bianchi},
         {"nabla_hat_K_symmetry", r.nabla_hat_k_symmetry},
         {"lemma21",
          {{"R_equals_Rbar", r.r_equals_rbar},
           {"nabla_hat_K_symmetric", r.nabla_k_symmetric},
           {"R_skew_in_last_pair", r.r_skew_in_zw},
           {"agree", r.lemma21_agree}}},
         {"tolerance", r.tolerance},
         {"derivation_convention", IdentityReport::kDerivationConvention}};
  if (r.hessian_relation) j["hessian_relation"] = *r.hessian_relation;
  return j;
}

// Polynomial chart spec:
// { "dim": n, "fd_step": h (optional), "domain": [[lo,hi],...] (optional),
//   "g": [ {"idx":[i,j], "terms":[{"exps":[...], "coef":x}, ...]}, ... ],
//   "cubic": [ {"idx":[i,j,k], "terms":[...]}, ... ] }
inline PolynomialChartSpec polynomial_chart_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j["dim"].is_number_integer())
    throw validation_error("chart: expected an object with integer 'dim'");
  PolynomialChartSpec spec;
  spec.dim = j["dim"].get<int>();
  if (spec.dim < 1 || spec.dim > kMaxDim)
    throw validation_error("chart: dim out of supported range");
  if (j.contains("fd_step")) {
    if (!j["fd_step"].is_number() || !(j["fd_step"].get<double>() > 0))
      throw validation_error("chart: fd_step must be positive");
    spec.fd_step = j["fd_step"].get<double>();
  }
  if (j.contains("domain")) {
    const json& d = j["domain"];
    if (!d.is_array() || static_cast<int>(d.size()) != spec.dim)
      throw validation_error("chart: domain must list [lo,hi] per coordinate");
    spec.domain = MatrixXd(spec.dim, 2);
    for (int i = 0; i < spec.dim; ++i) {
      if (!d[i].is_array() || d[i].size() != 2)
        throw validation_error("chart: domain entries must be [lo,hi]");
      spec.domain(i, 0) = d[i][0].get<double>();
      spec.domain(i, 1) = d[i][1].get<double>();
    }
  }
  auto poly_from = [&](const json& e) {
    Polynomial p;
    if (!e.contains("terms") || !e["terms"].is_array())
      throw validation_error("chart: entry needs a 'terms' array");
    for (const json& t : e["terms"]) {
      if (!t.is_object() || !t.contains("exps") || !t.contains("coef") ||
          !t["exps"].is_array() ||
          static_cast<int>(t["exps"].size()) != spec.dim ||
          !t["coef"].is_number())
        throw validation_error("chart: terms need per-coordinate 'exps' and numeric 'coef'");
      Polynomial::Term term;
      term.coef = t["coef"].get<double>();
      int total = 0;
      for (const json& x : t["exps"]) {
        if (!x.is_number_integer() || x.get<int>() < 0)
          throw validation_error("chart: exponents must be non-negative integers");
        term.exps.push_back(x.get<int>());
        total += x.get<int>();
      }
      if (total > 6)
        throw validation_error("chart: total degree must be <= 6");
      p.terms.push_back(std::move(term));
    }
    return p;
  };
  if (j.contains("g"))
    for (const json& e : j["g"]) {
      if (!e.contains("idx") || e["idx"].size() != 2)
        throw validation_error("chart: g entries need 'idx' [i,j]");
      const int a = e["idx"][0].get<int>(), b = e["idx"][1].get<int>();
      if (a < 0 || b < 0 || a >= spec.dim || b >= spec.dim)
        throw validation_error("chart: g index out of range");
      spec.g_entries[{std::min(a, b), std::max(a, b)}] = poly_from(e);
    }
  if (j.contains("cubic"))
    for (const json& e : j["cubic"]) {
      if (!e.contains("idx") || e["idx"].size() != 3)
        throw validation_error("chart: cubic entries need 'idx' [i,j,k]");
      std::array<int, 3> idx{e["idx"][0].get<int>(), e["idx"][1].get<int>(),
                             e["idx"][2].get<int>()};
      std::sort(idx.begin(), idx.end());
      if (idx[0] < 0 || idx[2] >= spec.dim)
        throw validation_error("chart: cubic index out of range");
      spec.cubic_entries[idx] = poly_from(e);
    }
  return spec;
}

}  // namespace kcurv
