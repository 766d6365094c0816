#pragma once

#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "freeprob/fock.hpp"

namespace freeprob {

using nlohmann::json;

// Complex scalars are two-element arrays [re, im] everywhere. Tensors are
// flat arrays in row-major order with the output index slowest.

inline json complex_to_json(cd v) { return json::array({v.real(), v.imag()}); }

inline cd complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ValidationError("complex scalar must be [re, im]");
  return cd(j[0].get<double>(), j[1].get<double>());
}

inline json tensor_to_json(const std::vector<cd>& t) {
  json a = json::array();
  for (const cd& v : t) a.push_back(complex_to_json(v));
  return a;
}

inline std::vector<cd> tensor_from_json(const json& j) {
  std::vector<cd> t;
  t.reserve(j.size());
  for (const auto& v : j) t.push_back(complex_from_json(v));
  return t;
}

inline json algebra_to_json(const Algebra& a) {
  switch (a.kind()) {
    case Algebra::Kind::matrix:
      return json{{"kind", "matrix"}, {"k", a.matrix_k()}};
    case Algebra::Kind::diagonal:
      return json{{"kind", "diagonal"}, {"d", a.dim()}};
    case Algebra::Kind::custom: {
      int d = a.dim();
      json unit = json::array();
      for (const cd& v : a.unit()) unit.push_back(complex_to_json(v));
      json structure = json::array();
      for (int p = 0; p < d; ++p) {
        json jp = json::array();
        for (int q = 0; q < d; ++q) {
          json jq = json::array();
          for (int r = 0; r < d; ++r) jq.push_back(complex_to_json(a.structure(p, q, r)));
          jp.push_back(jq);
        }
        structure.push_back(jp);
      }
      return json{{"kind", "custom"}, {"dim", d}, {"unit", unit}, {"structure", structure}};
    }
  }
  throw ValidationError("unknown algebra kind");
}

inline AlgebraPtr algebra_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "matrix") return make_matrix_algebra(j.at("k").get<int>());
  if (kind == "diagonal") return make_diagonal_algebra(j.at("d").get<int>());
  if (kind == "custom") {
    int d = j.at("dim").get<int>();
    Elem unit;
    for (const auto& v : j.at("unit")) unit.push_back(complex_from_json(v));
    std::vector<cd> structure(d * d * d);
    const json& s = j.at("structure");
    for (int p = 0; p < d; ++p)
      for (int q = 0; q < d; ++q)
        for (int r = 0; r < d; ++r)
          structure[(p * d + q) * d + r] = complex_from_json(s.at(p).at(q).at(r));
    return make_custom_algebra(d, std::move(unit), std::move(structure));
  }
  throw ValidationError("algebra kind must be matrix, diagonal or custom");
}

inline json moment_data_to_json(const MomentData& m) {
  json moments = json::array();
  for (int n = 1; n <= m.order(); ++n) moments.push_back(tensor_to_json(m.mu(n).coeffs()));
  return json{{"algebra", algebra_to_json(*m.algebra())},
              {"order", m.order()},
              {"moments", moments}};
}

inline MomentData moment_data_from_json(const json& j) {
  AlgebraPtr alg = algebra_from_json(j.at("algebra"));
  int order = j.at("order").get<int>();
  std::vector<MultilinearMap> mu;
  const json& moments = j.at("moments");
  if ((int)moments.size() != order)
    throw ValidationError("moment data order does not match tensor count");
  for (int n = 1; n <= order; ++n)
    mu.emplace_back(alg, n, tensor_from_json(moments.at(n - 1)));
  return MomentData(alg, std::move(mu));
}

inline json jet_to_json(const Jet& f) {
  json terms = json::array();
  for (int n = 0; n <= f.degree(); ++n) terms.push_back(tensor_to_json(f.term(n).coeffs()));
  return json{{"algebra", algebra_to_json(*f.algebra())},
              {"degree", f.degree()},
              {"terms", terms}};
}

inline Jet jet_from_json(const json& j) {
  AlgebraPtr alg = algebra_from_json(j.at("algebra"));
  int degree = j.at("degree").get<int>();
  std::vector<MultilinearMap> terms;
  for (int n = 0; n <= degree; ++n)
    terms.emplace_back(alg, n, tensor_from_json(j.at("terms").at(n)));
  return Jet(alg, std::move(terms));
}

inline json transform_result_to_json(const TransformResult& r) {
  json j = jet_to_json(r.jet);
  j["diagnostics"] = {{"inversion", r.diagnostics.inversion},
                      {"strip", r.diagnostics.strip},
                      {"residual", r.diagnostics.residual}};
  return j;
}

inline json rv_model_to_json(const RvModel& m) {
  json coeffs = json::array();
  for (const MultilinearMap& a : m.coeffs) coeffs.push_back(tensor_to_json(a.coeffs()));
  return json{{"index", m.index},
              {"flavor", m.flavor == RvModel::Flavor::s_model ? "s" : "r"},
              {"coeffs", coeffs}};
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  json j;
  in >> j;
  return j;
}

inline void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace freeprob
