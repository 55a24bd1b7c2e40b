// JSON encoding of instances, plans and certificates.
//
// Instance: {"mu": [...], "nu": [...], "cost": [[...]], "plan": [[...]]}
// with "inf" for infinite cost. Numbers may be JSON numbers or strings
// ("3/4", "0.25", "1e-3"). Exact values are written as strings.
#pragma once

#include "otcert/connectivity.hpp"
#include "otcert/core.hpp"
#include "otcert/kellerer.hpp"
#include "otcert/monotonicity.hpp"
#include "otcert/potentials.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace otcert {

using Json = nlohmann::json;

template <class T>
T scalar_from_json(const Json& j) {
  if (j.is_string()) return ScalarTraits<T>::parse(j.get<std::string>());
  if (j.is_number_integer()) return ScalarTraits<T>::parse(std::to_string(j.get<long long>()));
  if (j.is_number_unsigned()) return ScalarTraits<T>::parse(std::to_string(j.get<unsigned long long>()));
  if (j.is_number_float()) return ScalarTraits<T>::from_double(j.get<double>());
  throw InputError("expected a number, got " + j.dump());
}

template <class T>
Json scalar_to_json(const T& v) {
  if constexpr (ScalarTraits<T>::exact) {
    return ScalarTraits<T>::format(v);
  } else {
    return v;
  }
}

template <class T>
ExtendedCost<T> cost_from_json(const Json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "Infinity" || s == "+inf") return ExtendedCost<T>(kInfinity);
  }
  return ExtendedCost<T>(scalar_from_json<T>(j));
}

template <class T>
Json cost_to_json(const ExtendedCost<T>& c) {
  return c.is_infinite() ? Json("inf") : scalar_to_json(c.value());
}

template <class T>
Json extended_real_to_json(const ExtendedReal<T>& v) {
  if (v.is_neg_inf()) return "-inf";
  if (v.is_pos_inf()) return "inf";
  return scalar_to_json(v.value());
}

template <class T>
std::vector<T> vector_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string(what) + " must be an array");
  std::vector<T> out;
  for (const auto& v : j) out.push_back(scalar_from_json<T>(v));
  return out;
}

template <class T>
std::vector<std::vector<T>> rows_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string(what) + " must be an array of rows");
  std::vector<std::vector<T>> out;
  for (const auto& row : j) out.push_back(vector_from_json<T>(row, what));
  return out;
}

template <class T>
Json rows_to_json(const Matrix<T>& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(scalar_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class T>
RawInstance<T> instance_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("instance must be a JSON object");
  for (const char* key : {"mu", "nu", "cost"})
    if (!j.contains(key)) throw InputError(std::string("instance lacks \"") + key + "\"");
  RawInstance<T> r;
  r.mu = vector_from_json<T>(j["mu"], "mu");
  r.nu = vector_from_json<T>(j["nu"], "nu");
  if (!j["cost"].is_array()) throw InputError("cost must be an array of rows");
  for (const auto& row : j["cost"]) {
    if (!row.is_array()) throw InputError("cost must be an array of rows");
    r.cost.emplace_back();
    for (const auto& c : row) r.cost.back().push_back(cost_from_json<T>(c));
  }
  if (j.contains("plan") && !j["plan"].is_null()) r.plan = rows_from_json<T>(j["plan"], "plan");
  return r;
}

template <class T>
Json instance_to_json(const RawInstance<T>& r) {
  Json j;
  j["mu"] = Json::array();
  for (const T& v : r.mu) j["mu"].push_back(scalar_to_json(v));
  j["nu"] = Json::array();
  for (const T& v : r.nu) j["nu"].push_back(scalar_to_json(v));
  j["cost"] = Json::array();
  for (const auto& row : r.cost) {
    Json out = Json::array();
    for (const auto& c : row) out.push_back(cost_to_json(c));
    j["cost"].push_back(std::move(out));
  }
  if (r.plan) {
    j["plan"] = Json::array();
    for (const auto& row : *r.plan) {
      Json out = Json::array();
      for (const T& v : row) out.push_back(scalar_to_json(v));
      j["plan"].push_back(std::move(out));
    }
  }
  return j;
}

template <class T>
RawInstance<T> instance_from_string(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(std::string("invalid JSON: ") + e.what());
  }
  return instance_from_json<T>(j);
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return Json::parse(buffer.str());
  } catch (const Json::parse_error& e) {
    throw InputError(path + ": invalid JSON: " + e.what());
  }
}

/// A plan file holds either bare rows or an object with a "plan" key.
template <class T>
std::vector<std::vector<T>> plan_from_json(const Json& j) {
  if (j.is_object()) {
    if (!j.contains("plan")) throw InputError("plan file lacks \"plan\"");
    return rows_from_json<T>(j["plan"], "plan");
  }
  return rows_from_json<T>(j, "plan");
}

inline Json pair_to_json(const Pair& p) { return Json::array({p.x, p.y}); }

inline Json pairs_to_json(const std::vector<Pair>& pairs) {
  Json out = Json::array();
  for (const Pair& p : pairs) out.push_back(pair_to_json(p));
  return out;
}

template <class T>
Json cycle_to_json(const ViolatingCycle<T>& c) {
  return {{"cycle", pairs_to_json(c.pairs)}, {"gap", scalar_to_json(c.gap)}};
}

template <class T>
Json potentials_to_json(const PotentialPair<T>& p) {
  Json phi = Json::array(), psi = Json::array();
  for (const auto& v : p.phi) phi.push_back(extended_real_to_json(v));
  for (const auto& v : p.psi) psi.push_back(extended_real_to_json(v));
  return {{"phi", phi}, {"psi", psi}, {"anchor", pair_to_json(p.anchor)},
          {"class_anchors", pairs_to_json(p.class_anchors)}};
}

inline Json decomposition_to_json(const ConnectivityDecomposition& d) {
  Json out = Json::array();
  for (const auto& c : d.classes)
    out.push_back({{"C", c.sources}, {"D", c.targets}, {"pairs", pairs_to_json(c.pairs)}});
  return out;
}

template <class T>
MultiMarginalInstance<T> multi_marginal_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("weights") || !j.contains("B"))
    throw InputError("multi-marginal instance needs \"weights\" and \"B\"");
  auto weights = rows_from_json<T>(j["weights"], "weights");
  std::vector<Tuple> set;
  if (!j["B"].is_array()) throw InputError("B must be an array of index tuples");
  for (const auto& t : j["B"]) {
    if (!t.is_array()) throw InputError("B must be an array of index tuples");
    Tuple tuple;
    for (const auto& v : t) {
      if (!v.is_number_integer() || v.get<long long>() < 0) throw InputError("tuple entries must be indices");
      tuple.push_back(v.get<std::size_t>());
    }
    set.push_back(std::move(tuple));
  }
  return make_multi_marginal<T>(std::move(weights), std::move(set));
}

}  // namespace otcert
