#pragma once

// JSON encodings of points, groupoid elements and reports, and filtration
// descriptions of the form {"kind": ..., "delta": [...], "depth": n, ...}.

#include "dnclab/filtration.hpp"

#include <json.hpp>

namespace dnclab {

using Json = nlohmann::ordered_json;

inline Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

/// Row-major nested arrays.
inline Json to_json(const Matrix& m) {
  Json a = Json::array();
  for (Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Vector(m.row(i).transpose())));
  return a;
}

inline Json to_json(const SequenceOperator& t) {
  return {{"lane_shifts", t.lane_shifts()}, {"window", t.window()}, {"block", to_json(t.block())}};
}

inline Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("expected a JSON array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError("expected a number at index " + std::to_string(i));
    v[static_cast<Index>(i)] = j[i].get<double>();
  }
  return v;
}

inline Json to_json(const DncPoint& p) {
  Json j;
  j["kind"] = p.is_interior() ? "interior" : "boundary";
  j["m"] = to_json(p.m);
  if (!p.is_interior()) j["x"] = to_json(p.x);
  j["lambda"] = p.lambda;
  return j;
}

inline DncPoint dnc_point_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "interior") return DncPoint::interior(vector_from_json(j.at("m")), j.at("lambda").get<double>());
  if (kind == "boundary") return DncPoint::boundary(vector_from_json(j.at("m")), vector_from_json(j.at("x")));
  throw ConfigError("unknown DNC point kind " + kind);
}

inline Json to_json(const TgElement& e) {
  Json j;
  j["kind"] = e.is_pair() ? "pair" : "tangent";
  j["x"] = to_json(e.x);
  j["y"] = to_json(e.y);
  j["lambda"] = e.lambda;
  return j;
}

inline TgElement tg_element_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "pair")
    return TgElement::pair(vector_from_json(j.at("x")), vector_from_json(j.at("y")), j.at("lambda").get<double>());
  if (kind == "tangent") return TgElement::tangent(vector_from_json(j.at("x")), vector_from_json(j.at("y")));
  throw ConfigError("unknown groupoid element kind " + kind);
}

inline Json to_json(const ConditionReport& r) {
  Json a = Json::array();
  for (const ConditionResult& c : r.conditions)
    a.push_back({{"condition", c.condition},
                 {"status", std::string(to_string(c.status))},
                 {"claimed", c.claimed},
                 {"evidence", c.evidence}});
  return a;
}

inline Json to_json(const Filtration& f, const ConditionReport& r) {
  Json j;
  j["filtration"] = f.name;
  j["delta"] = f.delta.values();
  std::vector<Index> dims;
  for (const ImplicitManifold& m : f.levels) dims.push_back(m.dim);
  j["level_dims"] = dims;
  j["ambient_dim"] = f.ambient.ambient_dim;
  j["conditions"] = to_json(r);
  j["overall"] = r.passed() ? "pass" : "fail";
  return j;
}

namespace detail {

inline DimensionSequence delta_from_json(const Json& j) {
  if (!j.contains("delta")) throw ConfigError("filtration spec needs \"delta\"");
  std::vector<Index> d = j.at("delta").get<std::vector<Index>>();
  if (j.contains("depth")) {
    const auto depth = j.at("depth").get<std::size_t>();
    if (depth == 0 || depth > d.size()) throw ConfigError("depth must lie in 1.." + std::to_string(d.size()));
    d.resize(depth);
  }
  try {
    return DimensionSequence(d);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace detail

/// Builds a filtration from a JSON spec. Kinds: linear, open (ball with
/// "center", "radius"), sphere, projective, product ("a", "b"),
/// pair-groupoid, tangent, tangent-groupoid, subsequence ("indices"),
/// trivial-factor ("k"), pullback ("p": linear projection from R^{D+p});
/// composite kinds take the inner spec under "of".
inline Filtration filtration_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind")) throw ConfigError("filtration spec needs \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  const Index margin = j.value("margin", Index{5});
  auto inner = [&]() {
    if (!j.contains("of")) throw ConfigError(kind + " needs an inner spec under \"of\"");
    return filtration_from_json(j.at("of"));
  };
  if (kind == "linear") return make_filtration_linear(standard_flag(detail::delta_from_json(j)), margin);
  if (kind == "sphere") return make_filtration_sphere(standard_flag(detail::delta_from_json(j)), margin);
  if (kind == "projective") return make_filtration_projective(detail::delta_from_json(j), margin);
  if (kind == "open") {
    const Flag flag = standard_flag(detail::delta_from_json(j));
    const double radius = j.value("radius", 1.0);
    const Index d = detail::model_dimension(flag, margin);
    Vector c = Vector::Zero(d);
    if (j.contains("center")) c = linalg::resized(vector_from_json(j.at("center")), d);
    return make_filtration_open_subset([c, radius](const Vector& x) { return (x - c).norm() < radius; }, flag,
                                       std::nullopt, margin);
  }
  if (kind == "product") {
    if (!j.contains("a") || !j.contains("b")) throw ConfigError("product needs \"a\" and \"b\"");
    return make_filtration_product(filtration_from_json(j.at("a")), filtration_from_json(j.at("b")));
  }
  if (kind == "pair-groupoid") return pair_groupoid_filtration(inner());
  if (kind == "tangent") return tangent_filtration(inner());
  if (kind == "tangent-groupoid") return tangent_groupoid_filtration(inner());
  if (kind == "subsequence") return subsequence_filtration(inner(), j.at("indices").get<std::vector<Index>>());
  if (kind == "trivial-factor") return make_filtration_with_trivial_factor(inner(), j.value("k", Index{1}));
  if (kind == "pullback") {
    const Filtration f = inner();
    const Index p = j.value("p", Index{1});
    if (p < 0) throw ConfigError("pullback needs p >= 0");
    const Index d = f.ambient.ambient_dim;
    const SmoothMap g = SmoothMap::linear(Matrix::Identity(d, d + p));
    ImplicitManifold cylinder = preimage(g, catalog::euclidean(d + p), catalog::euclidean(d), f.ambient);
    const ImplicitManifold base = f.ambient;
    cylinder.sampler = [base, p](Rng& rng) { return linalg::concat(base.sample(rng), rng.normal_vector(p)); };
    return pullback_filtration_fredholm(cylinder, g, f);
  }
  throw ConfigError("unknown filtration kind " + kind);
}

}  // namespace dnclab
