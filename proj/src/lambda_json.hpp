#pragma once

// JSON (de)serialization helpers shared by the config and experiment-spec
// parsers; internal to the library.

#include <nlohmann/json.hpp>
#include <stdexcept>

#include "svtmc/sampling.hpp"
#include "svtmc/svt.hpp"

namespace svtmc::detail {

inline LambdaSpec lambda_from_json(const nlohmann::json& l) {
  if (l.is_number()) return l.get<double>();
  if (l.is_object()) {
    std::string rule = l.at("rule").get<std::string>();
    if (rule == "general") {
      GeneralLambdaRule r;
      r.sigma = l.at("sigma").get<double>();
      r.b = l.at("b").get<double>();
      if (l.contains("c_star")) r.c_star = l.at("c_star").get<double>();
      return r;
    }
    if (rule == "dense") {
      return DenseLambdaRule{l.at("b").get<double>()};
    }
    throw std::invalid_argument("lambda: unknown rule '" + rule + "'");
  }
  throw std::invalid_argument("lambda: must be a number or an object");
}

inline nlohmann::json lambda_to_json(const LambdaSpec& spec) {
  nlohmann::json j;
  if (const double* fixed = std::get_if<double>(&spec)) {
    j = *fixed;
  } else if (const auto* g = std::get_if<GeneralLambdaRule>(&spec)) {
    j["rule"] = "general";
    j["sigma"] = g->sigma;
    j["b"] = g->b;
    j["c_star"] = g->c_star;
  } else {
    const auto& d = std::get<DenseLambdaRule>(spec);
    j["rule"] = "dense";
    j["b"] = d.b;
  }
  return j;
}

inline NoiseModel noise_from_json(const nlohmann::json& n) {
  std::string kind = n.at("kind").get<std::string>();
  if (kind == "none") return NoiseModel::none();
  if (kind == "uniform_bounded") {
    return NoiseModel::uniform_bounded(n.at("b").get<double>());
  }
  if (kind == "scaled_rademacher") {
    return NoiseModel::scaled_rademacher(n.at("b").get<double>());
  }
  if (kind == "truncated_gaussian") {
    return NoiseModel::truncated_gaussian(n.at("sigma").get<double>(),
                                          n.at("b").get<double>());
  }
  throw std::invalid_argument("noise: unknown kind '" + kind + "'");
}

inline nlohmann::json noise_to_json(const NoiseModel& n) {
  nlohmann::json j;
  switch (n.kind) {
    case NoiseModel::Kind::none:
      j["kind"] = "none";
      break;
    case NoiseModel::Kind::uniform_bounded:
      j["kind"] = "uniform_bounded";
      j["b"] = n.bound;
      break;
    case NoiseModel::Kind::scaled_rademacher:
      j["kind"] = "scaled_rademacher";
      j["b"] = n.bound;
      break;
    case NoiseModel::Kind::truncated_gaussian:
      j["kind"] = "truncated_gaussian";
      j["sigma"] = n.sigma;
      j["b"] = n.bound;
      break;
  }
  return j;
}

}  // namespace svtmc::detail
