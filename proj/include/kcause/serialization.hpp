#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "kcause/embeddings.hpp"
#include "kcause/errors.hpp"
#include "kcause/kernels.hpp"
#include "kcause/scenarios.hpp"

namespace kcause {

using json = nlohmann::ordered_json;

inline json kernel_spec_to_json(const KernelSpec& spec) {
  json j;
  switch (spec.family) {
    case KernelSpec::Family::Gaussian:
      j["family"] = "gaussian";
      j["bandwidth"] = spec.bandwidth;
      break;
    case KernelSpec::Family::Matern:
      j["family"] = "matern";
      j["smoothness"] = spec.smoothness;
      j["lengthscale"] = spec.lengthscale;
      break;
    case KernelSpec::Family::Linear:
      j["family"] = "linear";
      break;
    case KernelSpec::Family::Product: {
      j["family"] = "product";
      json factors = json::object();
      for (const auto& f : spec.factors) {
        json fj = kernel_spec_to_json(f.spec);
        if (f.dim != 1) fj["dim"] = f.dim;
        factors[f.name] = std::move(fj);
      }
      j["factors"] = std::move(factors);
      break;
    }
  }
  return j;
}

namespace detail {

inline double require_number(const json& j, const std::string& field) {
  if (!j.contains(field)) throw ConfigError(field, "missing");
  if (!j.at(field).is_number()) throw ConfigError(field, "must be a number");
  return j.at(field).get<double>();
}

}  // namespace detail

inline KernelSpec kernel_spec_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("kernel", "must be an object");
  if (!j.contains("family") || !j.at("family").is_string()) {
    throw ConfigError("kernel.family", "missing or not a string");
  }
  const std::string family = j.at("family").get<std::string>();
  try {
    if (family == "gaussian") {
      return KernelSpec::gaussian(detail::require_number(j, "bandwidth"));
    }
    if (family == "matern") {
      return KernelSpec::matern(detail::require_number(j, "smoothness"),
                                detail::require_number(j, "lengthscale"));
    }
    if (family == "linear") {
      return KernelSpec::linear();
    }
    if (family == "product") {
      if (!j.contains("factors") || !j.at("factors").is_object()) {
        throw ConfigError("kernel.factors", "product kernel needs a factors object");
      }
      std::vector<KernelSpec::Factor> factors;
      for (const auto& [name, fj] : j.at("factors").items()) {
        KernelSpec::Factor f;
        f.name = name;
        f.spec = kernel_spec_from_json(fj);
        f.dim = fj.contains("dim") ? fj.at("dim").get<int>() : 1;
        factors.push_back(std::move(f));
      }
      return KernelSpec::product(std::move(factors));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("kernel", e.what());
  }
  throw ConfigError("kernel.family", "unknown family '" + family + "'");
}

inline json test_result_to_json(const TestResult& r) {
  json j;
  j["statistic"] = r.statistic;
  j["p_value"] = r.p_value;
  j["permutations"] = r.permutations;
  j["seed"] = r.seed;
  return j;
}

inline TestResult test_result_from_json(const json& j) {
  TestResult r;
  r.statistic = detail::require_number(j, "statistic");
  r.p_value = detail::require_number(j, "p_value");
  r.permutations = static_cast<int>(detail::require_number(j, "permutations"));
  if (!j.contains("seed")) throw ConfigError("seed", "missing");
  r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

namespace detail {

inline void read_if_present(const json& j, const char* field, double& into) {
  if (j.contains(field)) into = require_number(j, field);
}

template <std::size_t N>
inline void read_if_present(const json& j, const char* field, std::array<double, N>& into) {
  if (!j.contains(field)) return;
  const auto& arr = j.at(field);
  if (!arr.is_array() || arr.size() != N) {
    throw ConfigError(field, "must be an array of " + std::to_string(N) + " numbers");
  }
  for (std::size_t i = 0; i < N; ++i) into[i] = arr[i].get<double>();
}

template <std::size_t N>
inline void read_if_present(const json& j, const char* field,
                            std::array<std::array<double, N>, N>& into) {
  if (!j.contains(field)) return;
  const auto& arr = j.at(field);
  if (!arr.is_array() || arr.size() != N) {
    throw ConfigError(field, "must be an " + std::to_string(N) + "x" + std::to_string(N) +
                                 " array");
  }
  for (std::size_t i = 0; i < N; ++i) {
    if (!arr[i].is_array() || arr[i].size() != N) {
      throw ConfigError(field, "must be an " + std::to_string(N) + "x" +
                                   std::to_string(N) + " array");
    }
    for (std::size_t k = 0; k < N; ++k) into[i][k] = arr[i][k].get<double>();
  }
}

template <typename Params>
inline json params_to_json(const Params&);

template <>
inline json params_to_json(const BackdoorDiscreteParams& p) {
  return {{"p_x1", p.p_x1},
          {"p_t1_given_x", p.p_t1_given_x},
          {"p_y1_given_tx", p.p_y1_given_tx}};
}
template <>
inline json params_to_json(const BackdoorLinearParams& p) {
  return {{"t_on_x", p.t_on_x},
          {"noise_t", p.noise_t},
          {"y_on_t", p.y_on_t},
          {"y_on_x", p.y_on_x},
          {"noise_y", p.noise_y}};
}
template <>
inline json params_to_json(const FrontdoorDiscreteParams& p) {
  return {{"p_conf1", p.p_conf1},
          {"p_t1_given_conf", p.p_t1_given_conf},
          {"p_s1_given_t", p.p_s1_given_t},
          {"p_y1_given_s_conf", p.p_y1_given_s_conf}};
}
template <>
inline json params_to_json(const FusionDiscreteParams& p) {
  return {{"p_x1", p.p_x1},
          {"p_t1_given_x", p.p_t1_given_x},
          {"p_s1_given_tx", p.p_s1_given_tx},
          {"p_y1_given_s", p.p_y1_given_s}};
}
template <>
inline json params_to_json(const InstrumentLinearParams& p) {
  return {{"t_on_z", p.t_on_z},   {"conf_on_t", p.conf_on_t}, {"noise_t", p.noise_t},
          {"y_on_t", p.y_on_t},   {"conf_on_y", p.conf_on_y}, {"noise_y", p.noise_y}};
}
template <>
inline json params_to_json(const ProxyDiscreteParams& p) {
  return {{"p_conf1", p.p_conf1},
          {"p_z1_given_conf", p.p_z1_given_conf},
          {"p_u1_given_conf", p.p_u1_given_conf},
          {"p_t1_given_conf_z", p.p_t1_given_conf_z},
          {"p_y1_given_t_conf", p.p_y1_given_t_conf}};
}
template <>
inline json params_to_json(const NullNoEffectParams& p) {
  return {{"treatment_effect", p.treatment_effect},
          {"confounder_on_y", p.confounder_on_y},
          {"noise_y", p.noise_y},
          {"logit_scale", p.logit_scale}};
}

}  // namespace detail

inline json scenario_spec_to_json(const ScenarioSpec& spec) {
  json j;
  j["kind"] = scenario_kind_name(spec.kind);
  j["parameters"] = std::visit(
      [](const auto& p) { return detail::params_to_json(p); }, spec.params);
  return j;
}

/// Parse a scenario spec. Parameters not present keep their defaults; the
/// assembled spec is validated before returning.
inline ScenarioSpec scenario_spec_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw ConfigError("scenario.kind", "missing or not a string");
  }
  ScenarioSpec spec;
  try {
    spec = ScenarioSpec::defaults(scenario_kind_from_name(j.at("kind").get<std::string>()));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("scenario.kind", e.what());
  }
  const json params = j.contains("parameters") ? j.at("parameters") : json::object();
  if (!params.is_object()) throw ConfigError("scenario.parameters", "must be an object");

  using detail::read_if_present;
  switch (spec.kind) {
    case ScenarioKind::BackdoorDiscrete: {
      auto& p = std::get<BackdoorDiscreteParams>(spec.params);
      read_if_present(params, "p_x1", p.p_x1);
      read_if_present(params, "p_t1_given_x", p.p_t1_given_x);
      read_if_present(params, "p_y1_given_tx", p.p_y1_given_tx);
      break;
    }
    case ScenarioKind::BackdoorLinear: {
      auto& p = std::get<BackdoorLinearParams>(spec.params);
      read_if_present(params, "t_on_x", p.t_on_x);
      read_if_present(params, "noise_t", p.noise_t);
      read_if_present(params, "y_on_t", p.y_on_t);
      read_if_present(params, "y_on_x", p.y_on_x);
      read_if_present(params, "noise_y", p.noise_y);
      break;
    }
    case ScenarioKind::FrontdoorDiscrete: {
      auto& p = std::get<FrontdoorDiscreteParams>(spec.params);
      read_if_present(params, "p_conf1", p.p_conf1);
      read_if_present(params, "p_t1_given_conf", p.p_t1_given_conf);
      read_if_present(params, "p_s1_given_t", p.p_s1_given_t);
      read_if_present(params, "p_y1_given_s_conf", p.p_y1_given_s_conf);
      break;
    }
    case ScenarioKind::FusionDiscrete: {
      auto& p = std::get<FusionDiscreteParams>(spec.params);
      read_if_present(params, "p_x1", p.p_x1);
      read_if_present(params, "p_t1_given_x", p.p_t1_given_x);
      read_if_present(params, "p_s1_given_tx", p.p_s1_given_tx);
      read_if_present(params, "p_y1_given_s", p.p_y1_given_s);
      break;
    }
    case ScenarioKind::InstrumentLinear: {
      auto& p = std::get<InstrumentLinearParams>(spec.params);
      read_if_present(params, "t_on_z", p.t_on_z);
      read_if_present(params, "conf_on_t", p.conf_on_t);
      read_if_present(params, "noise_t", p.noise_t);
      read_if_present(params, "y_on_t", p.y_on_t);
      read_if_present(params, "conf_on_y", p.conf_on_y);
      read_if_present(params, "noise_y", p.noise_y);
      break;
    }
    case ScenarioKind::ProxyDiscrete: {
      auto& p = std::get<ProxyDiscreteParams>(spec.params);
      read_if_present(params, "p_conf1", p.p_conf1);
      read_if_present(params, "p_z1_given_conf", p.p_z1_given_conf);
      read_if_present(params, "p_u1_given_conf", p.p_u1_given_conf);
      read_if_present(params, "p_t1_given_conf_z", p.p_t1_given_conf_z);
      read_if_present(params, "p_y1_given_t_conf", p.p_y1_given_t_conf);
      break;
    }
    case ScenarioKind::NullNoEffect: {
      auto& p = std::get<NullNoEffectParams>(spec.params);
      read_if_present(params, "treatment_effect", p.treatment_effect);
      read_if_present(params, "confounder_on_y", p.confounder_on_y);
      read_if_present(params, "noise_y", p.noise_y);
      read_if_present(params, "logit_scale", p.logit_scale);
      break;
    }
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("scenario.parameters", e.what());
  }
  return spec;
}

}  // namespace kcause
