#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "kcause/dataset.hpp"
#include "kcause/kernels.hpp"
#include "kcause/rng.hpp"

namespace kcause {

enum class ScenarioKind {
  BackdoorDiscrete,
  BackdoorLinear,
  FrontdoorDiscrete,
  FusionDiscrete,
  InstrumentLinear,
  ProxyDiscrete,
  NullNoEffect,
};

inline const char* scenario_kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::BackdoorDiscrete: return "backdoor_discrete";
    case ScenarioKind::BackdoorLinear: return "backdoor_linear";
    case ScenarioKind::FrontdoorDiscrete: return "frontdoor_discrete";
    case ScenarioKind::FusionDiscrete: return "fusion_discrete";
    case ScenarioKind::InstrumentLinear: return "instrument_linear";
    case ScenarioKind::ProxyDiscrete: return "proxy_discrete";
    case ScenarioKind::NullNoEffect: return "null_no_effect";
  }
  return "?";
}

inline ScenarioKind scenario_kind_from_name(const std::string& s) {
  if (s == "backdoor_discrete") return ScenarioKind::BackdoorDiscrete;
  if (s == "backdoor_linear") return ScenarioKind::BackdoorLinear;
  if (s == "frontdoor_discrete") return ScenarioKind::FrontdoorDiscrete;
  if (s == "fusion_discrete") return ScenarioKind::FusionDiscrete;
  if (s == "instrument_linear") return ScenarioKind::InstrumentLinear;
  if (s == "proxy_discrete") return ScenarioKind::ProxyDiscrete;
  if (s == "null_no_effect") return ScenarioKind::NullNoEffect;
  throw std::invalid_argument("unknown scenario kind '" + s + "'");
}

// Binary confounder, binary treatment, binary outcome. Indices are [t][x].
struct BackdoorDiscreteParams {
  double p_x1 = 0.5;
  std::array<double, 2> p_t1_given_x{0.3, 0.7};
  std::array<std::array<double, 2>, 2> p_y1_given_tx{{{0.2, 0.4}, {0.7, 0.9}}};
};

struct BackdoorLinearParams {
  double t_on_x = 1.0;
  double noise_t = 1.0;
  double y_on_t = 2.0;
  double y_on_x = 1.0;
  double noise_y = 1.0;
};

// Hidden binary confounder; mediator carries the whole effect. p_y1 is [s][conf].
struct FrontdoorDiscreteParams {
  double p_conf1 = 0.5;
  std::array<double, 2> p_t1_given_conf{0.15, 0.85};
  std::array<double, 2> p_s1_given_t{0.2, 0.8};
  std::array<std::array<double, 2>, 2> p_y1_given_s_conf{{{0.1, 0.5}, {0.5, 0.9}}};
};

// One joint law sampled twice: an outcome dataset observes (s, y), a
// treatment dataset observes (x, t, s). p_s1 is [t][x].
struct FusionDiscreteParams {
  double p_x1 = 0.5;
  std::array<double, 2> p_t1_given_x{0.1, 0.9};
  std::array<std::array<double, 2>, 2> p_s1_given_tx{{{0.1, 0.55}, {0.5, 0.95}}};
  std::array<double, 2> p_y1_given_s{0.2, 0.8};
};

struct InstrumentLinearParams {
  double t_on_z = 1.0;
  double conf_on_t = 1.0;
  double noise_t = 1.0;
  double y_on_t = 2.0;
  double conf_on_y = 1.0;
  double noise_y = 1.0;
};

// Hidden binary confounder with two conditionally independent proxies:
// z on the treatment side, u on the outcome side. p_t1 is [conf][z],
// p_y1 is [t][conf].
struct ProxyDiscreteParams {
  double p_conf1 = 0.5;
  std::array<double, 2> p_z1_given_conf{0.2, 0.8};
  std::array<double, 2> p_u1_given_conf{0.3, 0.8};
  std::array<std::array<double, 2>, 2> p_t1_given_conf_z{{{0.15, 0.45}, {0.5, 0.8}}};
  std::array<std::array<double, 2>, 2> p_y1_given_t_conf{{{0.2, 0.5}, {0.6, 0.9}}};
};

// Confounded treatment with a tunable (default zero) true effect; the
// calibration null for weighted dependence tests.
struct NullNoEffectParams {
  double treatment_effect = 0.0;
  double confounder_on_y = 1.0;
  double noise_y = 1.0;
  double logit_scale = 2.0;
};

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::BackdoorDiscrete;
  std::variant<BackdoorDiscreteParams, BackdoorLinearParams, FrontdoorDiscreteParams,
               FusionDiscreteParams, InstrumentLinearParams, ProxyDiscreteParams,
               NullNoEffectParams>
      params;

  static ScenarioSpec defaults(ScenarioKind kind) {
    ScenarioSpec s;
    s.kind = kind;
    switch (kind) {
      case ScenarioKind::BackdoorDiscrete: s.params = BackdoorDiscreteParams{}; break;
      case ScenarioKind::BackdoorLinear: s.params = BackdoorLinearParams{}; break;
      case ScenarioKind::FrontdoorDiscrete: s.params = FrontdoorDiscreteParams{}; break;
      case ScenarioKind::FusionDiscrete: s.params = FusionDiscreteParams{}; break;
      case ScenarioKind::InstrumentLinear: s.params = InstrumentLinearParams{}; break;
      case ScenarioKind::ProxyDiscrete: s.params = ProxyDiscreteParams{}; break;
      case ScenarioKind::NullNoEffect: s.params = NullNoEffectParams{}; break;
    }
    return s;
  }

  void validate() const;
};

namespace detail {

inline void check_prob(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
  }
}

inline void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
  }
}

inline int as_binary_level(double t) {
  if (t == 0.0) return 0;
  if (t == 1.0) return 1;
  throw std::invalid_argument("discrete scenarios take treatment levels 0 or 1");
}

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace detail

inline void ScenarioSpec::validate() const {
  using detail::check_positive;
  using detail::check_prob;
  switch (kind) {
    case ScenarioKind::BackdoorDiscrete: {
      const auto& p = std::get<BackdoorDiscreteParams>(params);
      check_prob(p.p_x1, "p_x1");
      for (double v : p.p_t1_given_x) check_prob(v, "p_t1_given_x");
      for (const auto& row : p.p_y1_given_tx)
        for (double v : row) check_prob(v, "p_y1_given_tx");
      break;
    }
    case ScenarioKind::BackdoorLinear: {
      const auto& p = std::get<BackdoorLinearParams>(params);
      check_positive(p.noise_t, "noise_t");
      check_positive(p.noise_y, "noise_y");
      break;
    }
    case ScenarioKind::FrontdoorDiscrete: {
      const auto& p = std::get<FrontdoorDiscreteParams>(params);
      check_prob(p.p_conf1, "p_conf1");
      for (double v : p.p_t1_given_conf) check_prob(v, "p_t1_given_conf");
      for (double v : p.p_s1_given_t) check_prob(v, "p_s1_given_t");
      for (const auto& row : p.p_y1_given_s_conf)
        for (double v : row) check_prob(v, "p_y1_given_s_conf");
      break;
    }
    case ScenarioKind::FusionDiscrete: {
      const auto& p = std::get<FusionDiscreteParams>(params);
      check_prob(p.p_x1, "p_x1");
      for (double v : p.p_t1_given_x) check_prob(v, "p_t1_given_x");
      for (const auto& row : p.p_s1_given_tx)
        for (double v : row) check_prob(v, "p_s1_given_tx");
      for (double v : p.p_y1_given_s) check_prob(v, "p_y1_given_s");
      break;
    }
    case ScenarioKind::InstrumentLinear: {
      const auto& p = std::get<InstrumentLinearParams>(params);
      check_positive(p.noise_t, "noise_t");
      check_positive(p.noise_y, "noise_y");
      break;
    }
    case ScenarioKind::ProxyDiscrete: {
      const auto& p = std::get<ProxyDiscreteParams>(params);
      check_prob(p.p_conf1, "p_conf1");
      for (double v : p.p_z1_given_conf) check_prob(v, "p_z1_given_conf");
      for (double v : p.p_u1_given_conf) check_prob(v, "p_u1_given_conf");
      for (const auto& row : p.p_t1_given_conf_z)
        for (double v : row) check_prob(v, "p_t1_given_conf_z");
      for (const auto& row : p.p_y1_given_t_conf)
        for (double v : row) check_prob(v, "p_y1_given_t_conf");
      break;
    }
    case ScenarioKind::NullNoEffect: {
      const auto& p = std::get<NullNoEffectParams>(params);
      check_positive(p.noise_y, "noise_y");
      check_positive(p.logit_scale, "logit_scale");
      break;
    }
  }
}

inline bool scenario_has_discrete_outcome(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::BackdoorDiscrete:
    case ScenarioKind::FrontdoorDiscrete:
    case ScenarioKind::FusionDiscrete:
    case ScenarioKind::ProxyDiscrete:
      return true;
    default:
      return false;
  }
}

namespace detail {

struct FusionRow {
  double x, t, s, y;
};

inline FusionRow sample_fusion_row(const FusionDiscreteParams& p, Rng& rng) {
  const int x = rng.bernoulli(p.p_x1) ? 1 : 0;
  const int t = rng.bernoulli(p.p_t1_given_x[x]) ? 1 : 0;
  const int s = rng.bernoulli(p.p_s1_given_tx[t][x]) ? 1 : 0;
  const int y = rng.bernoulli(p.p_y1_given_s[s]) ? 1 : 0;
  return {static_cast<double>(x), static_cast<double>(t), static_cast<double>(s),
          static_cast<double>(y)};
}

}  // namespace detail

/// Observational sample of n rows. Column layout and roles are fixed per
/// kind; hidden confounders are sampled but never emitted.
inline CausalDataset generate(const ScenarioSpec& spec, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("scenario sample size must be >= 1");
  spec.validate();
  Rng rng(seed);
  CausalDataset data;

  const auto finish = [&](std::initializer_list<std::pair<Role, const char*>> roles) {
    for (const auto& [role, col] : roles) data.set_role(role, {col});
    return data;
  };

  switch (spec.kind) {
    case ScenarioKind::BackdoorDiscrete: {
      const auto& p = std::get<BackdoorDiscreteParams>(spec.params);
      Eigen::VectorXd x(n), t(n), y(n);
      for (int i = 0; i < n; ++i) {
        const int xi = rng.bernoulli(p.p_x1) ? 1 : 0;
        const int ti = rng.bernoulli(p.p_t1_given_x[xi]) ? 1 : 0;
        const int yi = rng.bernoulli(p.p_y1_given_tx[ti][xi]) ? 1 : 0;
        x(i) = xi; t(i) = ti; y(i) = yi;
      }
      data.add_column("x", x);
      data.add_column("t", t);
      data.add_column("y", y);
      return finish({{Role::X, "x"}, {Role::T, "t"}, {Role::Y, "y"}});
    }
    case ScenarioKind::BackdoorLinear: {
      const auto& p = std::get<BackdoorLinearParams>(spec.params);
      Eigen::VectorXd x(n), t(n), y(n);
      for (int i = 0; i < n; ++i) {
        x(i) = rng.normal();
        t(i) = p.t_on_x * x(i) + p.noise_t * rng.normal();
        y(i) = p.y_on_t * t(i) + p.y_on_x * x(i) + p.noise_y * rng.normal();
      }
      data.add_column("x", x);
      data.add_column("t", t);
      data.add_column("y", y);
      return finish({{Role::X, "x"}, {Role::T, "t"}, {Role::Y, "y"}});
    }
    case ScenarioKind::FrontdoorDiscrete: {
      const auto& p = std::get<FrontdoorDiscreteParams>(spec.params);
      Eigen::VectorXd t(n), s(n), y(n);
      for (int i = 0; i < n; ++i) {
        const int conf = rng.bernoulli(p.p_conf1) ? 1 : 0;
        const int ti = rng.bernoulli(p.p_t1_given_conf[conf]) ? 1 : 0;
        const int si = rng.bernoulli(p.p_s1_given_t[ti]) ? 1 : 0;
        const int yi = rng.bernoulli(p.p_y1_given_s_conf[si][conf]) ? 1 : 0;
        t(i) = ti; s(i) = si; y(i) = yi;
      }
      data.add_column("t", t);
      data.add_column("s", s);
      data.add_column("y", y);
      return finish({{Role::T, "t"}, {Role::S, "s"}, {Role::Y, "y"}});
    }
    case ScenarioKind::FusionDiscrete: {
      const auto& p = std::get<FusionDiscreteParams>(spec.params);
      Eigen::VectorXd x(n), t(n), s(n), y(n);
      for (int i = 0; i < n; ++i) {
        const auto row = detail::sample_fusion_row(p, rng);
        x(i) = row.x; t(i) = row.t; s(i) = row.s; y(i) = row.y;
      }
      data.add_column("x", x);
      data.add_column("t", t);
      data.add_column("s", s);
      data.add_column("y", y);
      return finish({{Role::X, "x"}, {Role::T, "t"}, {Role::S, "s"}, {Role::Y, "y"}});
    }
    case ScenarioKind::InstrumentLinear: {
      const auto& p = std::get<InstrumentLinearParams>(spec.params);
      Eigen::VectorXd z(n), t(n), y(n);
      for (int i = 0; i < n; ++i) {
        z(i) = rng.normal();
        const double conf = rng.normal();
        t(i) = p.t_on_z * z(i) + p.conf_on_t * conf + p.noise_t * rng.normal();
        y(i) = p.y_on_t * t(i) + p.conf_on_y * conf + p.noise_y * rng.normal();
      }
      data.add_column("z", z);
      data.add_column("t", t);
      data.add_column("y", y);
      return finish({{Role::Z, "z"}, {Role::T, "t"}, {Role::Y, "y"}});
    }
    case ScenarioKind::ProxyDiscrete: {
      const auto& p = std::get<ProxyDiscreteParams>(spec.params);
      Eigen::VectorXd t(n), z(n), u(n), y(n);
      for (int i = 0; i < n; ++i) {
        const int conf = rng.bernoulli(p.p_conf1) ? 1 : 0;
        const int zi = rng.bernoulli(p.p_z1_given_conf[conf]) ? 1 : 0;
        const int ui = rng.bernoulli(p.p_u1_given_conf[conf]) ? 1 : 0;
        const int ti = rng.bernoulli(p.p_t1_given_conf_z[conf][zi]) ? 1 : 0;
        const int yi = rng.bernoulli(p.p_y1_given_t_conf[ti][conf]) ? 1 : 0;
        t(i) = ti; z(i) = zi; u(i) = ui; y(i) = yi;
      }
      data.add_column("t", t);
      data.add_column("z", z);
      data.add_column("u", u);
      data.add_column("y", y);
      return finish({{Role::T, "t"}, {Role::Z, "z"}, {Role::U, "u"}, {Role::Y, "y"}});
    }
    case ScenarioKind::NullNoEffect: {
      const auto& p = std::get<NullNoEffectParams>(spec.params);
      Eigen::VectorXd x(n), t(n), y(n);
      for (int i = 0; i < n; ++i) {
        x(i) = rng.normal();
        t(i) = rng.bernoulli(detail::sigmoid(p.logit_scale * x(i))) ? 1.0 : 0.0;
        y(i) = p.treatment_effect * t(i) + p.confounder_on_y * x(i) +
               p.noise_y * rng.normal();
      }
      data.add_column("x", x);
      data.add_column("t", t);
      data.add_column("y", y);
      return finish({{Role::X, "x"}, {Role::T, "t"}, {Role::Y, "y"}});
    }
  }
  throw std::logic_error("unreachable scenario kind");
}

/// Two unmatched samples of the same fusion law: the first observes (s, y),
/// the second (x, t, s). Draws are independent across the two datasets.
inline std::pair<CausalDataset, CausalDataset> generate_fusion_pair(
    const ScenarioSpec& spec, int n_outcome, int n_treatment, std::uint64_t seed) {
  if (spec.kind != ScenarioKind::FusionDiscrete) {
    throw std::invalid_argument("fusion pair generation needs a fusion scenario");
  }
  if (n_outcome < 1 || n_treatment < 1) {
    throw std::invalid_argument("scenario sample size must be >= 1");
  }
  spec.validate();
  const auto& p = std::get<FusionDiscreteParams>(spec.params);

  Rng rng1(derive_seed(seed, "fusion-outcome"));
  CausalDataset outcome;
  {
    Eigen::VectorXd s(n_outcome), y(n_outcome);
    for (int i = 0; i < n_outcome; ++i) {
      const auto row = detail::sample_fusion_row(p, rng1);
      s(i) = row.s;
      y(i) = row.y;
    }
    outcome.add_column("s", s);
    outcome.add_column("y", y);
    outcome.set_role(Role::S, {"s"});
    outcome.set_role(Role::Y, {"y"});
  }

  Rng rng2(derive_seed(seed, "fusion-treatment"));
  CausalDataset treatment;
  {
    Eigen::VectorXd x(n_treatment), t(n_treatment), s(n_treatment);
    for (int i = 0; i < n_treatment; ++i) {
      const auto row = detail::sample_fusion_row(p, rng2);
      x(i) = row.x;
      t(i) = row.t;
      s(i) = row.s;
    }
    treatment.add_column("x", x);
    treatment.add_column("t", t);
    treatment.add_column("s", s);
    treatment.set_role(Role::X, {"x"});
    treatment.set_role(Role::T, {"t"});
    treatment.set_role(Role::S, {"s"});
  }
  return {std::move(outcome), std::move(treatment)};
}

/// Exact interventional mean E[Y | do(T = t)], by enumeration for the
/// discrete kinds and in closed form for the linear ones.
inline double oracle_ate(const ScenarioSpec& spec, double t) {
  spec.validate();
  switch (spec.kind) {
    case ScenarioKind::BackdoorDiscrete: {
      const auto& p = std::get<BackdoorDiscreteParams>(spec.params);
      const int ti = detail::as_binary_level(t);
      double acc = 0.0;
      for (int x = 0; x < 2; ++x) {
        const double px = x == 1 ? p.p_x1 : 1.0 - p.p_x1;
        acc += px * p.p_y1_given_tx[ti][x];
      }
      return acc;
    }
    case ScenarioKind::BackdoorLinear:
      return std::get<BackdoorLinearParams>(spec.params).y_on_t * t;
    case ScenarioKind::FrontdoorDiscrete: {
      const auto& p = std::get<FrontdoorDiscreteParams>(spec.params);
      const int ti = detail::as_binary_level(t);
      double acc = 0.0;
      for (int s = 0; s < 2; ++s) {
        const double ps = s == 1 ? p.p_s1_given_t[ti] : 1.0 - p.p_s1_given_t[ti];
        for (int conf = 0; conf < 2; ++conf) {
          const double pc = conf == 1 ? p.p_conf1 : 1.0 - p.p_conf1;
          acc += ps * pc * p.p_y1_given_s_conf[s][conf];
        }
      }
      return acc;
    }
    case ScenarioKind::FusionDiscrete: {
      const auto& p = std::get<FusionDiscreteParams>(spec.params);
      const int ti = detail::as_binary_level(t);
      double acc = 0.0;
      for (int x = 0; x < 2; ++x) {
        const double px = x == 1 ? p.p_x1 : 1.0 - p.p_x1;
        for (int s = 0; s < 2; ++s) {
          const double ps =
              s == 1 ? p.p_s1_given_tx[ti][x] : 1.0 - p.p_s1_given_tx[ti][x];
          acc += px * ps * p.p_y1_given_s[s];
        }
      }
      return acc;
    }
    case ScenarioKind::InstrumentLinear:
      return std::get<InstrumentLinearParams>(spec.params).y_on_t * t;
    case ScenarioKind::ProxyDiscrete: {
      const auto& p = std::get<ProxyDiscreteParams>(spec.params);
      const int ti = detail::as_binary_level(t);
      double acc = 0.0;
      for (int conf = 0; conf < 2; ++conf) {
        const double pc = conf == 1 ? p.p_conf1 : 1.0 - p.p_conf1;
        acc += pc * p.p_y1_given_t_conf[ti][conf];
      }
      return acc;
    }
    case ScenarioKind::NullNoEffect:
      return std::get<NullNoEffectParams>(spec.params).treatment_effect * t;
  }
  throw std::logic_error("unreachable scenario kind");
}

struct OracleResult {
  std::map<double, double> ate;
  // t -> [(y, probability)] for the binary-outcome kinds; empty otherwise.
  std::map<double, std::vector<std::pair<double, double>>> interventional_pmf;
};

inline OracleResult oracle(const ScenarioSpec& spec,
                           const std::vector<double>& treatment_values = {0.0, 1.0}) {
  OracleResult out;
  for (double t : treatment_values) {
    const double mean = oracle_ate(spec, t);
    out.ate[t] = mean;
    if (scenario_has_discrete_outcome(spec.kind)) {
      out.interventional_pmf[t] = {{0.0, 1.0 - mean}, {1.0, mean}};
    }
  }
  return out;
}

/// The outcome-proxy conditional moment matrix M[z][u] = p(U = u | T = t, Z = z).
/// Its conditioning governs how well the bridge-function system can be solved.
inline Eigen::Matrix2d proxy_bridge_matrix(const ScenarioSpec& spec, double t) {
  if (spec.kind != ScenarioKind::ProxyDiscrete) {
    throw std::invalid_argument("bridge system is defined for the proxy scenario only");
  }
  spec.validate();
  const auto& p = std::get<ProxyDiscreteParams>(spec.params);
  const int ti = detail::as_binary_level(t);
  Eigen::Matrix2d m;
  for (int z = 0; z < 2; ++z) {
    double joint[2];
    for (int conf = 0; conf < 2; ++conf) {
      const double pc = conf == 1 ? p.p_conf1 : 1.0 - p.p_conf1;
      const double pz = z == 1 ? p.p_z1_given_conf[conf] : 1.0 - p.p_z1_given_conf[conf];
      const double pt = ti == 1 ? p.p_t1_given_conf_z[conf][z]
                                : 1.0 - p.p_t1_given_conf_z[conf][z];
      joint[conf] = pc * pz * pt;
    }
    const double total = joint[0] + joint[1];
    if (!(total > 0.0)) {
      throw std::invalid_argument("proxy scenario puts zero mass on a (t, z) cell");
    }
    const double pconf1 = joint[1] / total;
    const double pu1 = (1.0 - pconf1) * p.p_u1_given_conf[0] + pconf1 * p.p_u1_given_conf[1];
    m(z, 0) = 1.0 - pu1;
    m(z, 1) = pu1;
  }
  return m;
}

/// Interventional mean for the proxy scenario through the bridge-function
/// route: solve M h = E[Y | t, z] for h(t, .), then average h over the
/// marginal of U. Identifiability makes this agree with oracle_ate.
inline double proxy_bridge_ate(const ScenarioSpec& spec, double t) {
  if (spec.kind != ScenarioKind::ProxyDiscrete) {
    throw std::invalid_argument("bridge system is defined for the proxy scenario only");
  }
  spec.validate();
  const auto& p = std::get<ProxyDiscreteParams>(spec.params);
  const int ti = detail::as_binary_level(t);
  const Eigen::Matrix2d m = proxy_bridge_matrix(spec, t);

  Eigen::Vector2d b;
  for (int z = 0; z < 2; ++z) {
    double joint[2];
    for (int conf = 0; conf < 2; ++conf) {
      const double pc = conf == 1 ? p.p_conf1 : 1.0 - p.p_conf1;
      const double pz = z == 1 ? p.p_z1_given_conf[conf] : 1.0 - p.p_z1_given_conf[conf];
      const double pt = ti == 1 ? p.p_t1_given_conf_z[conf][z]
                                : 1.0 - p.p_t1_given_conf_z[conf][z];
      joint[conf] = pc * pz * pt;
    }
    const double total = joint[0] + joint[1];
    const double pconf1 = joint[1] / total;
    b(z) = (1.0 - pconf1) * p.p_y1_given_t_conf[ti][0] +
           pconf1 * p.p_y1_given_t_conf[ti][1];
  }

  const Eigen::Vector2d h = m.fullPivLu().solve(b);
  const double pu1 = (1.0 - p.p_conf1) * p.p_u1_given_conf[0] +
                     p.p_conf1 * p.p_u1_given_conf[1];
  return (1.0 - pu1) * h(0) + pu1 * h(1);
}

/// RKHS evaluation of the exact interventional embedding at y:
/// sum_y' p(y' | do t) k(y, y'). Defined for discrete-outcome kinds.
inline double oracle_ime_eval(const ScenarioSpec& spec, double t, double y,
                              const KernelSpec& output_spec) {
  if (!scenario_has_discrete_outcome(spec.kind)) {
    throw std::invalid_argument(
        "interventional embedding oracle needs a discrete outcome; use "
        "monte_carlo_interventional for continuous kinds");
  }
  const double p1 = oracle_ate(spec, t);
  const Eigen::VectorXd point = Eigen::VectorXd::Constant(1, y);
  return (1.0 - p1) * eval_kernel(output_spec, point, Eigen::VectorXd::Zero(1)) +
         p1 * eval_kernel(output_spec, point, Eigen::VectorXd::Ones(1));
}

/// Monte Carlo draws of Y under do(T = t): the treatment mechanism is cut
/// and everything downstream is resampled.
inline Eigen::VectorXd monte_carlo_interventional(const ScenarioSpec& spec, double t,
                                                  int draws, std::uint64_t seed) {
  if (draws < 1) throw std::invalid_argument("monte carlo needs >= 1 draws");
  spec.validate();
  Rng rng(seed);
  Eigen::VectorXd y(draws);
  switch (spec.kind) {
    case ScenarioKind::BackdoorDiscrete: {
      const auto& p = std::get<BackdoorDiscreteParams>(spec.params);
      const int ti = detail::as_binary_level(t);
      for (int i = 0; i < draws; ++i) {
        const int x = rng.bernoulli(p.p_x1) ? 1 : 0;
        y(i) = rng.bernoulli(p.p_y1_given_tx[ti][x]) ? 1.0 : 0.0;
      }
      return y;
    }
    case ScenarioKind::BackdoorLinear: {
      const auto& p = std::get<BackdoorLinearParams>(spec.params);
      for (int i = 0; i < draws; ++i) {
        y(i) = p.y_on_t * t + p.y_on_x * rng.normal() + p.noise_y * rng.normal();
      }
      return y;
    }
    case ScenarioKind::FrontdoorDiscrete: {
      const auto& p = std::get<FrontdoorDiscreteParams>(spec.params);
      const int ti = detail::as_binary_level(t);
      for (int i = 0; i < draws; ++i) {
        const int conf = rng.bernoulli(p.p_conf1) ? 1 : 0;
        const int s = rng.bernoulli(p.p_s1_given_t[ti]) ? 1 : 0;
        y(i) = rng.bernoulli(p.p_y1_given_s_conf[s][conf]) ? 1.0 : 0.0;
      }
      return y;
    }
    case ScenarioKind::FusionDiscrete: {
      const auto& p = std::get<FusionDiscreteParams>(spec.params);
      const int ti = detail::as_binary_level(t);
      for (int i = 0; i < draws; ++i) {
        const int x = rng.bernoulli(p.p_x1) ? 1 : 0;
        const int s = rng.bernoulli(p.p_s1_given_tx[ti][x]) ? 1 : 0;
        y(i) = rng.bernoulli(p.p_y1_given_s[s]) ? 1.0 : 0.0;
      }
      return y;
    }
    case ScenarioKind::InstrumentLinear: {
      const auto& p = std::get<InstrumentLinearParams>(spec.params);
      for (int i = 0; i < draws; ++i) {
        y(i) = p.y_on_t * t + p.conf_on_y * rng.normal() + p.noise_y * rng.normal();
      }
      return y;
    }
    case ScenarioKind::ProxyDiscrete: {
      const auto& p = std::get<ProxyDiscreteParams>(spec.params);
      const int ti = detail::as_binary_level(t);
      for (int i = 0; i < draws; ++i) {
        const int conf = rng.bernoulli(p.p_conf1) ? 1 : 0;
        y(i) = rng.bernoulli(p.p_y1_given_t_conf[ti][conf]) ? 1.0 : 0.0;
      }
      return y;
    }
    case ScenarioKind::NullNoEffect: {
      const auto& p = std::get<NullNoEffectParams>(spec.params);
      for (int i = 0; i < draws; ++i) {
        y(i) = p.treatment_effect * t + p.confounder_on_y * rng.normal() +
               p.noise_y * rng.normal();
      }
      return y;
    }
  }
  throw std::logic_error("unreachable scenario kind");
}

}  // namespace kcause
