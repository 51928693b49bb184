#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kcause/csv.hpp"
#include "kcause/dataset.hpp"
#include "kcause/errors.hpp"
#include "kcause/estimators.hpp"
#include "kcause/scenarios.hpp"
#include "kcause/serialization.hpp"
#include "kcause/weighting.hpp"

namespace kcause {

enum class TaskKind { Estimate, Test, Simulate, Benchmark };

inline const char* task_name(TaskKind t) {
  switch (t) {
    case TaskKind::Estimate: return "estimate";
    case TaskKind::Test: return "test";
    case TaskKind::Simulate: return "simulate";
    case TaskKind::Benchmark: return "benchmark";
  }
  return "?";
}

/// One fully described run: an input source (scenario or CSV), a task and
/// its parameters, and the shared numeric knobs. Every random quantity in
/// the run derives from `seed` through named substreams.
struct RunConfig {
  TaskKind task = TaskKind::Estimate;

  std::optional<std::string> csv_path;
  std::map<Role, std::vector<std::string>> role_map;
  std::optional<std::string> csv_path2;  // fusion: treatment-side dataset
  std::map<Role, std::vector<std::string>> role_map2;
  std::optional<ScenarioSpec> scenario;
  int n = 500;
  int n2 = -1;  // fusion: treatment-side rows, defaults to n

  std::string estimator;  // backdoor | fusion | frontdoor | instrument | proxy
  std::vector<double> treatment_values;
  std::vector<double> outcome_grid;
  std::optional<Eigen::VectorXd> modifier_point;

  std::string test_kind;  // mmd | hsic | backdoor_hsic

  std::string simulate_path;

  std::vector<int> n_values;
  int replications = 5;

  EstimatorConfig est;
  std::uint64_t seed = 0;
  std::optional<std::string> output_path;
};

namespace detail {

inline const json& require_field(const json& j, const std::string& field,
                                 const std::string& path = {}) {
  if (!j.contains(field)) throw ConfigError(path.empty() ? field : path, "missing");
  return j.at(field);
}

inline std::string require_string(const json& j, const std::string& field) {
  const json& v = require_field(j, field);
  if (!v.is_string()) throw ConfigError(field, "must be a string");
  return v.get<std::string>();
}

inline std::vector<double> number_array(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) throw ConfigError(field, "must be a non-empty array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(field, "must contain numbers only");
    out.push_back(e.get<double>());
  }
  return out;
}

inline std::map<Role, std::vector<std::string>> parse_role_map(const json& v,
                                                               const std::string& field) {
  if (!v.is_object() || v.empty()) {
    throw ConfigError(field, "must be an object mapping roles to column names");
  }
  std::map<Role, std::vector<std::string>> out;
  for (const auto& [key, val] : v.items()) {
    Role role;
    try {
      role = role_from_name(key);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(field + "." + key, e.what());
    }
    std::vector<std::string> cols;
    if (val.is_string()) {
      cols.push_back(val.get<std::string>());
    } else if (val.is_array()) {
      for (const auto& e : val) {
        if (!e.is_string()) throw ConfigError(field + "." + key, "must be column names");
        cols.push_back(e.get<std::string>());
      }
    } else {
      throw ConfigError(field + "." + key, "must be a column name or array of them");
    }
    if (cols.empty()) throw ConfigError(field + "." + key, "needs at least one column");
    out[role] = std::move(cols);
  }
  return out;
}

}  // namespace detail

/// Parse and validate a task configuration. Field errors throw ConfigError
/// naming the offending field.
inline RunConfig parse_run_config(const json& j, TaskKind task) {
  if (!j.is_object()) throw ConfigError("config", "must be a JSON object");
  RunConfig cfg;
  cfg.task = task;

  const json& input = detail::require_field(j, "input");
  if (!input.is_object()) throw ConfigError("input", "must be an object");
  const bool has_csv = input.contains("csv");
  const bool has_scenario = input.contains("scenario");
  if (has_csv == has_scenario) {
    throw ConfigError("input", "needs exactly one of 'csv' or 'scenario'");
  }
  if (has_csv) {
    if (!input.at("csv").is_string()) throw ConfigError("input.csv", "must be a path string");
    cfg.csv_path = input.at("csv").get<std::string>();
    cfg.role_map = detail::parse_role_map(
        detail::require_field(input, "roles", "input.roles"), "input.roles");
  } else {
    cfg.scenario = scenario_spec_from_json(input.at("scenario"));
    if (input.contains("n")) {
      if (!input.at("n").is_number_integer() || input.at("n").get<int>() < 2) {
        throw ConfigError("input.n", "must be an integer >= 2");
      }
      cfg.n = input.at("n").get<int>();
    }
    if (input.contains("n2")) {
      if (!input.at("n2").is_number_integer() || input.at("n2").get<int>() < 2) {
        throw ConfigError("input.n2", "must be an integer >= 2");
      }
      cfg.n2 = input.at("n2").get<int>();
    }
  }
  if (j.contains("input2")) {
    const json& input2 = j.at("input2");
    if (!input2.is_object() || !input2.contains("csv")) {
      throw ConfigError("input2", "must be an object with 'csv' and 'roles'");
    }
    cfg.csv_path2 = input2.at("csv").get<std::string>();
    cfg.role_map2 = detail::parse_role_map(
        detail::require_field(input2, "roles", "input2.roles"), "input2.roles");
  }

  if (task == TaskKind::Estimate || task == TaskKind::Benchmark) {
    cfg.estimator = detail::require_string(j, "estimator");
    const bool known = cfg.estimator == "backdoor" || cfg.estimator == "fusion" ||
                       cfg.estimator == "frontdoor" || cfg.estimator == "instrument" ||
                       cfg.estimator == "proxy";
    if (!known) {
      throw ConfigError("estimator", "unknown estimator '" + cfg.estimator + "'");
    }
  }
  if (task == TaskKind::Test) {
    cfg.test_kind = detail::require_string(j, "test");
    if (cfg.test_kind != "mmd" && cfg.test_kind != "hsic" &&
        cfg.test_kind != "backdoor_hsic") {
      throw ConfigError("test", "unknown test '" + cfg.test_kind + "'");
    }
  }
  if (task == TaskKind::Simulate) {
    if (!cfg.scenario) throw ConfigError("input.scenario", "simulate needs a scenario input");
    cfg.simulate_path = detail::require_string(j, "output_csv");
  }
  if (task == TaskKind::Benchmark) {
    if (!cfg.scenario) throw ConfigError("input.scenario", "benchmark needs a scenario input");
    const json& nv = detail::require_field(j, "n_values");
    if (!nv.is_array() || nv.empty()) throw ConfigError("n_values", "must be a non-empty array");
    for (const auto& e : nv) {
      if (!e.is_number_integer() || e.get<int>() < 2) {
        throw ConfigError("n_values", "must contain integers >= 2");
      }
      cfg.n_values.push_back(e.get<int>());
    }
    if (j.contains("replications")) {
      if (!j.at("replications").is_number_integer() || j.at("replications").get<int>() < 1) {
        throw ConfigError("replications", "must be a positive integer");
      }
      cfg.replications = j.at("replications").get<int>();
    }
  }

  if (j.contains("treatment_values")) {
    cfg.treatment_values = detail::number_array(j.at("treatment_values"), "treatment_values");
  }
  if (j.contains("outcome_grid")) {
    cfg.outcome_grid = detail::number_array(j.at("outcome_grid"), "outcome_grid");
  }
  if (j.contains("modifier_point")) {
    const auto vals = detail::number_array(j.at("modifier_point"), "modifier_point");
    cfg.modifier_point =
        Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  }

  if (j.contains("kernels")) {
    const json& kj = j.at("kernels");
    if (!kj.is_object()) throw ConfigError("kernels", "must map roles to kernel specs");
    for (const auto& [key, val] : kj.items()) {
      Role role;
      try {
        role = role_from_name(key);
      } catch (const std::invalid_argument& e) {
        throw ConfigError("kernels." + key, e.what());
      }
      try {
        cfg.est.kernels[role] = kernel_spec_from_json(val);
      } catch (const ConfigError& e) {
        throw ConfigError("kernels." + key, e.what());
      }
    }
  }
  if (j.contains("lambda")) {
    const double v = detail::require_number(j, "lambda");
    if (!(v > 0.0)) throw ConfigError("lambda", "must be positive");
    cfg.est.lambda = v;
  }
  if (j.contains("xi")) {
    const double v = detail::require_number(j, "xi");
    if (!(v > 0.0)) throw ConfigError("xi", "must be positive");
    cfg.est.xi = v;
  }
  if (j.contains("epsilon")) {
    const double v = detail::require_number(j, "epsilon");
    if (!(v > 0.0 && v < 0.5)) throw ConfigError("epsilon", "must lie in (0, 0.5)");
    cfg.est.epsilon = v;
  }
  if (j.contains("strata_bins")) {
    if (!j.at("strata_bins").is_number_integer() || j.at("strata_bins").get<int>() < 1) {
      throw ConfigError("strata_bins", "must be a positive integer");
    }
    cfg.est.strata_bins = j.at("strata_bins").get<int>();
  }
  if (j.contains("uniform_target")) {
    if (!j.at("uniform_target").is_boolean()) {
      throw ConfigError("uniform_target", "must be a boolean");
    }
    cfg.est.uniform_target = j.at("uniform_target").get<bool>();
  }
  if (j.contains("permutations")) {
    if (!j.at("permutations").is_number_integer() || j.at("permutations").get<int>() < 99) {
      throw ConfigError("permutations", "must be an integer >= 99");
    }
    cfg.est.permutations = j.at("permutations").get<int>();
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer()) {
      throw ConfigError("seed", "must be a nonnegative integer");
    }
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("output")) {
    if (!j.at("output").is_string()) throw ConfigError("output", "must be a path string");
    cfg.output_path = j.at("output").get<std::string>();
  }
  return cfg;
}

namespace detail {

inline CausalDataset load_csv_dataset(const std::string& path,
                                      const std::map<Role, std::vector<std::string>>& roles,
                                      const std::string& field) {
  CausalDataset data = read_csv(path);
  for (const auto& [role, cols] : roles) {
    for (const auto& c : cols) {
      if (!data.has_column(c)) {
        throw ConfigError(field + "." + role_name(role),
                          "column '" + c + "' not present in '" + path + "'");
      }
    }
    data.set_role(role, cols);
  }
  return data;
}

/// Default evaluation grid: the distinct treatment values when there are at
/// most ten, otherwise twenty equispaced points between the 5th and 95th
/// percentile.
inline std::vector<double> default_treatment_grid(const CausalDataset& data) {
  const Eigen::MatrixXd tm = data.role_matrix(Role::T);
  if (tm.cols() != 1) {
    throw std::invalid_argument("default treatment grid needs a scalar treatment; pass treatment_values");
  }
  std::vector<double> v(tm.col(0).data(), tm.col(0).data() + tm.rows());
  std::sort(v.begin(), v.end());
  std::vector<double> distinct = v;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() <= 10) return distinct;
  const double lo = v[static_cast<std::size_t>(0.05 * (v.size() - 1))];
  const double hi = v[static_cast<std::size_t>(0.95 * (v.size() - 1))];
  std::vector<double> grid(20);
  for (int i = 0; i < 20; ++i) grid[i] = lo + (hi - lo) * i / 19.0;
  return grid;
}

struct LoadedInput {
  CausalDataset data;
  std::optional<CausalDataset> data2;  // fusion treatment-side
};

inline LoadedInput load_input(const RunConfig& cfg) {
  LoadedInput in;
  const bool fusion = cfg.estimator == "fusion";
  if (cfg.scenario) {
    const std::uint64_t gen_seed = derive_seed(cfg.seed, "simulate");
    if (fusion) {
      auto pair = generate_fusion_pair(*cfg.scenario, cfg.n,
                                       cfg.n2 > 0 ? cfg.n2 : cfg.n, gen_seed);
      in.data = std::move(pair.first);
      in.data2 = std::move(pair.second);
    } else {
      in.data = generate(*cfg.scenario, cfg.n, gen_seed);
    }
    return in;
  }
  in.data = load_csv_dataset(*cfg.csv_path, cfg.role_map, "input.roles");
  if (cfg.csv_path2) {
    in.data2 = load_csv_dataset(*cfg.csv_path2, cfg.role_map2, "input2.roles");
  } else if (fusion) {
    // One CSV carrying all of (s, y) and (x, t, s): use it on both sides.
    in.data2 = in.data;
  }
  return in;
}

inline WeightedEmbedding estimate_one(const RunConfig& cfg, const LoadedInput& in,
                                      const EstimatorConfig& est, double t) {
  const Eigen::VectorXd tv = Eigen::VectorXd::Constant(1, t);
  if (cfg.estimator == "backdoor") {
    if (cfg.modifier_point) return backdoor_cate(in.data, est, tv, *cfg.modifier_point);
    return backdoor_ime(in.data, est, tv);
  }
  if (cfg.estimator == "fusion") {
    return fusion_ime(in.data, *in.data2, est, tv);
  }
  if (cfg.estimator == "frontdoor") {
    return frontdoor_ime(in.data, est, tv);
  }
  if (cfg.estimator == "instrument") {
    if (cfg.modifier_point) return instrument_ime(in.data, est, tv, cfg.modifier_point);
    return instrument_ime(in.data, est, tv);
  }
  if (cfg.estimator == "proxy") {
    return proxy_ime(in.data, est, tv);
  }
  throw ConfigError("estimator", "unknown estimator '" + cfg.estimator + "'");
}

inline json resolved_kernels_json(const CausalDataset& data, const EstimatorConfig& est) {
  json out = json::object();
  for (const auto& [role, cols] : data.roles()) {
    (void)cols;
    try {
      out[role_name(role)] = kernel_spec_to_json(resolved_kernel(data, est, role));
    } catch (const std::invalid_argument&) {
      // degenerate column (identical points): leave the role out
    }
  }
  return out;
}

inline json config_echo(const RunConfig& cfg) {
  json c;
  c["task"] = task_name(cfg.task);
  if (cfg.scenario) {
    c["input"] = {{"scenario", scenario_spec_to_json(*cfg.scenario)}, {"n", cfg.n}};
    if (cfg.n2 > 0) c["input"]["n2"] = cfg.n2;
  } else {
    json roles = json::object();
    for (const auto& [role, cols] : cfg.role_map) roles[role_name(role)] = cols;
    c["input"] = {{"csv", *cfg.csv_path}, {"roles", roles}};
  }
  if (!cfg.estimator.empty()) c["estimator"] = cfg.estimator;
  if (!cfg.test_kind.empty()) c["test"] = cfg.test_kind;
  c["seed"] = cfg.seed;
  c["lambda"] = cfg.est.lambda ? json(*cfg.est.lambda) : json("default: 1e-3 trace/n");
  c["xi"] = cfg.est.xi ? json(*cfg.est.xi) : json("default: 1e-3 trace/n");
  return c;
}

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace detail

/// Execute a parsed configuration and return the report. When the config
/// names an output path the report is also written there, pretty-printed.
inline json run(const RunConfig& cfg) {
  json report;
  report["task"] = task_name(cfg.task);
  report["config"] = detail::config_echo(cfg);
  json timings = json::object();

  EstimatorConfig est = cfg.est;
  est.split_seed = cfg.seed;

  const auto t_load = detail::Clock::now();
  detail::LoadedInput in = detail::load_input(cfg);
  timings["load_ms"] = detail::ms_since(t_load);

  switch (cfg.task) {
    case TaskKind::Simulate: {
      const auto t0 = detail::Clock::now();
      write_csv(cfg.simulate_path, in.data);
      timings["write_ms"] = detail::ms_since(t0);
      std::vector<std::string> headers;
      for (const auto& name : in.data.column_order()) headers.push_back(name);
      report["results"] = {{"csv", cfg.simulate_path},
                           {"rows", static_cast<int>(in.data.rows())},
                           {"columns", headers}};
      break;
    }
    case TaskKind::Estimate: {
      const auto t0 = detail::Clock::now();
      std::vector<double> ts = cfg.treatment_values;
      if (ts.empty()) {
        ts = detail::default_treatment_grid(in.data2 && !in.data.has_role(Role::T)
                                                ? *in.data2
                                                : in.data);
      }
      json results = json::array();
      for (double t : ts) {
        const WeightedEmbedding emb = detail::estimate_one(cfg, in, est, t);
        json row;
        row["t"] = t;
        row["ate"] = ate_reduction(emb);
        if (!cfg.outcome_grid.empty()) {
          json evals = json::array();
          for (double y : cfg.outcome_grid) {
            evals.push_back({{"y", y}, {"value", emb.evaluate(y)}});
          }
          row["ime"] = std::move(evals);
        }
        if (cfg.scenario) {
          try {
            const double truth = oracle_ate(*cfg.scenario, t);
            row["oracle_ate"] = truth;
            row["abs_error"] = std::abs(row["ate"].get<double>() - truth);
          } catch (const std::invalid_argument&) {
            // oracle undefined at this treatment value (off-support)
          }
        }
        results.push_back(std::move(row));
      }
      report["resolved_kernels"] = detail::resolved_kernels_json(in.data, est);
      report["results"] = std::move(results);
      timings["estimate_ms"] = detail::ms_since(t0);
      break;
    }
    case TaskKind::Test: {
      const auto t0 = detail::Clock::now();
      const std::uint64_t test_seed = derive_seed(cfg.seed, "test-permutation");
      TestResult res;
      if (cfg.test_kind == "mmd") {
        detail::require_roles(in.data, {Role::T, Role::Y}, "two-sample test");
        const Eigen::MatrixXd tm = in.data.role_matrix(Role::T);
        const Eigen::MatrixXd ym = in.data.role_matrix(Role::Y);
        if (tm.cols() != 1) {
          throw std::invalid_argument("two-sample test needs a scalar treatment");
        }
        std::vector<double> levels(tm.col(0).data(), tm.col(0).data() + tm.rows());
        std::sort(levels.begin(), levels.end());
        levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
        if (levels.size() != 2) {
          throw std::invalid_argument("two-sample test needs a binary treatment");
        }
        const Eigen::Index n0 = (tm.col(0).array() == levels[0]).count();
        Eigen::MatrixXd p(n0, ym.cols()), q(tm.rows() - n0, ym.cols());
        Eigen::Index ip = 0, iq = 0;
        for (Eigen::Index i = 0; i < tm.rows(); ++i) {
          if (tm(i, 0) == levels[0]) {
            p.row(ip++) = ym.row(i);
          } else {
            q.row(iq++) = ym.row(i);
          }
        }
        res = mmd_test(p, q, resolved_kernel(in.data, est, Role::Y), est.permutations,
                       test_seed);
      } else if (cfg.test_kind == "hsic") {
        detail::require_roles(in.data, {Role::T, Role::Y}, "independence test");
        res = hsic_test(in.data.role_matrix(Role::T), in.data.role_matrix(Role::Y),
                        resolved_kernel(in.data, est, Role::T),
                        resolved_kernel(in.data, est, Role::Y), est.permutations,
                        test_seed);
      } else {
        res = backdoor_hsic_test(in.data, est, est.permutations, test_seed);
      }
      report["results"] = test_result_to_json(res);
      timings["test_ms"] = detail::ms_since(t0);
      break;
    }
    case TaskKind::Benchmark: {
      const auto t0 = detail::Clock::now();
      std::vector<double> ts = cfg.treatment_values;
      if (ts.empty()) ts = {0.0, 1.0};
      json per_n = json::array();
      std::vector<double> medians;
      for (int n : cfg.n_values) {
        std::vector<double> errors;
        for (int rep = 0; rep < cfg.replications; ++rep) {
          const std::string tag =
              "benchmark-" + std::to_string(n) + "-" + std::to_string(rep);
          RunConfig one = cfg;
          one.n = n;
          one.n2 = n;
          EstimatorConfig rep_est = est;
          rep_est.split_seed = derive_seed(cfg.seed, tag + "-split");
          detail::LoadedInput rep_in;
          const std::uint64_t gen_seed = derive_seed(cfg.seed, tag);
          if (cfg.estimator == "fusion") {
            auto pair = generate_fusion_pair(*cfg.scenario, n, n, gen_seed);
            rep_in.data = std::move(pair.first);
            rep_in.data2 = std::move(pair.second);
          } else {
            rep_in.data = generate(*cfg.scenario, n, gen_seed);
          }
          double err = 0.0;
          for (double t : ts) {
            const double est_ate =
                ate_reduction(detail::estimate_one(one, rep_in, rep_est, t));
            err += std::abs(est_ate - oracle_ate(*cfg.scenario, t));
          }
          errors.push_back(err / static_cast<double>(ts.size()));
        }
        std::sort(errors.begin(), errors.end());
        const auto quantile = [&](double q) {
          const double pos = q * (errors.size() - 1);
          const std::size_t lo = static_cast<std::size_t>(pos);
          const std::size_t hi = std::min(errors.size() - 1, lo + 1);
          return errors[lo] + (pos - lo) * (errors[hi] - errors[lo]);
        };
        const double median = quantile(0.5);
        medians.push_back(median);
        per_n.push_back({{"n", n},
                         {"median_abs_error", median},
                         {"iqr", quantile(0.75) - quantile(0.25)},
                         {"errors", errors}});
      }
      bool monotone = true;
      for (std::size_t i = 1; i < medians.size(); ++i) {
        if (medians[i] > medians[i - 1]) monotone = false;
      }
      report["results"] = {{"per_n", std::move(per_n)},
                           {"monotone_improvement", monotone},
                           {"replications", cfg.replications}};
      timings["benchmark_ms"] = detail::ms_since(t0);
      break;
    }
  }

  report["timings_ms"] = std::move(timings);
  if (cfg.output_path) {
    std::ofstream out(*cfg.output_path);
    if (!out) {
      throw ConfigError("output", "cannot open '" + *cfg.output_path + "' for writing");
    }
    out << report.dump(2) << "\n";
  }
  return report;
}

}  // namespace kcause
