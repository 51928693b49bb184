#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kcause/dataset.hpp"
#include "kcause/embeddings.hpp"
#include "kcause/kernels.hpp"
#include "kcause/operators.hpp"
#include "kcause/rng.hpp"

namespace kcause {

/// Shared knobs for the causal estimators. Kernels omitted here are resolved
/// per role with the median heuristic on the dataset at hand; ridges default
/// to 1e-3 trace(K)/n of the system they regularize.
struct EstimatorConfig {
  std::map<Role, KernelSpec> kernels;
  std::optional<double> lambda;  // conditional-mean / stage-1 ridge
  std::optional<double> xi;      // stage-2 ridge
  std::uint64_t split_seed = 0;  // sample-split seed for two-stage estimators
  double epsilon = 0.01;         // propensity clipping
  int strata_bins = 5;           // confounder strata for permutation nulls
  bool uniform_target = false;   // weight toward uniform rather than empirical p*(T)
  int permutations = 500;
};

/// Kernel for a role: configured spec if present, otherwise Gaussian with the
/// median-heuristic bandwidth of that role's columns.
inline KernelSpec resolved_kernel(const CausalDataset& data, const EstimatorConfig& config,
                                  Role role) {
  auto it = config.kernels.find(role);
  if (it != config.kernels.end()) return it->second;
  return KernelSpec::gaussian(median_heuristic(data.role_matrix(role)));
}

/// Scalar contraction of an interventional mean embedding over a scalar
/// outcome: sum_i w_i y_i, the effect estimate the embedding induces.
inline double ate_reduction(const WeightedEmbedding& embedding) {
  if (embedding.atoms.cols() != 1) {
    throw std::invalid_argument("effect reduction requires a scalar outcome embedding");
  }
  return embedding.weights.dot(embedding.atoms.col(0));
}

namespace detail {

inline void require_roles(const CausalDataset& data, std::initializer_list<Role> roles,
                          const char* who) {
  for (Role r : roles) {
    if (!data.has_role(r)) {
      throw std::invalid_argument(std::string(who) + ": missing role '" + role_name(r) + "'");
    }
  }
  if (data.rows() < 2) {
    throw std::invalid_argument(std::string(who) + ": needs at least two rows");
  }
}

inline Eigen::MatrixXd hcat(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("hcat: row mismatch");
  Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
  out.leftCols(a.cols()) = a;
  out.rightCols(b.cols()) = b;
  return out;
}

inline Eigen::VectorXd vcat(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd out(a.size() + b.size());
  out.head(a.size()) = a;
  out.tail(b.size()) = b;
  return out;
}

/// Deterministic half split of n rows by seeded shuffle. First half has
/// floor(n/2) rows.
inline std::pair<std::vector<int>, std::vector<int>> two_stage_split(Eigen::Index n,
                                                                     std::uint64_t seed) {
  Rng rng(derive_seed(seed, "two-stage-split"));
  std::vector<int> idx = random_permutation(static_cast<int>(n), rng);
  const std::size_t half = static_cast<std::size_t>(n) / 2;
  std::vector<int> a(idx.begin(), idx.begin() + half);
  std::vector<int> b(idx.begin() + half, idx.end());
  return {std::move(a), std::move(b)};
}

inline Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  }
  return out;
}

/// Adjustment-set weights over outcome atoms:
///   gamma(t) = (1/n) (K_t o K_x + n lambda I)^{-1} [k_t(., t) o K_x 1].
/// Shared by the backdoor estimator and the treatment stage of fusion.
inline WeightedEmbedding backdoor_core(const Eigen::MatrixXd& treatments,
                                       const Eigen::MatrixXd& confounders,
                                       const Eigen::MatrixXd& outcome_atoms,
                                       const KernelSpec& treatment_spec,
                                       const KernelSpec& confounder_spec,
                                       const KernelSpec& outcome_spec,
                                       std::optional<double> lambda,
                                       const Eigen::VectorXd& t) {
  const Eigen::Index n = treatments.rows();
  const Eigen::MatrixXd kt = gram(treatment_spec, treatments).values;
  const Eigen::MatrixXd kx = gram(confounder_spec, confounders).values;
  Eigen::MatrixXd system = kt.cwiseProduct(kx);
  const double lam = resolve_ridge(lambda, system);
  system.diagonal().array() += static_cast<double>(n) * lam;
  SpdSolver solver(std::move(system), "adjustment-set system");
  const Eigen::VectorXd rhs =
      kernel_vector(treatment_spec, treatments, t).cwiseProduct(kx.rowwise().sum()) /
      static_cast<double>(n);
  return {outcome_atoms, solver.solve(rhs), outcome_spec};
}

}  // namespace detail

/// Interventional mean embedding of Y under do(T = t) by adjustment over the
/// observed confounders X.
inline WeightedEmbedding backdoor_ime(const CausalDataset& data,
                                      const EstimatorConfig& config,
                                      const Eigen::VectorXd& t) {
  detail::require_roles(data, {Role::T, Role::X, Role::Y}, "backdoor estimator");
  return detail::backdoor_core(data.role_matrix(Role::T), data.role_matrix(Role::X),
                               data.role_matrix(Role::Y),
                               resolved_kernel(data, config, Role::T),
                               resolved_kernel(data, config, Role::X),
                               resolved_kernel(data, config, Role::Y), config.lambda, t);
}

inline WeightedEmbedding backdoor_ime(const CausalDataset& data,
                                      const EstimatorConfig& config, double t) {
  return backdoor_ime(data, config, Eigen::VectorXd::Constant(1, t));
}

inline double backdoor_ate(const CausalDataset& data, const EstimatorConfig& config,
                           double t) {
  return ate_reduction(backdoor_ime(data, config, t));
}

/// Conditional interventional mean embedding given effect modifiers V = v.
/// V must name a subset of the adjustment columns; the remaining confounders
/// are averaged through the estimated conditional law X | V = v. When V is
/// the whole adjustment set that law collapses to the point mass at v.
/// `extrapolated`, when given, is set when any coordinate of v leaves the
/// observed range of its column.
inline WeightedEmbedding backdoor_cate(const CausalDataset& data,
                                       const EstimatorConfig& config,
                                       const Eigen::VectorXd& t, const Eigen::VectorXd& v,
                                       bool* extrapolated = nullptr) {
  detail::require_roles(data, {Role::T, Role::X, Role::Y, Role::V}, "conditional backdoor estimator");
  const auto& xcols = data.role_columns(Role::X);
  const auto& vcols = data.role_columns(Role::V);
  for (const auto& c : vcols) {
    if (std::find(xcols.begin(), xcols.end(), c) == xcols.end()) {
      throw std::invalid_argument(
          "conditional backdoor estimator: effect modifiers must be a subset of the "
          "adjustment columns, got '" + c + "'");
    }
  }
  const Eigen::MatrixXd vm = data.role_matrix(Role::V);
  if (v.size() != vm.cols()) {
    throw std::invalid_argument("conditional backdoor estimator: modifier point has wrong dimension");
  }
  if (extrapolated != nullptr) {
    *extrapolated = false;
    for (Eigen::Index j = 0; j < vm.cols(); ++j) {
      if (v(j) < vm.col(j).minCoeff() || v(j) > vm.col(j).maxCoeff()) {
        *extrapolated = true;
      }
    }
  }

  const Eigen::MatrixXd tm = data.role_matrix(Role::T);
  const Eigen::MatrixXd xm = data.role_matrix(Role::X);
  const Eigen::MatrixXd ym = data.role_matrix(Role::Y);
  const KernelSpec kt = resolved_kernel(data, config, Role::T);
  const KernelSpec kx = resolved_kernel(data, config, Role::X);
  const KernelSpec ky = resolved_kernel(data, config, Role::Y);

  // Confounder embedding at v: point mass when V covers X, else a fitted
  // conditional mean embedding of X given V.
  Eigen::MatrixXd x_atoms;
  Eigen::VectorXd x_weights;
  const bool v_covers_x =
      vcols.size() == xcols.size() &&
      std::is_permutation(vcols.begin(), vcols.end(), xcols.begin());
  if (v_covers_x) {
    Eigen::VectorXd point(xm.cols());
    Eigen::Index out_off = 0;
    for (const auto& xc : xcols) {
      const Eigen::Index width = data.column(xc).cols();
      Eigen::Index in_off = 0;
      for (const auto& vc : vcols) {
        const Eigen::Index vw = data.column(vc).cols();
        if (vc == xc) break;
        in_off += vw;
      }
      point.segment(out_off, width) = v.segment(in_off, width);
      out_off += width;
    }
    x_atoms = point.transpose();
    x_weights = Eigen::VectorXd::Ones(1);
  } else {
    const KernelSpec kv = resolved_kernel(data, config, Role::V);
    const double lam_v = config.lambda ? *config.lambda
                                       : 1e-3 * kernel_diag_mean(kv, vm);
    const CmoEstimate given_v = fit_cmo(vm, xm, kv, kx, lam_v);
    x_atoms = xm;
    x_weights = cme_weights(given_v, v);
  }

  // Push mu_{X|V=v} (tensored with the treatment point) through C_{Y|T,X}.
  const KernelSpec joint = KernelSpec::product({{"t", kt, static_cast<int>(tm.cols())},
                                                {"x", kx, static_cast<int>(xm.cols())}});
  const double lam = config.lambda ? *config.lambda
                                   : 1e-3 * kernel_diag_mean(joint, detail::hcat(tm, xm));
  const CmoEstimate cmo = fit_cmo(detail::hcat(tm, xm), ym, joint, ky, lam);

  Eigen::MatrixXd in_atoms(x_atoms.rows(), tm.cols() + x_atoms.cols());
  in_atoms.leftCols(tm.cols()) = t.transpose().replicate(x_atoms.rows(), 1);
  in_atoms.rightCols(x_atoms.cols()) = x_atoms;
  return apply_cmo(cmo, WeightedEmbedding{std::move(in_atoms), std::move(x_weights), joint});
}

/// Unmatched two-dataset estimator: the treatment dataset (x, t, s) yields an
/// adjustment-set embedding of the mediator under do(t); the outcome dataset
/// (s, y) supplies C_{Y|S} to map it into outcome space. The mediator kernel
/// must agree across datasets, so when not configured it is resolved on the
/// pooled mediator columns.
inline WeightedEmbedding fusion_ime(const CausalDataset& outcome_data,
                                    const CausalDataset& treatment_data,
                                    const EstimatorConfig& config,
                                    const Eigen::VectorXd& t) {
  detail::require_roles(outcome_data, {Role::S, Role::Y}, "fusion estimator (outcome dataset)");
  detail::require_roles(treatment_data, {Role::T, Role::X, Role::S}, "fusion estimator (treatment dataset)");
  const Eigen::MatrixXd s_out = outcome_data.role_matrix(Role::S);
  const Eigen::MatrixXd s_trt = treatment_data.role_matrix(Role::S);
  if (s_out.cols() != s_trt.cols()) {
    throw std::invalid_argument("fusion estimator: mediator kernel/dimension mismatch across datasets");
  }

  KernelSpec ks;
  auto it = config.kernels.find(Role::S);
  if (it != config.kernels.end()) {
    ks = it->second;
  } else {
    Eigen::MatrixXd pooled(s_out.rows() + s_trt.rows(), s_out.cols());
    pooled.topRows(s_out.rows()) = s_out;
    pooled.bottomRows(s_trt.rows()) = s_trt;
    ks = KernelSpec::gaussian(median_heuristic(pooled));
  }

  const WeightedEmbedding mediator = detail::backdoor_core(
      treatment_data.role_matrix(Role::T), treatment_data.role_matrix(Role::X), s_trt,
      resolved_kernel(treatment_data, config, Role::T),
      resolved_kernel(treatment_data, config, Role::X), ks, config.lambda, t);

  const KernelSpec ky = resolved_kernel(outcome_data, config, Role::Y);
  const double lam = config.lambda ? *config.lambda : 1e-3 * kernel_diag_mean(ks, s_out);
  const CmoEstimate outcome_given_s =
      fit_cmo(s_out, outcome_data.role_matrix(Role::Y), ks, ky, lam);
  return apply_cmo(outcome_given_s, mediator);
}

/// Mediator-based estimator when all confounding flows around the mediator:
///   w(t) = (K_s o K_t + n lambda I)^{-1} [(K_s beta_{S|T=t}) o (K_t 1 / n)].
inline WeightedEmbedding frontdoor_ime(const CausalDataset& data,
                                       const EstimatorConfig& config,
                                       const Eigen::VectorXd& t) {
  detail::require_roles(data, {Role::T, Role::S, Role::Y}, "frontdoor estimator");
  const Eigen::MatrixXd tm = data.role_matrix(Role::T);
  const Eigen::MatrixXd sm = data.role_matrix(Role::S);
  const Eigen::MatrixXd ym = data.role_matrix(Role::Y);
  const KernelSpec kt = resolved_kernel(data, config, Role::T);
  const KernelSpec ks = resolved_kernel(data, config, Role::S);
  const KernelSpec ky = resolved_kernel(data, config, Role::Y);
  const Eigen::Index n = data.rows();

  const Eigen::MatrixXd gt = gram(kt, tm).values;
  const Eigen::MatrixXd gs = gram(ks, sm).values;

  // Mediator response to the treatment point.
  Eigen::MatrixXd mediator_system = gt;
  const double lam_med = resolve_ridge(config.lambda, mediator_system);
  mediator_system.diagonal().array() += static_cast<double>(n) * lam_med;
  SpdSolver mediator_solver(std::move(mediator_system), "mediator response system");
  const Eigen::VectorXd beta = mediator_solver.solve(kernel_vector(kt, tm, t));

  Eigen::MatrixXd system = gs.cwiseProduct(gt);
  const double lam = resolve_ridge(config.lambda, system);
  system.diagonal().array() += static_cast<double>(n) * lam;
  SpdSolver solver(std::move(system), "mediator-treatment system");
  const Eigen::VectorXd rhs =
      (gs * beta).cwiseProduct(gt.rowwise().sum() / static_cast<double>(n));
  return {ym, solver.solve(rhs), ky};
}

/// Instrumental-variable estimator: two-stage deconditioning with the
/// instrument as stage input and the treatment as anchor, on a deterministic
/// 50/50 sample split. With role V present and a modifier point given, the
/// anchor side becomes the (treatment, modifier) product.
inline WeightedEmbedding instrument_ime(const CausalDataset& data,
                                        const EstimatorConfig& config,
                                        const Eigen::VectorXd& t,
                                        const std::optional<Eigen::VectorXd>& v = {}) {
  detail::require_roles(data, {Role::Z, Role::T, Role::Y}, "instrument estimator");
  if (v && !data.has_role(Role::V)) {
    throw std::invalid_argument("instrument estimator: modifier point given but role 'v' missing");
  }
  const Eigen::Index n = data.rows();
  const auto [stage1_rows, stage2_rows] = detail::two_stage_split(n, config.split_seed);
  if (stage1_rows.size() < 20 || stage2_rows.size() < 20) {
    throw std::invalid_argument("instrument estimator: split too small (need >= 20 rows per stage)");
  }

  const Eigen::MatrixXd zm = data.role_matrix(Role::Z);
  const Eigen::MatrixXd tm = data.role_matrix(Role::T);
  const Eigen::MatrixXd ym = data.role_matrix(Role::Y);
  const KernelSpec kz = resolved_kernel(data, config, Role::Z);
  const KernelSpec kt = resolved_kernel(data, config, Role::T);
  const KernelSpec ky = resolved_kernel(data, config, Role::Y);

  Eigen::MatrixXd anchors = detail::take_rows(tm, stage1_rows);
  KernelSpec anchor_spec = kt;
  Eigen::VectorXd query = t;
  if (v) {
    const Eigen::MatrixXd vm = data.role_matrix(Role::V);
    const KernelSpec kv = resolved_kernel(data, config, Role::V);
    anchors = detail::hcat(anchors, detail::take_rows(vm, stage1_rows));
    anchor_spec = KernelSpec::product({{"t", kt, static_cast<int>(tm.cols())},
                                       {"v", kv, static_cast<int>(vm.cols())}});
    query = detail::vcat(t, *v);
  }

  const Eigen::MatrixXd z1 = detail::take_rows(zm, stage1_rows);
  const Eigen::MatrixXd z2 = detail::take_rows(zm, stage2_rows);
  const double lam = config.lambda ? *config.lambda : 1e-3 * kernel_diag_mean(kz, z1);
  const double xi = config.xi ? *config.xi : 1e-3 * kernel_diag_mean(anchor_spec, anchors);

  const DmoEstimate dmo =
      fit_dmo(z1, anchors, z2, detail::take_rows(ym, stage2_rows), ky, kz, anchor_spec,
              lam, xi);
  return dmo_structural_embedding(dmo, query);
}

/// Proxy-variable estimator. Stage 1 (split A) learns the bridge between the
/// observed (t, z) and the outcome-side proxy pair (t, u); stage 2 (split B)
/// attaches outcome labels; the query integrates the bridge against the
/// empirical proxy distribution of the full sample.
inline WeightedEmbedding proxy_ime(const CausalDataset& data, const EstimatorConfig& config,
                                   const Eigen::VectorXd& t) {
  detail::require_roles(data, {Role::T, Role::Z, Role::U, Role::Y}, "proxy estimator");
  const Eigen::Index n = data.rows();
  const auto [stage1_rows, stage2_rows] = detail::two_stage_split(n, config.split_seed);
  if (stage1_rows.empty() || stage2_rows.empty()) {
    throw std::invalid_argument("proxy estimator: needs at least two rows");
  }

  const Eigen::MatrixXd tm = data.role_matrix(Role::T);
  const Eigen::MatrixXd zm = data.role_matrix(Role::Z);
  const Eigen::MatrixXd um = data.role_matrix(Role::U);
  const Eigen::MatrixXd ym = data.role_matrix(Role::Y);
  const KernelSpec kt = resolved_kernel(data, config, Role::T);
  const KernelSpec kz = resolved_kernel(data, config, Role::Z);
  const KernelSpec ku = resolved_kernel(data, config, Role::U);
  const KernelSpec ky = resolved_kernel(data, config, Role::Y);

  const KernelSpec ktz = KernelSpec::product({{"t", kt, static_cast<int>(tm.cols())},
                                              {"z", kz, static_cast<int>(zm.cols())}});
  const KernelSpec ktu = KernelSpec::product({{"t", kt, static_cast<int>(tm.cols())},
                                              {"u", ku, static_cast<int>(um.cols())}});

  const Eigen::MatrixXd t1 = detail::take_rows(tm, stage1_rows);
  const Eigen::MatrixXd tz1 = detail::hcat(t1, detail::take_rows(zm, stage1_rows));
  const Eigen::MatrixXd tu1 = detail::hcat(t1, detail::take_rows(um, stage1_rows));
  const Eigen::MatrixXd tz2 =
      detail::hcat(detail::take_rows(tm, stage2_rows), detail::take_rows(zm, stage2_rows));

  const double lam = config.lambda ? *config.lambda : 1e-3 * kernel_diag_mean(ktz, tz1);
  const double xi = config.xi ? *config.xi : 1e-3 * kernel_diag_mean(ktu, tu1);

  const DmoEstimate dmo = fit_dmo(tz1, tu1, tz2, detail::take_rows(ym, stage2_rows), ky,
                                  ktz, ktu, lam, xi);

  // Anchor feature <k_t(., t) (x) mu_U, phi(t_i, u_i)> with mu_U estimated on
  // the full sample.
  const Eigen::MatrixXd u1 = detail::take_rows(um, stage1_rows);
  const Eigen::VectorXd u_mean = gram(ku, u1, um).values.rowwise().mean();
  const Eigen::VectorXd feature = kernel_vector(kt, t1, t).cwiseProduct(u_mean);
  return {detail::take_rows(ym, stage2_rows), dmo_coefficients(dmo, feature), ky};
}

}  // namespace kcause
