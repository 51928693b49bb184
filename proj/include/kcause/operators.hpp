#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kcause/embeddings.hpp"
#include "kcause/errors.hpp"
#include "kcause/kernels.hpp"
#include "kcause/rng.hpp"

namespace kcause {

/// Cholesky solver for symmetric positive (semi)definite systems.
///
/// Factorization retries with diagonal jitter {0, 1e-10, 1e-8, 1e-6} times
/// max(1, mean diagonal); each solve runs one pass of iterative refinement
/// against the jittered system and enforces a relative residual of 1e-8.
/// Failures throw NumericalError naming the system.
class SpdSolver {
 public:
  SpdSolver() = default;

  SpdSolver(Eigen::MatrixXd system, std::string label)
      : system_(std::move(system)), label_(std::move(label)) {
    if (system_.rows() != system_.cols() || system_.rows() == 0) {
      throw std::invalid_argument(label_ + ": system must be square and non-empty");
    }
    const double scale = std::max(1.0, system_.diagonal().mean());
    constexpr std::array<double, 4> schedule{0.0, 1e-10, 1e-8, 1e-6};
    double applied = 0.0;
    for (double step : schedule) {
      const double target = step * scale;
      if (target > applied) {
        system_.diagonal().array() += target - applied;
        applied = target;
      }
      llt_.compute(system_);
      if (llt_.info() == Eigen::Success) {
        jitter_ = applied;
        return;
      }
    }
    throw NumericalError(label_ + ": Cholesky factorization failed after jitter escalation");
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    return solve_impl<Eigen::VectorXd>(rhs);
  }
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const {
    return solve_impl<Eigen::MatrixXd>(rhs);
  }

  /// The factored system (jitter already added).
  const Eigen::MatrixXd& system() const { return system_; }
  double jitter() const { return jitter_; }
  Eigen::Index size() const { return system_.rows(); }

 private:
  template <typename Rhs>
  Rhs solve_impl(const Rhs& rhs) const {
    if (rhs.rows() != system_.rows()) {
      throw std::invalid_argument(label_ + ": right-hand side has wrong length");
    }
    Rhs x = llt_.solve(rhs);
    x += llt_.solve(rhs - system_ * x);  // one refinement pass
    const double rhs_norm = rhs.norm();
    const double residual = (system_ * x - rhs).norm();
    if (!(residual <= 1e-8 * std::max(1.0, rhs_norm))) {
      throw NumericalError(label_ + ": solve residual " + std::to_string(residual) +
                           " exceeds tolerance");
    }
    return x;
  }

  Eigen::MatrixXd system_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double jitter_ = 0.0;
  std::string label_;
};

/// Default ridge scale: 1e-3 times the mean Gram diagonal (trace(K)/n).
inline double default_ridge(const Eigen::MatrixXd& k) {
  return 1e-3 * k.diagonal().mean();
}

inline double resolve_ridge(const std::optional<double>& configured,
                            const Eigen::MatrixXd& k) {
  if (configured) {
    if (!(*configured > 0.0)) throw std::invalid_argument("ridge must be positive");
    return *configured;
  }
  return default_ridge(k);
}

/// Conditional mean operator estimate. Encodes input -> weights
/// beta(x) = (K + n lambda I)^{-1} k(inputs, x) over the training outputs.
struct CmoEstimate {
  Eigen::MatrixXd input_atoms;
  Eigen::MatrixXd output_atoms;
  KernelSpec input_spec;
  KernelSpec output_spec;
  double lambda = 0.0;
  SpdSolver solver;
};

inline CmoEstimate fit_cmo(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& outputs,
                           KernelSpec input_spec, KernelSpec output_spec, double lambda) {
  if (inputs.rows() != outputs.rows()) {
    throw std::invalid_argument("conditional mean fit: inputs and outputs must pair up");
  }
  if (inputs.rows() < 1) throw std::invalid_argument("conditional mean fit: empty sample");
  if (!(lambda > 0.0)) throw std::invalid_argument("conditional mean fit: lambda must be positive");
  const Eigen::Index n = inputs.rows();
  Eigen::MatrixXd system = gram(input_spec, inputs).values;
  system.diagonal().array() += static_cast<double>(n) * lambda;
  CmoEstimate est;
  est.input_atoms = inputs;
  est.output_atoms = outputs;
  est.input_spec = std::move(input_spec);
  est.output_spec = std::move(output_spec);
  est.lambda = lambda;
  est.solver = SpdSolver(std::move(system), "conditional mean system");
  return est;
}

inline Eigen::VectorXd cme_weights(const CmoEstimate& cmo, const Eigen::VectorXd& x) {
  return cmo.solver.solve(kernel_vector(cmo.input_spec, cmo.input_atoms, x));
}

/// Estimated conditional mean embedding of the outputs given input = x.
inline WeightedEmbedding cme_embedding(const CmoEstimate& cmo, const Eigen::VectorXd& x) {
  return {cmo.output_atoms, cme_weights(cmo, x), cmo.output_spec};
}

/// Push a finite embedding through the operator. For a point mass at x this
/// reduces to cme_embedding; in general it is linear in the input weights.
inline WeightedEmbedding apply_cmo(const CmoEstimate& cmo, const WeightedEmbedding& input) {
  if (input.spec != cmo.input_spec) {
    throw std::invalid_argument("apply_cmo: embedding kernel differs from the operator's input kernel");
  }
  const Eigen::VectorXd rhs =
      gram(cmo.input_spec, cmo.input_atoms, input.atoms).values * input.weights;
  return {cmo.output_atoms, cmo.solver.solve(rhs), cmo.output_spec};
}

/// Two-stage deconditioning estimate.
///
/// Stage 1 regresses anchor features on the inputs: with n stage-1 pairs
/// (z_i, t_i) and m stage-2 inputs z~_j, the bridge is
///   W = K_tt (K_zz + n lambda I)^{-1} K_{z,z~}        (n x m).
/// Stage 2 solves (W W^T + m xi K_tt) alpha = W labels; queries never
/// materialize the anchor-feature expansion, only coefficient vectors
///   w(u) = W^T (W W^T + m xi K_tt)^{-1} u.
struct DmoEstimate {
  Eigen::MatrixXd stage1_inputs;   // z_i
  Eigen::MatrixXd stage1_anchors;  // t_i, the basis carrying the result
  Eigen::MatrixXd stage2_inputs;   // z~_j
  KernelSpec input_spec;
  KernelSpec anchor_spec;
  Eigen::VectorXd scalar_labels;  // scalar-label form
  Eigen::MatrixXd label_atoms;    // embedding-label form
  KernelSpec label_spec;
  bool embedding_labels = false;
  double lambda = 0.0;
  double xi = 0.0;
  Eigen::MatrixXd bridge;  // W
  SpdSolver stage2;
};

namespace detail {

inline DmoEstimate fit_dmo_core(const Eigen::MatrixXd& z1, const Eigen::MatrixXd& t1,
                                const Eigen::MatrixXd& z2, KernelSpec input_spec,
                                KernelSpec anchor_spec, double lambda, double xi,
                                Eigen::Index label_rows) {
  if (z1.rows() != t1.rows() || z1.rows() < 1) {
    throw std::invalid_argument("deconditioning fit: stage-1 inputs and anchors must pair up");
  }
  if (z2.rows() != label_rows || label_rows < 1) {
    throw std::invalid_argument("deconditioning fit: stage-2 inputs and labels must pair up");
  }
  if (z1.cols() != z2.cols()) {
    throw std::invalid_argument("deconditioning fit: stage inputs must share a dimension");
  }
  if (!(lambda > 0.0) || !(xi > 0.0)) {
    throw std::invalid_argument("deconditioning fit: ridge parameters must be positive");
  }
  const Eigen::Index n = z1.rows();
  const Eigen::Index m = z2.rows();

  Eigen::MatrixXd stage1_system = gram(input_spec, z1).values;
  stage1_system.diagonal().array() += static_cast<double>(n) * lambda;
  SpdSolver stage1(std::move(stage1_system), "deconditioning stage-1 system");

  const Eigen::MatrixXd cross = gram(input_spec, z1, z2).values;
  const Eigen::MatrixXd smoothed = stage1.solve(cross);  // (K_zz + n lambda I)^{-1} K_{z,z~}

  const Eigen::MatrixXd ktt = gram(anchor_spec, t1).values;
  DmoEstimate est;
  est.bridge = ktt * smoothed;

  Eigen::MatrixXd lower = static_cast<double>(m) * xi * ktt;
  lower.selfadjointView<Eigen::Lower>().rankUpdate(est.bridge);
  Eigen::MatrixXd stage2_system = lower.selfadjointView<Eigen::Lower>();

  est.stage1_inputs = z1;
  est.stage1_anchors = t1;
  est.stage2_inputs = z2;
  est.input_spec = std::move(input_spec);
  est.anchor_spec = std::move(anchor_spec);
  est.lambda = lambda;
  est.xi = xi;
  est.stage2 = SpdSolver(std::move(stage2_system), "deconditioning stage-2 system");
  return est;
}

}  // namespace detail

/// Scalar-label fit: recovers a structural function evaluated by
/// dmo_structural.
inline DmoEstimate fit_dmo(const Eigen::MatrixXd& stage1_inputs,
                           const Eigen::MatrixXd& stage1_anchors,
                           const Eigen::MatrixXd& stage2_inputs,
                           const Eigen::VectorXd& labels, KernelSpec input_spec,
                           KernelSpec anchor_spec, double lambda, double xi) {
  DmoEstimate est = detail::fit_dmo_core(stage1_inputs, stage1_anchors, stage2_inputs,
                                         std::move(input_spec), std::move(anchor_spec),
                                         lambda, xi, labels.size());
  est.scalar_labels = labels;
  est.embedding_labels = false;
  return est;
}

/// Embedding-label fit: stage-2 labels are kernel atoms, so queries return
/// weighted embeddings over them.
inline DmoEstimate fit_dmo(const Eigen::MatrixXd& stage1_inputs,
                           const Eigen::MatrixXd& stage1_anchors,
                           const Eigen::MatrixXd& stage2_inputs,
                           const Eigen::MatrixXd& label_atoms, KernelSpec label_spec,
                           KernelSpec input_spec, KernelSpec anchor_spec, double lambda,
                           double xi) {
  DmoEstimate est = detail::fit_dmo_core(stage1_inputs, stage1_anchors, stage2_inputs,
                                         std::move(input_spec), std::move(anchor_spec),
                                         lambda, xi, label_atoms.rows());
  est.label_atoms = label_atoms;
  est.label_spec = std::move(label_spec);
  est.embedding_labels = true;
  return est;
}

/// Stage-2 coefficient vector for an arbitrary anchor feature vector
/// u_i = <feature, phi(t_i)>. Length m, pairs with the stage-2 labels.
inline Eigen::VectorXd dmo_coefficients(const DmoEstimate& est,
                                        const Eigen::VectorXd& anchor_feature) {
  return est.bridge.transpose() * est.stage2.solve(anchor_feature);
}

inline double dmo_structural(const DmoEstimate& est, const Eigen::VectorXd& t) {
  if (est.embedding_labels) {
    throw std::invalid_argument("dmo_structural requires scalar labels");
  }
  const Eigen::VectorXd u = kernel_vector(est.anchor_spec, est.stage1_anchors, t);
  return est.scalar_labels.dot(dmo_coefficients(est, u));
}

inline double dmo_structural(const DmoEstimate& est, double t) {
  return dmo_structural(est, Eigen::VectorXd::Constant(1, t));
}

inline WeightedEmbedding dmo_structural_embedding(const DmoEstimate& est,
                                                  const Eigen::VectorXd& t) {
  if (!est.embedding_labels) {
    throw std::invalid_argument("dmo_structural_embedding requires embedding labels");
  }
  const Eigen::VectorXd u = kernel_vector(est.anchor_spec, est.stage1_anchors, t);
  return {est.label_atoms, dmo_coefficients(est, u), est.label_spec};
}

/// Holdout grid search for the conditional-mean ridge. Scores each candidate
/// by the mean squared RKHS reconstruction error of k(., y_j) on a 25%
/// holdout and returns the best lambda from {1e-6, ..., 1e-1}.
inline double select_ridge_grid(const Eigen::MatrixXd& inputs,
                                const Eigen::MatrixXd& outputs,
                                const KernelSpec& input_spec, const KernelSpec& output_spec,
                                std::uint64_t seed = 0) {
  if (inputs.rows() != outputs.rows() || inputs.rows() < 8) {
    throw std::invalid_argument("ridge selection needs at least eight paired rows");
  }
  const Eigen::Index n = inputs.rows();
  Rng rng(derive_seed(seed, "ridge-grid"));
  std::vector<int> idx = random_permutation(static_cast<int>(n), rng);
  const Eigen::Index holdout = std::max<Eigen::Index>(2, n / 4);
  const Eigen::Index train = n - holdout;

  Eigen::MatrixXd xin(train, inputs.cols()), xout(holdout, inputs.cols());
  Eigen::MatrixXd yin(train, outputs.cols()), yout(holdout, outputs.cols());
  for (Eigen::Index i = 0; i < train; ++i) {
    xin.row(i) = inputs.row(idx[i]);
    yin.row(i) = outputs.row(idx[i]);
  }
  for (Eigen::Index i = 0; i < holdout; ++i) {
    xout.row(i) = inputs.row(idx[train + i]);
    yout.row(i) = outputs.row(idx[train + i]);
  }

  const Eigen::MatrixXd kyy = gram(output_spec, yin).values;
  const Eigen::MatrixXd kcross = gram(output_spec, yin, yout).values;

  double best_lambda = 1e-3;
  double best_score = std::numeric_limits<double>::infinity();
  for (double lambda : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1}) {
    const CmoEstimate cmo = fit_cmo(xin, yin, input_spec, output_spec, lambda);
    double score = 0.0;
    for (Eigen::Index j = 0; j < holdout; ++j) {
      const Eigen::VectorXd beta = cme_weights(cmo, xout.row(j).transpose());
      const double self = eval_kernel(output_spec, yout.row(j).transpose(),
                                      yout.row(j).transpose());
      score += self - 2.0 * beta.dot(kcross.col(j)) + beta.dot(kyy * beta);
    }
    score /= static_cast<double>(holdout);
    if (score < best_score) {
      best_score = score;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

}  // namespace kcause
