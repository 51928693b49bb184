#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "kcause/kernels.hpp"
#include "kcause/rng.hpp"

namespace kcause {

/// Finite representation sum_i w_i k(., atom_i) of a (possibly signed)
/// embedding in the RKHS of `spec`. Weights need not be positive or sum
/// to one; estimators downstream produce signed weights routinely.
struct WeightedEmbedding {
  Eigen::MatrixXd atoms;    // one atom per row
  Eigen::VectorXd weights;  // aligned with atoms
  KernelSpec spec;

  /// Pointwise evaluation sum_i w_i k(point, atom_i).
  double evaluate(const Eigen::VectorXd& point) const {
    return weights.dot(kernel_vector(spec, atoms, point));
  }
  double evaluate(double point) const {
    return evaluate(Eigen::VectorXd::Constant(1, point));
  }
};

/// Empirical mean embedding (1/n) sum_i k(., x_i).
inline WeightedEmbedding mean_embed(const Eigen::MatrixXd& sample, KernelSpec spec) {
  if (sample.rows() == 0) throw std::invalid_argument("mean embedding of an empty sample");
  const Eigen::Index n = sample.rows();
  return {sample, Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)),
          std::move(spec)};
}

/// RKHS inner product of two finite embeddings sharing a kernel.
inline double embedding_inner(const WeightedEmbedding& a, const WeightedEmbedding& b) {
  if (a.spec != b.spec) {
    throw std::invalid_argument("embedding inner product requires matching kernel specs");
  }
  return a.weights.dot(gram(a.spec, a.atoms, b.atoms).values * b.weights);
}

/// Squared RKHS distance ||a - b||^2. Can be a tiny negative under rounding.
inline double embedding_distance2(const WeightedEmbedding& a, const WeightedEmbedding& b) {
  return embedding_inner(a, a) - 2.0 * embedding_inner(a, b) + embedding_inner(b, b);
}

enum class MmdEstimator { Biased, Unbiased };

/// Squared maximum mean discrepancy between two samples.
///
/// Biased (V-statistic): mean(Kpp) + mean(Kqq) - 2 mean(Kpq), always >= 0.
/// Unbiased (U-statistic): diagonal terms removed, needs >= 2 points per side
/// and can be negative near the null.
inline double mmd2(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q,
                   const KernelSpec& spec, MmdEstimator estimator = MmdEstimator::Biased) {
  const Eigen::Index m = p.rows(), n = q.rows();
  if (estimator == MmdEstimator::Biased) {
    if (m < 1 || n < 1) throw std::invalid_argument("mmd needs at least one point per sample");
  } else {
    if (m < 2 || n < 2) {
      throw std::invalid_argument("unbiased mmd needs at least two points per sample");
    }
  }
  const Eigen::MatrixXd kpp = gram(spec, p).values;
  const Eigen::MatrixXd kqq = gram(spec, q).values;
  const Eigen::MatrixXd kpq = gram(spec, p, q).values;
  if (estimator == MmdEstimator::Biased) {
    return kpp.mean() + kqq.mean() - 2.0 * kpq.mean();
  }
  const double spp = (kpp.sum() - kpp.trace()) / (static_cast<double>(m) * (m - 1));
  const double sqq = (kqq.sum() - kqq.trace()) / (static_cast<double>(n) * (n - 1));
  return spp + sqq - 2.0 * kpq.mean();
}

/// Outcome of a permutation test. p_value is the add-one estimate
/// (1 + #{permuted >= observed}) / (1 + permutations), so it lies in
/// [1/(1+B), 1] and never reaches zero.
struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int permutations = 0;
  std::uint64_t seed = 0;
};

namespace detail {

// Tie comparison for permutation counts: values within 1e-12 (relative to the
// observed scale) count as >=, so exact recomputations of the observed
// statistic are ties regardless of summation order.
inline bool counts_as_ge(double permuted, double observed) {
  return permuted >= observed - 1e-12 * std::max(1.0, std::abs(observed));
}

inline Eigen::MatrixXd center_gram(const Eigen::MatrixXd& k) {
  const Eigen::VectorXd row_means = k.rowwise().mean();
  const Eigen::VectorXd col_means = k.colwise().mean();
  const double grand = k.mean();
  Eigen::MatrixXd c = k;
  c.colwise() -= row_means;
  c.rowwise() -= col_means.transpose();
  c.array() += grand;
  return c;
}

}  // namespace detail

/// Two-sample permutation test on the biased MMD^2 statistic. The pooled
/// Gram matrix is built once; each permutation only re-partitions indices.
inline TestResult mmd_test(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q,
                           const KernelSpec& spec, int permutations = 500,
                           std::uint64_t seed = 0) {
  if (permutations < 99) throw std::invalid_argument("permutation test needs >= 99 permutations");
  const Eigen::Index m = p.rows(), n = q.rows();
  if (m < 1 || n < 1) throw std::invalid_argument("mmd test needs at least one point per sample");
  if (p.cols() != q.cols()) throw std::invalid_argument("samples must share a dimension");
  const Eigen::Index total = m + n;
  Eigen::MatrixXd pooled(total, p.cols());
  pooled.topRows(m) = p;
  pooled.bottomRows(n) = q;
  const Eigen::MatrixXd g = gram(spec, pooled).values;

  const auto statistic_of = [&](const std::vector<int>& idx) {
    double spp = 0.0, sqq = 0.0, spq = 0.0;
    for (Eigen::Index i = 0; i < total; ++i) {
      const bool ip = i < m;
      const double* col = g.data() + static_cast<std::ptrdiff_t>(idx[i]) * total;
      for (Eigen::Index j = 0; j < total; ++j) {
        const double v = col[idx[j]];
        if (ip && j < m) {
          spp += v;
        } else if (!ip && j >= m) {
          sqq += v;
        } else {
          spq += v;
        }
      }
    }
    const double dm = static_cast<double>(m), dn = static_cast<double>(n);
    return spp / (dm * dm) + sqq / (dn * dn) - spq / (dm * dn);
  };

  std::vector<int> identity(total);
  for (Eigen::Index i = 0; i < total; ++i) identity[i] = static_cast<int>(i);
  const double observed = statistic_of(identity);

  int ge = 0;
  for (int b = 0; b < permutations; ++b) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
    std::vector<int> idx = identity;
    rng.shuffle(idx);
    if (detail::counts_as_ge(statistic_of(idx), observed)) ++ge;
  }
  return {observed, (1.0 + ge) / (1.0 + permutations), permutations, seed};
}

/// V-statistic HSIC: (1/n^2) tr(Kx H Ky H) with H the centering matrix.
/// Nonnegative; zero iff the centered Grams are RKHS-uncorrelated.
inline double hsic(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                   const KernelSpec& spec_x, const KernelSpec& spec_y) {
  if (x.rows() != y.rows()) throw std::invalid_argument("hsic needs equal sample lengths");
  const Eigen::Index n = x.rows();
  if (n < 2) throw std::invalid_argument("hsic needs at least two paired observations");
  const Eigen::MatrixXd kxc = detail::center_gram(gram(spec_x, x).values);
  const Eigen::MatrixXd ky = gram(spec_y, y).values;
  const double v = (kxc.array() * ky.array()).sum() / (static_cast<double>(n) * n);
  return v < 0.0 ? 0.0 : v;  // clamp rounding noise; the V-statistic is >= 0
}

/// Independence permutation test on HSIC. Kx is centered once; permutations
/// re-index the rows and columns of Ky only.
inline TestResult hsic_test(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                            const KernelSpec& spec_x, const KernelSpec& spec_y,
                            int permutations = 500, std::uint64_t seed = 0) {
  if (permutations < 99) throw std::invalid_argument("permutation test needs >= 99 permutations");
  if (x.rows() != y.rows()) throw std::invalid_argument("hsic needs equal sample lengths");
  const Eigen::Index n = x.rows();
  if (n < 2) throw std::invalid_argument("hsic needs at least two paired observations");
  const Eigen::MatrixXd kxc = detail::center_gram(gram(spec_x, x).values);
  const Eigen::MatrixXd ky = gram(spec_y, y).values;

  const auto statistic_of = [&](const std::vector<int>& idx) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double* kyc = ky.data() + static_cast<std::ptrdiff_t>(idx[i]) * n;
      for (Eigen::Index j = 0; j < n; ++j) {
        acc += kxc(j, i) * kyc[idx[j]];
      }
    }
    const double v = acc / (static_cast<double>(n) * n);
    return v < 0.0 ? 0.0 : v;
  };

  std::vector<int> identity(n);
  for (Eigen::Index i = 0; i < n; ++i) identity[i] = static_cast<int>(i);
  const double observed = statistic_of(identity);

  int ge = 0;
  for (int b = 0; b < permutations; ++b) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
    std::vector<int> idx = identity;
    rng.shuffle(idx);
    if (detail::counts_as_ge(statistic_of(idx), observed)) ++ge;
  }
  return {observed, (1.0 + ge) / (1.0 + permutations), permutations, seed};
}

}  // namespace kcause
