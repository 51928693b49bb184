#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kcause/errors.hpp"
#include "kcause/rng.hpp"

namespace kcause {

/// Declarative description of a positive-definite kernel.
///
/// Product kernels act on concatenated coordinates: each factor owns `dim`
/// consecutive coordinates, in factor order. Gaussian and Matern kernels are
/// correlation kernels (unit diagonal, entries in [-1, 1]); the linear kernel
/// is the plain dot product.
struct KernelSpec {
  enum class Family { Gaussian, Matern, Linear, Product };

  struct Factor;

  Family family = Family::Linear;
  double bandwidth = 0.0;    // Gaussian
  double smoothness = 0.0;   // Matern nu, one of 1/2, 3/2, 5/2
  double lengthscale = 0.0;  // Matern
  std::vector<Factor> factors;

  static KernelSpec gaussian(double bandwidth);
  static KernelSpec matern(double nu, double lengthscale);
  static KernelSpec linear();
  static KernelSpec product(std::vector<Factor> factors);

  /// Gaussian and Matern values lie in [-1, 1] with k(x, x) = 1.
  bool is_bounded() const;

  /// Total coordinate count for product specs, -1 (any) otherwise.
  int product_dim() const;

  bool operator==(const KernelSpec& other) const;
  bool operator!=(const KernelSpec& other) const { return !(*this == other); }
};

struct KernelSpec::Factor {
  std::string name;
  KernelSpec spec;
  int dim = 1;  // coordinates consumed by this factor

  bool operator==(const Factor& o) const {
    return name == o.name && dim == o.dim && spec == o.spec;
  }
  bool operator!=(const Factor& o) const { return !(*this == o); }
};

inline bool KernelSpec::is_bounded() const {
  switch (family) {
    case Family::Gaussian:
    case Family::Matern:
      return true;
    case Family::Linear:
      return false;
    case Family::Product:
      for (const auto& f : factors) {
        if (!f.spec.is_bounded()) return false;
      }
      return true;
  }
  return false;
}

inline KernelSpec KernelSpec::gaussian(double bandwidth) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw std::invalid_argument("gaussian kernel requires a positive finite bandwidth");
  }
  KernelSpec s;
  s.family = Family::Gaussian;
  s.bandwidth = bandwidth;
  return s;
}

inline KernelSpec KernelSpec::matern(double nu, double lengthscale) {
  if (nu != 0.5 && nu != 1.5 && nu != 2.5) {
    throw std::invalid_argument("matern smoothness must be one of 0.5, 1.5, 2.5");
  }
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
    throw std::invalid_argument("matern kernel requires a positive finite lengthscale");
  }
  KernelSpec s;
  s.family = Family::Matern;
  s.smoothness = nu;
  s.lengthscale = lengthscale;
  return s;
}

inline KernelSpec KernelSpec::linear() {
  KernelSpec s;
  s.family = Family::Linear;
  return s;
}

inline KernelSpec KernelSpec::product(std::vector<Factor> factors) {
  if (factors.size() < 2) {
    throw std::invalid_argument("product kernel requires at least two factors");
  }
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (factors[i].name.empty()) {
      throw std::invalid_argument("product kernel factors need non-empty names");
    }
    if (factors[i].dim < 1) {
      throw std::invalid_argument("product kernel factor dimension must be >= 1");
    }
    for (std::size_t j = i + 1; j < factors.size(); ++j) {
      if (factors[i].name == factors[j].name) {
        throw std::invalid_argument("duplicate product kernel factor name '" +
                                    factors[i].name + "'");
      }
    }
  }
  KernelSpec s;
  s.family = Family::Product;
  s.factors = std::move(factors);
  return s;
}

inline int KernelSpec::product_dim() const {
  if (family != Family::Product) return -1;
  int d = 0;
  for (const auto& f : factors) d += f.dim;
  return d;
}

inline bool KernelSpec::operator==(const KernelSpec& other) const {
  if (family != other.family) return false;
  switch (family) {
    case Family::Gaussian:
      return bandwidth == other.bandwidth;
    case Family::Matern:
      return smoothness == other.smoothness && lengthscale == other.lengthscale;
    case Family::Linear:
      return true;
    case Family::Product:
      return factors == other.factors;
  }
  return false;
}

/// Gram values together with the kernel spec that produced them.
struct GramMatrix {
  Eigen::MatrixXd values;
  KernelSpec spec;
};

namespace detail {

inline void check_dim(const KernelSpec& spec, Eigen::Index d) {
  if (d < 1) throw std::invalid_argument("kernel input must have at least one coordinate");
  const int pd = spec.product_dim();
  if (pd >= 0 && pd != d) {
    throw std::invalid_argument("product kernel expects " + std::to_string(pd) +
                                " coordinates, got " + std::to_string(d));
  }
}

inline Eigen::MatrixXd pairwise_sqdist(const Eigen::MatrixXd& rows,
                                       const Eigen::MatrixXd& cols) {
  const Eigen::VectorXd rn = rows.rowwise().squaredNorm();
  const Eigen::VectorXd cn = cols.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = -2.0 * rows * cols.transpose();
  d2.colwise() += rn;
  d2.rowwise() += cn.transpose();
  return d2.cwiseMax(0.0);
}

inline double matern_of_r(double r, double nu, double ell) {
  if (nu == 0.5) return std::exp(-r / ell);
  if (nu == 1.5) {
    const double s = std::sqrt(3.0) * r / ell;
    return (1.0 + s) * std::exp(-s);
  }
  const double s = std::sqrt(5.0) * r / ell;
  return (1.0 + s + s * s / 3.0) * std::exp(-s);
}

inline Eigen::MatrixXd gram_values(const KernelSpec& spec,
                                   const Eigen::MatrixXd& rows,
                                   const Eigen::MatrixXd& cols) {
  switch (spec.family) {
    case KernelSpec::Family::Gaussian: {
      const double denom = 2.0 * spec.bandwidth * spec.bandwidth;
      Eigen::MatrixXd d2 = pairwise_sqdist(rows, cols);
      return (-d2 / denom).array().exp();
    }
    case KernelSpec::Family::Matern: {
      Eigen::MatrixXd r = pairwise_sqdist(rows, cols).cwiseSqrt();
      const double nu = spec.smoothness, ell = spec.lengthscale;
      return r.unaryExpr([nu, ell](double v) { return matern_of_r(v, nu, ell); });
    }
    case KernelSpec::Family::Linear:
      return rows * cols.transpose();
    case KernelSpec::Family::Product: {
      Eigen::MatrixXd out = Eigen::MatrixXd::Ones(rows.rows(), cols.rows());
      Eigen::Index offset = 0;
      for (const auto& f : spec.factors) {
        out = out.cwiseProduct(gram_values(f.spec, rows.middleCols(offset, f.dim),
                                           cols.middleCols(offset, f.dim)));
        offset += f.dim;
      }
      return out;
    }
  }
  throw std::logic_error("unreachable kernel family");
}

}  // namespace detail

inline double eval_kernel(const KernelSpec& spec, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("kernel arguments must have equal dimension");
  }
  detail::check_dim(spec, x.size());
  switch (spec.family) {
    case KernelSpec::Family::Gaussian:
      return std::exp(-(x - y).squaredNorm() / (2.0 * spec.bandwidth * spec.bandwidth));
    case KernelSpec::Family::Matern:
      return detail::matern_of_r((x - y).norm(), spec.smoothness, spec.lengthscale);
    case KernelSpec::Family::Linear:
      return x.dot(y);
    case KernelSpec::Family::Product: {
      double out = 1.0;
      Eigen::Index offset = 0;
      for (const auto& f : spec.factors) {
        out *= eval_kernel(f.spec, x.segment(offset, f.dim), y.segment(offset, f.dim));
        offset += f.dim;
      }
      return out;
    }
  }
  throw std::logic_error("unreachable kernel family");
}

/// Cross Gram matrix k(rows_i, cols_j).
inline GramMatrix gram(const KernelSpec& spec, const Eigen::MatrixXd& rows,
                       const Eigen::MatrixXd& cols) {
  if (rows.rows() == 0 || cols.rows() == 0) {
    throw std::invalid_argument("gram requires non-empty point sets");
  }
  if (rows.cols() != cols.cols()) {
    throw std::invalid_argument("gram point sets must share a dimension");
  }
  detail::check_dim(spec, rows.cols());
  return {detail::gram_values(spec, rows, cols), spec};
}

/// Symmetric Gram matrix of one point set. Exactly symmetric; bounded
/// families carry an exact unit diagonal.
inline GramMatrix gram(const KernelSpec& spec, const Eigen::MatrixXd& points) {
  GramMatrix g = gram(spec, points, points);
  g.values = g.values.selfadjointView<Eigen::Lower>();
  return g;
}

/// Column vector k(points_i, x).
inline Eigen::VectorXd kernel_vector(const KernelSpec& spec,
                                     const Eigen::MatrixXd& points,
                                     const Eigen::VectorXd& x) {
  Eigen::MatrixXd row = x.transpose();
  return gram(spec, points, row).values.col(0);
}

/// Mean of k(x_i, x_i) over the rows; the default ridge scale trace(K)/n
/// without materializing K.
inline double kernel_diag_mean(const KernelSpec& spec, const Eigen::MatrixXd& points) {
  if (points.rows() == 0) throw std::invalid_argument("empty point set");
  detail::check_dim(spec, points.cols());
  switch (spec.family) {
    case KernelSpec::Family::Gaussian:
    case KernelSpec::Family::Matern:
      return 1.0;
    case KernelSpec::Family::Linear:
      return points.rowwise().squaredNorm().mean();
    case KernelSpec::Family::Product: {
      Eigen::VectorXd diag = Eigen::VectorXd::Ones(points.rows());
      Eigen::Index offset = 0;
      for (const auto& f : spec.factors) {
        if (f.spec.family == KernelSpec::Family::Linear) {
          diag.array() *=
              points.middleCols(offset, f.dim).rowwise().squaredNorm().array();
        }
        offset += f.dim;
      }
      return diag.mean();
    }
  }
  throw std::logic_error("unreachable kernel family");
}

/// Median of the strictly positive pairwise Euclidean distances.
inline double median_heuristic(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  if (n < 2) throw std::invalid_argument("median heuristic needs at least two points");
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = (points.row(i) - points.row(j)).norm();
      if (d > 0.0) dists.push_back(d);
    }
  }
  if (dists.empty()) {
    throw std::invalid_argument("median heuristic undefined: all points identical");
  }
  const std::size_t m = dists.size();
  auto mid = dists.begin() + m / 2;
  std::nth_element(dists.begin(), mid, dists.end());
  if (m % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(dists.begin(), mid);
  return 0.5 * (lo + hi);
}

/// Random Fourier features for a Gaussian kernel: rows phi(x_i) with
/// phi(x) = sqrt(2/D) cos(w^T x + b), w ~ N(0, sigma^-2 I), b ~ U[0, 2pi).
/// E[phi(x)^T phi(y)] = k(x, y). Deterministic in the seed.
inline Eigen::MatrixXd rff_features(const KernelSpec& spec, int feature_count,
                                    std::uint64_t seed, const Eigen::MatrixXd& points) {
  if (spec.family != KernelSpec::Family::Gaussian) {
    throw std::invalid_argument("random features unsupported for this kernel family (gaussian only)");
  }
  if (feature_count < 1) throw std::invalid_argument("feature count must be >= 1");
  if (points.rows() == 0 || points.cols() == 0) {
    throw std::invalid_argument("empty point set");
  }
  const Eigen::Index d = points.cols();
  Eigen::MatrixXd freq(d, feature_count);
  Eigen::RowVectorXd phase(feature_count);
  Rng rng(seed);
  for (int j = 0; j < feature_count; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) freq(i, j) = rng.normal() / spec.bandwidth;
    phase(j) = 6.28318530717958647692 * rng.uniform();
  }
  Eigen::MatrixXd proj = points * freq;
  proj.rowwise() += phase;
  return std::sqrt(2.0 / feature_count) * proj.array().cos();
}

}  // namespace kcause
