#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <vector>

#include "kcause/kernels.hpp"
#include "kcause/rng.hpp"
#include "kcause/serialization.hpp"

using namespace kcause;

namespace {

Eigen::VectorXd vec1(double v) { return Eigen::VectorXd::Constant(1, v); }

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

KernelSpec random_spec(Rng& rng) {
  switch (rng.below(3)) {
    case 0:
      return KernelSpec::gaussian(0.2 + 2.0 * rng.uniform());
    case 1: {
      const double nus[] = {0.5, 1.5, 2.5};
      return KernelSpec::matern(nus[rng.below(3)], 0.2 + 2.0 * rng.uniform());
    }
    default:
      return KernelSpec::linear();
  }
}

}  // namespace

TEST_CASE("gaussian kernel closed form") {
  const KernelSpec k = KernelSpec::gaussian(1.0);
  CHECK(eval_kernel(k, vec1(0.0), vec1(0.0)) == 1.0);
  CHECK_THAT(eval_kernel(k, vec1(0.0), vec1(1.0)),
             Catch::Matchers::WithinAbs(std::exp(-0.5), 1e-15));
  const KernelSpec wide = KernelSpec::gaussian(2.0);
  CHECK_THAT(eval_kernel(wide, vec2(0.0, 0.0), vec2(1.0, 1.0)),
             Catch::Matchers::WithinAbs(std::exp(-2.0 / 8.0), 1e-15));
}

TEST_CASE("matern kernels closed form") {
  const double r = 0.7, ell = 0.9;
  const Eigen::VectorXd a = vec1(0.0), b = vec1(r);
  CHECK_THAT(eval_kernel(KernelSpec::matern(0.5, ell), a, b),
             Catch::Matchers::WithinAbs(std::exp(-r / ell), 1e-15));
  const double s3 = std::sqrt(3.0) * r / ell;
  CHECK_THAT(eval_kernel(KernelSpec::matern(1.5, ell), a, b),
             Catch::Matchers::WithinAbs((1.0 + s3) * std::exp(-s3), 1e-15));
  const double s5 = std::sqrt(5.0) * r / ell;
  CHECK_THAT(eval_kernel(KernelSpec::matern(2.5, ell), a, b),
             Catch::Matchers::WithinAbs((1.0 + s5 + s5 * s5 / 3.0) * std::exp(-s5), 1e-15));
}

TEST_CASE("linear and product kernels") {
  CHECK(eval_kernel(KernelSpec::linear(), vec1(2.0), vec1(3.0)) == 6.0);
  const KernelSpec prod = KernelSpec::product(
      {{"a", KernelSpec::linear(), 1}, {"b", KernelSpec::gaussian(1.0), 1}});
  CHECK_THAT(eval_kernel(prod, vec2(2.0, 0.0), vec2(3.0, 1.0)),
             Catch::Matchers::WithinAbs(6.0 * std::exp(-0.5), 1e-14));
}

TEST_CASE("kernel spec validation") {
  CHECK_THROWS_AS(KernelSpec::gaussian(0.0), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::gaussian(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::matern(2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::matern(1.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::product({{"a", KernelSpec::linear(), 1}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::product({{"a", KernelSpec::linear(), 1},
                                       {"a", KernelSpec::linear(), 1}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::product({{"a", KernelSpec::linear(), 0},
                                       {"b", KernelSpec::linear(), 1}}),
                  std::invalid_argument);
}

TEST_CASE("kernel argument dimension checks") {
  const KernelSpec k = KernelSpec::gaussian(1.0);
  CHECK_THROWS_AS(eval_kernel(k, vec1(0.0), vec2(0.0, 1.0)), std::invalid_argument);
  const KernelSpec prod = KernelSpec::product(
      {{"a", KernelSpec::linear(), 2}, {"b", KernelSpec::gaussian(1.0), 1}});
  CHECK(prod.product_dim() == 3);
  CHECK_THROWS_AS(eval_kernel(prod, vec2(0.0, 1.0), vec2(0.0, 1.0)),
                  std::invalid_argument);
  Eigen::MatrixXd pts(2, 2);
  pts << 0.0, 1.0, 2.0, 3.0;
  CHECK_THROWS_AS(gram(prod, pts), std::invalid_argument);
  CHECK_THROWS_AS(gram(k, Eigen::MatrixXd(0, 1)), std::invalid_argument);
}

TEST_CASE("gram matrices are symmetric with unit diagonal for bounded families") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(10));
    const int d = 1 + static_cast<int>(rng.below(3));
    Eigen::MatrixXd pts(n, d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) pts(i, j) = 2.0 * rng.normal();
    const KernelSpec spec = random_spec(rng);
    const Eigen::MatrixXd g = gram(spec, pts).values;
    CHECK(g == g.transpose());
    if (spec.is_bounded()) {
      CHECK(g.diagonal().isConstant(1.0));
      CHECK(g.maxCoeff() <= 1.0);
      CHECK(g.minCoeff() >= -1.0);
    }
  }
}

TEST_CASE("gram matrices are positive semidefinite") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(15));
    const int d = 1 + static_cast<int>(rng.below(3));
    Eigen::MatrixXd pts(n, d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) pts(i, j) = 3.0 * rng.normal();
    KernelSpec spec = random_spec(rng);
    if (trial % 4 == 0 && d >= 2) {
      spec = KernelSpec::product(
          {{"a", random_spec(rng), 1}, {"b", random_spec(rng), d - 1}});
    }
    const Eigen::MatrixXd g = gram(spec, pts).values;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-8 * std::max(1.0, g.diagonal().maxCoeff()) * n);
  }
}

TEST_CASE("cross gram agrees with pointwise evaluation") {
  Rng rng(13);
  Eigen::MatrixXd a(4, 2), b(3, 2);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 2; ++j) a(i, j) = rng.normal();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) b(i, j) = rng.normal();
  for (const KernelSpec& spec :
       {KernelSpec::gaussian(0.8), KernelSpec::matern(1.5, 1.2), KernelSpec::linear()}) {
    const Eigen::MatrixXd g = gram(spec, a, b).values;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 3; ++j) {
        CHECK_THAT(g(i, j), Catch::Matchers::WithinAbs(
                                eval_kernel(spec, a.row(i), b.row(j)), 1e-12));
      }
    }
  }
}

TEST_CASE("product gram equals entrywise product of factor grams") {
  Rng rng(17);
  Eigen::MatrixXd pts(5, 3);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) pts(i, j) = rng.normal();
  const KernelSpec ka = KernelSpec::gaussian(0.7);
  const KernelSpec kb = KernelSpec::matern(2.5, 1.1);
  const KernelSpec prod = KernelSpec::product({{"a", ka, 2}, {"b", kb, 1}});
  const Eigen::MatrixXd g = gram(prod, pts).values;
  const Eigen::MatrixXd expected = gram(ka, pts.leftCols(2))
                                       .values.cwiseProduct(gram(kb, pts.rightCols(1)).values);
  CHECK((g - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("median heuristic") {
  Eigen::MatrixXd a(3, 1);
  a << 0.0, 1.0, 2.0;
  CHECK(median_heuristic(a) == 1.0);  // distances {1, 1, 2}

  Eigen::MatrixXd b(3, 1);
  b << 0.0, 0.0, 3.0;
  CHECK(median_heuristic(b) == 3.0);  // zero distance dropped, {3, 3} remain

  Eigen::MatrixXd c(2, 1);
  c << 5.0, 5.0;
  CHECK_THROWS_AS(median_heuristic(c), std::invalid_argument);

  Eigen::MatrixXd d(4, 1);
  d << 0.0, 1.0, 3.0, 6.0;  // distances {1, 2, 3, 3, 5, 6}, median (3+3)/2
  CHECK(median_heuristic(d) == 3.0);

  CHECK_THROWS_AS(median_heuristic(Eigen::MatrixXd(1, 1)), std::invalid_argument);
}

TEST_CASE("random features approximate the gaussian kernel") {
  const KernelSpec k = KernelSpec::gaussian(1.0);
  Rng rng(23);
  Eigen::MatrixXd pts(40, 3);
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 3; ++j) pts(i, j) = rng.uniform();

  const Eigen::MatrixXd phi = rff_features(k, 2000, 99, pts);
  REQUIRE(phi.rows() == 40);
  REQUIRE(phi.cols() == 2000);
  const Eigen::MatrixXd approx = phi * phi.transpose();
  const Eigen::MatrixXd exact = gram(k, pts).values;
  CHECK((approx - exact).cwiseAbs().maxCoeff() <= 0.05);
}

TEST_CASE("random features are deterministic in the seed") {
  const KernelSpec k = KernelSpec::gaussian(0.5);
  Eigen::MatrixXd pts(5, 2);
  Rng rng(31);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 2; ++j) pts(i, j) = rng.normal();
  const Eigen::MatrixXd a = rff_features(k, 64, 1234, pts);
  const Eigen::MatrixXd b = rff_features(k, 64, 1234, pts);
  CHECK(a == b);
  const Eigen::MatrixXd c = rff_features(k, 64, 1235, pts);
  CHECK(a != c);
}

TEST_CASE("random features reject unsupported families") {
  Eigen::MatrixXd pts(3, 1);
  pts << 0.0, 1.0, 2.0;
  CHECK_THROWS_AS(rff_features(KernelSpec::linear(), 16, 0, pts), std::invalid_argument);
  CHECK_THROWS_AS(rff_features(KernelSpec::matern(1.5, 1.0), 16, 0, pts),
                  std::invalid_argument);
  CHECK_THROWS_AS(rff_features(KernelSpec::gaussian(1.0), 0, 0, pts),
                  std::invalid_argument);
}

TEST_CASE("random feature error shrinks with the feature count") {
  const KernelSpec k = KernelSpec::gaussian(1.0);
  Rng rng(37);
  Eigen::MatrixXd pts(30, 2);
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 2; ++j) pts(i, j) = rng.normal();
  const Eigen::MatrixXd exact = gram(k, pts).values;
  double prev = 1e9;
  for (int d : {64, 512, 4096}) {
    double err = 0.0;
    const int seeds = 12;
    for (int s = 0; s < seeds; ++s) {
      const Eigen::MatrixXd phi = rff_features(k, d, 1000 + s, pts);
      err += (phi * phi.transpose() - exact).cwiseAbs().maxCoeff();
    }
    err /= seeds;
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("kernel diag mean matches the gram trace") {
  Rng rng(41);
  Eigen::MatrixXd pts(6, 2);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 2; ++j) pts(i, j) = rng.normal();
  for (const KernelSpec& spec :
       {KernelSpec::gaussian(1.0), KernelSpec::linear(),
        KernelSpec::product({{"a", KernelSpec::linear(), 1},
                             {"b", KernelSpec::gaussian(0.5), 1}})}) {
    const double direct = gram(spec, pts).values.trace() / 6.0;
    CHECK_THAT(kernel_diag_mean(spec, pts), Catch::Matchers::WithinAbs(direct, 1e-12));
  }
}

TEST_CASE("kernel spec json round trip") {
  const KernelSpec specs[] = {
      KernelSpec::gaussian(1.25), KernelSpec::matern(2.5, 0.4), KernelSpec::linear(),
      KernelSpec::product({{"t", KernelSpec::gaussian(1.0), 1},
                           {"x", KernelSpec::matern(0.5, 2.0), 3}})};
  for (const KernelSpec& s : specs) {
    const json j = kernel_spec_to_json(s);
    CHECK(kernel_spec_from_json(j) == s);
  }

  const json simple = {{"family", "gaussian"}, {"bandwidth", 1.0}};
  CHECK(kernel_spec_from_json(simple) == KernelSpec::gaussian(1.0));

  CHECK_THROWS_AS(kernel_spec_from_json(json{{"family", "triangular"}}), ConfigError);
  CHECK_THROWS_AS(kernel_spec_from_json(json{{"family", "gaussian"}}), ConfigError);
  CHECK_THROWS_AS(kernel_spec_from_json(json{{"family", "gaussian"},
                                             {"bandwidth", -1.0}}),
                  ConfigError);
}

TEST_CASE("seed derivation separates substreams") {
  CHECK(derive_seed(42, "alpha") != derive_seed(42, "beta"));
  CHECK(derive_seed(42, "alpha") != derive_seed(43, "alpha"));
  CHECK(derive_seed(42, std::uint64_t{0}) != derive_seed(42, std::uint64_t{1}));
  CHECK(derive_seed(42, "alpha") == derive_seed(42, "alpha"));
}

TEST_CASE("rng draws are reproducible and well distributed") {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.uniform() == b.uniform());
    CHECK(a.normal() == b.normal());
  }

  Rng rng(6);
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum2 += z * z;
  }
  CHECK_THAT(sum / n, Catch::Matchers::WithinAbs(0.0, 0.01));
  CHECK_THAT(sum2 / n, Catch::Matchers::WithinAbs(1.0, 0.02));

  // Fisher-Yates produces every order of three items with roughly equal mass.
  std::map<std::vector<int>, int> counts;
  Rng shuffler(8);
  for (int i = 0; i < 6000; ++i) {
    std::vector<int> v{0, 1, 2};
    shuffler.shuffle(v);
    counts[v]++;
  }
  REQUIRE(counts.size() == 6);
  for (const auto& [perm, count] : counts) {
    CHECK(count > 800);
    CHECK(count < 1200);
  }
}
