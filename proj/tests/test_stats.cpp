#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "mvgps/rng.hpp"
#include "mvgps/stats.hpp"

using namespace mvgps;
using Eigen::VectorXd;

namespace {
VectorXd vec(std::initializer_list<double> values) {
  VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}
}  // namespace

TEST_CASE("validate_weights rejects degenerate inputs") {
  CHECK_THROWS_AS(validate_weights(VectorXd()), ValidationError);
  CHECK_THROWS_AS(validate_weights(vec({1.0, -0.5})), ValidationError);
  CHECK_THROWS_AS(validate_weights(vec({0.0, 0.0})), ValidationError);
  CHECK_THROWS_AS(validate_weights(vec({1.0, std::nan("")})), ValidationError);
  CHECK_NOTHROW(validate_weights(vec({0.0, 2.0})));  // some zeros are fine
}

TEST_CASE("weighted mean and covariance match hand-computed values") {
  const VectorXd x = vec({0.5, 1.2, -0.3, 2.2, 1.0});
  const VectorXd y = vec({1.0, 0.4, -0.2, 1.8, 0.9});
  const VectorXd w = vec({1.0, 0.5, 2.0, 1.0, 3.0});
  CHECK(weighted_mean(x, w) == doctest::Approx(0.76).epsilon(1e-14));
  CHECK(weighted_covariance(x, y, w) == doctest::Approx(0.4656).epsilon(1e-13));
  CHECK(weighted_pearson(x, y, w) == doctest::Approx(0.9212348794788098).epsilon(1e-13));
}

TEST_CASE("weighted pearson of orthogonal-by-construction data is zero") {
  CHECK(weighted_pearson(vec({0.0, 1.0, 2.0}), vec({0.0, 1.0, 0.0}), vec({1.0, 2.0, 1.0})) ==
        doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("weighted pearson is invariant to affine maps and weight scale") {
  Rng rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    VectorXd x(40), y(40), w(40);
    for (Eigen::Index i = 0; i < 40; ++i) {
      x(i) = rng.normal();
      y(i) = 0.4 * x(i) + rng.normal();
      w(i) = std::exp(0.5 * rng.normal());
    }
    const double base = weighted_pearson(x, y, w);
    CHECK(weighted_pearson((2.5 * x.array() - 7.0).matrix(), y, w) ==
          doctest::Approx(base).epsilon(1e-12));
    CHECK(weighted_pearson((-1.5 * x.array() + 3.0).matrix(), y, w) ==
          doctest::Approx(-base).epsilon(1e-12));
    CHECK(weighted_pearson(x, y, (3.7 * w).eval()) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("weighted pearson stays inside [-1, 1] and hits it for collinear data") {
  const VectorXd x = vec({1.0, 2.0, 3.0, 4.0});
  const VectorXd w = vec({1.0, 3.0, 0.5, 2.0});
  CHECK(weighted_pearson(x, (2.0 * x).eval(), w) == 1.0);
  CHECK(weighted_pearson(x, (-0.5 * x).eval(), w) == -1.0);
}

TEST_CASE("weighted pearson rejects zero-variance columns") {
  const auto out = testutil::run_expecting(
      [] { weighted_pearson(vec({1.0, 1.0, 1.0}), vec({0.0, 1.0, 2.0}), vec({1.0, 1.0, 1.0})); });
  CHECK(out.kind == testutil::Thrown::numerical);
  CHECK(out.code == errc::undefined_correlation);
}

TEST_CASE("effective sample size matches the Kish formula") {
  CHECK(effective_sample_size(vec({1.0, 2.0, 3.0, 4.0})) ==
        doctest::Approx(10.0 * 10.0 / 30.0).epsilon(1e-15));
  const VectorXd ones = VectorXd::Ones(17);
  CHECK(effective_sample_size(ones) == doctest::Approx(17.0).epsilon(1e-15));
}

TEST_CASE("effective sample size is scale invariant and at most n") {
  Rng rng(77);
  for (int rep = 0; rep < 20; ++rep) {
    VectorXd w(30);
    for (Eigen::Index i = 0; i < 30; ++i) w(i) = std::exp(rng.normal());
    const double ess = effective_sample_size(w);
    CHECK(ess > 0.0);
    CHECK(ess <= 30.0 + 1e-12);
    CHECK(effective_sample_size((123.456 * w).eval()) == doctest::Approx(ess).epsilon(1e-12));
  }
}

TEST_CASE("sample quantile interpolates order statistics at (n-1)p") {
  VectorXd v(100);
  for (Eigen::Index i = 0; i < 100; ++i) v(i) = static_cast<double>(i + 1);
  CHECK(sample_quantile(v, 0.95) == doctest::Approx(95.05).epsilon(1e-14));
  CHECK(sample_quantile(v, 0.05) == doctest::Approx(5.95).epsilon(1e-14));
  CHECK(sample_quantile(v, 0.5) == doctest::Approx(50.5).epsilon(1e-15));
  CHECK(sample_quantile(v, 0.0) == 1.0);
  CHECK(sample_quantile(v, 1.0) == 100.0);
}

TEST_CASE("sample quantile is monotone in p and permutation invariant") {
  Rng rng(13);
  VectorXd v(57);
  for (Eigen::Index i = 0; i < 57; ++i) v(i) = rng.normal() * 3.0;
  double prev = sample_quantile(v, 0.0);
  for (double p = 0.05; p <= 1.0; p += 0.05) {
    const double q = sample_quantile(v, p);
    CHECK(q >= prev);
    prev = q;
  }
  std::vector<double> shuffled(v.data(), v.data() + v.size());
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937(99));
  const VectorXd vs = Eigen::Map<const VectorXd>(shuffled.data(), v.size());
  CHECK(sample_quantile(vs, 0.731) == doctest::Approx(sample_quantile(v, 0.731)).epsilon(1e-15));
}

TEST_CASE("sample quantile input validation") {
  CHECK_THROWS_AS(sample_quantile(VectorXd(), 0.5), ValidationError);
  CHECK_THROWS_AS(sample_quantile(vec({1.0}), -0.1), ValidationError);
  CHECK_THROWS_AS(sample_quantile(vec({1.0}), 1.1), ValidationError);
}

TEST_CASE("normal pdf matches frozen reference values") {
  CHECK(normal_pdf(1.5, 0.2, 2.0) == doctest::Approx(0.16148617983395713).epsilon(1e-15));
  CHECK(normal_pdf(0.0, 0.0, 1.0) == doctest::Approx(0.3989422804014327).epsilon(1e-15));
  // Ratio used by stabilized weights: marginal over conditional density.
  CHECK(normal_pdf(1.0, 0.0, std::sqrt(1.25)) / normal_pdf(1.0, 0.5, 1.0) ==
        doctest::Approx(0.6793819605379505).epsilon(1e-14));
}

TEST_CASE("log pdf agrees with pdf and both reject bad scales") {
  for (double x : {-2.0, 0.3, 4.1})
    CHECK(std::exp(log_normal_pdf(x, 0.7, 1.9)) ==
          doctest::Approx(normal_pdf(x, 0.7, 1.9)).epsilon(1e-13));
  CHECK_THROWS_AS(normal_pdf(0.0, 0.0, 0.0), ValidationError);
  CHECK_THROWS_AS(normal_pdf(0.0, 0.0, -1.0), ValidationError);
  CHECK_THROWS_AS(log_normal_pdf(0.0, 0.0, 0.0), ValidationError);
}
