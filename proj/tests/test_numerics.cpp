#include <doctest.h>

#include <cmath>

#include "kherd/numerics.hpp"

using namespace kherd;

namespace {

Mat random_spd(Rng& rng, int d) {
  Mat a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
  return a * a.transpose() + 0.5 * Mat::Identity(d, d);
}

}  // namespace

TEST_CASE("cholesky of the identity is the identity") {
  const Mat id = Mat::Identity(3, 3);
  CHECK((cholesky(id) - id).norm() == 0.0);
}

TEST_CASE("cholesky of a diagonal matrix takes square roots") {
  Mat m(2, 2);
  m << 4.0, 0.0, 0.0, 9.0;
  const Mat l = cholesky(m);
  CHECK(l(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(l(1, 1) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(l(0, 1) == 0.0);
  CHECK(l(1, 0) == 0.0);
}

TEST_CASE("cholesky reconstructs a random SPD 5x5") {
  Rng rng(31);
  const Mat m = random_spd(rng, 5);
  const Mat l = cholesky(m);
  CHECK((l * l.transpose() - m).norm() / m.norm() < 1e-10);
}

TEST_CASE("cholesky reconstruction holds up to dimension 20") {
  Rng rng(32);
  for (int d = 1; d <= 20; ++d) {
    const Mat m = random_spd(rng, d);
    const Mat l = cholesky(m);
    CHECK((l * l.transpose() - m).norm() / m.norm() < 1e-10);
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) CHECK(l(i, j) == 0.0);
  }
}

TEST_CASE("cholesky rejects an indefinite matrix") {
  Mat m(2, 2);
  m << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(cholesky(m), NotPositiveDefinite);
}

TEST_CASE("cholesky_psd handles the zero matrix as a point mass") {
  const Mat l = cholesky_psd(Mat::Zero(3, 3));
  CHECK(l.norm() == 0.0);
}

TEST_CASE("cholesky_psd zeroes degenerate directions and keeps the rest") {
  Mat m(2, 2);
  m << 1.0, 0.0, 0.0, 0.0;
  const Mat l = cholesky_psd(m);
  CHECK((l * l.transpose() - m).norm() < 1e-12);
}

TEST_CASE("cholesky_psd still rejects clearly negative pivots") {
  Mat m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(cholesky_psd(m), NotPositiveDefinite);
}

TEST_CASE("standard normal log density at the mode") {
  const Vec x = Vec::Zero(1);
  const Mat cov = Mat::Identity(1, 1);
  CHECK(mvn_logpdf(x, x, cov) == doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-12));
  CHECK(mvn_logpdf(x, x, cov) == doctest::Approx(-0.918939).epsilon(1e-6));
}

TEST_CASE("log density at the mean is -(d log 2pi + log det) / 2") {
  Rng rng(33);
  const Mat cov = random_spd(rng, 4);
  Vec mean(4);
  mean << 1.0, -2.0, 0.5, 3.0;
  const double logdet = 2.0 * cholesky(cov).diagonal().array().log().sum();
  const double expected = -0.5 * (4.0 * std::log(2.0 * M_PI) + logdet);
  CHECK(mvn_logpdf(mean, mean, cov) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("log density matches the explicit-inverse formula") {
  Rng rng(34);
  const Mat cov = random_spd(rng, 3);
  Vec mean(3), x(3);
  mean << 0.3, -1.1, 2.0;
  x << 1.0, 0.2, -0.4;
  const Vec diff = x - mean;
  const double quad = diff.dot(cov.inverse() * diff);
  const double expected =
      -0.5 * (3.0 * std::log(2.0 * M_PI) + std::log(cov.determinant()) + quad);
  CHECK(mvn_logpdf(x, mean, cov) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("1-D density integrates to one on a grid") {
  Vec mean(1);
  mean << 0.3;
  Mat cov(1, 1);
  cov << 1.7;
  const double h = 1e-3;
  double total = 0.0;
  Vec x(1);
  for (double v = -15.0; v <= 15.0; v += h) {
    x(0) = v;
    total += std::exp(mvn_logpdf(x, mean, cov)) * h;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("mvn_sample with n = 0 returns an empty matrix") {
  Rng rng(35);
  const Mat draws = mvn_sample(rng, Vec::Zero(2), Mat::Identity(2, 2), 0);
  CHECK(draws.rows() == 0);
  CHECK(draws.cols() == 2);
}

TEST_CASE("zero covariance draws collapse to the mean") {
  Rng rng(36);
  Vec mean(2);
  mean << 4.0, -1.0;
  const Mat draws = mvn_sample(rng, mean, Mat::Zero(2, 2), 10);
  for (int i = 0; i < 10; ++i) {
    CHECK(draws(i, 0) == 4.0);
    CHECK(draws(i, 1) == -1.0);
  }
}

TEST_CASE("sample mean of 1e5 standard normal draws obeys the CLT bound") {
  Rng rng(37);
  const int n = 100000;
  const Mat draws = mvn_sample(rng, Vec::Zero(2), Mat::Identity(2, 2), n);
  const Vec mean = draws.colwise().mean();
  const double bound = 3.0 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(mean(0)) < bound);
  CHECK(std::abs(mean(1)) < bound);
}

TEST_CASE("sampling is reproducible for a fixed seed") {
  Rng a(38), b(38);
  Rng rng_cov(39);
  const Mat cov = random_spd(rng_cov, 3);
  const Mat d1 = mvn_sample(a, Vec::Zero(3), cov, 50);
  const Mat d2 = mvn_sample(b, Vec::Zero(3), cov, 50);
  CHECK((d1 - d2).norm() == 0.0);
}

TEST_CASE("non-finite input is rejected") {
  Vec v(2);
  v << 1.0, std::nan("");
  CHECK_THROWS_AS(check_finite(v), NonFinite);
  Mat m(1, 2);
  m << 1.0, INFINITY;
  CHECK_THROWS_AS(check_finite(m), NonFinite);
}

TEST_CASE("is_symmetric tolerates round-off and flags real asymmetry") {
  Mat m(2, 2);
  m << 1.0, 0.5, 0.5, 2.0;
  CHECK(is_symmetric(m));
  m(0, 1) = 0.6;
  CHECK_FALSE(is_symmetric(m));
}
