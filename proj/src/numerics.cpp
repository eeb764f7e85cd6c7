#include "kherd/numerics.hpp"

#include <cmath>

namespace kherd {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

void require_square(const Mat& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("matrix is not square");
}

// One pass of the left-looking Cholesky. Returns false on the first pivot at
// or below `pivot_floor`.
bool try_cholesky(const Mat& m, double pivot_floor, Mat& lower) {
  const Eigen::Index d = m.rows();
  lower = Mat::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double s = m(j, j) - lower.row(j).head(j).squaredNorm();
    if (s <= pivot_floor) return false;
    const double ljj = std::sqrt(s);
    lower(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < d; ++i) {
      lower(i, j) = (m(i, j) - lower.row(i).head(j).dot(lower.row(j).head(j))) / ljj;
    }
  }
  return true;
}
}  // namespace

void check_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw NonFinite(std::string(what) + " has a non-finite entry");
}

void check_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) throw NonFinite(std::string(what) + " has a non-finite entry");
}

bool is_symmetric(const Mat& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = m.cwiseAbs().maxCoeff();
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * std::max(scale, 1.0);
}

Mat cholesky(const Mat& m) {
  require_square(m);
  check_finite(m, "cholesky input");
  const double max_diag = m.rows() > 0 ? m.diagonal().maxCoeff() : 0.0;
  const double floor = 1e-12 * std::max(max_diag, 0.0);
  Mat lower;
  if (try_cholesky(m, floor, lower)) return lower;
  // Degenerate covariance: a single jitter retry before giving up.
  Mat jittered = m + 1e-10 * Mat::Identity(m.rows(), m.cols());
  if (try_cholesky(jittered, 0.0, lower)) return lower;
  throw NotPositiveDefinite("matrix is not positive definite");
}

Mat cholesky_psd(const Mat& m) {
  require_square(m);
  check_finite(m, "cholesky input");
  const Eigen::Index d = m.rows();
  const double max_diag = d > 0 ? m.diagonal().maxCoeff() : 0.0;
  if (max_diag < 0.0) throw NotPositiveDefinite("negative diagonal entry");
  const double zero_tol = 1e-12 * std::max(max_diag, 1e-300);
  Mat lower = Mat::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double s = m(j, j) - lower.row(j).head(j).squaredNorm();
    if (s <= zero_tol) {
      if (s < -zero_tol) throw NotPositiveDefinite("matrix is not positive semidefinite");
      continue;  // rank-deficient direction, column stays zero
    }
    const double ljj = std::sqrt(s);
    lower(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < d; ++i) {
      lower(i, j) = (m(i, j) - lower.row(i).head(j).dot(lower.row(j).head(j))) / ljj;
    }
  }
  return lower;
}

double mvn_logpdf(const Vec& x, const Vec& mean, const Mat& cov) {
  if (x.size() != mean.size() || cov.rows() != x.size())
    throw DimensionMismatch("mvn_logpdf: inconsistent dimensions");
  const Mat lower = cholesky(cov);
  const double log_det = 2.0 * lower.diagonal().array().log().sum();
  const Vec z = lower.triangularView<Eigen::Lower>().solve(x - mean);
  return -0.5 * (static_cast<double>(x.size()) * std::log(kTwoPi) + log_det + z.squaredNorm());
}

Mat mvn_sample(Rng& rng, const Vec& mean, const Mat& cov, int n) {
  if (cov.rows() != mean.size()) throw DimensionMismatch("mvn_sample: cov/mean dimensions differ");
  return mvn_sample_chol(rng, mean, cholesky_psd(cov), n);
}

Mat mvn_sample_chol(Rng& rng, const Vec& mean, const Mat& chol_lower, int n) {
  if (n < 0) throw Error("mvn_sample: negative draw count");
  const Eigen::Index d = mean.size();
  Mat out(n, d);
  Vec z(d);
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) z(k) = rng.normal();
    out.row(i) = (mean + chol_lower * z).transpose();
  }
  return out;
}

}  // namespace kherd
