#include "kherd/targets.hpp"

#include <algorithm>
#include <cmath>

namespace kherd {

GaussianMixture::GaussianMixture(Vec weights, std::vector<Vec> means, std::vector<Mat> covariances)
    : weights_(std::move(weights)), means_(std::move(means)), covs_(std::move(covariances)) {
  const auto m = static_cast<std::size_t>(weights_.size());
  if (m == 0) throw Error("mixture needs at least one component");
  if (means_.size() != m || covs_.size() != m)
    throw DimensionMismatch("mixture: weights/means/covariances count mismatch");
  if (weights_.minCoeff() < 0.0) throw Error("mixture weights must be nonnegative");
  if (std::abs(weights_.sum() - 1.0) > 1e-12) throw Error("mixture weights must sum to 1");
  dim_ = static_cast<int>(means_[0].size());
  chols_.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    check_finite(means_[j], "mixture mean");
    if (means_[j].size() != dim_ || covs_[j].rows() != dim_ || covs_[j].cols() != dim_)
      throw DimensionMismatch("mixture: component dimensions differ");
    if (!is_symmetric(covs_[j])) throw Error("mixture covariance is not symmetric");
    covs_[j] = ((covs_[j] + covs_[j].transpose()) / 2.0).eval();
    chols_.push_back(cholesky_psd(covs_[j]));  // also validates PSD
  }
  weight_cdf_ = weights_;
  for (Eigen::Index j = 1; j < weight_cdf_.size(); ++j) weight_cdf_(j) += weight_cdf_(j - 1);
}

double GaussianMixture::logpdf(const Vec& x) const {
  // log-sum-exp over weighted component densities
  std::vector<double> lps(means_.size());
  double max_lp = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < means_.size(); ++j) {
    const double w = weights_(static_cast<Eigen::Index>(j));
    lps[j] = (w > 0.0) ? std::log(w) + mvn_logpdf(x, means_[j], covs_[j])
                       : -std::numeric_limits<double>::infinity();
    max_lp = std::max(max_lp, lps[j]);
  }
  double acc = 0.0;
  for (double lp : lps) acc += std::exp(lp - max_lp);
  return max_lp + std::log(acc);
}

Mat GaussianMixture::sample(Rng& rng, int n) const {
  if (n < 0) throw Error("sample: negative draw count");
  Mat out(n, dim_);
  Vec z(dim_);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    Eigen::Index j = 0;
    while (j + 1 < weight_cdf_.size() && u >= weight_cdf_(j)) ++j;
    const auto ju = static_cast<std::size_t>(j);
    for (int k = 0; k < dim_; ++k) z(k) = rng.normal();
    out.row(i) = (means_[ju] + chols_[ju] * z).transpose();
  }
  return out;
}

Vec GaussianMixture::raw_moment(int order) const {
  if (order < 1 || order > 3) throw UnsupportedOrder("raw moments supported for orders 1..3");
  Vec out = Vec::Zero(dim_);
  for (std::size_t j = 0; j < means_.size(); ++j) {
    const double w = weights_(static_cast<Eigen::Index>(j));
    for (int i = 0; i < dim_; ++i) {
      const double mu = means_[j](i);
      const double v = covs_[j](i, i);
      double comp = 0.0;
      switch (order) {
        case 1: comp = mu; break;
        case 2: comp = mu * mu + v; break;
        case 3: comp = mu * mu * mu + 3.0 * mu * v; break;
      }
      out(i) += w * comp;
    }
  }
  return out;
}

GaussianMixture random_mixture(Rng& rng, int dim, int components, const GmRandomConfig& cfg) {
  if (dim < 1) throw ConfigError("random_mixture: dim must be >= 1");
  if (components < 1) throw ConfigError("random_mixture: components must be >= 1");
  Vec weights(components);
  for (int j = 0; j < components; ++j) weights(j) = -std::log(1.0 - rng.uniform());
  weights /= weights.sum();
  std::vector<Vec> means;
  std::vector<Mat> covs;
  means.reserve(static_cast<std::size_t>(components));
  covs.reserve(static_cast<std::size_t>(components));
  const double a_scale = cfg.cov_scale / std::sqrt(static_cast<double>(dim));
  for (int j = 0; j < components; ++j) {
    Vec mu(dim);
    for (int i = 0; i < dim; ++i) mu(i) = cfg.box_lo + (cfg.box_hi - cfg.box_lo) * rng.uniform();
    Mat a(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) a(r, c) = a_scale * rng.normal();
    Mat cov = a * a.transpose();
    cov += (1e-6 * cfg.cov_scale * cfg.cov_scale) * Mat::Identity(dim, dim);
    means.push_back(std::move(mu));
    covs.push_back(std::move(cov));
  }
  return GaussianMixture(std::move(weights), std::move(means), std::move(covs));
}

EmpiricalDistribution::EmpiricalDistribution(Mat points) : points_(std::move(points)) {
  if (points_.rows() == 0) throw EmptyDistribution("empirical distribution has no points");
  check_finite(points_, "empirical points");
}

Vec EmpiricalDistribution::raw_moment(int order) const {
  if (order < 1 || order > 3) throw UnsupportedOrder("raw moments supported for orders 1..3");
  return points_.array().pow(order).colwise().mean();
}

EmpiricalDistribution empirical_from_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw EmptyInput("empirical_from_matrix: no rows");
  const std::size_t d = rows[0].size();
  if (d == 0) throw EmptyInput("empirical_from_matrix: zero-width rows");
  Mat points(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) throw RaggedRows("empirical_from_matrix: ragged row widths");
    for (std::size_t j = 0; j < d; ++j)
      points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return EmpiricalDistribution(std::move(points));
}

int target_dim(const Target& t) {
  return std::visit([](const auto& v) { return v.dim(); }, t);
}

Mat sample_target(Rng& rng, const Target& t, int n) {
  if (const auto* gm = std::get_if<GaussianMixture>(&t)) return gm->sample(rng, n);
  const auto& emp = std::get<EmpiricalDistribution>(t);
  Mat out(n, emp.dim());
  for (int i = 0; i < n; ++i) out.row(i) = emp.points().row(rng.uniform_int(0, emp.size() - 1));
  return out;
}

}  // namespace kherd
