#include "kherd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace kherd {

double GaussianKernel::operator()(const Vec& x, const Vec& y) const {
  if (x.size() != y.size()) throw DimensionMismatch("kernel_eval: dimensions differ");
  return std::exp(-(x - y).squaredNorm() / (2.0 * sigma * sigma));
}

Vec GaussianKernel::gradient_x(const Vec& x, const Vec& y) const {
  return (-(*this)(x, y) / (sigma * sigma)) * (x - y);
}

Vec kernel_row(const GaussianKernel& k, const Mat& points, const Vec& x) {
  if (points.cols() != x.size()) throw DimensionMismatch("kernel_row: dimensions differ");
  const double inv = -1.0 / (2.0 * k.sigma * k.sigma);
  return ((points.rowwise() - x.transpose()).rowwise().squaredNorm() * inv).array().exp();
}

GmMeanMap::GmMeanMap(const GaussianKernel& k, const GaussianMixture& gm)
    : sigma_(k.sigma), dim_(gm.dim()) {
  const Mat s2i = k.sigma * k.sigma * Mat::Identity(dim_, dim_);
  comps_.reserve(static_cast<std::size_t>(gm.components()));
  for (int j = 0; j < gm.components(); ++j) {
    const Mat smoothed = gm.covariance(j) + s2i;
    const Mat lower = cholesky(smoothed);  // PD since sigma > 0
    const double log_det = 2.0 * lower.diagonal().array().log().sum();
    Component c;
    c.mean = gm.mean(j);
    c.inv = lower.triangularView<Eigen::Lower>().solve(Mat::Identity(dim_, dim_));
    c.inv = (c.inv.transpose() * c.inv).eval();  // (L L^T)^{-1}
    c.coeff = gm.weights()(j) * std::exp(dim_ * std::log(k.sigma) - 0.5 * log_det);
    comps_.push_back(std::move(c));
  }
}

double GmMeanMap::value(const Vec& x) const {
  if (x.size() != dim_) throw DimensionMismatch("mean map: dimension differs from mixture");
  double acc = 0.0;
  for (const auto& c : comps_) {
    const Vec r = x - c.mean;
    acc += c.coeff * std::exp(-0.5 * r.dot(c.inv * r));
  }
  return acc;
}

Vec GmMeanMap::gradient(const Vec& x) const {
  if (x.size() != dim_) throw DimensionMismatch("mean map: dimension differs from mixture");
  Vec g = Vec::Zero(dim_);
  for (const auto& c : comps_) {
    const Vec r = x - c.mean;
    const Vec ir = c.inv * r;
    g -= c.coeff * std::exp(-0.5 * r.dot(ir)) * ir;
  }
  return g;
}

double mean_map_gm(const GaussianKernel& k, const GaussianMixture& gm, const Vec& x) {
  return GmMeanMap(k, gm).value(x);
}

double mean_map_empirical(const GaussianKernel& k, const EmpiricalDistribution& d, const Vec& x) {
  if (d.size() == 0) throw EmptyDistribution("mean map over empty distribution");
  return kernel_row(k, d.points(), x).mean();
}

double double_expectation_gm(const GaussianKernel& k, const GaussianMixture& gm) {
  const int d = gm.dim();
  const Mat s2i = k.sigma * k.sigma * Mat::Identity(d, d);
  double acc = 0.0;
  for (int i = 0; i < gm.components(); ++i) {
    for (int j = 0; j < gm.components(); ++j) {
      const Mat smoothed = gm.covariance(i) + gm.covariance(j) + s2i;
      const Mat lower = cholesky(smoothed);
      const double log_det = 2.0 * lower.diagonal().array().log().sum();
      const Vec delta = gm.mean(i) - gm.mean(j);
      const Vec z = lower.triangularView<Eigen::Lower>().solve(delta);
      acc += gm.weights()(i) * gm.weights()(j) *
             std::exp(d * std::log(k.sigma) - 0.5 * log_det - 0.5 * z.squaredNorm());
    }
  }
  return acc;
}

double double_expectation_empirical(const GaussianKernel& k, const EmpiricalDistribution& d) {
  if (d.size() == 0) throw EmptyDistribution("double expectation over empty distribution");
  const Mat& p = d.points();
  double acc = 0.0;
  for (int i = 0; i < d.size(); ++i) acc += kernel_row(k, p, p.row(i).transpose()).sum();
  return acc / (static_cast<double>(d.size()) * static_cast<double>(d.size()));
}

double mean_map(const GaussianKernel& k, const Target& t, const Vec& x) {
  if (const auto* gm = std::get_if<GaussianMixture>(&t)) return mean_map_gm(k, *gm, x);
  return mean_map_empirical(k, std::get<EmpiricalDistribution>(t), x);
}

double double_expectation(const GaussianKernel& k, const Target& t) {
  if (const auto* gm = std::get_if<GaussianMixture>(&t)) return double_expectation_gm(k, *gm);
  return double_expectation_empirical(k, std::get<EmpiricalDistribution>(t));
}

MeanMap make_mean_map(const GaussianKernel& k, const Target& t) {
  if (const auto* gm = std::get_if<GaussianMixture>(&t)) {
    auto map = std::make_shared<GmMeanMap>(k, *gm);
    return MeanMap{[map](const Vec& x) { return map->value(x); }, MeanMapKind::AnalyticGm, k.sigma};
  }
  auto emp = std::make_shared<EmpiricalDistribution>(std::get<EmpiricalDistribution>(t));
  return MeanMap{[emp, k](const Vec& x) { return mean_map_empirical(k, *emp, x); },
                 MeanMapKind::Empirical, k.sigma};
}

double median_heuristic_sigma(Rng& rng, const Target& t, int n_probe) {
  Mat probe;
  if (const auto* emp = std::get_if<EmpiricalDistribution>(&t); emp && emp->size() <= n_probe) {
    probe = emp->points();
  } else {
    probe = sample_target(rng, t, n_probe);
  }
  const Eigen::Index n = probe.rows();
  if (n < 2) throw Error("median heuristic needs at least two probe points");
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n) * (static_cast<std::size_t>(n) - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      dists.push_back((probe.row(i) - probe.row(j)).norm());
  auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  const double median = *mid;
  if (!(median > 0.0)) throw Error("median heuristic: all probe points coincide");
  return median;
}

}  // namespace kherd
