#pragma once

#include <variant>
#include <vector>

#include "kherd/numerics.hpp"

namespace kherd {

// Analytic continuous target: mixture of Gaussians. Components may be point
// masses (zero covariance); all kernel-space expectations stay well defined.
class GaussianMixture {
 public:
  GaussianMixture(Vec weights, std::vector<Vec> means, std::vector<Mat> covariances);

  int dim() const { return dim_; }
  int components() const { return static_cast<int>(means_.size()); }
  const Vec& weights() const { return weights_; }
  const Vec& mean(int j) const { return means_[static_cast<std::size_t>(j)]; }
  const Mat& covariance(int j) const { return covs_[static_cast<std::size_t>(j)]; }
  const Mat& chol(int j) const { return chols_[static_cast<std::size_t>(j)]; }

  // Mixture density. Requires every component covariance to be PD.
  double logpdf(const Vec& x) const;

  // n draws, one per row: component chosen by weight, then a normal draw.
  Mat sample(Rng& rng, int n) const;

  // Per-dimension raw moment <x_i^m> for m in {1,2,3}.
  Vec raw_moment(int order) const;

 private:
  Vec weights_;
  std::vector<Vec> means_;
  std::vector<Mat> covs_;
  std::vector<Mat> chols_;
  Vec weight_cdf_;
  int dim_;
};

struct GmRandomConfig {
  double box_lo = 0.0;
  double box_hi = 10.0;
  double cov_scale = 1.0;
};

// Random mixture: means uniform in the box, covariances A A^T + jitter with
// Gaussian A scaled so a component's spread is about cov_scale per axis,
// weights Dirichlet(1).
GaussianMixture random_mixture(Rng& rng, int dim, int components,
                               const GmRandomConfig& cfg = {});

// Finite sample set acting as a target (uniform weights, order preserved).
class EmpiricalDistribution {
 public:
  explicit EmpiricalDistribution(Mat points);

  int dim() const { return static_cast<int>(points_.cols()); }
  int size() const { return static_cast<int>(points_.rows()); }
  const Mat& points() const { return points_; }

  // Per-dimension empirical raw moment <x_i^m>, m in {1,2,3}.
  Vec raw_moment(int order) const;

 private:
  Mat points_;
};

// Order-preserving wrap of a row list. EmptyInput / RaggedRows on bad shape.
EmpiricalDistribution empirical_from_matrix(const std::vector<std::vector<double>>& rows);

using Target = std::variant<GaussianMixture, EmpiricalDistribution>;

int target_dim(const Target& t);

// iid draws from the target: mixture sampling, or uniform draws (with
// replacement) from the empirical point set.
Mat sample_target(Rng& rng, const Target& t, int n);

}  // namespace kherd
