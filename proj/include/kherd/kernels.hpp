#pragma once

#include <functional>
#include <vector>

#include "kherd/targets.hpp"

namespace kherd {

// Isotropic Gaussian kernel k(x, y) = exp(-||x - y||^2 / (2 sigma^2)).
// k(x, x) = 1, so feature vectors have unit norm. Other kernels would slot
// in with the same surface (eval, gradient, analytic-mean-map flag).
struct GaussianKernel {
  double sigma;

  explicit GaussianKernel(double sigma_) : sigma(sigma_) {
    if (!(sigma > 0.0)) throw ConfigError("kernel bandwidth must be positive");
  }

  double operator()(const Vec& x, const Vec& y) const;

  // d/dx k(x, y) = -(x - y) / sigma^2 * k(x, y)
  Vec gradient_x(const Vec& x, const Vec& y) const;

  static constexpr bool has_analytic_gm_mean_map = true;
};

// Kernel values of x against every row of points.
Vec kernel_row(const GaussianKernel& k, const Mat& points, const Vec& x);

enum class MeanMapKind { AnalyticGm, Empirical };

// Handle on E_{x'~p}[k(., x')] with its provenance.
struct MeanMap {
  std::function<double(const Vec&)> value;
  MeanMapKind kind;
  double sigma;
};

// Closed-form mixture mean map with per-component factors precomputed:
//   E_{x'~gm}[k(x,x')] = sum_j pi_j sigma^d |S_j + sigma^2 I|^{-1/2}
//                        exp(-(x-mu_j)' (S_j + sigma^2 I)^{-1} (x-mu_j) / 2)
class GmMeanMap {
 public:
  GmMeanMap(const GaussianKernel& k, const GaussianMixture& gm);

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  double sigma() const { return sigma_; }
  int dim() const { return dim_; }

 private:
  struct Component {
    Vec mean;
    Mat inv;       // (S_j + sigma^2 I)^{-1}
    double coeff;  // pi_j sigma^d |S_j + sigma^2 I|^{-1/2}
  };
  std::vector<Component> comps_;
  double sigma_;
  int dim_;
};

double mean_map_gm(const GaussianKernel& k, const GaussianMixture& gm, const Vec& x);
double mean_map_empirical(const GaussianKernel& k, const EmpiricalDistribution& d, const Vec& x);

// E_{x,x'~p}[k(x,x')] for the two target kinds.
double double_expectation_gm(const GaussianKernel& k, const GaussianMixture& gm);
double double_expectation_empirical(const GaussianKernel& k, const EmpiricalDistribution& d);

// Dispatch on the target kind.
double mean_map(const GaussianKernel& k, const Target& t, const Vec& x);
double double_expectation(const GaussianKernel& k, const Target& t);
MeanMap make_mean_map(const GaussianKernel& k, const Target& t);

// Median of pairwise distances among n_probe draws from the target. For an
// empirical target with at most n_probe points, the whole set is used.
double median_heuristic_sigma(Rng& rng, const Target& t, int n_probe = 1000);

}  // namespace kherd
