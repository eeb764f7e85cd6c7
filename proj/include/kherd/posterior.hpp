#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kherd/herding.hpp"

namespace kherd {

struct Dataset {
  Mat features;             // n x d
  Eigen::VectorXi labels;   // n entries in {0, 1}
  std::vector<int> train_idx;
  std::vector<int> test_idx;
};

// CSV, comma-separated, last column the {0,1} label. Split indices left empty.
Dataset load_dataset(const std::string& path);

// Seeded shuffle, then the first n_train rows train and the rest test.
void split_dataset(Dataset& ds, int n_train, std::uint64_t seed);

Mat rows_at(const Mat& m, const std::vector<int>& idx);
Eigen::VectorXi labels_at(const Eigen::VectorXi& labels, const std::vector<int>& idx);

// Logistic dataset with features N(0, I) and labels drawn from a random
// ground-truth weight vector.
Dataset make_synthetic_logistic(std::uint64_t seed, int n, int d);

struct WhitenTransform {
  Vec mean;
  Mat projection;  // d x retained, principal directions scaled by 1/sqrt(eigenvalue)
  int retained_dim = 0;
  double eigen_floor = 0.0;

  Mat apply(const Mat& rows) const;
  Vec apply(const Vec& x) const;
};

// Center, eigendecompose the covariance, drop eigenvalues below
// 1e-10 * (largest), scale the kept directions to unit variance.
std::pair<WhitenTransform, Mat> pca_whiten(const Mat& train);

double sigmoid(double z);
double log1p_exp(double z);  // softplus, overflow-safe

// sum_n [y_n log s(z_n) + (1-y_n) log(1-s(z_n))] - |theta|^2 / (2 prior_var),
// z_n = theta . (x_n, 1) when include_bias, theta . x_n otherwise.
double log_posterior(const Vec& theta, const Mat& features, const Eigen::VectorXi& labels,
                     double prior_var, bool include_bias = true);

struct MhOptions {
  double prior_var = 100.0;
  double proposal_scale = -1.0;  // < 0 tunes on pilot chains to acceptance in [0.2, 0.4]
  int n_keep = 1000;
  int thin = 100;
  int burn_in = 1000;
  std::uint64_t seed = 0;
};

struct PosteriorChain {
  Mat thetas;  // n_keep rows
  double acceptance_rate = 0.0;
  double proposal_scale = 0.0;
  double prior_var = 0.0;
  int thin = 1;
  int burn_in = 0;
  std::uint64_t seed = 0;
};

// Random-walk chain over an arbitrary log density; keeps every thin-th draw
// after burn_in. proposal_scale = 0 degenerates to a constant chain.
PosteriorChain mh_run(const std::function<double(const Vec&)>& log_target, int dim,
                      const MhOptions& opt);

// mh_run against the logistic-regression posterior of (features, labels).
PosteriorChain mh_sample(const Mat& features, const Eigen::VectorXi& labels,
                         const MhOptions& opt, bool include_bias = true);

// Doubles/halves the scale on short pilot chains until acceptance lands in
// [0.2, 0.4].
double tune_proposal_scale(const std::function<double(const Vec&)>& log_target, int dim,
                           Rng& rng);

// (1/m) sum_i s(theta_i . x~)
double predictive_prob(const Mat& thetas, const Vec& x, bool include_bias = true);

// Per-test-point average class-1 probability under the theta set.
Vec mean_predictive(const Mat& thetas, const Mat& test_features, bool include_bias = true);

// Root mean square gap between the subset's and the full set's average
// predictive probabilities over the test points.
double predictive_rmse(const Mat& subset_thetas, const Mat& full_thetas,
                       const Mat& test_features, bool include_bias = true);

double accuracy(const Mat& thetas, const Mat& test_features, const Eigen::VectorXi& test_labels,
                bool include_bias = true);

// mean_n std_i(s(theta_i . x~_n)) / sqrt(m): the full set's own estimation
// error level.
double noise_floor(const Mat& full_thetas, const Mat& test_features, bool include_bias = true);

// Mean predictive_rmse of n_repeats random with-replacement subsets of size t.
double bootstrap_rmse(const Mat& full_thetas, const Mat& test_features, int t, int n_repeats,
                      Rng& rng, bool include_bias = true);

// Mean accuracy of n_repeats random with-replacement subsets of size t.
double bootstrap_accuracy(const Mat& full_thetas, const Mat& test_features,
                          const Eigen::VectorXi& test_labels, int t, int n_repeats, Rng& rng,
                          bool include_bias = true);

struct CompressResult {
  SuperSampleSet herd;        // run in whitened coordinates
  std::vector<int> indices;   // per step, row into the original chain
  Mat selected_thetas;        // original-coordinate rows at those indices
  WhitenTransform whiten;
};

// Whitens the chain's thetas, herds over them as a discrete candidate set,
// and maps selections back to the original thetas. sigma <= 0 resolves by the
// median heuristic on the whitened set.
CompressResult compress_posterior(const PosteriorChain& chain, double sigma, int t_max,
                                  std::uint64_t seed);

}  // namespace kherd
