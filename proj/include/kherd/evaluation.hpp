#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kherd/herding.hpp"

namespace kherd {

// Per-T error values for one estimator on one test function.
struct ErrorTrace {
  std::string estimator;  // "herding" | "herding_vs_p" | "iid" | "iid_mean" | "iid_std" | ...
  std::string function;   // "moment1" | "moment2" | "moment3" | "sin_norm"
  std::uint64_t seed = 0;
  std::vector<int> t;
  std::vector<double> err;
};

// f(x) = sum_i alpha_i k(x, z_i); a member of the kernel's function space.
struct RkhsFunction {
  Mat centers;       // rows z_i
  Vec coefficients;  // alpha_i
  GaussianKernel kernel;

  double operator()(const Vec& x) const;
  double norm_squared() const;  // alpha' K alpha, K the Gram matrix of the centers
};

// sqrt((1/d) sum_i (<x_i^m>_samples - truth_i)^2)
double moment_rmse(const Mat& samples, const Vec& truth, int order);
double moment_rmse(const Mat& samples, const GaussianMixture& gm, int order);

// |mean_f(samples) - ground_truth|
double expectation_error(const Mat& samples, const std::function<double(const Vec&)>& f,
                         double ground_truth);

struct RateFit {
  double slope = 0.0;
  double r2 = 0.0;
  int points_used = 0;
};

// Log-log OLS of the trace's upper envelope (suffix running maximum) against
// T, over points with T >= t_min. Herding error oscillates; the envelope is
// the decaying bound worth fitting.
RateFit fit_rate(const ErrorTrace& trace, int t_min);

struct KhCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

// |E_p[f] - mean of f over the history| <= ||f|| * E_T, checked directly.
// E_p[f] = sum_i alpha_i * meanmap(z_i).
KhCheck koksma_hlawka_check(const HerdingState& state, const RkhsFunction& f,
                            const MeanMap& target_mean_map);

struct GroundTruth {
  double value = 0.0;
  double std_error = 0.0;  // 0 for exact values
};

// Monte Carlo ground truth for E_p[f] with its standard error.
GroundTruth mc_ground_truth(Rng& rng, const Target& t,
                            const std::function<double(const Vec&)>& f, long n_draws);

extern const std::vector<std::string> kStandardFunctions;  // moment1..3, sin_norm

struct CompareOptions {
  std::vector<std::string> functions = kStandardFunctions;
  std::vector<int> t_grid;
  int iid_repeats = 10;
  long sin_norm_mc_draws = 10000000;  // ground-truth draws for sin||x|| vs a mixture
  std::uint64_t seed = 0;
};

struct CompareResult {
  std::vector<ErrorTrace> traces;
  double sigma = 0.0;  // bandwidth the herding run used
};

// One herding run against `target`, evaluated on the T grid, against
// iid_repeats independent iid sample sets. Produces per-seed iid traces plus
// iid_mean / iid_std aggregates. When `target` is empirical and true_p is
// given, herding is additionally scored against true_p ("herding_vs_p", with
// the iid baseline drawn from true_p as well).
CompareResult compare_estimators(const Target& target, const CompareOptions& opts,
                                 const HerdingConfig& herd_cfg,
                                 const GaussianMixture* true_p = nullptr);

// Log-spaced integer grid in [t_lo, t_hi], deduplicated, endpoints included.
std::vector<int> log_grid(int t_lo, int t_hi, int points);

}  // namespace kherd
