#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kherd/kernels.hpp"

namespace kherd {

enum class HerdingMode { Continuous, Discrete };

std::string to_string(HerdingMode mode);
HerdingMode herding_mode_from_string(const std::string& s);

struct AscentOptions {
  double initial_step = -1.0;   // <= 0: sigma^2 / 2
  int max_iters = 100;
  double grad_tolerance = -1.0; // <= 0: 1e-8 * sigma
  int max_halvings = 60;
};

struct HerdingConfig {
  HerdingMode mode = HerdingMode::Continuous;
  int t_max = 0;
  double sigma = -1.0;          // <= 0: median heuristic at run start
  int seed_candidates = 50;     // fresh target draws per continuous step
  AscentOptions ascent;
  std::uint64_t seed = 0;
};

// Sample history plus the cached sums that make the per-step objective and
// the running error cheap. The target's mean element is represented through
// these caches: after T steps the pull toward the target and the push away
// from every earlier sample are both one dot product away.
//
// Continuous state pairs a Gaussian mixture with the analytic mean map;
// discrete state pairs an empirical target with per-candidate kernel sums,
// so one step costs O(|candidates|) kernel evaluations.
class HerdingState {
 public:
  HerdingState(GaussianKernel kernel, GaussianMixture target);
  HerdingState(GaussianKernel kernel, EmpiricalDistribution target);
  HerdingState(GaussianKernel kernel, Target target);

  HerdingMode mode() const { return mode_; }
  const GaussianKernel& kernel() const { return kernel_; }
  const Target& target() const { return target_; }
  int dim() const { return dim_; }
  int size() const { return count_; }

  // Rows x_1..x_T, in selection order.
  Eigen::Block<const Mat> samples() const { return history_.topRows(count_); }

  // Attraction to the target minus mean repulsion from the history:
  //   E_{x'~p}[k(x, x')] - sum_t k(x, x_t) / (T + 1)
  double objective(const Vec& x) const;

  // Exact gradient of the objective. Continuous mode only.
  Vec objective_gradient(const Vec& x) const;

  // Mean map value at x, dispatched per target kind.
  double mean_map_value(const Vec& x) const;

  // E_{x,x'~p}[k(x,x')], fixed per target.
  double double_expectation() const { return kxx_; }

  // Squared distance in kernel space between the target and the empirical
  // measure of the history, from the cached sums (may round off slightly
  // negative). T >= 1.
  double error_squared() const;

  // E_T = sqrt(max(0, error_squared())). Throws EmptyHistory at T = 0.
  double error() const;

  // Appends a sample and updates every cache.
  void append(const Vec& x);

  // One continuous step: seed candidates drawn from the target (plus the
  // previous sample), gradient ascent from the best seed, append.
  // Returns the new sample; `achieved` gets its objective value.
  Vec step_continuous(Rng& rng, int n_seed_candidates, const AscentOptions& opt = {},
                      double* achieved = nullptr);

  // One discrete step: argmax of the objective over the candidate set using
  // the cached sums, ties broken by lowest index, repeats permitted.
  int step_discrete(double* achieved = nullptr);

  const Mat& candidates() const { return candidates_; }

 private:
  void init_continuous();
  void init_discrete();
  Vec ascend(Vec x, const AscentOptions& opt) const;

  GaussianKernel kernel_;
  Target target_;
  HerdingMode mode_;
  int dim_;

  std::optional<GmMeanMap> gm_map_;

  Mat history_;  // capacity-doubling row store
  int count_ = 0;

  double mean_map_sum_ = 0.0;   // sum_t E_{x'~p}[k(x_t, x')]
  double pair_sum_ = 0.0;       // sum_{t,t'} k(x_t, x_{t'})
  double kxx_ = 0.0;            // E_{x,x'~p}[k(x,x')]

  // Discrete-mode caches over the candidate set (= the empirical target).
  Mat candidates_;
  Vec candidate_mean_map_;
  Vec candidate_cross_sum_;     // sum_t k(c_i, x_t)
};

// Ordered herding output with its per-step error trace.
struct SuperSampleSet {
  HerdingMode mode = HerdingMode::Continuous;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  Mat samples;                      // T x d
  std::vector<double> errors;       // E_1..E_T
  std::vector<int> indices;         // discrete mode: chosen candidate per step
  std::vector<double> objectives;   // achieved objective per step (diagnostic)
};

// Runs t_max steps of the configured mode. Deterministic in (config, target).
// cfg.sigma <= 0 resolves the bandwidth by the median heuristic first.
SuperSampleSet run_herding(const HerdingConfig& cfg, const Target& target);

}  // namespace kherd
