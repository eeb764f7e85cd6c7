#include "kherd/herding.hpp"

#include <cmath>
#include <limits>

namespace kherd {

std::string to_string(HerdingMode mode) {
  return mode == HerdingMode::Continuous ? "continuous" : "discrete";
}

HerdingMode herding_mode_from_string(const std::string& s) {
  if (s == "continuous") return HerdingMode::Continuous;
  if (s == "discrete") return HerdingMode::Discrete;
  throw ConfigError("unknown herding mode: " + s);
}

HerdingState::HerdingState(GaussianKernel kernel, GaussianMixture target)
    : kernel_(kernel), target_(std::move(target)), mode_(HerdingMode::Continuous),
      dim_(target_dim(target_)) {
  init_continuous();
}

HerdingState::HerdingState(GaussianKernel kernel, EmpiricalDistribution target)
    : kernel_(kernel), target_(std::move(target)), mode_(HerdingMode::Discrete),
      dim_(target_dim(target_)) {
  init_discrete();
}

HerdingState::HerdingState(GaussianKernel kernel, Target target)
    : kernel_(kernel), target_(std::move(target)),
      mode_(std::holds_alternative<GaussianMixture>(target_) ? HerdingMode::Continuous
                                                             : HerdingMode::Discrete),
      dim_(target_dim(target_)) {
  if (mode_ == HerdingMode::Continuous) init_continuous();
  else init_discrete();
}

void HerdingState::init_continuous() {
  const auto& gm = std::get<GaussianMixture>(target_);
  gm_map_.emplace(kernel_, gm);
  kxx_ = double_expectation_gm(kernel_, gm);
  history_.resize(16, dim_);
}

void HerdingState::init_discrete() {
  const auto& emp = std::get<EmpiricalDistribution>(target_);
  candidates_ = emp.points();
  const Eigen::Index n = candidates_.rows();
  candidate_mean_map_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    candidate_mean_map_(i) = kernel_row(kernel_, candidates_, candidates_.row(i).transpose()).mean();
  kxx_ = candidate_mean_map_.mean();
  candidate_cross_sum_ = Vec::Zero(n);
  history_.resize(16, dim_);
}

double HerdingState::mean_map_value(const Vec& x) const {
  if (mode_ == HerdingMode::Continuous) return gm_map_->value(x);
  return kernel_row(kernel_, candidates_, x).mean();
}

double HerdingState::objective(const Vec& x) const {
  if (x.size() != dim_) throw DimensionMismatch("objective: dimension differs from target");
  double repulsion = 0.0;
  if (count_ > 0) repulsion = kernel_row(kernel_, samples(), x).sum() / (count_ + 1.0);
  return mean_map_value(x) - repulsion;
}

Vec HerdingState::objective_gradient(const Vec& x) const {
  if (mode_ != HerdingMode::Continuous)
    throw Error("objective_gradient requires continuous mode");
  if (x.size() != dim_) throw DimensionMismatch("objective_gradient: dimension differs");
  Vec g = gm_map_->gradient(x);
  if (count_ > 0) {
    const auto hist = samples();
    const Vec row = kernel_row(kernel_, hist, x);
    // sum_t dk(x, x_t)/dx = (H^T row - x * sum(row)) / sigma^2
    const Vec repel = (hist.transpose() * row - x * row.sum()) / (kernel_.sigma * kernel_.sigma);
    g -= repel / (count_ + 1.0);
  }
  return g;
}

double HerdingState::error_squared() const {
  if (count_ == 0) throw EmptyHistory("herding error undefined with no samples");
  const double t = static_cast<double>(count_);
  return kxx_ - 2.0 * mean_map_sum_ / t + pair_sum_ / (t * t);
}

double HerdingState::error() const { return std::sqrt(std::max(0.0, error_squared())); }

void HerdingState::append(const Vec& x) {
  if (x.size() != dim_) throw DimensionMismatch("append: dimension differs from target");
  check_finite(x, "herding sample");
  if (count_ == history_.rows()) {
    Mat grown(history_.rows() * 2, dim_);
    grown.topRows(count_) = history_.topRows(count_);
    history_ = std::move(grown);
  }
  if (count_ > 0) pair_sum_ += 2.0 * kernel_row(kernel_, samples(), x).sum();
  pair_sum_ += 1.0;  // k(x, x)
  if (mode_ == HerdingMode::Discrete) {
    const Vec row = kernel_row(kernel_, candidates_, x);
    candidate_cross_sum_ += row;
    mean_map_sum_ += row.mean();
  } else {
    mean_map_sum_ += gm_map_->value(x);
  }
  history_.row(count_) = x.transpose();
  ++count_;
}

Vec HerdingState::ascend(Vec x, const AscentOptions& opt) const {
  const double sigma = kernel_.sigma;
  const double step0 = opt.initial_step > 0.0 ? opt.initial_step : sigma * sigma / 2.0;
  const double tol = opt.grad_tolerance > 0.0 ? opt.grad_tolerance : 1e-8 * sigma;
  double f = objective(x);
  if (!std::isfinite(f)) throw AscentDiverged("objective not finite at ascent start");
  for (int iter = 0; iter < opt.max_iters; ++iter) {
    const Vec g = objective_gradient(x);
    if (g.norm() < tol) break;
    double step = step0;
    bool improved = false;
    bool flat = false;
    for (int h = 0; h <= opt.max_halvings; ++h, step *= 0.5) {
      const Vec xn = x + step * g;
      const double fn = objective(xn);
      if (!std::isfinite(fn)) continue;
      if (fn > f) {
        x = xn;
        f = fn;
        improved = true;
        break;
      }
      if (fn == f) {  // progress below double resolution
        flat = true;
        break;
      }
    }
    if (improved) continue;
    if (flat) break;
    throw AscentDiverged("objective decreased across the full backtracking schedule");
  }
  return x;
}

Vec HerdingState::step_continuous(Rng& rng, int n_seed_candidates, const AscentOptions& opt,
                                  double* achieved) {
  if (mode_ != HerdingMode::Continuous) throw Error("step_continuous requires continuous mode");
  const auto& gm = std::get<GaussianMixture>(target_);
  const int n_seed = std::max(1, n_seed_candidates);
  const Mat seeds = gm.sample(rng, n_seed);
  Vec best = seeds.row(0).transpose();
  double best_val = objective(best);
  for (int i = 1; i < n_seed; ++i) {
    const Vec c = seeds.row(i).transpose();
    const double v = objective(c);
    if (v > best_val) {
      best_val = v;
      best = c;
    }
  }
  if (count_ > 0) {
    const Vec prev = history_.row(count_ - 1).transpose();
    const double v = objective(prev);
    if (v > best_val) {
      best_val = v;
      best = prev;
    }
  }
  Vec x = ascend(std::move(best), opt);
  if (achieved != nullptr) *achieved = objective(x);
  append(x);
  return x;
}

int HerdingState::step_discrete(double* achieved) {
  if (mode_ != HerdingMode::Discrete) throw Error("step_discrete requires discrete mode");
  const Eigen::Index n = candidates_.rows();
  if (n == 0) throw EmptyCandidates("no candidates to select from");
  const double denom = count_ + 1.0;
  Eigen::Index best = 0;
  double best_val = candidate_mean_map_(0) - candidate_cross_sum_(0) / denom;
  for (Eigen::Index i = 1; i < n; ++i) {
    const double v = candidate_mean_map_(i) - candidate_cross_sum_(i) / denom;
    if (v > best_val) {  // strict: ties keep the lowest index
      best_val = v;
      best = i;
    }
  }
  if (achieved != nullptr) *achieved = best_val;
  append(candidates_.row(best).transpose());
  return static_cast<int>(best);
}

SuperSampleSet run_herding(const HerdingConfig& cfg, const Target& target) {
  if (cfg.t_max < 0) throw ConfigError("t_max must be >= 0");
  const bool target_is_gm = std::holds_alternative<GaussianMixture>(target);
  if (cfg.mode == HerdingMode::Continuous && !target_is_gm)
    throw ConfigError("continuous mode needs a Gaussian mixture target");
  if (cfg.mode == HerdingMode::Discrete && target_is_gm)
    throw ConfigError("discrete mode needs an empirical target");

  Rng rng(cfg.seed);
  double sigma = cfg.sigma;
  if (sigma <= 0.0) {
    Rng probe_rng = rng.derive(0);
    sigma = median_heuristic_sigma(probe_rng, target);
  }

  HerdingState state(GaussianKernel(sigma), target);
  Rng step_rng = rng.derive(1);

  SuperSampleSet out;
  out.mode = cfg.mode;
  out.sigma = sigma;
  out.seed = cfg.seed;
  out.errors.reserve(static_cast<std::size_t>(cfg.t_max));
  out.objectives.reserve(static_cast<std::size_t>(cfg.t_max));
  for (int t = 0; t < cfg.t_max; ++t) {
    double achieved = 0.0;
    if (cfg.mode == HerdingMode::Continuous) {
      state.step_continuous(step_rng, cfg.seed_candidates, cfg.ascent, &achieved);
    } else {
      out.indices.push_back(state.step_discrete(&achieved));
    }
    out.errors.push_back(state.error());
    out.objectives.push_back(achieved);
  }
  out.samples = state.samples();
  return out;
}

}  // namespace kherd
