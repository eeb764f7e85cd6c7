#include "kherd/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <variant>

#include "kherd/errors.hpp"

namespace kherd {

double RkhsFunction::operator()(const Vec& x) const {
  if (centers.rows() != coefficients.size())
    throw DimensionMismatch("rkhs function: centers/coefficients mismatch");
  return kernel_row(kernel, centers, x).dot(coefficients);
}

double RkhsFunction::norm_squared() const {
  if (centers.rows() != coefficients.size())
    throw DimensionMismatch("rkhs function: centers/coefficients mismatch");
  const Eigen::Index m = centers.rows();
  Mat gram(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    gram.row(i) = kernel_row(kernel, centers, centers.row(i).transpose());
  return coefficients.dot(gram * coefficients);
}

double moment_rmse(const Mat& samples, const Vec& truth, int order) {
  if (samples.rows() == 0) throw EmptySamples("moment_rmse: no samples");
  if (order < 1 || order > 3) throw UnsupportedOrder("moment_rmse: order must be 1, 2, or 3");
  if (samples.cols() != truth.size())
    throw DimensionMismatch("moment_rmse: sample dim != truth dim");
  Mat powered = samples;
  for (int m = 1; m < order; ++m) powered = powered.cwiseProduct(samples);
  Vec diff = powered.colwise().mean().transpose() - truth;
  return std::sqrt(diff.squaredNorm() / double(diff.size()));
}

double moment_rmse(const Mat& samples, const GaussianMixture& gm, int order) {
  return moment_rmse(samples, gm.raw_moment(order), order);
}

double expectation_error(const Mat& samples, const std::function<double(const Vec&)>& f,
                         double ground_truth) {
  if (samples.rows() == 0) throw EmptySamples("expectation_error: no samples");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < samples.rows(); ++i) sum += f(samples.row(i).transpose());
  return std::abs(sum / double(samples.rows()) - ground_truth);
}

RateFit fit_rate(const ErrorTrace& trace, int t_min) {
  if (trace.t.size() != trace.err.size())
    throw ConfigError("fit_rate: trace t/err lengths differ");
  std::vector<std::pair<int, double>> pts;
  for (std::size_t i = 0; i < trace.t.size(); ++i)
    if (trace.t[i] >= t_min) pts.emplace_back(trace.t[i], trace.err[i]);
  std::sort(pts.begin(), pts.end());
  if (pts.size() < 10) throw ConfigError("fit_rate: need at least 10 points with T >= t_min");

  // Upper envelope: max over the tail from each point on. The raw trace
  // oscillates; the decaying bound is what carries the rate.
  std::vector<double> env(pts.size());
  double running = 0.0;
  for (std::size_t i = pts.size(); i-- > 0;) {
    running = std::max(running, pts[i].second);
    env[i] = running;
  }

  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (env[i] > 0.0) {
      lx.push_back(std::log(double(pts[i].first)));
      ly.push_back(std::log(env[i]));
    }
  }
  if (lx.size() < 2) throw DegenerateTrace("fit_rate: fewer than 2 nonzero envelope points");

  const std::size_t n = lx.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = lx[i] - mx;
    const double dy = ly[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw DegenerateTrace("fit_rate: all usable points share one T");

  RateFit fit;
  fit.slope = sxy / sxx;
  const double ss_res = std::max(0.0, syy - fit.slope * sxy);
  fit.r2 = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
  fit.points_used = int(n);
  return fit;
}

KhCheck koksma_hlawka_check(const HerdingState& state, const RkhsFunction& f,
                            const MeanMap& target_mean_map) {
  if (f.kernel.sigma != state.kernel().sigma)
    throw KernelMismatch("koksma_hlawka_check: function kernel bandwidth differs from state");
  if (target_mean_map.sigma != state.kernel().sigma)
    throw KernelMismatch("koksma_hlawka_check: mean map bandwidth differs from state");

  double exact = 0.0;
  for (Eigen::Index i = 0; i < f.centers.rows(); ++i)
    exact += f.coefficients(i) * target_mean_map.value(f.centers.row(i).transpose());

  const auto history = state.samples();
  double emp = 0.0;
  for (Eigen::Index t = 0; t < history.rows(); ++t) emp += f(history.row(t).transpose());
  emp /= double(history.rows());

  KhCheck check;
  check.lhs = std::abs(exact - emp);
  check.rhs = std::sqrt(std::max(0.0, f.norm_squared())) * state.error();
  check.holds = check.lhs <= check.rhs + 1e-9;
  return check;
}

GroundTruth mc_ground_truth(Rng& rng, const Target& t,
                            const std::function<double(const Vec&)>& f, long n_draws) {
  if (n_draws < 2) throw ConfigError("mc_ground_truth: need at least 2 draws");
  const long chunk = 65536;
  double sum = 0.0, sum_sq = 0.0;
  long done = 0;
  while (done < n_draws) {
    const long n = std::min(chunk, n_draws - done);
    Mat draws = sample_target(rng, t, n);
    for (Eigen::Index i = 0; i < draws.rows(); ++i) {
      const double v = f(draws.row(i).transpose());
      sum += v;
      sum_sq += v * v;
    }
    done += n;
  }
  GroundTruth g;
  g.value = sum / double(n_draws);
  const double var = (sum_sq - double(n_draws) * g.value * g.value) / double(n_draws - 1);
  g.std_error = std::sqrt(std::max(0.0, var) / double(n_draws));
  return g;
}

const std::vector<std::string> kStandardFunctions = {"moment1", "moment2", "moment3", "sin_norm"};

namespace {

struct FunctionEval {
  std::string name;
  int order = 0;  // 1..3 for per-dimension moments, 0 for sin||x||
};

FunctionEval parse_function(const std::string& name) {
  if (name == "moment1") return {name, 1};
  if (name == "moment2") return {name, 2};
  if (name == "moment3") return {name, 3};
  if (name == "sin_norm") return {name, 0};
  throw ConfigError("unknown test function: " + name);
}

struct FunctionTruth {
  FunctionEval fn;
  Vec moments;          // moment functions
  double scalar = 0.0;  // sin_norm
};

double sin_norm_of(const Vec& x) { return std::sin(x.norm()); }

std::vector<FunctionTruth> make_truths(const std::vector<FunctionEval>& fns, const Target& ref,
                                       Rng& rng, long mc_draws) {
  std::vector<FunctionTruth> out;
  out.reserve(fns.size());
  for (const auto& fn : fns) {
    FunctionTruth truth{fn, Vec(), 0.0};
    if (fn.order > 0) {
      truth.moments = std::visit([&](const auto& d) { return d.raw_moment(fn.order); }, ref);
    } else if (const auto* emp = std::get_if<EmpiricalDistribution>(&ref)) {
      double sum = 0.0;
      const Mat& pts = emp->points();
      for (Eigen::Index i = 0; i < pts.rows(); ++i) sum += std::sin(pts.row(i).norm());
      truth.scalar = sum / double(pts.rows());
    } else {
      truth.scalar = mc_ground_truth(rng, ref, sin_norm_of, mc_draws).value;
    }
    out.push_back(std::move(truth));
  }
  return out;
}

// One pass over the rows, emitting prefix-mean errors at each grid T.
std::vector<ErrorTrace> score_prefixes(const Mat& samples, const std::vector<int>& grid,
                                       const std::vector<FunctionTruth>& truths,
                                       const std::string& estimator, std::uint64_t seed) {
  const Eigen::Index d = samples.cols();
  std::vector<ErrorTrace> traces(truths.size());
  for (std::size_t i = 0; i < truths.size(); ++i) {
    traces[i].estimator = estimator;
    traces[i].function = truths[i].fn.name;
    traces[i].seed = seed;
  }
  Vec s1 = Vec::Zero(d), s2 = Vec::Zero(d), s3 = Vec::Zero(d);
  double s_sin = 0.0;
  std::size_t gi = 0;
  for (Eigen::Index r = 0; r < samples.rows() && gi < grid.size(); ++r) {
    const Vec x = samples.row(r).transpose();
    const Vec xx = x.cwiseProduct(x);
    s1 += x;
    s2 += xx;
    s3 += xx.cwiseProduct(x);
    s_sin += std::sin(x.norm());
    if (long(r) + 1 == grid[gi]) {
      const double inv = 1.0 / double(r + 1);
      for (std::size_t i = 0; i < truths.size(); ++i) {
        double err = 0.0;
        switch (truths[i].fn.order) {
          case 1:
            err = std::sqrt((s1 * inv - truths[i].moments).squaredNorm() / double(d));
            break;
          case 2:
            err = std::sqrt((s2 * inv - truths[i].moments).squaredNorm() / double(d));
            break;
          case 3:
            err = std::sqrt((s3 * inv - truths[i].moments).squaredNorm() / double(d));
            break;
          default:
            err = std::abs(s_sin * inv - truths[i].scalar);
            break;
        }
        traces[i].t.push_back(grid[gi]);
        traces[i].err.push_back(err);
      }
      ++gi;
    }
  }
  return traces;
}

}  // namespace

std::vector<int> log_grid(int t_lo, int t_hi, int points) {
  if (t_lo < 1 || t_hi < t_lo || points < 1)
    throw ConfigError("log_grid: need 1 <= t_lo <= t_hi and points >= 1");
  if (points == 1) return {t_hi};
  std::vector<int> out;
  const double ll = std::log(double(t_lo));
  const double lh = std::log(double(t_hi));
  for (int i = 0; i < points; ++i) {
    const double frac = double(i) / double(points - 1);
    int t = int(std::lround(std::exp(ll + frac * (lh - ll))));
    t = std::clamp(t, t_lo, t_hi);
    if (out.empty() || t != out.back()) out.push_back(t);
  }
  return out;
}

CompareResult compare_estimators(const Target& target, const CompareOptions& opts,
                                 const HerdingConfig& herd_cfg, const GaussianMixture* true_p) {
  std::vector<int> grid = opts.t_grid;
  if (grid.empty()) throw ConfigError("t_grid: at least one T value required");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.front() < 1) throw ConfigError("t_grid: entries must be >= 1");
  if (opts.functions.empty()) throw ConfigError("functions: at least one required");
  std::vector<FunctionEval> fns;
  fns.reserve(opts.functions.size());
  for (const auto& name : opts.functions) fns.push_back(parse_function(name));

  HerdingConfig cfg = herd_cfg;
  cfg.t_max = std::max(cfg.t_max, grid.back());
  SuperSampleSet herd = run_herding(cfg, target);

  Rng rng(opts.seed);
  Rng truth_rng = rng.derive(11);
  const std::vector<FunctionTruth> target_truths =
      make_truths(fns, target, truth_rng, opts.sin_norm_mc_draws);

  CompareResult result;
  result.sigma = herd.sigma;
  for (auto& tr : score_prefixes(herd.samples, grid, target_truths, "herding", cfg.seed))
    result.traces.push_back(std::move(tr));

  // Against an empirical target with the generating mixture supplied, score
  // the same run against the mixture too; the iid baseline then draws from it.
  std::vector<FunctionTruth> p_truths;
  const bool vs_p = true_p != nullptr && std::holds_alternative<EmpiricalDistribution>(target);
  if (vs_p) {
    Rng p_rng = rng.derive(12);
    p_truths = make_truths(fns, Target(*true_p), p_rng, opts.sin_norm_mc_draws);
    for (auto& tr : score_prefixes(herd.samples, grid, p_truths, "herding_vs_p", cfg.seed))
      result.traces.push_back(std::move(tr));
  }

  if (opts.iid_repeats > 0) {
    const std::vector<FunctionTruth>& iid_truths = vs_p ? p_truths : target_truths;
    const Target iid_source = vs_p ? Target(*true_p) : target;
    std::vector<std::vector<ErrorTrace>> per_seed;
    per_seed.reserve(std::size_t(opts.iid_repeats));
    for (int r = 0; r < opts.iid_repeats; ++r) {
      Rng draw_rng = rng.derive(1000 + std::uint64_t(r));
      const Mat draws = sample_target(draw_rng, iid_source, grid.back());
      per_seed.push_back(score_prefixes(draws, grid, iid_truths, "iid", std::uint64_t(r)));
      for (const auto& tr : per_seed.back()) result.traces.push_back(tr);
    }
    const double repeats = double(opts.iid_repeats);
    for (std::size_t fi = 0; fi < fns.size(); ++fi) {
      ErrorTrace mean_tr, std_tr;
      mean_tr.estimator = "iid_mean";
      std_tr.estimator = "iid_std";
      mean_tr.function = std_tr.function = fns[fi].name;
      mean_tr.seed = std_tr.seed = opts.seed;
      const std::size_t n_t = per_seed.front()[fi].t.size();
      for (std::size_t gi = 0; gi < n_t; ++gi) {
        double mean = 0.0;
        for (const auto& seed_traces : per_seed) mean += seed_traces[fi].err[gi];
        mean /= repeats;
        double var = 0.0;
        for (const auto& seed_traces : per_seed) {
          const double dev = seed_traces[fi].err[gi] - mean;
          var += dev * dev;
        }
        var = opts.iid_repeats > 1 ? var / (repeats - 1.0) : 0.0;
        mean_tr.t.push_back(per_seed.front()[fi].t[gi]);
        mean_tr.err.push_back(mean);
        std_tr.t.push_back(per_seed.front()[fi].t[gi]);
        std_tr.err.push_back(std::sqrt(var));
      }
      result.traces.push_back(std::move(mean_tr));
      result.traces.push_back(std::move(std_tr));
    }
  }
  return result;
}

}  // namespace kherd
