#pragma once

// Reference implementations kept independent of the library's cached or
// closed-form paths: Monte Carlo estimates with standard errors, naive
// from-scratch summation, exhaustive argmax, central finite differences,
// and plain least squares.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "kherd/herding.hpp"
#include "kherd/targets.hpp"

namespace kherd::oracle {

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

inline McEstimate mc_stats(const std::vector<double>& values) {
  const double n = static_cast<double>(values.size());
  double s1 = 0.0;
  for (double v : values) s1 += v;
  const double mean = s1 / n;
  double s2 = 0.0;
  for (double v : values) s2 += (v - mean) * (v - mean);
  return {mean, std::sqrt(s2 / (n - 1.0) / n)};
}

// mean of k(x, x') over n draws x' ~ gm
inline McEstimate mc_mean_map(Rng& rng, const GaussianKernel& k, const GaussianMixture& gm,
                              const Vec& x, long n) {
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(n));
  long left = n;
  while (left > 0) {
    const int chunk = static_cast<int>(std::min<long>(left, 65536));
    const Mat draws = gm.sample(rng, chunk);
    for (int i = 0; i < chunk; ++i) vals.push_back(k(x, draws.row(i).transpose()));
    left -= chunk;
  }
  return mc_stats(vals);
}

// mean of k(x, x') over n independent pairs x, x' ~ gm
inline McEstimate mc_double_expectation(Rng& rng, const GaussianKernel& k,
                                        const GaussianMixture& gm, long n_pairs) {
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(n_pairs));
  long left = n_pairs;
  while (left > 0) {
    const int chunk = static_cast<int>(std::min<long>(left, 32768));
    const Mat a = gm.sample(rng, chunk);
    const Mat b = gm.sample(rng, chunk);
    for (int i = 0; i < chunk; ++i) vals.push_back(k(a.row(i).transpose(), b.row(i).transpose()));
    left -= chunk;
  }
  return mc_stats(vals);
}

// E_T^2 from scratch: kxx - (2/T) sum_t mm(x_t) + (1/T^2) sum_{t,t'} k(x_t, x_{t'})
inline double brute_error_squared(const HerdingState& state) {
  const Mat s = state.samples();
  const long tn = s.rows();
  double mm_sum = 0.0;
  for (long t = 0; t < tn; ++t) mm_sum += state.mean_map_value(s.row(t).transpose());
  double pair_sum = 0.0;
  for (long a = 0; a < tn; ++a)
    for (long b = 0; b < tn; ++b)
      pair_sum += state.kernel()(s.row(a).transpose(), s.row(b).transpose());
  const double td = static_cast<double>(tn);
  return state.double_expectation() - 2.0 * mm_sum / td + pair_sum / (td * td);
}

// objective recomputed without the cached sums
inline double naive_objective(const HerdingState& state, const Vec& x) {
  const Mat s = state.samples();
  double repel = 0.0;
  for (long t = 0; t < s.rows(); ++t) repel += state.kernel()(x, s.row(t).transpose());
  return state.mean_map_value(x) - repel / (static_cast<double>(s.rows()) + 1.0);
}

// argmax of the naive objective over the candidate set, lowest index on ties
inline int exhaustive_argmax(const HerdingState& state) {
  const Mat& c = state.candidates();
  int best = 0;
  double best_val = naive_objective(state, c.row(0).transpose());
  for (long i = 1; i < c.rows(); ++i) {
    const double v = naive_objective(state, c.row(i).transpose());
    if (v > best_val) {
      best_val = v;
      best = static_cast<int>(i);
    }
  }
  return best;
}

// central differences (f(x + h e_i) - f(x - h e_i)) / (2h)
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec hi = x, lo = x;
    hi(i) += h;
    lo(i) -= h;
    g(i) = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

inline OlsFit ols(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  OlsFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

}  // namespace kherd::oracle
