#include "kherd/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <utility>

#include "kherd/errors.hpp"

namespace kherd {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_field(const std::string& field, long row) {
  const std::string t = trim(field);
  if (t.empty()) throw ParseError("empty field", row);
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(t, &pos);
  } catch (const std::exception&) {
    throw ParseError("non-numeric field '" + t + "'", row);
  }
  if (pos != t.size()) throw ParseError("trailing characters in field '" + t + "'", row);
  if (!std::isfinite(value)) throw ParseError("non-finite field '" + t + "'", row);
  return value;
}

}  // namespace

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string line;
  long line_no = 0;
  std::size_t n_fields = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string content = trim(line);
    if (content.empty()) continue;
    if (content.back() == ',') throw ParseError("empty trailing field", line_no);
    std::vector<double> fields;
    std::stringstream ss(content);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(parse_field(field, line_no));
    if (fields.size() < 2) throw ParseError("need at least one feature and a label", line_no);
    if (rows.empty()) {
      n_fields = fields.size();
    } else if (fields.size() != n_fields) {
      throw ParseError("row has " + std::to_string(fields.size()) + " fields, expected " +
                           std::to_string(n_fields),
                       line_no);
    }
    const double label = fields.back();
    if (label != 0.0 && label != 1.0)
      throw NonBinaryLabel("label " + std::to_string(label) + " at row " +
                           std::to_string(line_no));
    labels.push_back(int(label));
    fields.pop_back();
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw EmptyFile("no data rows in " + path);

  Dataset ds;
  ds.features.resize(long(rows.size()), long(n_fields - 1));
  ds.labels.resize(long(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j + 1 < n_fields; ++j) ds.features(long(i), long(j)) = rows[i][j];
    ds.labels(long(i)) = labels[i];
  }
  return ds;
}

void split_dataset(Dataset& ds, int n_train, std::uint64_t seed) {
  const int n = int(ds.features.rows());
  if (n_train < 1 || n_train >= n)
    throw ConfigError("split: n_train must be in [1, n_rows - 1]");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (int i = 0; i < n - 1; ++i)
    std::swap(order[std::size_t(i)], order[std::size_t(rng.uniform_int(i, n - 1))]);
  ds.train_idx.assign(order.begin(), order.begin() + n_train);
  ds.test_idx.assign(order.begin() + n_train, order.end());
  std::sort(ds.train_idx.begin(), ds.train_idx.end());
  std::sort(ds.test_idx.begin(), ds.test_idx.end());
}

Mat rows_at(const Mat& m, const std::vector<int>& idx) {
  Mat out(long(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(long(i)) = m.row(idx[i]);
  return out;
}

Eigen::VectorXi labels_at(const Eigen::VectorXi& labels, const std::vector<int>& idx) {
  Eigen::VectorXi out(long(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(long(i)) = labels(idx[i]);
  return out;
}

Dataset make_synthetic_logistic(std::uint64_t seed, int n, int d) {
  if (n < 1 || d < 1) throw ConfigError("synthetic dataset: n and d must be positive");
  Rng rng(seed);
  Vec truth(d);
  for (int j = 0; j < d; ++j) truth(j) = 2.0 / std::sqrt(double(d)) * rng.normal();
  const double bias = 0.5 * rng.normal();

  Dataset ds;
  ds.features.resize(n, d);
  ds.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) ds.features(i, j) = rng.normal();
    const double p = sigmoid(ds.features.row(i).dot(truth) + bias);
    ds.labels(i) = rng.uniform() < p ? 1 : 0;
  }
  return ds;
}

Mat WhitenTransform::apply(const Mat& rows) const {
  if (rows.cols() != mean.size()) throw DimensionMismatch("whiten: input dim mismatch");
  return (rows.rowwise() - mean.transpose()) * projection;
}

Vec WhitenTransform::apply(const Vec& x) const {
  if (x.size() != mean.size()) throw DimensionMismatch("whiten: input dim mismatch");
  return projection.transpose() * (x - mean);
}

std::pair<WhitenTransform, Mat> pca_whiten(const Mat& train) {
  if (train.rows() < 2) throw ConfigError("pca_whiten: need at least 2 rows");
  WhitenTransform w;
  w.mean = train.colwise().mean().transpose();
  const Mat centered = train.rowwise() - w.mean.transpose();
  const Mat cov = centered.transpose() * centered / double(train.rows() - 1);

  Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
  const Vec values = eig.eigenvalues();  // ascending
  const double max_value = values(values.size() - 1);
  if (!(max_value > 0.0)) throw DegenerateData("pca_whiten: no positive variance direction");
  w.eigen_floor = 1e-10 * max_value;

  std::vector<long> kept;
  for (long i = values.size() - 1; i >= 0; --i)  // descending eigenvalue order
    if (values(i) >= w.eigen_floor) kept.push_back(i);
  if (kept.empty()) throw DegenerateData("pca_whiten: all eigenvalues below floor");

  w.retained_dim = int(kept.size());
  w.projection.resize(train.cols(), long(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j)
    w.projection.col(long(j)) = eig.eigenvectors().col(kept[j]) / std::sqrt(values(kept[j]));
  return {w, centered * w.projection};
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log1p_exp(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double log_posterior(const Vec& theta, const Mat& features, const Eigen::VectorXi& labels,
                     double prior_var, bool include_bias) {
  const long d = features.cols();
  if (theta.size() != d + (include_bias ? 1 : 0))
    throw DimensionMismatch("log_posterior: theta size vs feature dim");
  if (features.rows() != labels.size())
    throw DimensionMismatch("log_posterior: features vs labels rows");
  if (prior_var <= 0.0) throw ConfigError("log_posterior: prior_var must be positive");

  Vec z = features * theta.head(d);
  if (include_bias) z.array() += theta(d);
  double ll = 0.0;
  for (long i = 0; i < z.size(); ++i)
    ll -= log1p_exp(labels(i) == 1 ? -z(i) : z(i));  // log s(z) = -log1p_exp(-z)
  return ll - theta.squaredNorm() / (2.0 * prior_var);
}

PosteriorChain mh_run(const std::function<double(const Vec&)>& log_target, int dim,
                      const MhOptions& opt) {
  if (dim < 1) throw ConfigError("mh: dimension must be positive");
  if (opt.n_keep < 1) throw ConfigError("mh: n_keep must be positive");
  if (opt.thin < 1) throw ConfigError("mh: thin must be positive");
  if (opt.burn_in < 0) throw ConfigError("mh: burn_in must be nonnegative");

  Rng rng(opt.seed);
  double scale = opt.proposal_scale;
  if (scale < 0.0) {
    Rng tune_rng = rng.derive(1);
    scale = tune_proposal_scale(log_target, dim, tune_rng);
  }

  PosteriorChain chain;
  chain.proposal_scale = scale;
  chain.prior_var = opt.prior_var;
  chain.thin = opt.thin;
  chain.burn_in = opt.burn_in;
  chain.seed = opt.seed;
  chain.thetas.resize(opt.n_keep, dim);

  Rng walk = rng.derive(2);
  Vec theta = Vec::Zero(dim);
  double lp = log_target(theta);
  const long total = long(opt.burn_in) + long(opt.n_keep) * long(opt.thin);
  long accepted = 0;
  long kept = 0;
  Vec prop(dim);
  for (long i = 1; i <= total; ++i) {
    for (int j = 0; j < dim; ++j) prop(j) = theta(j) + scale * walk.normal();
    const double lp_prop = log_target(prop);
    const bool accept = lp_prop >= lp || std::log(walk.uniform()) < lp_prop - lp;
    if (accept) {
      theta = prop;
      lp = lp_prop;
      ++accepted;
    }
    if (i > opt.burn_in && (i - opt.burn_in) % opt.thin == 0) chain.thetas.row(kept++) = theta;
  }
  chain.acceptance_rate = double(accepted) / double(total);
  return chain;
}

PosteriorChain mh_sample(const Mat& features, const Eigen::VectorXi& labels,
                         const MhOptions& opt, bool include_bias) {
  if (features.rows() != labels.size())
    throw DimensionMismatch("mh_sample: features vs labels rows");
  if (opt.prior_var <= 0.0) throw ConfigError("mh: prior_var must be positive");
  const int dim = int(features.cols()) + (include_bias ? 1 : 0);
  auto target = [&features, &labels, pv = opt.prior_var, include_bias](const Vec& th) {
    return log_posterior(th, features, labels, pv, include_bias);
  };
  return mh_run(target, dim, opt);
}

double tune_proposal_scale(const std::function<double(const Vec&)>& log_target, int dim,
                           Rng& rng) {
  if (dim < 1) throw ConfigError("tune: dimension must be positive");
  double scale = 2.38 / std::sqrt(double(dim));
  const int pilot_steps = 200;
  Vec prop(dim);
  for (int round = 0; round < 40; ++round) {
    Rng pilot = rng.derive(std::uint64_t(round));
    Vec theta = Vec::Zero(dim);
    double lp = log_target(theta);
    int accepted = 0;
    for (int i = 0; i < pilot_steps; ++i) {
      for (int j = 0; j < dim; ++j) prop(j) = theta(j) + scale * pilot.normal();
      const double lp_prop = log_target(prop);
      if (lp_prop >= lp || std::log(pilot.uniform()) < lp_prop - lp) {
        theta = prop;
        lp = lp_prop;
        ++accepted;
      }
    }
    const double rate = double(accepted) / double(pilot_steps);
    if (rate > 0.4)
      scale *= 2.0;
    else if (rate < 0.2)
      scale *= 0.5;
    else
      break;
  }
  return scale;
}

Vec mean_predictive(const Mat& thetas, const Mat& test_features, bool include_bias) {
  if (thetas.rows() == 0) throw EmptyThetaSet("mean_predictive: no thetas");
  const long d = test_features.cols();
  if (thetas.cols() != d + (include_bias ? 1 : 0))
    throw DimensionMismatch("mean_predictive: theta size vs feature dim");
  Mat z = test_features * thetas.leftCols(d).transpose();  // tests x thetas
  if (include_bias) z.rowwise() += thetas.col(d).transpose();
  return z.unaryExpr([](double v) { return sigmoid(v); }).rowwise().mean();
}

double predictive_prob(const Mat& thetas, const Vec& x, bool include_bias) {
  Mat one_row = x.transpose();
  return mean_predictive(thetas, one_row, include_bias)(0);
}

double predictive_rmse(const Mat& subset_thetas, const Mat& full_thetas,
                       const Mat& test_features, bool include_bias) {
  if (subset_thetas.rows() == 0 || full_thetas.rows() == 0)
    throw EmptySet("predictive_rmse: empty theta set");
  if (test_features.rows() == 0) throw EmptySet("predictive_rmse: empty test set");
  const Vec ps = mean_predictive(subset_thetas, test_features, include_bias);
  const Vec pd = mean_predictive(full_thetas, test_features, include_bias);
  return std::sqrt((ps - pd).squaredNorm() / double(test_features.rows()));
}

double accuracy(const Mat& thetas, const Mat& test_features, const Eigen::VectorXi& test_labels,
                bool include_bias) {
  if (thetas.rows() == 0) throw EmptySet("accuracy: empty theta set");
  if (test_features.rows() == 0) throw EmptySet("accuracy: empty test set");
  if (test_features.rows() != test_labels.size())
    throw DimensionMismatch("accuracy: features vs labels rows");
  const Vec p = mean_predictive(thetas, test_features, include_bias);
  long correct = 0;
  for (long i = 0; i < p.size(); ++i) {
    const int predicted = p(i) >= 0.5 ? 1 : 0;
    if (predicted == test_labels(i)) ++correct;
  }
  return double(correct) / double(p.size());
}

double noise_floor(const Mat& full_thetas, const Mat& test_features, bool include_bias) {
  const long m = full_thetas.rows();
  if (m < 2) throw EmptySet("noise_floor: need at least 2 thetas");
  if (test_features.rows() == 0) throw EmptySet("noise_floor: empty test set");
  const long d = test_features.cols();
  if (full_thetas.cols() != d + (include_bias ? 1 : 0))
    throw DimensionMismatch("noise_floor: theta size vs feature dim");
  Mat z = test_features * full_thetas.leftCols(d).transpose();
  if (include_bias) z.rowwise() += full_thetas.col(d).transpose();
  const Mat p = z.unaryExpr([](double v) { return sigmoid(v); });
  double sum = 0.0;
  for (long i = 0; i < p.rows(); ++i) {
    const double mean = p.row(i).mean();
    const double var = (p.row(i).array() - mean).square().sum() / double(m - 1);
    sum += std::sqrt(std::max(0.0, var) / double(m));
  }
  return sum / double(p.rows());
}

double bootstrap_rmse(const Mat& full_thetas, const Mat& test_features, int t, int n_repeats,
                      Rng& rng, bool include_bias) {
  if (full_thetas.rows() == 0) throw EmptySet("bootstrap: empty theta set");
  if (t < 1) throw ConfigError("bootstrap: subset size must be positive");
  if (n_repeats < 1) throw ConfigError("bootstrap: need at least one repeat");
  const long m = full_thetas.rows();
  Mat subset(t, full_thetas.cols());
  double sum = 0.0;
  for (int r = 0; r < n_repeats; ++r) {
    for (int i = 0; i < t; ++i)
      subset.row(i) = full_thetas.row(long(rng.uniform_int(0, int(m) - 1)));
    sum += predictive_rmse(subset, full_thetas, test_features, include_bias);
  }
  return sum / double(n_repeats);
}

double bootstrap_accuracy(const Mat& full_thetas, const Mat& test_features,
                          const Eigen::VectorXi& test_labels, int t, int n_repeats, Rng& rng,
                          bool include_bias) {
  if (full_thetas.rows() == 0) throw EmptySet("bootstrap: empty theta set");
  if (t < 1) throw ConfigError("bootstrap: subset size must be positive");
  if (n_repeats < 1) throw ConfigError("bootstrap: need at least one repeat");
  const long m = full_thetas.rows();
  Mat subset(t, full_thetas.cols());
  double sum = 0.0;
  for (int r = 0; r < n_repeats; ++r) {
    for (int i = 0; i < t; ++i)
      subset.row(i) = full_thetas.row(long(rng.uniform_int(0, int(m) - 1)));
    sum += accuracy(subset, test_features, test_labels, include_bias);
  }
  return sum / double(n_repeats);
}

CompressResult compress_posterior(const PosteriorChain& chain, double sigma, int t_max,
                                  std::uint64_t seed) {
  if (chain.thetas.rows() == 0) throw EmptyThetaSet("compress: empty chain");
  CompressResult out;
  Mat whitened;
  if (chain.thetas.rows() == 1) {
    // A single theta cannot be whitened; herd over the lone zero-offset point.
    out.whiten.mean = chain.thetas.row(0).transpose();
    out.whiten.projection = Mat::Identity(chain.thetas.cols(), chain.thetas.cols());
    out.whiten.retained_dim = int(chain.thetas.cols());
    whitened = Mat::Zero(1, chain.thetas.cols());
    if (sigma <= 0.0) sigma = 1.0;
  } else {
    auto [w, wx] = pca_whiten(chain.thetas);
    out.whiten = std::move(w);
    whitened = std::move(wx);
  }

  HerdingConfig cfg;
  cfg.mode = HerdingMode::Discrete;
  cfg.t_max = t_max;
  cfg.sigma = sigma;
  cfg.seed = seed;
  out.herd = run_herding(cfg, Target(EmpiricalDistribution(std::move(whitened))));

  out.indices = out.herd.indices;
  out.selected_thetas.resize(t_max, chain.thetas.cols());
  for (int t = 0; t < t_max; ++t) out.selected_thetas.row(t) = chain.thetas.row(out.indices[t]);
  return out;
}

}  // namespace kherd
