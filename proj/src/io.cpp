#include "kherd/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kherd/errors.hpp"

namespace kherd {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  return out;
}

void dump_json(const std::string& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_matrix_csv(const std::string& path, const Mat& m) {
  auto out = open_out(path);
  for (long i = 0; i < m.rows(); ++i) {
    for (long j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

Mat read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      std::size_t pos = 0;
      double value = 0.0;
      try {
        value = std::stod(field, &pos);
      } catch (const std::exception&) {
        throw ParseError("non-numeric field '" + field + "'", line_no);
      }
      if (pos != field.size()) throw ParseError("trailing characters in '" + field + "'", line_no);
      if (!std::isfinite(value)) throw ParseError("non-finite field", line_no);
      row.push_back(value);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("row has " + std::to_string(row.size()) + " fields, expected " +
                           std::to_string(rows.front().size()),
                       line_no);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw EmptyFile("no data rows in " + path);
  Mat m(long(rows.size()), long(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.front().size(); ++j) m(long(i), long(j)) = rows[i][j];
  return m;
}

void write_samples_csv(const std::string& path, const SuperSampleSet& set) {
  auto out = open_out(path);
  const bool discrete = set.mode == HerdingMode::Discrete;
  out << "t";
  for (long j = 0; j < set.samples.cols(); ++j) out << ",x" << j;
  if (discrete) out << ",index";
  out << '\n';
  for (long i = 0; i < set.samples.rows(); ++i) {
    out << (i + 1);
    for (long j = 0; j < set.samples.cols(); ++j) out << ',' << format_double(set.samples(i, j));
    if (discrete) out << ',' << set.indices[std::size_t(i)];
    out << '\n';
  }
}

void write_run_json(const std::string& path, const SuperSampleSet& set) {
  json j;
  j["mode"] = to_string(set.mode);
  j["sigma"] = set.sigma;
  j["seed"] = set.seed;
  j["T"] = set.samples.rows();
  j["errors"] = set.errors;
  dump_json(path, j);
}

void write_traces_csv(const std::string& path, const std::vector<ErrorTrace>& traces) {
  auto out = open_out(path);
  out << "T,error,estimator,function,seed\n";
  for (const auto& tr : traces) {
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
      out << tr.t[i] << ',' << format_double(tr.err[i]) << ',' << tr.estimator << ','
          << tr.function << ',' << tr.seed << '\n';
    }
  }
}

void write_fits_json(const std::string& path, const std::vector<NamedFit>& fits) {
  json arr = json::array();
  for (const auto& f : fits) {
    json j;
    j["estimator"] = f.estimator;
    j["function"] = f.function;
    j["slope"] = f.fit.slope;
    j["r2"] = f.fit.r2;
    j["points_used"] = f.fit.points_used;
    arr.push_back(std::move(j));
  }
  dump_json(path, arr);
}

void write_mixture_json(const std::string& path, const GaussianMixture& gm) {
  json j;
  j["dim"] = gm.dim();
  json weights = json::array();
  json means = json::array();
  json covs = json::array();
  for (int c = 0; c < gm.components(); ++c) {
    weights.push_back(gm.weights()(c));
    json mean = json::array();
    for (int i = 0; i < gm.dim(); ++i) mean.push_back(gm.mean(c)(i));
    means.push_back(std::move(mean));
    json cov = json::array();  // row-major
    for (int i = 0; i < gm.dim(); ++i)
      for (int k = 0; k < gm.dim(); ++k) cov.push_back(gm.covariance(c)(i, k));
    covs.push_back(std::move(cov));
  }
  j["weights"] = std::move(weights);
  j["means"] = std::move(means);
  j["covariances"] = std::move(covs);
  dump_json(path, j);
}

GaussianMixture read_mixture_json(const std::string& path) {
  const json j = load_json(path);
  try {
    const int dim = j.at("dim").get<int>();
    const auto& jw = j.at("weights");
    const auto& jm = j.at("means");
    const auto& jc = j.at("covariances");
    const std::size_t n = jw.size();
    if (jm.size() != n || jc.size() != n)
      throw ParseError(path + ": weights/means/covariances lengths differ");
    Vec weights(static_cast<Eigen::Index>(n));
    std::vector<Vec> means;
    std::vector<Mat> covs;
    for (std::size_t c = 0; c < n; ++c) {
      weights(long(c)) = jw.at(c).get<double>();
      if (jm.at(c).size() != std::size_t(dim)) throw ParseError(path + ": mean length != dim");
      Vec mean(dim);
      for (int i = 0; i < dim; ++i) mean(i) = jm.at(c).at(std::size_t(i)).get<double>();
      means.push_back(std::move(mean));
      if (jc.at(c).size() != std::size_t(dim) * std::size_t(dim))
        throw ParseError(path + ": covariance length != dim*dim");
      Mat cov(dim, dim);
      for (int i = 0; i < dim; ++i)
        for (int k = 0; k < dim; ++k)
          cov(i, k) = jc.at(c).at(std::size_t(i * dim + k)).get<double>();
      covs.push_back(std::move(cov));
    }
    return GaussianMixture(weights, means, covs);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_chain_csv(const std::string& path, const PosteriorChain& chain) {
  write_matrix_csv(path, chain.thetas);
}

void write_chain_json(const std::string& path, const PosteriorChain& chain) {
  json j;
  j["prior_var"] = chain.prior_var;
  j["proposal_scale"] = chain.proposal_scale;
  j["thin"] = chain.thin;
  j["burn_in"] = chain.burn_in;
  j["acceptance_rate"] = chain.acceptance_rate;
  j["seed"] = chain.seed;
  j["n_keep"] = chain.thetas.rows();
  dump_json(path, j);
}

}  // namespace kherd
