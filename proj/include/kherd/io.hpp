#pragma once

#include <string>
#include <vector>

#include "kherd/evaluation.hpp"
#include "kherd/herding.hpp"
#include "kherd/posterior.hpp"

namespace kherd {

// 17 significant digits; round-trips to the same double.
std::string format_double(double v);

void write_matrix_csv(const std::string& path, const Mat& m);
Mat read_matrix_csv(const std::string& path);

// Columns t, x0..x{d-1}, plus the chosen candidate index in discrete mode.
void write_samples_csv(const std::string& path, const SuperSampleSet& set);

// Sidecar metadata: mode, sigma, seed, T, per-step error trace.
void write_run_json(const std::string& path, const SuperSampleSet& set);

// Columns T, error, estimator, function, seed; one row per trace entry.
void write_traces_csv(const std::string& path, const std::vector<ErrorTrace>& traces);

struct NamedFit {
  std::string estimator;
  std::string function;
  RateFit fit;
};

void write_fits_json(const std::string& path, const std::vector<NamedFit>& fits);

void write_mixture_json(const std::string& path, const GaussianMixture& gm);
GaussianMixture read_mixture_json(const std::string& path);

void write_chain_csv(const std::string& path, const PosteriorChain& chain);
void write_chain_json(const std::string& path, const PosteriorChain& chain);

}  // namespace kherd
