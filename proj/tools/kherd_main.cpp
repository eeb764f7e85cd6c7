#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kherd/errors.hpp"
#include "kherd/io.hpp"

using nlohmann::json;
using namespace kherd;

namespace {

constexpr const char* kVersion = "kherd 0.1.0";

// ---------------------------------------------------------------------------
// Run context: artifact bookkeeping plus the always-written manifest.

struct RunContext {
  std::string command;
  json config;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::vector<std::string> artifacts;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

std::string artifact_path(RunContext& ctx, const std::string& name) {
  std::string path = (std::filesystem::path(ctx.out_dir) / name).string();
  ctx.artifacts.push_back(path);
  return path;
}

void write_manifest(const RunContext& ctx, const std::string& error) {
  json j;
  j["command"] = ctx.command;
  j["config"] = ctx.config;
  j["seed"] = ctx.seed;
  j["artifacts"] = ctx.artifacts;
  const auto elapsed = std::chrono::steady_clock::now() - ctx.start;
  j["duration_seconds"] = std::chrono::duration<double>(elapsed).count();
  j["version"] = kVersion;
  if (!error.empty()) j["error"] = error;
  std::ofstream out((std::filesystem::path(ctx.out_dir) / "manifest.json").string());
  out << j.dump(2) << '\n';
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NotPositiveDefinite*>(&e) != nullptr ||
      dynamic_cast<const AscentDiverged*>(&e) != nullptr ||
      dynamic_cast<const DegenerateData*>(&e) != nullptr ||
      dynamic_cast<const DegenerateTrace*>(&e) != nullptr ||
      dynamic_cast<const NonFinite*>(&e) != nullptr)
    return 3;
  if (dynamic_cast<const Error*>(&e) != nullptr) return 2;
  return 3;
}

int run_guarded(RunContext& ctx, const std::function<void()>& body) {
  std::error_code ec;
  std::filesystem::create_directories(ctx.out_dir, ec);
  try {
    body();
    write_manifest(ctx, "");
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    try {
      write_manifest(ctx, e.what());
    } catch (...) {
    }
    return exit_code_for(e);
  }
}

// ---------------------------------------------------------------------------
// Config file: JSON whose keys mirror the flag names. Precedence is
// flags > config file > built-in defaults, so the file is applied to the
// bound defaults before CLI11 parses the command line.

json load_config(int argc, char** argv) {
  std::string path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) {
      path = argv[i + 1];
      break;
    }
    if (arg.rfind("--config=", 0) == 0) {
      path = arg.substr(9);
      break;
    }
  }
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("--config: cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("--config: " + path + ": " + e.what());
  }
}

class ConfigReader {
 public:
  ConfigReader(const json& j, bool apply) : config_(j), apply_(apply) {}

  template <typename T>
  void get(const char* key, T& out) {
    known_.push_back(key);
    if (apply_ && config_.contains(key)) {
      try {
        out = config_.at(key).get<T>();
      } catch (const json::exception& e) {
        throw ConfigError(std::string("--config: field '") + key + "': " + e.what());
      }
    }
  }

  // Every key in the file must belong to the command being run.
  void check_no_unknown(const std::string& command) const {
    for (const auto& item : config_.items()) {
      if (item.key() == "config") continue;
      if (std::find(known_.begin(), known_.end(), item.key()) == known_.end())
        throw ConfigError("--config: unknown field '" + item.key() + "' for " + command);
    }
  }

 private:
  const json& config_;
  bool apply_;
  std::vector<std::string> known_;
};

// ---------------------------------------------------------------------------
// gm-herd: continuous herding against an analytic mixture.

struct GmHerdOpts {
  int dim = 2;
  int components = 5;
  int t_max = 20;
  double sigma = -1.0;
  int seed_candidates = 50;
  double box_lo = 0.0, box_hi = 10.0, cov_scale = 1.0;
  std::string target_file;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string config_file;
};

json snapshot(const GmHerdOpts& o) {
  return json{{"dim", o.dim},
              {"components", o.components},
              {"T", o.t_max},
              {"sigma", o.sigma},
              {"seed-candidates", o.seed_candidates},
              {"box-lo", o.box_lo},
              {"box-hi", o.box_hi},
              {"cov-scale", o.cov_scale},
              {"target", o.target_file},
              {"seed", o.seed},
              {"out-dir", o.out_dir}};
}

void apply_config(const json& cfg, GmHerdOpts& o, const std::string& command) {
  // Pre-parse (command empty): assign file values over the defaults. Post-parse:
  // only validate that every key belongs to the command.
  ConfigReader r(cfg, command.empty());
  r.get("dim", o.dim);
  r.get("components", o.components);
  r.get("T", o.t_max);
  r.get("sigma", o.sigma);
  r.get("seed-candidates", o.seed_candidates);
  r.get("box-lo", o.box_lo);
  r.get("box-hi", o.box_hi);
  r.get("cov-scale", o.cov_scale);
  r.get("target", o.target_file);
  r.get("seed", o.seed);
  r.get("out-dir", o.out_dir);
  if (!command.empty()) r.check_no_unknown(command);
}

int run_gm_herd(const GmHerdOpts& o) {
  RunContext ctx{"gm-herd", snapshot(o), o.seed, o.out_dir, {}};
  return run_guarded(ctx, [&] {
    if (o.dim < 1) throw ConfigError("--dim must be >= 1");
    if (o.components < 1) throw ConfigError("--components must be >= 1");
    if (o.t_max < 0) throw ConfigError("--T must be >= 0");
    if (o.seed_candidates < 1) throw ConfigError("--seed-candidates must be >= 1");

    GaussianMixture gm = [&] {
      if (!o.target_file.empty()) return read_mixture_json(o.target_file);
      Rng gm_rng = Rng(o.seed).derive(10);
      return random_mixture(gm_rng, o.dim, o.components, {o.box_lo, o.box_hi, o.cov_scale});
    }();

    HerdingConfig cfg;
    cfg.mode = HerdingMode::Continuous;
    cfg.t_max = o.t_max;
    cfg.sigma = o.sigma;
    cfg.seed_candidates = o.seed_candidates;
    cfg.seed = o.seed;
    const SuperSampleSet set = run_herding(cfg, Target(gm));

    write_mixture_json(artifact_path(ctx, "mixture.json"), gm);
    write_samples_csv(artifact_path(ctx, "samples.csv"), set);
    write_run_json(artifact_path(ctx, "run.json"), set);
  });
}

// ---------------------------------------------------------------------------
// empirical-herd: discrete herding over the rows of a CSV sample matrix.

struct EmpiricalHerdOpts {
  std::string input;
  int t_max = 20;
  double sigma = -1.0;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string config_file;
};

json snapshot(const EmpiricalHerdOpts& o) {
  return json{{"input", o.input},
              {"T", o.t_max},
              {"sigma", o.sigma},
              {"seed", o.seed},
              {"out-dir", o.out_dir}};
}

void apply_config(const json& cfg, EmpiricalHerdOpts& o, const std::string& command) {
  ConfigReader r(cfg, command.empty());
  r.get("input", o.input);
  r.get("T", o.t_max);
  r.get("sigma", o.sigma);
  r.get("seed", o.seed);
  r.get("out-dir", o.out_dir);
  if (!command.empty()) r.check_no_unknown(command);
}

int run_empirical_herd(const EmpiricalHerdOpts& o) {
  RunContext ctx{"empirical-herd", snapshot(o), o.seed, o.out_dir, {}};
  return run_guarded(ctx, [&] {
    if (o.input.empty()) throw ConfigError("--input is required");
    if (o.t_max < 0) throw ConfigError("--T must be >= 0");
    EmpiricalDistribution data(read_matrix_csv(o.input));

    HerdingConfig cfg;
    cfg.mode = HerdingMode::Discrete;
    cfg.t_max = o.t_max;
    cfg.sigma = o.sigma;
    cfg.seed = o.seed;
    const SuperSampleSet set = run_herding(cfg, Target(std::move(data)));

    write_samples_csv(artifact_path(ctx, "samples.csv"), set);
    write_run_json(artifact_path(ctx, "run.json"), set);
  });
}

// ---------------------------------------------------------------------------
// compare: herding vs iid baselines on the standard test functions.

struct CompareOpts {
  int dim = 5;
  int components = 20;
  int t_lo = 1;
  int t_max = 2000;
  int grid_points = 40;
  std::vector<std::string> functions = kStandardFunctions;
  int iid_repeats = 10;
  double sigma = -1.0;
  int seed_candidates = 50;
  double box_lo = 0.0, box_hi = 10.0, cov_scale = 1.0;
  long mc_draws = 10000000;
  int fit_t_min = 100;
  bool large_mixture = false;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string config_file;
};

json snapshot(const CompareOpts& o) {
  return json{{"dim", o.dim},
              {"components", o.components},
              {"t-lo", o.t_lo},
              {"T", o.t_max},
              {"grid-points", o.grid_points},
              {"functions", o.functions},
              {"iid-repeats", o.iid_repeats},
              {"sigma", o.sigma},
              {"seed-candidates", o.seed_candidates},
              {"box-lo", o.box_lo},
              {"box-hi", o.box_hi},
              {"cov-scale", o.cov_scale},
              {"mc-draws", o.mc_draws},
              {"fit-t-min", o.fit_t_min},
              {"large-mixture", o.large_mixture},
              {"seed", o.seed},
              {"out-dir", o.out_dir}};
}

void apply_config(const json& cfg, CompareOpts& o, const std::string& command) {
  ConfigReader r(cfg, command.empty());
  r.get("dim", o.dim);
  r.get("components", o.components);
  r.get("t-lo", o.t_lo);
  r.get("T", o.t_max);
  r.get("grid-points", o.grid_points);
  r.get("functions", o.functions);
  r.get("iid-repeats", o.iid_repeats);
  r.get("sigma", o.sigma);
  r.get("seed-candidates", o.seed_candidates);
  r.get("box-lo", o.box_lo);
  r.get("box-hi", o.box_hi);
  r.get("cov-scale", o.cov_scale);
  r.get("mc-draws", o.mc_draws);
  r.get("fit-t-min", o.fit_t_min);
  r.get("large-mixture", o.large_mixture);
  r.get("seed", o.seed);
  r.get("out-dir", o.out_dir);
  if (!command.empty()) r.check_no_unknown(command);
}

int run_compare(CompareOpts o) {
  if (o.large_mixture) {
    o.dim = 5;
    o.components = 100;
  }
  RunContext ctx{"compare", snapshot(o), o.seed, o.out_dir, {}};
  return run_guarded(ctx, [&] {
    if (o.dim < 1) throw ConfigError("--dim must be >= 1");
    if (o.components < 1) throw ConfigError("--components must be >= 1");
    if (o.t_max < 1) throw ConfigError("--T must be >= 1");
    if (o.t_lo < 1 || o.t_lo > o.t_max) throw ConfigError("--t-lo must be in [1, T]");
    if (o.grid_points < 1) throw ConfigError("--grid-points must be >= 1");
    if (o.iid_repeats < 0) throw ConfigError("--iid-repeats must be >= 0");

    Rng gm_rng = Rng(o.seed).derive(10);
    GaussianMixture gm =
        random_mixture(gm_rng, o.dim, o.components, {o.box_lo, o.box_hi, o.cov_scale});

    CompareOptions copts;
    copts.functions = o.functions;
    copts.t_grid = log_grid(o.t_lo, o.t_max, o.grid_points);
    copts.iid_repeats = o.iid_repeats;
    copts.sin_norm_mc_draws = o.mc_draws;
    copts.seed = o.seed;

    HerdingConfig hcfg;
    hcfg.mode = HerdingMode::Continuous;
    hcfg.t_max = o.t_max;
    hcfg.sigma = o.sigma;
    hcfg.seed_candidates = o.seed_candidates;
    hcfg.seed = o.seed;

    const CompareResult res = compare_estimators(Target(gm), copts, hcfg);

    write_mixture_json(artifact_path(ctx, "mixture.json"), gm);
    write_traces_csv(artifact_path(ctx, "traces.csv"), res.traces);

    std::vector<NamedFit> fits;
    for (const auto& tr : res.traces) {
      if (tr.estimator != "herding" && tr.estimator != "iid_mean") continue;
      long usable = 0;
      for (int t : tr.t)
        if (t >= o.fit_t_min) ++usable;
      if (usable < 10) continue;
      try {
        fits.push_back({tr.estimator, tr.function, fit_rate(tr, o.fit_t_min)});
      } catch (const DegenerateTrace&) {
      }
    }
    write_fits_json(artifact_path(ctx, "fits.json"), fits);
  });
}

// ---------------------------------------------------------------------------
// posterior: ingest -> whiten -> MH -> herd -> herding vs bootstrap subsets.

struct PosteriorOpts {
  bool synthetic = false;
  std::string data_file;
  int synth_n = 3000;
  int synth_d = 10;
  int n_train = -1;  // default: 3000 for --data, 2000 for --synthetic
  double prior_var = 100.0;
  double proposal_scale = -1.0;
  int keep = 5000;
  int thin = 100;
  int burn_in = 1000;
  double herd_sigma = -1.0;
  std::vector<int> t_grid = {50, 100, 200, 500, 1000};
  int subset_repeats = 10;
  bool no_bias = false;
  int fit_t_min = 0;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string config_file;
};

json snapshot(const PosteriorOpts& o) {
  return json{{"synthetic", o.synthetic},
              {"data", o.data_file},
              {"synth-n", o.synth_n},
              {"synth-d", o.synth_d},
              {"n-train", o.n_train},
              {"prior-var", o.prior_var},
              {"proposal-scale", o.proposal_scale},
              {"keep", o.keep},
              {"thin", o.thin},
              {"burn-in", o.burn_in},
              {"herd-sigma", o.herd_sigma},
              {"T-grid", o.t_grid},
              {"subset-repeats", o.subset_repeats},
              {"no-bias", o.no_bias},
              {"fit-t-min", o.fit_t_min},
              {"seed", o.seed},
              {"out-dir", o.out_dir}};
}

void apply_config(const json& cfg, PosteriorOpts& o, const std::string& command) {
  ConfigReader r(cfg, command.empty());
  r.get("synthetic", o.synthetic);
  r.get("data", o.data_file);
  r.get("synth-n", o.synth_n);
  r.get("synth-d", o.synth_d);
  r.get("n-train", o.n_train);
  r.get("prior-var", o.prior_var);
  r.get("proposal-scale", o.proposal_scale);
  r.get("keep", o.keep);
  r.get("thin", o.thin);
  r.get("burn-in", o.burn_in);
  r.get("herd-sigma", o.herd_sigma);
  r.get("T-grid", o.t_grid);
  r.get("subset-repeats", o.subset_repeats);
  r.get("no-bias", o.no_bias);
  r.get("fit-t-min", o.fit_t_min);
  r.get("seed", o.seed);
  r.get("out-dir", o.out_dir);
  if (!command.empty()) r.check_no_unknown(command);
}

int run_posterior(PosteriorOpts o) {
  RunContext ctx{"posterior", snapshot(o), o.seed, o.out_dir, {}};
  return run_guarded(ctx, [&] {
    if (o.synthetic == !o.data_file.empty())
      throw ConfigError("exactly one of --synthetic and --data is required");
    if (o.t_grid.empty()) throw ConfigError("--T-grid must be non-empty");
    for (int t : o.t_grid)
      if (t < 1) throw ConfigError("--T-grid entries must be >= 1");
    if (o.subset_repeats < 1) throw ConfigError("--subset-repeats must be >= 1");
    if (o.keep < 1) throw ConfigError("--keep must be >= 1");
    const bool bias = !o.no_bias;

    Rng rng(o.seed);
    Dataset ds = o.synthetic ? make_synthetic_logistic(rng.derive(20).seed(), o.synth_n, o.synth_d)
                             : load_dataset(o.data_file);
    const int n_train = o.n_train > 0 ? o.n_train : (o.synthetic ? 2000 : 3000);
    split_dataset(ds, n_train, rng.derive(21).seed());

    const Mat train_raw = rows_at(ds.features, ds.train_idx);
    auto [feature_whiten, train] = pca_whiten(train_raw);
    const Mat test = feature_whiten.apply(rows_at(ds.features, ds.test_idx));
    const Eigen::VectorXi train_y = labels_at(ds.labels, ds.train_idx);
    const Eigen::VectorXi test_y = labels_at(ds.labels, ds.test_idx);

    MhOptions mh;
    mh.prior_var = o.prior_var;
    mh.proposal_scale = o.proposal_scale;
    mh.n_keep = o.keep;
    mh.thin = o.thin;
    mh.burn_in = o.burn_in;
    mh.seed = rng.derive(22).seed();
    const PosteriorChain chain = mh_sample(train, train_y, mh, bias);

    std::vector<int> grid = o.t_grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    const CompressResult comp =
        compress_posterior(chain, o.herd_sigma, grid.back(), rng.derive(23).seed());

    ErrorTrace herd_rmse{"herding", "predictive_rmse", o.seed, {}, {}};
    ErrorTrace rand_rmse{"random_mean", "predictive_rmse", o.seed, {}, {}};
    ErrorTrace herd_acc{"herding", "accuracy", o.seed, {}, {}};
    ErrorTrace rand_acc{"random_mean", "accuracy", o.seed, {}, {}};
    Rng boot_rng = rng.derive(24);
    Rng boot_acc_rng = rng.derive(25);
    for (int t : grid) {
      const Mat subset = comp.selected_thetas.topRows(t);
      herd_rmse.t.push_back(t);
      herd_rmse.err.push_back(predictive_rmse(subset, chain.thetas, test, bias));
      rand_rmse.t.push_back(t);
      rand_rmse.err.push_back(
          bootstrap_rmse(chain.thetas, test, t, o.subset_repeats, boot_rng, bias));
      herd_acc.t.push_back(t);
      herd_acc.err.push_back(accuracy(subset, test, test_y, bias));
      rand_acc.t.push_back(t);
      rand_acc.err.push_back(
          bootstrap_accuracy(chain.thetas, test, test_y, t, o.subset_repeats, boot_acc_rng, bias));
    }

    write_chain_csv(artifact_path(ctx, "chain.csv"), chain);
    write_chain_json(artifact_path(ctx, "chain.json"), chain);
    write_samples_csv(artifact_path(ctx, "herd_samples.csv"), comp.herd);
    write_traces_csv(artifact_path(ctx, "rmse_trace.csv"), {herd_rmse, rand_rmse});
    write_traces_csv(artifact_path(ctx, "accuracy_trace.csv"), {herd_acc, rand_acc});

    std::vector<NamedFit> fits;
    for (const auto* tr : {&herd_rmse, &rand_rmse}) {
      long usable = 0;
      for (int t : tr->t)
        if (t >= o.fit_t_min) ++usable;
      if (usable < 10) continue;
      try {
        fits.push_back({tr->estimator, tr->function, fit_rate(*tr, o.fit_t_min)});
      } catch (const DegenerateTrace&) {
      }
    }
    write_fits_json(artifact_path(ctx, "fits.json"), fits);

    json summary;
    summary["noise_floor"] = chain.thetas.rows() >= 2 ? noise_floor(chain.thetas, test, bias) : 0.0;
    summary["acceptance_rate"] = chain.acceptance_rate;
    summary["proposal_scale"] = chain.proposal_scale;
    summary["herd_sigma"] = comp.herd.sigma;
    summary["full_accuracy"] = accuracy(chain.thetas, test, test_y, bias);
    summary["retained_dim"] = feature_whiten.retained_dim;
    summary["n_train"] = n_train;
    summary["n_test"] = long(ds.test_idx.size());
    std::ofstream out(artifact_path(ctx, "summary.json"));
    out << summary.dump(2) << '\n';
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic super-samples: kernel herding against analytic or empirical "
               "targets, with evaluation and posterior-compression pipelines"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  GmHerdOpts gm_opts;
  EmpiricalHerdOpts emp_opts;
  CompareOpts cmp_opts;
  PosteriorOpts post_opts;

  json config;
  try {
    config = load_config(argc, argv);
    apply_config(config, gm_opts, "");
    apply_config(config, emp_opts, "");
    apply_config(config, cmp_opts, "");
    apply_config(config, post_opts, "");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  int rc = 0;

  auto* gm = app.add_subcommand("gm-herd", "Continuous herding against a Gaussian mixture");
  gm->add_option("--dim", gm_opts.dim, "Target dimension");
  gm->add_option("--components", gm_opts.components, "Mixture components");
  gm->add_option("--T", gm_opts.t_max, "Herding steps");
  gm->add_option("--sigma", gm_opts.sigma, "Kernel bandwidth; <= 0 uses the median heuristic");
  gm->add_option("--seed-candidates", gm_opts.seed_candidates, "Ascent starts per step");
  gm->add_option("--box-lo", gm_opts.box_lo, "Random-mixture mean box lower bound");
  gm->add_option("--box-hi", gm_opts.box_hi, "Random-mixture mean box upper bound");
  gm->add_option("--cov-scale", gm_opts.cov_scale, "Random-mixture covariance scale");
  gm->add_option("--target", gm_opts.target_file, "Mixture JSON to use instead of a random one");
  gm->add_option("--seed", gm_opts.seed, "Seed");
  gm->add_option("--out-dir", gm_opts.out_dir, "Artifact directory");
  gm->add_option("--config", gm_opts.config_file, "JSON config mirroring these flags");
  gm->callback([&] {
    apply_config(config, gm_opts, "gm-herd");
    rc = run_gm_herd(gm_opts);
  });

  auto* emp = app.add_subcommand("empirical-herd", "Discrete herding over CSV rows");
  emp->add_option("--input", emp_opts.input, "Sample matrix CSV");
  emp->add_option("--T", emp_opts.t_max, "Herding steps");
  emp->add_option("--sigma", emp_opts.sigma, "Kernel bandwidth; <= 0 uses the median heuristic");
  emp->add_option("--seed", emp_opts.seed, "Seed");
  emp->add_option("--out-dir", emp_opts.out_dir, "Artifact directory");
  emp->add_option("--config", emp_opts.config_file, "JSON config mirroring these flags");
  emp->callback([&] {
    apply_config(config, emp_opts, "empirical-herd");
    rc = run_empirical_herd(emp_opts);
  });

  auto* cmp = app.add_subcommand("compare", "Herding vs iid error traces and fitted rates");
  cmp->add_option("--dim", cmp_opts.dim, "Target dimension");
  cmp->add_option("--components", cmp_opts.components, "Mixture components");
  cmp->add_option("--t-lo", cmp_opts.t_lo, "Smallest grid T");
  cmp->add_option("--T", cmp_opts.t_max, "Largest grid T");
  cmp->add_option("--grid-points", cmp_opts.grid_points, "Log-spaced grid size");
  cmp->add_option("--functions", cmp_opts.functions,
                  "Comma-separated: moment1, moment2, moment3, sin_norm")
      ->delimiter(',');
  cmp->add_option("--iid-repeats", cmp_opts.iid_repeats, "Independent iid baselines");
  cmp->add_option("--sigma", cmp_opts.sigma, "Kernel bandwidth; <= 0 uses the median heuristic");
  cmp->add_option("--seed-candidates", cmp_opts.seed_candidates, "Ascent starts per step");
  cmp->add_option("--box-lo", cmp_opts.box_lo, "Random-mixture mean box lower bound");
  cmp->add_option("--box-hi", cmp_opts.box_hi, "Random-mixture mean box upper bound");
  cmp->add_option("--cov-scale", cmp_opts.cov_scale, "Random-mixture covariance scale");
  cmp->add_option("--mc-draws", cmp_opts.mc_draws, "Ground-truth draws for sin_norm");
  cmp->add_option("--fit-t-min", cmp_opts.fit_t_min, "Smallest T used in rate fits");
  cmp->add_flag("--large-mixture", cmp_opts.large_mixture,
                "5-D, 100-component configuration (overrides --dim/--components)");
  cmp->add_option("--seed", cmp_opts.seed, "Seed");
  cmp->add_option("--out-dir", cmp_opts.out_dir, "Artifact directory");
  cmp->add_option("--config", cmp_opts.config_file, "JSON config mirroring these flags");
  cmp->callback([&] {
    apply_config(config, cmp_opts, "compare");
    rc = run_compare(cmp_opts);
  });

  auto* post = app.add_subcommand(
      "posterior", "Whiten, MH-sample a logistic posterior, herd it, score vs bootstraps");
  post->add_flag("--synthetic", post_opts.synthetic, "Generate a logistic dataset");
  post->add_option("--data", post_opts.data_file, "Dataset CSV, last column the {0,1} label");
  post->add_option("--synth-n", post_opts.synth_n, "Synthetic rows");
  post->add_option("--synth-d", post_opts.synth_d, "Synthetic feature dimension");
  post->add_option("--n-train", post_opts.n_train,
                   "Training rows (default 2000 synthetic, 3000 from file)");
  post->add_option("--prior-var", post_opts.prior_var, "Gaussian prior variance");
  post->add_option("--proposal-scale", post_opts.proposal_scale,
                   "Random-walk step; < 0 tunes to acceptance in [0.2, 0.4]");
  post->add_option("--keep", post_opts.keep, "Kept posterior draws");
  post->add_option("--thin", post_opts.thin, "Keep every thin-th draw");
  post->add_option("--burn-in", post_opts.burn_in, "Discarded initial draws");
  post->add_option("--herd-sigma", post_opts.herd_sigma,
                   "Herding bandwidth on whitened draws; <= 0 uses the median heuristic");
  post->add_option("--T-grid", post_opts.t_grid, "Comma-separated subset sizes")->delimiter(',');
  post->add_option("--subset-repeats", post_opts.subset_repeats, "Bootstrap subsets per T");
  post->add_flag("--no-bias", post_opts.no_bias, "Drop the constant-1 feature");
  post->add_option("--fit-t-min", post_opts.fit_t_min, "Smallest T used in rate fits");
  post->add_option("--seed", post_opts.seed, "Seed");
  post->add_option("--out-dir", post_opts.out_dir, "Artifact directory");
  post->add_option("--config", post_opts.config_file, "JSON config mirroring these flags");
  post->callback([&] {
    apply_config(config, post_opts, "posterior");
    rc = run_posterior(post_opts);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return rc;
}
