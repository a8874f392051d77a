#include <fmt/format.h>
#include <fmt/ranges.h>

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>

#include "aggcorr/config.hpp"
#include "aggcorr/dataset_io.hpp"
#include "aggcorr/harness.hpp"
#include "aggcorr/limits.hpp"
#include "aggcorr/rng.hpp"

using namespace aggcorr;

namespace {

ExperimentConfig load(const std::string& path) { return path.empty() ? default_experiment() : load_experiment_config(path); }

int run_simulate(const std::string& config, const std::string& model, const std::string& noise,
                 std::optional<std::size_t> T, std::optional<std::uint64_t> seed, const std::string& out) {
  auto cfg = load(config);
  if (T) cfg.T = *T;
  if (seed) cfg.master_seed = *seed;
  const IntraModel* intra = model.empty() ? &cfg.intra_models.front() : nullptr;
  for (const auto& m : cfg.intra_models) {
    if (m.name == model) intra = &m;
  }
  if (!intra) throw std::invalid_argument(fmt::format("no intra model named '{}' in the config", model));
  const auto n = NoiseSetting::parse(noise);
  const Scenario s{intra->name + "/" + n.label(), 0, *intra, n};
  const auto params = scenario_params(cfg, s);
  FieldSampler sampler(params);
  for (const auto& r : sampler.repairs()) {
    fmt::print(stderr, "note: signal covariance of regions {} projected to PSD (min eigenvalue {:.4g}, max change {:.3g})\n",
               fmt::join(r.regions, ","), r.min_eigenvalue, r.max_abs_change);
  }
  const Dataset data = sampler.simulate(cfg.T, cfg.master_seed);
  std::filesystem::path path = out;
  if (path.empty()) path = "dataset.csv";
  if (std::filesystem::is_directory(path) || path.extension() != ".csv") {
    std::filesystem::create_directories(path);
    path /= "dataset.csv";
  }
  write_dataset(path, data);
  fmt::print("{} ({} voxels x T={}, seed {}, scenario {})\n", path.string(), data.voxel_count(), data.T, data.seed,
             s.id);
  return 0;
}

int run_estimate(const std::string& config, const std::string& data_path, const std::vector<std::string>& methods,
                 std::optional<std::uint64_t> seed, bool serial) {
  const auto cfg = load(config);
  const Dataset data = read_dataset(data_path);
  std::vector<Method> list;
  for (const auto& m : methods) {
    if (m == "all") {
      list.assign(kStudyMethods.begin(), kStudyMethods.end());
    } else {
      list.push_back(parse_method(m));
    }
  }
  const std::uint64_t base = seed ? *seed : cfg.master_seed;
  fmt::print("method,estimate,draws_used,discarded\n");
  int status = 0;
  for (Method m : list) {
    const auto ecfg = method_config(cfg, m, split_seed(base, {static_cast<std::uint64_t>(m)}));
    try {
      const auto r = estimate(data, ecfg, serial ? Execution::serial : Execution::parallel);
      fmt::print("{},{:.17g},{},{}\n", method_name(m), r.value, r.draws_used, r.discarded);
    } catch (const std::exception& e) {
      fmt::print(stderr, "{}: {}\n", method_name(m), e.what());
      status = 1;
    }
  }
  return status;
}

int run_limits(const std::string& config) {
  const auto cfg = load(config);
  fmt::print("scenario_id,method,limit,limit_printed\n");
  for (const auto& s : scenarios(cfg)) {
    const auto params = scenario_params(cfg, s);
    for (Method m : cfg.methods) {
      const auto ecfg = method_config(cfg, m);
      fmt::print("{},{},{:.10f},{:.10f}\n", s.id, method_name(m), limit_of(LimitRequest::from(ecfg, params)),
                 limit_of(LimitRequest::from(ecfg, params, LimitForm::printed)));
    }
  }
  return 0;
}

int run_experiment_cmd(const std::string& config, const std::string& out, std::optional<int> reps,
                       std::optional<std::size_t> T, std::optional<std::uint64_t> seed, bool full,
                       std::optional<int> threads, bool no_boxplots, bool serial) {
  auto cfg = load(config);
  if (full) cfg.reps = 500;
  if (reps) cfg.reps = *reps;
  if (T) cfg.T = *T;
  if (seed) cfg.master_seed = *seed;
  if (threads) cfg.threads = *threads;
  if (no_boxplots) cfg.boxplots = false;

  const auto start = std::chrono::steady_clock::now();
  const auto summaries = run_experiment(cfg, serial ? Execution::serial : Execution::parallel);
  const auto files = write_outputs(summaries, out, cfg.boxplots);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  int errors = 0;
  fmt::print("{:<22} {:<4} {:>9} {:>9} {:>9} {:>10}\n", "scenario", "meth", "mean", "sd", "limit", "bias_lim");
  for (const auto& s : summaries) {
    fmt::print("{:<22} {:<4} {:>9.4f} {:>9.4f} {:>9.4f} {:>+10.4f}{}\n", s.scenario_id, method_name(s.method), s.mean,
               s.sd, s.limit, s.bias_vs_limit, s.error_count ? fmt::format("  ({} errors)", s.error_count) : "");
    errors += s.error_count;
  }
  fmt::print("{} reps x T={} in {:.1f}s; wrote {} and {}", cfg.reps, cfg.T, secs, files.estimates.string(),
             files.summary.string());
  if (!files.boxplots.empty()) fmt::print(" and {} boxplots", files.boxplots.size());
  fmt::print("\n");
  if (errors) fmt::print(stderr, "{} replication errors recorded in the summary\n", errors);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inter-region correlation estimators under spatially correlated noise"};
  app.require_subcommand(1);

  std::string config, out, model, noise = "none", data;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> T;
  std::optional<int> reps, threads;
  std::vector<std::string> methods;
  bool full = false, no_boxplots = false, serial = false;

  auto* sim = app.add_subcommand("simulate", "Simulate one dataset and write it as a panel CSV");
  sim->add_option("--config", config, "Experiment config (INI)")->check(CLI::ExistingFile);
  sim->add_option("--model", model, "Intra-correlation model name (default: first in config)");
  sim->add_option("--noise", noise, "none, local:<dB>, global:<dB> or local:<dB>+global:<dB>");
  sim->add_option("--T", T, "Series length");
  sim->add_option("--seed", seed, "Simulation seed");
  sim->add_option("--out", out, "Output directory or .csv path");

  auto* est = app.add_subcommand("estimate", "Run estimators on a dataset file");
  est->add_option("--data", data, "Dataset file written by simulate")->required()->check(CLI::ExistingFile);
  est->add_option("--method", methods, "Method name(s) or 'all'")->required();
  est->add_option("--config", config, "Config providing targets, donors, nu, delta and B")->check(CLI::ExistingFile);
  est->add_option("--seed", seed, "Sampler seed");
  est->add_flag("--serial", serial, "Disable OpenMP draw averaging");

  auto* lim = app.add_subcommand("limits", "Print every limit for the configured grid");
  lim->add_option("--config", config, "Experiment config (INI)")->check(CLI::ExistingFile);

  auto* exp = app.add_subcommand("experiment", "Run the full Monte Carlo grid");
  exp->add_option("--config", config, "Experiment config (INI)")->check(CLI::ExistingFile);
  exp->add_option("--out", out, "Output directory")->default_val("results");
  exp->add_option("--reps", reps, "Replications per scenario");
  exp->add_option("--T", T, "Series length");
  exp->add_option("--seed", seed, "Master seed");
  exp->add_flag("--full", full, "500 replications");
  exp->add_option("--threads", threads, "OpenMP threads (0 = default)");
  exp->add_flag("--no-boxplots", no_boxplots, "Skip SVG boxplots");
  exp->add_flag("--serial", serial, "Run replications serially");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return run_simulate(config, model, noise, T, seed, out);
    if (*est) return run_estimate(config, data, methods, seed, serial);
    if (*lim) return run_limits(config);
    if (*exp) return run_experiment_cmd(config, out, reps, T, seed, full, threads, no_boxplots, serial);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
