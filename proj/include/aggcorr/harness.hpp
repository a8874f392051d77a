#pragma once

// Monte Carlo driver for the bias/robustness study.
//
// A scenario is an intra-correlation model combined with a noise setting.
// Replication `rep` of intra model `m` simulates from the seed
// split_seed(master_seed, {m, rep}); every noise setting of that model
// reuses the same unit-scale draws and only rescales the noise terms, so
// scenarios within a model are paired replication by replication. The
// sampler seed of method M in that replication is split_seed(rep_seed, {M}).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aggcorr/estimators.hpp"
#include "aggcorr/limits.hpp"
#include "aggcorr/model.hpp"

namespace aggcorr {

struct IntraModel {
  std::string name;
  double k_max = 300.0;
  double r_min = 0.9;
};

/// SNR in dB for the local and the global noise; nullopt means absent.
struct NoiseSetting {
  std::optional<double> snr_eps_db;
  std::optional<double> snr_e_db;

  /// "none", "local:<db>", "global:<db>" or "local:<db>+global:<db>".
  std::string label() const;
  static NoiseSetting parse(const std::string& text);
};

struct Scenario {
  std::string id;
  std::size_t model_index = 0;
  IntraModel intra;
  NoiseSetting noise;
};

struct ExperimentConfig {
  /// Regions, inter-correlation table, local-noise correlation and PSD
  /// policy. Intra function and noise scales are set per scenario.
  ModelParams base;
  int target_j = 0;
  int target_jp = 1;
  std::optional<int> donor_k = 2;
  std::optional<int> donor_kp = 3;

  std::vector<IntraModel> intra_models;
  std::vector<NoiseSetting> noise_settings;

  std::vector<Method> methods;
  int nu = 1;
  int delta = 1;
  int B = 100;

  int reps = 100;
  std::size_t T = 1000;
  std::uint64_t master_seed = 20160501;
  /// 0 keeps the OpenMP default.
  int threads = 0;
  bool boxplots = true;
};

/// The study grid: 20x20 and 40x40 targets (sigma 1 and 2, r = 0.6), two
/// 10x10 donors, Models 1 and 2, noise settings none / local 0, 10 dB /
/// global 0, 10 dB, the nine study methods, nu = 1, delta = 1, B = 100,
/// 100 replications of T = 1000.
ExperimentConfig default_experiment();

/// Regions laid out along the first axis, consecutive boxes `gap` apart.
/// shapes[j] has one entry per axis.
std::vector<RegionSpec> line_layout(const std::vector<std::vector<int>>& shapes, const std::vector<double>& sigmas,
                                    int gap);

std::vector<Scenario> scenarios(const ExperimentConfig& cfg);

/// Full model parameters for one scenario (noise scales from the SNRs).
ModelParams scenario_params(const ExperimentConfig& cfg, const Scenario& s);
EstimatorConfig method_config(const ExperimentConfig& cfg, Method m, std::uint64_t sampler_seed = 0);

void validate(const ExperimentConfig& cfg);

struct EstimateSummary {
  std::string scenario_id;
  std::string intra_model;
  NoiseSetting noise;
  Method method = Method::CA;
  double r = 0.0;
  std::vector<double> estimates;  // NaN where the replication failed
  std::vector<int> discarded;
  std::vector<std::string> errors;  // empty string on success
  double mean = 0.0;
  double sd = 0.0;
  double limit = 0.0;
  double bias_vs_r = 0.0;
  double bias_vs_limit = 0.0;
  int discarded_total = 0;
  int error_count = 0;

  /// Recomputes mean/sd/biases from the per-replication lists.
  void finalize();
};

/// One summary per (scenario, method), scenario-major in config order.
std::vector<EstimateSummary> run_experiment(const ExperimentConfig& cfg, Execution exec = Execution::parallel);

struct OutputFiles {
  std::filesystem::path estimates;
  std::filesystem::path summary;
  std::vector<std::filesystem::path> boxplots;
};

/// estimates.csv, summary.csv and (optionally) one boxplot_<scenario>.svg
/// per scenario. Throws std::runtime_error when a file cannot be written.
OutputFiles write_outputs(const std::vector<EstimateSummary>& summaries, const std::filesystem::path& dir,
                          bool boxplots = true);

std::string estimates_csv(const std::vector<EstimateSummary>& summaries);
std::string summary_csv(const std::vector<EstimateSummary>& summaries);
std::string boxplot_svg(const std::vector<EstimateSummary>& scenario_rows);

}  // namespace aggcorr
