#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "aggcorr/harness.hpp"
#include "aggcorr/rng.hpp"

using namespace aggcorr;

namespace {

ExperimentConfig tiny() {
  ExperimentConfig cfg = default_experiment();
  cfg.base.regions = line_layout({{7, 7}, {9, 9}, {3, 3}, {3, 3}}, {1.0, 2.0, 1.0, 1.0}, 2);
  cfg.intra_models = {{"model2", 100.0, 0.6}};
  cfg.noise_settings = {NoiseSetting{}, NoiseSetting::parse("local:0")};
  cfg.reps = 4;
  cfg.T = 150;
  cfg.B = 20;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("aggcorr_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(NoiseSettingTest, LabelsRoundTrip) {
  for (const char* s : {"none", "local:0", "global:10", "local:-3.5+global:2"}) {
    EXPECT_EQ(NoiseSetting::parse(s).label(), s);
  }
  EXPECT_THROW(NoiseSetting::parse("loud:3"), std::invalid_argument);
  EXPECT_THROW(NoiseSetting::parse("local:x"), std::invalid_argument);
  EXPECT_THROW(NoiseSetting::parse("local"), std::invalid_argument);
}

TEST(Grid, DefaultExperiment) {
  const auto cfg = default_experiment();
  const auto s = scenarios(cfg);
  ASSERT_EQ(s.size(), 10u);
  EXPECT_EQ(s[0].id, "model1/none");
  EXPECT_EQ(s[1].id, "model1/local:0");
  EXPECT_EQ(s[9].id, "model2/global:10");
  EXPECT_EQ(cfg.methods.size(), 9u);
  EXPECT_EQ(cfg.reps, 100);
  EXPECT_EQ(cfg.T, 1000u);
  EXPECT_EQ(cfg.base.regions[0].voxel_count(), 400u);
  EXPECT_EQ(cfg.base.regions[1].voxel_count(), 1600u);
  const auto p = scenario_params(cfg, s[1]);
  EXPECT_DOUBLE_EQ(p.sigma_eps, 1.0);
  EXPECT_DOUBLE_EQ(p.sigma_e, 0.0);
  const auto q = scenario_params(cfg, s[4]);
  EXPECT_NEAR(q.sigma_e * q.sigma_e, 0.1, 1e-15);
  EXPECT_NO_THROW(validate(cfg));
}

TEST(Grid, Validation) {
  auto cfg = tiny();
  cfg.reps = 1;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg = tiny();
  cfg.nu = 5;
  cfg.methods = {Method::CA};
  EXPECT_NO_THROW(validate(cfg));
  cfg = tiny();
  cfg.donor_k.reset();
  EXPECT_THROW(validate(cfg), std::invalid_argument);
}

TEST(Experiment, TwoRepsOneMethod) {
  auto cfg = tiny();
  cfg.reps = 2;
  cfg.noise_settings = {NoiseSetting{}};
  cfg.methods = {Method::CA};
  const auto out = run_experiment(cfg);
  ASSERT_EQ(out.size(), 1u);
  ASSERT_EQ(out[0].estimates.size(), 2u);
  EXPECT_DOUBLE_EQ(out[0].mean, (out[0].estimates[0] + out[0].estimates[1]) / 2.0);
  EXPECT_EQ(out[0].bias_vs_limit, out[0].mean - out[0].limit);
  EXPECT_EQ(out[0].bias_vs_r, out[0].mean - 0.6);

  const auto dir = temp_dir("two_reps");
  const auto files = write_outputs(out, dir);
  const auto est = lines(slurp(files.estimates));
  ASSERT_EQ(est.size(), 3u);
  EXPECT_EQ(est[0], "scenario_id,intra_model,snr_eps_db,snr_e_db,method,rep,estimate,discarded");
  EXPECT_EQ(est[1].rfind("model2/none,model2,off,off,CA,1,", 0), 0u);
  const auto sum = lines(slurp(files.summary));
  ASSERT_EQ(sum.size(), 2u);
  EXPECT_EQ(sum[0],
            "scenario_id,intra_model,snr_eps_db,snr_e_db,method,reps,mean,sd,limit,bias_vs_r,bias_vs_limit,discarded,"
            "errors");
  ASSERT_EQ(files.boxplots.size(), 1u);
  EXPECT_NE(slurp(files.boxplots[0]).find("<svg"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(Experiment, SummaryRecomputableFromEstimates) {
  const auto out = run_experiment(tiny());
  ASSERT_EQ(out.size(), 2u * 9u);
  for (const auto& s : out) {
    ASSERT_EQ(s.estimates.size(), 4u);
    double m = 0.0;
    for (double x : s.estimates) m += x;
    m /= 4.0;
    double ss = 0.0;
    for (double x : s.estimates) ss += (x - m) * (x - m);
    EXPECT_NEAR(s.mean, m, 1e-15);
    EXPECT_NEAR(s.sd, std::sqrt(ss / 3.0), 1e-14);
    EXPECT_EQ(s.error_count, 0);
    EXPECT_TRUE(std::isfinite(s.limit));
  }
}

TEST(Experiment, EstimatesFollowDocumentedSeeds) {
  const auto cfg = tiny();
  const auto out = run_experiment(cfg);
  const auto s = scenarios(cfg);
  const std::uint64_t rep_seed = split_seed(cfg.master_seed, {0, 2});
  FieldSampler sampler(scenario_params(cfg, s[1]));
  const auto data = sampler.simulate(cfg.T, rep_seed);
  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    const Method method = cfg.methods[m];
    const auto ecfg = method_config(cfg, method, split_seed(rep_seed, {static_cast<std::uint64_t>(method)}));
    EXPECT_EQ(out[9 + m].estimates[2], estimate(data, ecfg).value) << method_name(method);
  }
}

TEST(Experiment, ThreadAndOrderInvariance) {
  auto cfg = tiny();
  cfg.threads = 1;
  const auto serial = estimates_csv(run_experiment(cfg, Execution::serial));
  cfg.threads = 3;
  const auto parallel = estimates_csv(run_experiment(cfg, Execution::parallel));
  EXPECT_EQ(serial, parallel);

  // Reversed noise order reproduces the same per-scenario estimates.
  auto rev = tiny();
  std::reverse(rev.noise_settings.begin(), rev.noise_settings.end());
  const auto a = run_experiment(tiny()), b = run_experiment(rev);
  for (const auto& x : a) {
    const auto it = std::find_if(b.begin(), b.end(), [&](const EstimateSummary& y) {
      return y.scenario_id == x.scenario_id && y.method == x.method;
    });
    ASSERT_NE(it, b.end());
    EXPECT_EQ(it->estimates, x.estimates);
  }
}

TEST(Experiment, ErrorsAreRecordedNotThrown) {
  auto cfg = tiny();
  cfg.intra_models = {{"bad", 100.0, 0.6}};
  cfg.base.inter_corr(0, 2) = cfg.base.inter_corr(2, 0) = 0.95;
  cfg.base.inter_corr(1, 2) = cfg.base.inter_corr(2, 1) = -0.95;
  cfg.base.psd_repair = PsdRepair::none;
  const auto out = run_experiment(cfg);
  for (const auto& s : out) {
    EXPECT_EQ(s.error_count, cfg.reps);
    EXPECT_TRUE(std::isnan(s.mean));
  }
  const auto csv = estimates_csv(out);
  EXPECT_NE(csv.find(",nan,"), std::string::npos);
}

TEST(Outputs, UnwritablePath) {
  const auto out = run_experiment(tiny());
  EXPECT_THROW(write_outputs(out, "/proc/aggcorr_cannot_write"), std::runtime_error);
  EXPECT_THROW(write_outputs({}, temp_dir("empty")), std::invalid_argument);
}
