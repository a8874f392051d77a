#include "aggcorr/harness.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "aggcorr/rng.hpp"

namespace aggcorr {

namespace {

std::string format_db(double db) { return fmt::format("{:g}", db); }

}  // namespace

std::string NoiseSetting::label() const {
  if (!snr_eps_db && !snr_e_db) return "none";
  std::string out;
  if (snr_eps_db) out += "local:" + format_db(*snr_eps_db);
  if (snr_e_db) out += (out.empty() ? "" : "+") + std::string("global:") + format_db(*snr_e_db);
  return out;
}

NoiseSetting NoiseSetting::parse(const std::string& text) {
  NoiseSetting n;
  if (text == "none") return n;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto plus = text.find('+', start);
    const std::string part = text.substr(start, plus == std::string::npos ? std::string::npos : plus - start);
    const auto colon = part.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("noise setting '" + text + "': expected kind:dB");
    const std::string kind = part.substr(0, colon);
    double db = 0.0;
    try {
      std::size_t used = 0;
      db = std::stod(part.substr(colon + 1), &used);
      if (used != part.size() - colon - 1) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw std::invalid_argument("noise setting '" + text + "': bad dB value");
    }
    if (kind == "local") {
      n.snr_eps_db = db;
    } else if (kind == "global") {
      n.snr_e_db = db;
    } else {
      throw std::invalid_argument("noise setting '" + text + "': kind must be local or global");
    }
    if (plus == std::string::npos) break;
    start = plus + 1;
  }
  return n;
}

std::vector<RegionSpec> line_layout(const std::vector<std::vector<int>>& shapes, const std::vector<double>& sigmas,
                                    int gap) {
  if (shapes.size() != sigmas.size()) throw std::invalid_argument("layout: one sigma per region is required");
  if (gap < 1) throw std::invalid_argument("layout: gap must be >= 1");
  std::vector<RegionSpec> out;
  int next_x = 0;
  for (std::size_t j = 0; j < shapes.size(); ++j) {
    const auto& shape = shapes[j];
    if (shape.empty() || shape.size() > kMaxDim) throw std::invalid_argument("layout: shapes need 1 to 3 sides");
    RegionSpec r;
    r.id = static_cast<int>(j);
    r.box.origin.dim = static_cast<int>(shape.size());
    r.box.origin.coords = {0, 0, 0};
    r.box.origin[0] = next_x;
    for (std::size_t c = 0; c < shape.size(); ++c) r.box.shape[c] = shape[c];
    r.sigma = sigmas[j];
    validate(r);
    next_x = r.box.upper(0) + gap;
    out.push_back(r);
  }
  return out;
}

ExperimentConfig default_experiment() {
  ExperimentConfig cfg;
  cfg.base.regions = line_layout({{20, 20}, {40, 40}, {10, 10}, {10, 10}}, {1.0, 2.0, 1.0, 1.0}, 2);
  cfg.base.inter_corr = Eigen::MatrixXd::Identity(4, 4);
  cfg.base.inter_corr(0, 1) = cfg.base.inter_corr(1, 0) = 0.6;
  cfg.base.noise_corr = CorrelationFunction::white();
  cfg.base.psd_repair = PsdRepair::project;
  cfg.intra_models = {{"model1", 300.0, 0.9}, {"model2", 100.0, 0.6}};
  cfg.noise_settings = {NoiseSetting{}, NoiseSetting{0.0, std::nullopt}, NoiseSetting{10.0, std::nullopt},
                        NoiseSetting{std::nullopt, 0.0}, NoiseSetting{std::nullopt, 10.0}};
  cfg.methods.assign(kStudyMethods.begin(), kStudyMethods.end());
  return cfg;
}

std::vector<Scenario> scenarios(const ExperimentConfig& cfg) {
  std::vector<Scenario> out;
  for (std::size_t m = 0; m < cfg.intra_models.size(); ++m) {
    for (const auto& n : cfg.noise_settings) {
      out.push_back({cfg.intra_models[m].name + "/" + n.label(), m, cfg.intra_models[m], n});
    }
  }
  return out;
}

ModelParams scenario_params(const ExperimentConfig& cfg, const Scenario& s) {
  ModelParams p = cfg.base;
  p.intra = CorrelationFunction::intra(s.intra.k_max, s.intra.r_min);
  p.sigma_eps = s.noise.snr_eps_db
                    ? std::sqrt(noise_variance_from_snr(*s.noise.snr_eps_db, p, cfg.target_j, cfg.target_jp))
                    : 0.0;
  p.sigma_e = s.noise.snr_e_db ? std::sqrt(noise_variance_from_snr(*s.noise.snr_e_db, p, cfg.target_j, cfg.target_jp))
                               : 0.0;
  return p;
}

EstimatorConfig method_config(const ExperimentConfig& cfg, Method m, std::uint64_t sampler_seed) {
  EstimatorConfig e;
  e.method = m;
  e.target_j = cfg.target_j;
  e.target_jp = cfg.target_jp;
  if (uses_donors(m)) {
    e.donor_k = cfg.donor_k;
    e.donor_kp = cfg.donor_kp;
  }
  e.nu = cfg.nu;
  e.delta = cfg.delta;
  e.B = cfg.B;
  e.sampler_seed = sampler_seed;
  return e;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.reps < 2) throw std::invalid_argument("experiment: reps must be >= 2");
  if (cfg.T < 2) throw std::invalid_argument("experiment: T must be >= 2");
  if (cfg.intra_models.empty()) throw std::invalid_argument("experiment: no intra-correlation models");
  if (cfg.noise_settings.empty()) throw std::invalid_argument("experiment: no noise settings");
  if (cfg.methods.empty()) throw std::invalid_argument("experiment: no methods");
  for (const auto& s : scenarios(cfg)) {
    const auto params = scenario_params(cfg, s);
    validate(params);
    for (Method m : cfg.methods) validate(method_config(cfg, m), params);
  }
}

void EstimateSummary::finalize() {
  double sum = 0.0;
  int n = 0;
  discarded_total = 0;
  error_count = 0;
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    if (!errors[k].empty()) {
      ++error_count;
      continue;
    }
    sum += estimates[k];
    discarded_total += discarded[k];
    ++n;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  mean = n > 0 ? sum / n : nan;
  double ss = 0.0;
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    if (errors[k].empty()) ss += (estimates[k] - mean) * (estimates[k] - mean);
  }
  sd = n > 1 ? std::sqrt(ss / (n - 1)) : nan;
  bias_vs_r = mean - r;
  bias_vs_limit = mean - limit;
}

std::vector<EstimateSummary> run_experiment(const ExperimentConfig& cfg, Execution exec) {
  validate(cfg);
  const auto scen = scenarios(cfg);
  const std::size_t n_noise = cfg.noise_settings.size();
  const std::size_t n_methods = cfg.methods.size();
  const auto reps = static_cast<std::size_t>(cfg.reps);

  std::vector<EstimateSummary> out;
  for (const auto& s : scen) {
    const auto params = scenario_params(cfg, s);
    for (Method m : cfg.methods) {
      EstimateSummary sum;
      sum.scenario_id = s.id;
      sum.intra_model = s.intra.name;
      sum.noise = s.noise;
      sum.method = m;
      sum.r = params.inter_corr(cfg.target_j, cfg.target_jp);
      sum.estimates.assign(reps, std::numeric_limits<double>::quiet_NaN());
      sum.discarded.assign(reps, 0);
      sum.errors.assign(reps, std::string());
      try {
        sum.limit = limit_of(LimitRequest::from(method_config(cfg, m), params));
      } catch (const std::exception&) {
        sum.limit = std::numeric_limits<double>::quiet_NaN();
      }
      out.push_back(std::move(sum));
    }
  }
  const auto slot = [&](std::size_t model, std::size_t noise, std::size_t method) -> EstimateSummary& {
    return out[(model * n_noise + noise) * n_methods + method];
  };

  for (std::size_t model = 0; model < cfg.intra_models.size(); ++model) {
    const Scenario& first = scen[model * n_noise];
    std::unique_ptr<FieldSampler> sampler;
    std::string setup_error;
    try {
      sampler = std::make_unique<FieldSampler>(scenario_params(cfg, first));
    } catch (const std::exception& e) {
      setup_error = e.what();
    }
    std::vector<double> sigma_eps(n_noise), sigma_e(n_noise);
    for (std::size_t k = 0; k < n_noise; ++k) {
      const auto p = scenario_params(cfg, scen[model * n_noise + k]);
      sigma_eps[k] = p.sigma_eps;
      sigma_e[k] = p.sigma_e;
    }

    const auto run_rep = [&](std::size_t rep) {
      if (!sampler) {
        for (std::size_t k = 0; k < n_noise; ++k) {
          for (std::size_t m = 0; m < n_methods; ++m) slot(model, k, m).errors[rep] = setup_error;
        }
        return;
      }
      const std::uint64_t rep_seed = split_seed(cfg.master_seed, {model, rep});
      FieldComponents comp;
      try {
        comp = sampler->draw(cfg.T, rep_seed, Execution::serial);
      } catch (const std::exception& e) {
        for (std::size_t k = 0; k < n_noise; ++k) {
          for (std::size_t m = 0; m < n_methods; ++m) slot(model, k, m).errors[rep] = e.what();
        }
        return;
      }
      for (std::size_t k = 0; k < n_noise; ++k) {
        const Dataset data = sampler->compose(comp, sigma_eps[k], sigma_e[k]);
        for (std::size_t m = 0; m < n_methods; ++m) {
          auto& sum = slot(model, k, m);
          const Method method = cfg.methods[m];
          try {
            const auto est = estimate(
                data, method_config(cfg, method, split_seed(rep_seed, {static_cast<std::uint64_t>(method)})),
                Execution::serial);
            sum.estimates[rep] = est.value;
            sum.discarded[rep] = est.discarded;
          } catch (const std::exception& e) {
            sum.errors[rep] = e.what();
          }
        }
      }
    };

    if (exec == Execution::serial) {
      for (std::size_t rep = 0; rep < reps; ++rep) run_rep(rep);
    } else {
      const int threads = cfg.threads > 0 ? cfg.threads : 0;
      if (threads > 0) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
        for (std::size_t rep = 0; rep < reps; ++rep) run_rep(rep);
      } else {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::size_t rep = 0; rep < reps; ++rep) run_rep(rep);
      }
    }
  }

  for (auto& s : out) s.finalize();
  return out;
}

}  // namespace aggcorr
