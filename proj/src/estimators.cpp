#include "aggcorr/estimators.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <vector>

#include "aggcorr/kernels.hpp"
#include "aggcorr/rng.hpp"
#include "aggcorr/stats.hpp"

namespace aggcorr {

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 10> kNames = {{{Method::CA, "CA"},
                                                                          {Method::AC, "AC"},
                                                                          {Method::ACt, "ACt"},
                                                                          {Method::LCA, "LCA"},
                                                                          {Method::R, "R"},
                                                                          {Method::LR, "LR"},
                                                                          {Method::D, "D"},
                                                                          {Method::LD, "LD"},
                                                                          {Method::RD, "RD"},
                                                                          {Method::LRD, "LRD"}}};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::string_view method_name(Method m) {
  for (auto [id, name] : kNames) {
    if (id == m) return name;
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (auto [id, n] : kNames) {
    if (iequals(n, name)) return id;
  }
  throw std::invalid_argument(fmt::format("unknown method '{}'", name));
}

bool uses_donors(Method m) {
  return m == Method::D || m == Method::LD || m == Method::RD || m == Method::LRD;
}

bool uses_draws(Method m) { return m != Method::CA && m != Method::AC && m != Method::ACt; }

bool uses_replicates(Method m) {
  return m == Method::R || m == Method::LR || m == Method::RD || m == Method::LRD;
}

bool uses_neighborhoods(Method m) {
  return m == Method::LCA || m == Method::LR || m == Method::LD || m == Method::LRD;
}

void validate(const EstimatorConfig& cfg, const ModelParams& params) {
  const int J = static_cast<int>(params.regions.size());
  const auto exists = [&](int r) { return r >= 0 && r < J; };
  if (!exists(cfg.target_j) || !exists(cfg.target_jp)) throw std::invalid_argument("estimator: unknown target region");
  if (cfg.target_j == cfg.target_jp) throw std::invalid_argument("estimator: targets must differ");
  if (uses_donors(cfg.method)) {
    if (!cfg.donor_k || !cfg.donor_kp) {
      throw std::invalid_argument(fmt::format("estimator {}: donor regions k and k' are required",
                                              method_name(cfg.method)));
    }
    const int k = *cfg.donor_k, kp = *cfg.donor_kp;
    if (!exists(k) || !exists(kp)) throw std::invalid_argument("estimator: unknown donor region");
    if (k == kp || k == cfg.target_j || k == cfg.target_jp || kp == cfg.target_j || kp == cfg.target_jp) {
      throw std::invalid_argument("estimator: donors must be distinct from the targets and from each other");
    }
  } else if (cfg.donor_k || cfg.donor_kp) {
    throw std::invalid_argument(fmt::format("estimator {}: takes no donor regions", method_name(cfg.method)));
  }
  if (cfg.nu < 0) throw std::invalid_argument("estimator: nu must be >= 0");
  if (cfg.delta < 1) throw std::invalid_argument("estimator: delta must be >= 1");
  if (cfg.delta < params.noise_support()) {
    throw std::invalid_argument(fmt::format("estimator: delta={} is below the local-noise support p={}", cfg.delta,
                                            params.noise_support()));
  }
  if (cfg.B < 1) throw std::invalid_argument("estimator: B must be >= 1");
}

namespace {

class Units {
 public:
  explicit Units(const Dataset& data) : data_(data), offsets_(data.params.region_offsets()) {}

  std::vector<double> average(const Neighborhood& nb) const {
    const auto& region = data_.params.regions.at(static_cast<std::size_t>(nb.region_id));
    const auto begin = offsets_[static_cast<std::size_t>(nb.region_id)];
    std::vector<double> out(data_.T, 0.0);
    const auto voxels = nb.voxels();
    for (const auto& v : voxels) {
      const auto col = data_.series.col(static_cast<Eigen::Index>(begin + region.local_index(v)));
      for (std::size_t t = 0; t < data_.T; ++t) out[t] += col(static_cast<Eigen::Index>(t));
    }
    const double inv = 1.0 / static_cast<double>(voxels.size());
    for (double& x : out) x *= inv;
    return out;
  }

  std::vector<double> region_average(int region) const {
    const auto b = static_cast<Eigen::Index>(offsets_[static_cast<std::size_t>(region)]);
    const auto n = static_cast<Eigen::Index>(data_.params.regions.at(static_cast<std::size_t>(region)).voxel_count());
    Eigen::VectorXd m = data_.series.middleCols(b, n).rowwise().mean();
    return {m.data(), m.data() + m.size()};
  }

  const RegionSpec& region(int id) const { return data_.params.regions.at(static_cast<std::size_t>(id)); }
  std::size_t begin(int id) const { return offsets_[static_cast<std::size_t>(id)]; }
  std::size_t end(int id) const { return offsets_[static_cast<std::size_t>(id) + 1]; }

 private:
  const Dataset& data_;
  std::vector<std::size_t> offsets_;
};

// Unit series of a pair of replicates.
struct Replicates {
  std::vector<double> first, second;
};

Replicates draw_replicates(const Units& u, int region, int nu, int delta, Rng& rng) {
  const auto pair = sample_neighborhood_pair(u.region(region), nu, delta, rng);
  return {u.average(pair.first), u.average(pair.second)};
}

std::vector<double> draw_unit(const Units& u, int region, int nu, Rng& rng) {
  return u.average(sample_neighborhood(u.region(region), nu, rng));
}

using Draw = std::function<std::optional<double>(Rng&)>;

EstimateResult average_draws(const EstimatorConfig& cfg, const Draw& draw, Execution exec) {
  const int B = cfg.B;
  std::vector<std::optional<double>> values(static_cast<std::size_t>(B));
  std::vector<std::string> errors(static_cast<std::size_t>(B));
  const auto one = [&](int b) {
    Rng rng(split_seed(cfg.sampler_seed, {static_cast<std::uint64_t>(b)}));
    try {
      values[static_cast<std::size_t>(b)] = draw(rng);
    } catch (const DegenerateSeries&) {
      values[static_cast<std::size_t>(b)] = std::nullopt;
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(b)] = e.what();
    }
  };
  if (exec == Execution::serial) {
    for (int b = 0; b < B; ++b) one(b);
  } else {
#pragma omp parallel for schedule(static)
    for (int b = 0; b < B; ++b) one(b);
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw std::invalid_argument(e);
  }

  EstimateResult res;
  res.draws_used = 0;
  double sum = 0.0;
  for (const auto& v : values) {
    if (v && std::isfinite(*v)) {
      sum += *v;
      ++res.draws_used;
    }
  }
  res.discarded = B - res.draws_used;
  if (res.draws_used == 0) {
    throw EstimationError(fmt::format("estimator {}: all {} draws discarded", method_name(cfg.method), B));
  }
  res.value = sum / res.draws_used;
  return res;
}

// Mean of the four cross terms over the square root of the within-pair
// product; nullopt when the product is not positive.
std::optional<double> replicate_ratio(double cross_sum, double within_j, double within_jp) {
  const double prod = within_j * within_jp;
  if (!(prod > 0.0)) return std::nullopt;
  return 0.25 * cross_sum / std::sqrt(prod);
}

EstimateResult replicate_estimate(const Dataset& data, const EstimatorConfig& cfg, int nu, Execution exec) {
  validate(cfg, data.params);
  const Units u(data);
  return average_draws(
      cfg,
      [&](Rng& rng) -> std::optional<double> {
        const auto a = draw_replicates(u, cfg.target_j, nu, cfg.delta, rng);
        const auto b = draw_replicates(u, cfg.target_jp, nu, cfg.delta, rng);
        const double cross = sample_cor(a.first, b.first) + sample_cor(a.first, b.second) +
                             sample_cor(a.second, b.first) + sample_cor(a.second, b.second);
        return replicate_ratio(cross, sample_cor(a.first, a.second), sample_cor(b.first, b.second));
      },
      exec);
}

EstimateResult difference_estimate(const Dataset& data, const EstimatorConfig& cfg, int nu, Execution exec) {
  validate(cfg, data.params);
  const Units u(data);
  return average_draws(
      cfg,
      [&](Rng& rng) -> std::optional<double> {
        const auto yj = draw_unit(u, cfg.target_j, nu, rng);
        const auto yjp = draw_unit(u, cfg.target_jp, nu, rng);
        const auto yk = draw_unit(u, *cfg.donor_k, nu, rng);
        const auto ykp = draw_unit(u, *cfg.donor_kp, nu, rng);
        return cor_tilde(yj, yjp, yk, ykp);
      },
      exec);
}

EstimateResult replicate_difference_estimate(const Dataset& data, const EstimatorConfig& cfg, int nu,
                                             Execution exec) {
  validate(cfg, data.params);
  const Units u(data);
  return average_draws(
      cfg,
      [&](Rng& rng) -> std::optional<double> {
        const auto a = draw_replicates(u, cfg.target_j, nu, cfg.delta, rng);
        const auto b = draw_replicates(u, cfg.target_jp, nu, cfg.delta, rng);
        const auto yk = draw_unit(u, *cfg.donor_k, nu, rng);
        const auto ykp = draw_unit(u, *cfg.donor_kp, nu, rng);
        const double cross = cor_tilde(a.first, b.first, yk, ykp) + cor_tilde(a.first, b.second, yk, ykp) +
                             cor_tilde(a.second, b.first, yk, ykp) + cor_tilde(a.second, b.second, yk, ykp);
        return replicate_ratio(cross, cor_tilde(a.first, a.second, yk, ykp), cor_tilde(b.first, b.second, yk, ykp));
      },
      exec);
}

}  // namespace

EstimateResult est_ca(const Dataset& data, const EstimatorConfig& cfg) {
  validate(cfg, data.params);
  const Units u(data);
  return {sample_cor(u.region_average(cfg.target_j), u.region_average(cfg.target_jp)), 1, 0};
}

EstimateResult est_ac(const Dataset& data, const EstimatorConfig& cfg, Execution exec) {
  validate(cfg, data.params);
  const Units u(data);
  const auto sj = kernels::standardized_sum(data.series, u.begin(cfg.target_j), u.end(cfg.target_j), exec);
  const auto sjp = kernels::standardized_sum(data.series, u.begin(cfg.target_jp), u.end(cfg.target_jp), exec);
  const double nj = static_cast<double>(u.end(cfg.target_j) - u.begin(cfg.target_j));
  const double njp = static_cast<double>(u.end(cfg.target_jp) - u.begin(cfg.target_jp));
  return {sj.dot(sjp) / (nj * njp), 1, 0};
}

EstimateResult est_ac_tilde(const Dataset& data, const EstimatorConfig& cfg, Execution exec) {
  validate(cfg, data.params);
  const Units u(data);
  const auto sj = kernels::standardized_sum(data.series, u.begin(cfg.target_j), u.end(cfg.target_j), exec);
  const auto sjp = kernels::standardized_sum(data.series, u.begin(cfg.target_jp), u.end(cfg.target_jp), exec);
  const double nj = static_cast<double>(u.end(cfg.target_j) - u.begin(cfg.target_j));
  const double njp = static_cast<double>(u.end(cfg.target_jp) - u.begin(cfg.target_jp));
  // ||S_j||^2 is the sum of all within-j pairwise correlations.
  const double within = sj.norm() * sjp.norm() / (nj * njp);
  return {within * est_ca(data, cfg).value, 1, 0};
}

EstimateResult est_lca(const Dataset& data, const EstimatorConfig& cfg, Execution exec) {
  validate(cfg, data.params);
  const Units u(data);
  return average_draws(
      cfg,
      [&](Rng& rng) -> std::optional<double> {
        const auto a = draw_unit(u, cfg.target_j, cfg.nu, rng);
        const auto b = draw_unit(u, cfg.target_jp, cfg.nu, rng);
        return sample_cor(a, b);
      },
      exec);
}

EstimateResult est_r(const Dataset& data, const EstimatorConfig& cfg, Execution exec) {
  return replicate_estimate(data, cfg, 0, exec);
}

EstimateResult est_lr(const Dataset& data, const EstimatorConfig& cfg, Execution exec) {
  return replicate_estimate(data, cfg, cfg.nu, exec);
}

EstimateResult est_d(const Dataset& data, const EstimatorConfig& cfg, Execution exec) {
  return difference_estimate(data, cfg, 0, exec);
}

EstimateResult est_ld(const Dataset& data, const EstimatorConfig& cfg, Execution exec) {
  return difference_estimate(data, cfg, cfg.nu, exec);
}

EstimateResult est_rd(const Dataset& data, const EstimatorConfig& cfg, Execution exec) {
  return replicate_difference_estimate(data, cfg, 0, exec);
}

EstimateResult est_lrd(const Dataset& data, const EstimatorConfig& cfg, Execution exec) {
  return replicate_difference_estimate(data, cfg, cfg.nu, exec);
}

EstimateResult estimate(const Dataset& data, const EstimatorConfig& cfg, Execution exec) {
  switch (cfg.method) {
    case Method::CA: return est_ca(data, cfg);
    case Method::AC: return est_ac(data, cfg, exec);
    case Method::ACt: return est_ac_tilde(data, cfg, exec);
    case Method::LCA: return est_lca(data, cfg, exec);
    case Method::R: return est_r(data, cfg, exec);
    case Method::LR: return est_lr(data, cfg, exec);
    case Method::D: return est_d(data, cfg, exec);
    case Method::LD: return est_ld(data, cfg, exec);
    case Method::RD: return est_rd(data, cfg, exec);
    case Method::LRD: return est_lrd(data, cfg, exec);
  }
  throw std::invalid_argument("unknown method");
}

}  // namespace aggcorr
