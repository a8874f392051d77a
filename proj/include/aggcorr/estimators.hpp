#pragma once

// Inter-correlation estimators between two target regions j and j'.
//
// Draw-based methods (LCA, R, LR, D, LD, RD, LRD) average B independent
// draws. Draw b uses its own stream split_seed(sampler_seed, {b}) and
// samples, in this order: the j configuration, the j' configuration, then
// the donor k and donor k' configurations where the method uses donors.
// A configuration is a single voxel or nu-neighborhood drawn uniformly
// among admissible centers, or for replicate methods an axis-aligned pair
// of them whose voxel sets are delta apart (see sample_neighborhood_pair).
// Draws whose ratio is undefined are discarded; the sum over accepted
// draws always runs in ascending b.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "aggcorr/model.hpp"

namespace aggcorr {

enum class Method { CA, AC, ACt, LCA, R, LR, D, LD, RD, LRD };

/// The nine methods compared in the simulation study (ACt is omitted there
/// because it shares AC's limit).
inline constexpr std::array<Method, 9> kStudyMethods = {Method::CA, Method::AC, Method::LCA,
                                                        Method::R,  Method::LR, Method::D,
                                                        Method::LD, Method::RD, Method::LRD};

std::string_view method_name(Method m);
/// Accepts the names printed by method_name (case-insensitive).
Method parse_method(std::string_view name);
bool uses_donors(Method m);
bool uses_draws(Method m);
bool uses_replicates(Method m);
bool uses_neighborhoods(Method m);

struct EstimatorConfig {
  Method method = Method::CA;
  int target_j = 0;
  int target_jp = 1;
  std::optional<int> donor_k;
  std::optional<int> donor_kp;
  int nu = 1;
  int delta = 1;
  int B = 100;
  std::uint64_t sampler_seed = 0;
};

/// Checks the config against a layout; throws std::invalid_argument.
void validate(const EstimatorConfig& cfg, const ModelParams& params);

struct EstimateResult {
  double value = 0.0;
  int draws_used = 1;
  int discarded = 0;
};

class EstimationError : public std::runtime_error {
 public:
  explicit EstimationError(const std::string& what) : std::runtime_error(what) {}
};

EstimateResult estimate(const Dataset& data, const EstimatorConfig& cfg, Execution exec = Execution::parallel);

/// Correlation of the two region-average series.
EstimateResult est_ca(const Dataset& data, const EstimatorConfig& cfg);
/// Mean sample correlation over all N_j * N_j' voxel pairs, evaluated
/// through standardized column sums.
EstimateResult est_ac(const Dataset& data, const EstimatorConfig& cfg, Execution exec = Execution::parallel);
/// sqrt(mean within-j correlation * mean within-j' correlation) times the
/// CA estimate; shares the AC limit.
EstimateResult est_ac_tilde(const Dataset& data, const EstimatorConfig& cfg, Execution exec = Execution::parallel);
EstimateResult est_lca(const Dataset& data, const EstimatorConfig& cfg, Execution exec = Execution::parallel);
EstimateResult est_r(const Dataset& data, const EstimatorConfig& cfg, Execution exec = Execution::parallel);
EstimateResult est_lr(const Dataset& data, const EstimatorConfig& cfg, Execution exec = Execution::parallel);
EstimateResult est_d(const Dataset& data, const EstimatorConfig& cfg, Execution exec = Execution::parallel);
EstimateResult est_ld(const Dataset& data, const EstimatorConfig& cfg, Execution exec = Execution::parallel);
EstimateResult est_rd(const Dataset& data, const EstimatorConfig& cfg, Execution exec = Execution::parallel);
EstimateResult est_lrd(const Dataset& data, const EstimatorConfig& cfg, Execution exec = Execution::parallel);

}  // namespace aggcorr
