#pragma once

// Almost-sure limits (T -> infinity) of every estimator under ModelParams.
//
// LimitForm::exact is obtained by substituting population moments into the
// estimator; LimitForm::printed reproduces the reference closed-form table,
// which differs from `exact` in three places:
//   LCA  the local-noise term reads sigma_e^2 * eta-bar_nu instead of
//        sigma_eps^2 * eta-bar_nu;
//   D/LD denominators carry 2 sigma_eps^2 (exact: sigma_eps^2, and for LD
//        sigma_j^2 rho-bar_nu + sigma_eps^2 eta-bar_nu), and the donor
//        numerator correction is +s_j s_k' r_jk' + s_j' s_k r_j'k
//        (exact: -s_j s_k' r_jk' - s_j' s_k r_j'k + s_k s_k' r_kk');
//   RD/LRD are r / rho_delta and r / rho-bar_{nu,delta}, i.e. they assume
//        disconnected donors.
// With disconnected donors and no noise both forms agree except for LD.

#include <optional>

#include "aggcorr/estimators.hpp"
#include "aggcorr/model.hpp"

namespace aggcorr {

enum class LimitForm { exact, printed };

struct LimitRequest {
  Method method = Method::CA;
  ModelParams params;
  int target_j = 0;
  int target_jp = 1;
  std::optional<int> donor_k;
  std::optional<int> donor_kp;
  int nu = 1;
  int delta = 1;
  LimitForm form = LimitForm::exact;

  static LimitRequest from(const EstimatorConfig& cfg, const ModelParams& params,
                           LimitForm form = LimitForm::exact);
};

/// Aggregated correlation sums entering the limits.
struct AggregateSums {
  double rho_bar_j = 1.0;         // over region j
  double rho_bar_jp = 1.0;        // over region j'
  double eta_bar_j = 1.0;
  double eta_bar_jp = 1.0;
  double rho_bar_nu = 1.0;        // over one nu-neighborhood
  double eta_bar_nu = 1.0;
  double rho_delta = 1.0;         // single pair at distance delta
  double rho_bar_nu_delta = 1.0;  // two nu-neighborhoods delta apart
};

AggregateSums aggregate_sums(const LimitRequest& req);

double limit_of(const LimitRequest& req);

/// The two competing closed forms for the D limit with disconnected donors:
/// sigma_j sigma_j' r / sqrt((sigma_j^2 + c sigma_eps^2)(sigma_j'^2 + c sigma_eps^2))
/// with c = 1 (moment algebra) and c = 2 (reference table).
struct DLimitCandidates {
  double single_noise = 0.0;
  double double_noise = 0.0;
};
DLimitCandidates d_limit_candidates(double sigma_j, double sigma_jp, double r, double sigma_eps2);

}  // namespace aggcorr
