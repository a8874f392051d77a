#include "aggcorr/limits.hpp"

#include <cmath>
#include <stdexcept>

namespace aggcorr {

LimitRequest LimitRequest::from(const EstimatorConfig& cfg, const ModelParams& params, LimitForm form) {
  LimitRequest req;
  req.method = cfg.method;
  req.params = params;
  req.target_j = cfg.target_j;
  req.target_jp = cfg.target_jp;
  req.donor_k = cfg.donor_k;
  req.donor_kp = cfg.donor_kp;
  req.nu = cfg.nu;
  req.delta = cfg.delta;
  req.form = form;
  return req;
}

AggregateSums aggregate_sums(const LimitRequest& req) {
  const auto& p = req.params;
  const auto& rj = p.regions.at(static_cast<std::size_t>(req.target_j));
  const auto& rjp = p.regions.at(static_cast<std::size_t>(req.target_jp));
  const int dim = p.dim();
  AggregateSums s;
  s.rho_bar_j = region_mean_correlation(rj, p.intra);
  s.rho_bar_jp = region_mean_correlation(rjp, p.intra);
  s.eta_bar_j = region_mean_correlation(rj, p.noise_corr);
  s.eta_bar_jp = region_mean_correlation(rjp, p.noise_corr);
  s.rho_bar_nu = neighborhood_mean_correlation(req.nu, dim, p.intra);
  s.eta_bar_nu = neighborhood_mean_correlation(req.nu, dim, p.noise_corr);
  s.rho_delta = p.intra(req.delta);
  s.rho_bar_nu_delta = neighborhood_pair_mean_correlation(req.nu, req.delta, dim, p.intra);
  return s;
}

namespace {

struct Donors {
  double tau_jjp = 0.0;
  double tau_j = 0.0;
  double tau_jp = 0.0;
};

Donors donor_terms(const LimitRequest& req) {
  if (!req.donor_k || !req.donor_kp) {
    throw std::invalid_argument("limit_of: donor regions are required for difference-based methods");
  }
  const auto& p = req.params;
  const auto sd = [&](int r) { return p.regions.at(static_cast<std::size_t>(r)).sigma; };
  const auto corr = [&](int a, int b) { return p.inter_corr(a, b); };
  const int j = req.target_j, jp = req.target_jp, k = *req.donor_k, kp = *req.donor_kp;
  const double kk = sd(k) * sd(kp) * corr(k, kp);
  Donors d;
  d.tau_j = -sd(j) * sd(k) * corr(j, k) - sd(j) * sd(kp) * corr(j, kp) + kk;
  d.tau_jp = -sd(jp) * sd(k) * corr(jp, k) - sd(jp) * sd(kp) * corr(jp, kp) + kk;
  if (req.form == LimitForm::exact) {
    d.tau_jjp = -sd(j) * sd(kp) * corr(j, kp) - sd(jp) * sd(k) * corr(jp, k) + kk;
  } else {
    d.tau_jjp = sd(j) * sd(kp) * corr(j, kp) + sd(jp) * sd(k) * corr(jp, k);
  }
  return d;
}

}  // namespace

double limit_of(const LimitRequest& req) {
  validate(req.params);
  const auto& p = req.params;
  const double sj = p.regions.at(static_cast<std::size_t>(req.target_j)).sigma;
  const double sjp = p.regions.at(static_cast<std::size_t>(req.target_jp)).sigma;
  const double r = p.inter_corr(req.target_j, req.target_jp);
  const double eps2 = p.sigma_eps * p.sigma_eps;
  const double e2 = p.sigma_e * p.sigma_e;
  const double vj = sj * sj, vjp = sjp * sjp;
  const double num = sj * sjp * r + e2;
  const bool exact = req.form == LimitForm::exact;
  const auto s = aggregate_sums(req);

  const auto ratio = [](double n, double a, double b) { return n / std::sqrt(a * b); };

  switch (req.method) {
    case Method::CA:
      return ratio(num, vj * s.rho_bar_j + eps2 * s.eta_bar_j + e2, vjp * s.rho_bar_jp + eps2 * s.eta_bar_jp + e2);
    case Method::AC:
    case Method::ACt:
      return ratio(num, vj + eps2 + e2, vjp + eps2 + e2);
    case Method::LCA: {
      const double local = (exact ? eps2 : e2) * s.eta_bar_nu;
      return ratio(num, vj * s.rho_bar_nu + local + e2, vjp * s.rho_bar_nu + local + e2);
    }
    case Method::R:
      return ratio(num, vj * s.rho_delta + e2, vjp * s.rho_delta + e2);
    case Method::LR:
      return ratio(num, vj * s.rho_bar_nu_delta + e2, vjp * s.rho_bar_nu_delta + e2);
    case Method::D:
    case Method::LD: {
      const auto d = donor_terms(req);
      const double dnum = sj * sjp * r + d.tau_jjp;
      if (!exact) return ratio(dnum, vj + 2.0 * eps2 + d.tau_j, vjp + 2.0 * eps2 + d.tau_jp);
      if (req.method == Method::D) return ratio(dnum, vj + eps2 + d.tau_j, vjp + eps2 + d.tau_jp);
      return ratio(dnum, vj * s.rho_bar_nu + eps2 * s.eta_bar_nu + d.tau_j,
                   vjp * s.rho_bar_nu + eps2 * s.eta_bar_nu + d.tau_jp);
    }
    case Method::RD:
    case Method::LRD: {
      const double within = req.method == Method::RD ? s.rho_delta : s.rho_bar_nu_delta;
      if (!exact) return r / within;
      const auto d = donor_terms(req);
      return ratio(sj * sjp * r + d.tau_jjp, vj * within + d.tau_j, vjp * within + d.tau_jp);
    }
  }
  throw std::invalid_argument("limit_of: unknown method");
}

DLimitCandidates d_limit_candidates(double sigma_j, double sigma_jp, double r, double sigma_eps2) {
  const double num = sigma_j * sigma_jp * r;
  const auto den = [&](double c) {
    return std::sqrt((sigma_j * sigma_j + c * sigma_eps2) * (sigma_jp * sigma_jp + c * sigma_eps2));
  };
  return {num / den(1.0), num / den(2.0)};
}

}  // namespace aggcorr
