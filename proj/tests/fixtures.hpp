#pragma once

#include "aggcorr/harness.hpp"
#include "aggcorr/model.hpp"

namespace fixtures {

// Two 3x3 regions two voxels apart, sigma 1 and 2, r = 0.6.
inline aggcorr::ModelParams micro_layout(aggcorr::CorrelationFunction intra, double sigma_eps = 0.0,
                                         double sigma_e = 0.0,
                                         aggcorr::CorrelationFunction noise = aggcorr::CorrelationFunction::white()) {
  aggcorr::ModelParams p;
  p.regions = aggcorr::line_layout({{3, 3}, {3, 3}}, {1.0, 2.0}, 2);
  p.inter_corr = Eigen::MatrixXd::Identity(2, 2);
  p.inter_corr(0, 1) = p.inter_corr(1, 0) = 0.6;
  p.intra = intra;
  p.sigma_eps = sigma_eps;
  p.sigma_e = sigma_e;
  p.noise_corr = noise;
  return p;
}

// Scaled-down version of the study layout: targets of side `tj`, `tjp`,
// 3x3 donors, r = 0.6, sigma 1 / 2 / 1 / 1.
inline aggcorr::ModelParams small_study(aggcorr::CorrelationFunction intra, int tj = 7, int tjp = 9,
                                        double sigma_eps = 0.0, double sigma_e = 0.0) {
  aggcorr::ModelParams p;
  p.regions = aggcorr::line_layout({{tj, tj}, {tjp, tjp}, {3, 3}, {3, 3}}, {1.0, 2.0, 1.0, 1.0}, 2);
  p.inter_corr = Eigen::MatrixXd::Identity(4, 4);
  p.inter_corr(0, 1) = p.inter_corr(1, 0) = 0.6;
  p.intra = intra;
  p.sigma_eps = sigma_eps;
  p.sigma_e = sigma_e;
  return p;
}

inline aggcorr::EstimatorConfig method(aggcorr::Method m, std::uint64_t seed = 1, int B = 100) {
  aggcorr::EstimatorConfig c;
  c.method = m;
  if (aggcorr::uses_donors(m)) {
    c.donor_k = 2;
    c.donor_kp = 3;
  }
  c.B = B;
  c.sampler_seed = seed;
  return c;
}

}  // namespace fixtures
