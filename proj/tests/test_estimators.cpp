#include <gtest/gtest.h>

#include "aggcorr/estimators.hpp"
#include "aggcorr/limits.hpp"
#include "aggcorr/model.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace aggcorr;

namespace {

constexpr std::array<Method, 10> kAll = {Method::CA, Method::AC, Method::ACt, Method::LCA, Method::R,
                                         Method::LR, Method::D,  Method::LD,  Method::RD,  Method::LRD};

std::vector<double> col(const Dataset& d, std::size_t c) {
  const auto s = d.voxel(c);
  return {s.begin(), s.end()};
}

const Dataset& shared_data() {
  static const Dataset d = simulate(fixtures::small_study(CorrelationFunction::intra(20.0, 0.5), 7, 9, 0.6, 0.4), 400, 12);
  return d;
}

double limit(Method m, const ModelParams& p) { return limit_of(LimitRequest::from(fixtures::method(m), p)); }

}  // namespace

TEST(Methods, NamesRoundTrip) {
  for (Method m : kAll) {
    EXPECT_EQ(parse_method(method_name(m)), m);
  }
  EXPECT_EQ(parse_method("lrd"), Method::LRD);
  EXPECT_EQ(parse_method("act"), Method::ACt);
  EXPECT_THROW(parse_method("XYZ"), std::invalid_argument);
  EXPECT_EQ(kStudyMethods.size(), 9u);
}

TEST(Methods, Validation) {
  const auto& p = shared_data().params;
  auto c = fixtures::method(Method::D);
  c.donor_k.reset();
  EXPECT_THROW(validate(c, p), std::invalid_argument);
  c = fixtures::method(Method::CA);
  c.donor_k = 2;
  EXPECT_THROW(validate(c, p), std::invalid_argument);
  c = fixtures::method(Method::D);
  c.donor_kp = 1;
  EXPECT_THROW(validate(c, p), std::invalid_argument);
  c = fixtures::method(Method::D);
  c.donor_kp = 2;
  EXPECT_THROW(validate(c, p), std::invalid_argument);
  c = fixtures::method(Method::LR);
  c.nu = -1;
  EXPECT_THROW(validate(c, p), std::invalid_argument);
  c = fixtures::method(Method::R);
  c.delta = 0;
  EXPECT_THROW(validate(c, p), std::invalid_argument);
  c = fixtures::method(Method::R);
  c.B = 0;
  EXPECT_THROW(validate(c, p), std::invalid_argument);
  c = fixtures::method(Method::CA);
  c.target_jp = 0;
  EXPECT_THROW(validate(c, p), std::invalid_argument);
  c = fixtures::method(Method::LD);
  c.nu = 2;  // the 3x3 donors cannot hold a 5x5 neighborhood
  EXPECT_THROW(estimate(shared_data(), c), std::invalid_argument);
}

TEST(Estimators, CaMatchesRegionAverages) {
  const auto& d = shared_data();
  std::vector<double> a(d.T, 0.0), b(d.T, 0.0);
  for (int r = 0; r < 2; ++r) {
    auto& out = r == 0 ? a : b;
    const double n = static_cast<double>(d.region_size(r));
    for (std::size_t v = 0; v < d.region_size(r); ++v) {
      const auto x = col(d, d.region_begin(r) + v);
      for (std::size_t t = 0; t < d.T; ++t) out[t] += x[t] / n;
    }
  }
  EXPECT_NEAR(est_ca(d, fixtures::method(Method::CA)).value, oracle::cor(a, b), 1e-12);
}

TEST(Estimators, AcAndAcTildeMatchPairwiseDefinitions) {
  const auto& d = shared_data();
  const auto mean_cor = [&](int ra, int rb) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.region_size(ra); ++i) {
      for (std::size_t k = 0; k < d.region_size(rb); ++k) {
        s += oracle::cor(col(d, d.region_begin(ra) + i), col(d, d.region_begin(rb) + k));
      }
    }
    return s / static_cast<double>(d.region_size(ra) * d.region_size(rb));
  };
  const double ac = mean_cor(0, 1);
  EXPECT_NEAR(est_ac(d, fixtures::method(Method::AC)).value, ac, 1e-12);
  const double act = std::sqrt(mean_cor(0, 0) * mean_cor(1, 1)) * est_ca(d, fixtures::method(Method::CA)).value;
  EXPECT_NEAR(est_ac_tilde(d, fixtures::method(Method::ACt)).value, act, 1e-12);
}

TEST(Estimators, ZeroRadiusVariantsCoincide) {
  const auto& d = shared_data();
  auto lr = fixtures::method(Method::LR, 5);
  lr.nu = 0;
  EXPECT_EQ(est_lr(d, lr).value, est_r(d, fixtures::method(Method::R, 5)).value);
  auto ld = fixtures::method(Method::LD, 6);
  ld.nu = 0;
  EXPECT_EQ(est_ld(d, ld).value, est_d(d, fixtures::method(Method::D, 6)).value);
  auto lrd = fixtures::method(Method::LRD, 7);
  lrd.nu = 0;
  EXPECT_EQ(est_lrd(d, lrd).value, est_rd(d, fixtures::method(Method::RD, 7)).value);
}

TEST(Estimators, ZeroRadiusLcaAveragesVoxelPairs) {
  const auto& d = shared_data();
  auto c = fixtures::method(Method::LCA, 8, 20000);
  c.nu = 0;
  const double lca = est_lca(d, c).value;
  const double ac = est_ac(d, fixtures::method(Method::AC)).value;
  // Spread of single-pair correlations around their mean is below 0.2.
  EXPECT_NEAR(lca, ac, 4.0 * 0.2 / std::sqrt(20000.0));
}

TEST(Estimators, DeterministicAndThreadIndependent) {
  const auto& d = shared_data();
  for (Method m : kAll) {
    const auto c = fixtures::method(m, 21);
    const auto a = estimate(d, c, Execution::serial), b = estimate(d, c, Execution::parallel),
               e = estimate(d, c, Execution::parallel);
    EXPECT_EQ(a.value, b.value) << method_name(m);
    EXPECT_EQ(b.value, e.value) << method_name(m);
    EXPECT_EQ(a.draws_used, b.draws_used);
    EXPECT_EQ(a.draws_used + a.discarded, uses_draws(m) ? c.B : 1);
  }
}

TEST(Estimators, SamplerSeedMatters) {
  const auto& d = shared_data();
  for (Method m : kAll) {
    if (!uses_draws(m)) continue;
    EXPECT_NE(estimate(d, fixtures::method(m, 1)).value, estimate(d, fixtures::method(m, 2)).value) << method_name(m);
  }
}

TEST(Estimators, InvariantToCommonRescaling) {
  Dataset scaled = shared_data();
  scaled.series *= 3.7;
  for (Method m : kAll) {
    const auto c = fixtures::method(m, 4);
    const double a = estimate(shared_data(), c).value, b = estimate(scaled, c).value;
    EXPECT_NEAR(a, b, 1e-10 * (1.0 + std::abs(a))) << method_name(m);
  }
}

TEST(Estimators, DifferenceMethodsIgnoreGlobalNoise) {
  FieldSampler s(fixtures::small_study(CorrelationFunction::intra(20.0, 0.5), 7, 9));
  const auto comp = s.draw(300, 31);
  const auto quiet = s.compose(comp, 0.5, 0.0), loud = s.compose(comp, 0.5, 1.0);
  for (Method m : {Method::D, Method::LD, Method::RD, Method::LRD}) {
    const auto c = fixtures::method(m, 9);
    EXPECT_NEAR(estimate(quiet, c).value, estimate(loud, c).value, 1e-9) << method_name(m);
  }
  EXPECT_GT(est_ac(loud, fixtures::method(Method::AC)).value, est_ac(quiet, fixtures::method(Method::AC)).value);
}

TEST(Estimators, DegenerateDrawsAreDiscarded) {
  Dataset d = shared_data();
  // Freeze half the voxels of the first target.
  const std::size_t nj = d.region_size(0);
  for (std::size_t v = 0; v < nj / 2; ++v) d.series.col(static_cast<Eigen::Index>(d.region_begin(0) + v)).setConstant(1.0);
  auto c = fixtures::method(Method::LCA, 3, 200);
  c.nu = 0;
  const auto r = est_lca(d, c);
  EXPECT_GT(r.discarded, 40);
  EXPECT_LT(r.discarded, 160);
  EXPECT_EQ(r.draws_used + r.discarded, 200);
  EXPECT_THROW(est_ac(d, fixtures::method(Method::AC)), DegenerateSeries);

  for (std::size_t v = 0; v < nj; ++v) d.series.col(static_cast<Eigen::Index>(d.region_begin(0) + v)).setConstant(1.0);
  EXPECT_THROW(est_lca(d, c), EstimationError);
  EXPECT_THROW(est_r(d, fixtures::method(Method::R)), EstimationError);
  EXPECT_THROW(est_ca(d, fixtures::method(Method::CA)), DegenerateSeries);
}

TEST(Estimators, SizeEffectFreeWhenIntraIsConstant) {
  const auto d = simulate(fixtures::small_study(CorrelationFunction::constant_one(), 7, 9), 20000, 41);
  for (Method m : kAll) {
    EXPECT_NEAR(estimate(d, fixtures::method(m, 2, 50)).value, 0.6, 0.02) << method_name(m);
  }
}

TEST(Estimators, ConvergeToLimitsOnSmallLayout) {
  const auto p = fixtures::small_study(CorrelationFunction::intra(20.0, 0.5), 7, 9, 0.6, 0.4);
  const auto d = simulate(p, 40000, 43);
  for (Method m : kAll) {
    const double lim = limit(m, p);
    EXPECT_NEAR(estimate(d, fixtures::method(m, 3, 200)).value, lim, 0.02) << method_name(m) << " limit " << lim;
  }
  // CA departs from AC by the aggregation factor.
  EXPECT_GT(std::abs(limit(Method::CA, p) - limit(Method::AC, p)), 0.05);
}

TEST(Estimators, AcAndAcTildeApproachEachOther) {
  const auto p = fixtures::small_study(CorrelationFunction::intra(20.0, 0.5), 7, 9, 0.6, 0.4);
  FieldSampler s(p);
  double short_gap = 0.0, long_gap = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto a = s.simulate(200, seed), b = s.simulate(20000, seed + 100);
    short_gap += std::abs(est_ac(a, fixtures::method(Method::AC)).value - est_ac_tilde(a, fixtures::method(Method::ACt)).value);
    long_gap += std::abs(est_ac(b, fixtures::method(Method::AC)).value - est_ac_tilde(b, fixtures::method(Method::ACt)).value);
  }
  EXPECT_LT(long_gap, short_gap);
  EXPECT_LT(long_gap / 5.0, 0.01);
}
