#include <gtest/gtest.h>

#include "aggcorr/harness.hpp"
#include "aggcorr/model.hpp"
#include "aggcorr/stats.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace aggcorr;

namespace {

ModelParams two_regions(std::initializer_list<int> a, std::initializer_list<int> b, double r) {
  ModelParams p;
  p.regions = {make_region(0, {0, 0}, a, 1.0), make_region(1, {0, 5}, b, 1.0)};
  p.inter_corr = Eigen::MatrixXd::Identity(2, 2);
  p.inter_corr(0, 1) = p.inter_corr(1, 0) = r;
  return p;
}

// Population covariance of Y between two voxels, read off the model.
double model_cov(const ModelParams& p, int ra, const VoxelIndex& a, int rb, const VoxelIndex& b) {
  const auto& A = p.regions[static_cast<std::size_t>(ra)];
  const auto& B = p.regions[static_cast<std::size_t>(rb)];
  const double e2 = p.sigma_e * p.sigma_e;
  if (ra != rb) return A.sigma * B.sigma * p.inter_corr(ra, rb) + e2;
  const int d = uniform_distance(a, b);
  return A.sigma * A.sigma * p.intra(d) + p.sigma_eps * p.sigma_eps * p.noise_corr(d) + e2;
}

std::vector<double> column(const Dataset& d, std::size_t c) {
  const auto s = d.voxel(c);
  return {s.begin(), s.end()};
}

}  // namespace

TEST(Covariance, SmallExamples) {
  const auto c = build_signal_covariance(two_regions({1, 1}, {1, 1}, 0.6));
  EXPECT_DOUBLE_EQ(c(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(c(0, 1), 0.6);
  EXPECT_DOUBLE_EQ(c(1, 0), 0.6);
  EXPECT_DOUBLE_EQ(c(1, 1), 1.0);

  ModelParams one;
  one.regions = {make_region(0, {0, 0}, {2, 1}, 1.0)};
  one.inter_corr = Eigen::MatrixXd::Identity(1, 1);
  one.intra = CorrelationFunction::intra(100.0, 0.01);
  const auto c1 = build_signal_covariance(one);
  EXPECT_DOUBLE_EQ(c1(0, 1), 0.99);
  EXPECT_DOUBLE_EQ(c1(1, 1), 1.0);
}

TEST(Covariance, EntriesFollowModel) {
  auto p = fixtures::micro_layout(CorrelationFunction::intra(100.0, 0.6));
  const auto c = build_signal_covariance(p);
  const auto off = p.region_offsets();
  for (int ra = 0; ra < 2; ++ra) {
    for (int rb = 0; rb < 2; ++rb) {
      const auto& A = p.regions[static_cast<std::size_t>(ra)];
      const auto& B = p.regions[static_cast<std::size_t>(rb)];
      for (std::size_t i = 0; i < A.voxel_count(); ++i) {
        for (std::size_t k = 0; k < B.voxel_count(); ++k) {
          const auto row = static_cast<Eigen::Index>(off[static_cast<std::size_t>(ra)] + i);
          const auto col = static_cast<Eigen::Index>(off[static_cast<std::size_t>(rb)] + k);
          EXPECT_DOUBLE_EQ(c(row, col), model_cov(p, ra, A.voxel_at(i), rb, B.voxel_at(k)));
        }
      }
    }
  }
}

TEST(Covariance, Validation) {
  auto p = two_regions({2, 2}, {2, 2}, 0.6);
  p.inter_corr(0, 1) = 0.5;
  EXPECT_THROW(validate(p), std::invalid_argument);
  p = two_regions({2, 2}, {2, 2}, 1.5);
  EXPECT_THROW(validate(p), std::invalid_argument);
  p = two_regions({2, 2}, {2, 2}, 0.6);
  p.regions[1].box.origin = VoxelIndex{1, 1};
  EXPECT_THROW(validate(p), std::invalid_argument);
  p = two_regions({2, 2}, {2, 2}, 0.6);
  p.noise_corr = CorrelationFunction::noise({1.0, 0.2, 0.1, 0.1, 0.1, 0.1});
  EXPECT_THROW(validate(p), std::invalid_argument);
  p = two_regions({2, 2}, {2, 2}, 0.6);
  p.sigma_eps = -1.0;
  EXPECT_THROW(validate(p), std::invalid_argument);
}

TEST(Covariance, NonPsdIsReported) {
  auto p = two_regions({1, 1}, {1, 1}, 0.6);
  p.regions.push_back(make_region(2, {0, 10}, {1, 1}, 1.0));
  p.inter_corr = Eigen::MatrixXd::Identity(3, 3);
  p.inter_corr << 1.0, 0.9, -0.9, 0.9, 1.0, 0.9, -0.9, 0.9, 1.0;
  EXPECT_THROW(build_signal_covariance(p), NotPositiveSemidefinite);
  EXPECT_THROW(FieldSampler{p}, NotPositiveSemidefinite);
  p.psd_repair = PsdRepair::project;
  FieldSampler sampler(p);
  ASSERT_EQ(sampler.repairs().size(), 1u);
  EXPECT_LT(sampler.repairs()[0].min_eigenvalue, 0.0);
}

TEST(Covariance, StudySizeModel2IsPsd) {
  auto cfg = default_experiment();
  cfg.base.intra = CorrelationFunction::intra(100.0, 0.6);
  EXPECT_NO_THROW(build_signal_covariance(cfg.base));
}

TEST(Covariance, StudySizeModel1NeedsRepair) {
  // The nominal Model 1 covariance over the 40x40 target has negative
  // eigenvalues; only the projected version can be factorised.
  auto cfg = default_experiment();
  cfg.base.intra = CorrelationFunction::intra(300.0, 0.9);
  EXPECT_THROW(build_signal_covariance(cfg.base), NotPositiveSemidefinite);
  FieldSampler sampler(cfg.base);
  ASSERT_EQ(sampler.repairs().size(), 1u);
  EXPECT_EQ(sampler.repairs()[0].regions, (std::vector<int>{0, 1}));
  EXPECT_LT(sampler.repairs()[0].max_abs_change, 0.05);
}

TEST(Jitter, Ladder) {
  Eigen::MatrixXd ones = Eigen::MatrixXd::Constant(3, 3, 1.0);
  const auto f = jittered_cholesky(ones);
  ASSERT_TRUE(f.has_value());
  EXPECT_GT(f->jitter, 0.0);
  EXPECT_LE(f->jitter, 1e-8);
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  EXPECT_FALSE(jittered_cholesky(bad).has_value());
  const auto id = jittered_cholesky(Eigen::MatrixXd::Identity(4, 4));
  ASSERT_TRUE(id.has_value());
  EXPECT_EQ(id->jitter, 0.0);
}

TEST(Simulate, Deterministic) {
  const auto p = fixtures::micro_layout(CorrelationFunction::intra(100.0, 0.6), 0.5, 0.3);
  const auto a = simulate(p, 200, 42), b = simulate(p, 200, 42), c = simulate(p, 200, 43);
  EXPECT_TRUE(a.series == b.series);
  EXPECT_FALSE(a.series == c.series);
  EXPECT_EQ(a.series.rows(), 200);
  EXPECT_EQ(a.series.cols(), 18);
}

TEST(Simulate, SerialAndParallelAgree) {
  const auto p = fixtures::small_study(CorrelationFunction::intra(100.0, 0.6), 6, 8, 0.7, 0.4);
  FieldSampler s(p);
  const auto a = s.simulate(300, 9, Execution::serial), b = s.simulate(300, 9, Execution::parallel);
  EXPECT_TRUE(a.series == b.series);
}

TEST(Simulate, SingleVoxelVariance) {
  ModelParams p;
  p.regions = {make_region(0, {0, 0}, {1, 1}, 1.0)};
  p.inter_corr = Eigen::MatrixXd::Identity(1, 1);
  const std::size_t T = 100000;
  const auto d = simulate(p, T, 5);
  EXPECT_NEAR(sample_var(d.voxel(0)), 1.0, 3.0 * std::sqrt(2.0 / T));
}

TEST(Simulate, MicroLayoutCovariances) {
  const auto p = fixtures::micro_layout(CorrelationFunction::intra(10.0, 0.3), 0.8, 0.5,
                                        CorrelationFunction::noise({1.0, 0.4}));
  const std::size_t T = 10000;
  const auto d = simulate(p, T, 77);
  const auto& A = p.regions[0];
  const auto& B = p.regions[1];
  // One pair per covariance class: same region at distances 0, 1, 2 in
  // each region, and one pair across regions.
  struct Pair {
    int ra;
    VoxelIndex a;
    int rb;
    VoxelIndex b;
  };
  std::vector<Pair> pairs;
  for (int r = 0; r < 2; ++r) {
    const auto& R = p.regions[static_cast<std::size_t>(r)];
    const auto o = R.box.origin;
    for (int dist = 0; dist <= 2; ++dist) pairs.push_back({r, o, r, VoxelIndex{o[0] + dist, o[1] + dist / 2}});
  }
  pairs.push_back({0, A.voxel_at(4), 1, B.voxel_at(3)});
  for (const auto& pr : pairs) {
    const auto x = column(d, d.column(pr.ra, pr.a)), y = column(d, d.column(pr.rb, pr.b));
    const double saa = model_cov(p, pr.ra, pr.a, pr.ra, pr.a);
    const double sbb = model_cov(p, pr.rb, pr.b, pr.rb, pr.b);
    const double sab = model_cov(p, pr.ra, pr.a, pr.rb, pr.b);
    const double se = std::sqrt((saa * sbb + sab * sab) / static_cast<double>(T));
    EXPECT_NEAR(oracle::cov(x, y), sab, 3.0 * se) << "regions " << pr.ra << "," << pr.rb;
  }
}

TEST(Simulate, RegionAverageVariance) {
  const auto p = fixtures::micro_layout(CorrelationFunction::intra(10.0, 0.3), 0.8, 0.5);
  const std::size_t T = 10000;
  const auto d = simulate(p, T, 78);
  for (int r = 0; r < 2; ++r) {
    const auto& R = p.regions[static_cast<std::size_t>(r)];
    std::vector<double> avg(T, 0.0);
    for (std::size_t v = d.region_begin(r); v < d.region_begin(r) + d.region_size(r); ++v) {
      for (std::size_t t = 0; t < T; ++t) avg[t] += d.series(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(v));
    }
    for (double& x : avg) x /= static_cast<double>(R.voxel_count());
    const double expect = R.sigma * R.sigma * region_mean_correlation(R, p.intra) +
                          p.sigma_eps * p.sigma_eps / static_cast<double>(R.voxel_count()) + p.sigma_e * p.sigma_e;
    EXPECT_NEAR(oracle::cov(avg, avg), expect, 3.0 * expect * std::sqrt(2.0 / T));
  }
}

TEST(Simulate, NoSerialDependence) {
  const auto p = fixtures::micro_layout(CorrelationFunction::intra(10.0, 0.3), 0.8, 0.5);
  const std::size_t T = 20000;
  const auto d = simulate(p, T, 79);
  for (std::size_t v : {0u, 7u, 12u}) {
    const auto x = column(d, v);
    const std::vector<double> a(x.begin(), x.end() - 1), b(x.begin() + 1, x.end());
    EXPECT_LT(std::abs(oracle::cor(a, b)), 3.0 / std::sqrt(static_cast<double>(T)));
  }
}

TEST(Simulate, GlobalNoiseShiftsCovariances) {
  const auto p = fixtures::micro_layout(CorrelationFunction::intra(10.0, 0.3));
  FieldSampler s(p);
  const std::size_t T = 20000;
  const auto comp = s.draw(T, 80);
  const double se2 = 0.64;
  const auto base = s.compose(comp, 0.0, 0.0), noisy = s.compose(comp, 0.0, std::sqrt(se2));
  for (auto [a, b] : {std::pair<std::size_t, std::size_t>{0, 1}, {2, 11}, {9, 17}}) {
    const double shift = oracle::cov(column(noisy, a), column(noisy, b)) - oracle::cov(column(base, a), column(base, b));
    // shift = se2 * var(e) + cross terms of order sqrt(se2 / T).
    EXPECT_NEAR(shift, se2, 3.0 * (se2 * std::sqrt(2.0 / T) + 4.0 * std::sqrt(se2 / T)));
  }
}

TEST(Simulate, ComposeMatchesSimulate) {
  const auto p = fixtures::micro_layout(CorrelationFunction::intra(10.0, 0.3), 0.8, 0.5);
  FieldSampler s(p);
  const auto direct = s.simulate(100, 3);
  const auto composed = s.compose(s.draw(100, 3), 0.8, 0.5);
  EXPECT_TRUE(direct.series == composed.series);
}

TEST(Snr, Conversion) {
  EXPECT_DOUBLE_EQ(noise_variance_from_snr(0.0, 1.0, 2.0), 1.0);
  EXPECT_NEAR(noise_variance_from_snr(10.0, 1.0, 2.0), 0.1, 1e-15);
  EXPECT_NEAR(noise_variance_from_snr(-10.0, 1.0, 2.0), 10.0, 1e-12);
  EXPECT_NEAR(noise_variance_from_snr(0.0, 3.0, 2.0), 4.0, 1e-15);
}
