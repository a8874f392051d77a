#pragma once

// Spatio-temporal observation model Y_i(t) = X_i(t) + eps_i(t) + e(t):
// covariance assembly, factorisation and reproducible Gaussian sampling.

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aggcorr/lattice.hpp"
#include "aggcorr/stats.hpp"

namespace aggcorr {

/// How a nominal signal covariance that is not positive semidefinite is
/// handled. `project` replaces the covariance of each group of correlated
/// regions by its nearest PSD matrix in Frobenius norm (negative eigenvalues
/// clipped to zero).
enum class PsdRepair { none, project };

enum class Execution { serial, parallel };

struct ModelParams {
  /// Region j must sit at position j; ids are checked by validate().
  std::vector<RegionSpec> regions;
  /// Symmetric J x J table of inter-correlations with unit diagonal.
  Eigen::MatrixXd inter_corr;
  CorrelationFunction intra = CorrelationFunction::constant_one();
  double sigma_eps = 0.0;
  CorrelationFunction noise_corr = CorrelationFunction::white();
  double sigma_e = 0.0;
  PsdRepair psd_repair = PsdRepair::none;

  int dim() const { return regions.empty() ? 0 : regions.front().dim(); }
  std::size_t voxel_count() const;
  /// Index of the first voxel of each region in the concatenated order,
  /// plus a final entry equal to voxel_count().
  std::vector<std::size_t> region_offsets() const;
  int noise_support() const { return noise_corr.support(); }
};

/// Throws std::invalid_argument describing the first violated invariant.
void validate(const ModelParams& params);

/// One-line description used in error messages and logs.
std::string describe(const ModelParams& params);

class NotPositiveSemidefinite : public std::runtime_error {
 public:
  explicit NotPositiveSemidefinite(const std::string& what) : std::runtime_error(what) {}
};

/// Nominal signal covariance over all voxels (concatenated region order):
/// sigma_j^2 rho_{|i'-i|} inside a region, sigma_j sigma_j' r_jj' across.
/// Throws NotPositiveSemidefinite when a Cholesky factorisation fails even
/// with diagonal jitter up to 1e-8 times the largest variance. psd_repair
/// is ignored here.
Eigen::MatrixXd build_signal_covariance(const ModelParams& params);

/// Cholesky factor with the smallest jitter from {0, 1e-12, 1e-10, 1e-8}
/// (relative to the largest diagonal entry) that succeeds.
struct JitteredFactor {
  Eigen::MatrixXd lower;
  double jitter = 0.0;
};
std::optional<JitteredFactor> jittered_cholesky(const Eigen::MatrixXd& cov);

struct RepairReport {
  std::vector<int> regions;
  double min_eigenvalue = 0.0;
  double frobenius_distance = 0.0;
  double max_abs_change = 0.0;
};

/// Dense panel of T samples per voxel. Column v holds voxel v's series.
struct Dataset {
  ModelParams params;
  std::size_t T = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd series;  // T x N

  std::size_t voxel_count() const { return static_cast<std::size_t>(series.cols()); }
  Series voxel(std::size_t v) const {
    return {series.col(static_cast<Eigen::Index>(v)).data(), T};
  }
  /// Column of a lattice voxel inside region `region`.
  std::size_t column(int region, const VoxelIndex& v) const;
  std::size_t region_begin(int region) const;
  std::size_t region_size(int region) const;
};

/// Unit-scale random components of one simulation. `local` has unit
/// variance and correlation eta; `global` is N(0,1).
struct FieldComponents {
  std::size_t T = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd signal;  // T x N, covariance from build_signal_covariance
  Eigen::MatrixXd local;   // T x N
  Eigen::VectorXd global;  // T
};

/// Precomputed factorisations for one ModelParams. Sampling is a pure
/// function of (params, T, seed): slice t draws its innovations from the
/// stream split_seed(seed, {t}) in the order N signal normals, N local-noise
/// normals, one global normal, so results do not depend on the number of
/// threads and the noise scales can change without moving the signal draw.
class FieldSampler {
 public:
  explicit FieldSampler(ModelParams params);

  const ModelParams& params() const { return params_; }
  const std::vector<RepairReport>& repairs() const { return repairs_; }
  double max_jitter() const { return max_jitter_; }

  FieldComponents draw(std::size_t T, std::uint64_t seed, Execution exec = Execution::parallel) const;
  /// Y = X + sigma_eps * eps + sigma_e * e.
  Dataset compose(const FieldComponents& c, double sigma_eps, double sigma_e) const;
  Dataset simulate(std::size_t T, std::uint64_t seed, Execution exec = Execution::parallel) const;

 private:
  struct Block {
    std::vector<std::size_t> columns;
    Eigen::MatrixXd lower;  // empty when the block covariance is the identity
  };

  ModelParams params_;
  std::vector<Block> signal_blocks_;
  std::vector<Block> noise_blocks_;
  std::vector<RepairReport> repairs_;
  double max_jitter_ = 0.0;
};

/// simulate() on a fresh sampler. Requires T >= 2.
Dataset simulate(const ModelParams& params, std::size_t T, std::uint64_t seed);

/// 10^(-snr_db/10) * min(sigma_j^2, sigma_jp^2): the noise variance giving
/// the requested signal-to-noise ratio for the target pair.
double noise_variance_from_snr(double snr_db, double sigma_j, double sigma_jp);
double noise_variance_from_snr(double snr_db, const ModelParams& params, int target_j, int target_jp);

}  // namespace aggcorr
