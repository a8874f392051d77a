#include "aggcorr/model.hpp"

#include <fmt/format.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "aggcorr/kernels.hpp"

namespace aggcorr {

std::size_t ModelParams::voxel_count() const {
  std::size_t n = 0;
  for (const auto& r : regions) n += r.voxel_count();
  return n;
}

std::vector<std::size_t> ModelParams::region_offsets() const {
  std::vector<std::size_t> off(regions.size() + 1, 0);
  for (std::size_t j = 0; j < regions.size(); ++j) off[j + 1] = off[j] + regions[j].voxel_count();
  return off;
}

void validate(const ModelParams& params) {
  if (params.regions.empty()) throw std::invalid_argument("model: at least one region is required");
  const int dim = params.dim();
  for (std::size_t j = 0; j < params.regions.size(); ++j) {
    const auto& r = params.regions[j];
    validate(r);
    if (r.id != static_cast<int>(j)) {
      throw std::invalid_argument(fmt::format("model: region at position {} has id {}", j, r.id));
    }
    if (r.dim() != dim) throw std::invalid_argument("model: regions have different dimensions");
  }
  const int min_gap = std::max(1, params.noise_support());
  for (std::size_t a = 0; a < params.regions.size(); ++a) {
    for (std::size_t b = a + 1; b < params.regions.size(); ++b) {
      const int d = box_distance(params.regions[a].box, params.regions[b].box);
      if (d < min_gap) {
        throw std::invalid_argument(fmt::format(
            "model: regions {} and {} are {} apart; need at least {} (disjoint and >= noise support)", a, b,
            d, min_gap));
      }
    }
  }
  const auto J = static_cast<Eigen::Index>(params.regions.size());
  const auto& r = params.inter_corr;
  if (r.rows() != J || r.cols() != J) {
    throw std::invalid_argument(fmt::format("model: inter-correlation table must be {}x{}", J, J));
  }
  for (Eigen::Index a = 0; a < J; ++a) {
    if (r(a, a) != 1.0) throw std::invalid_argument("model: inter-correlation diagonal must be 1");
    for (Eigen::Index b = 0; b < J; ++b) {
      if (!(r(a, b) >= -1.0 && r(a, b) <= 1.0)) {
        throw std::invalid_argument("model: inter-correlations must lie in [-1,1]");
      }
      if (r(a, b) != r(b, a)) throw std::invalid_argument("model: inter-correlation table must be symmetric");
    }
  }
  if (params.intra.kind() != CorrelationFunction::Kind::intra) {
    throw std::invalid_argument("model: intra-correlation must be of intra kind");
  }
  if (params.noise_corr.kind() != CorrelationFunction::Kind::noise) {
    throw std::invalid_argument("model: local-noise correlation must be of noise kind");
  }
  if (!(params.sigma_eps >= 0.0) || !std::isfinite(params.sigma_eps) || !(params.sigma_e >= 0.0) ||
      !std::isfinite(params.sigma_e)) {
    throw std::invalid_argument("model: noise standard deviations must be finite and >= 0");
  }
}

std::string describe(const ModelParams& params) {
  std::string regions;
  for (const auto& r : params.regions) {
    std::string shape;
    for (int c = 0; c < r.dim(); ++c) shape += (c ? "x" : "") + std::to_string(r.side(c));
    regions += fmt::format("{}{}[{}, sigma={}]", regions.empty() ? "" : " ", r.id, shape, r.sigma);
  }
  std::string corr;
  for (Eigen::Index a = 0; a < params.inter_corr.rows(); ++a) {
    for (Eigen::Index b = a + 1; b < params.inter_corr.cols(); ++b) {
      if (params.inter_corr(a, b) != 0.0) corr += fmt::format(" r{}{}={}", a, b, params.inter_corr(a, b));
    }
  }
  return fmt::format("regions {}; intra K_max={} r_min={};{} sigma_eps={} p={} sigma_e={}", regions,
                     params.intra.k_max(), params.intra.r_min(), corr, params.sigma_eps,
                     params.noise_support(), params.sigma_e);
}

namespace {

// sigma^2 * corr(|i' - i|) over one region.
Eigen::MatrixXd region_block(const RegionSpec& region, const CorrelationFunction& corr, double scale) {
  const auto voxels = region_voxels(region);
  const auto n = static_cast<Eigen::Index>(voxels.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      const double v = scale * corr(uniform_distance(voxels[static_cast<std::size_t>(a)],
                                                     voxels[static_cast<std::size_t>(b)]));
      m(a, b) = v;
      m(b, a) = v;
    }
  }
  return m;
}

// Connected components of regions linked by a nonzero inter-correlation.
std::vector<std::vector<int>> correlated_groups(const ModelParams& params) {
  const int J = static_cast<int>(params.regions.size());
  std::vector<int> parent(static_cast<std::size_t>(J));
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
    return x;
  };
  for (int a = 0; a < J; ++a) {
    for (int b = a + 1; b < J; ++b) {
      if (params.inter_corr(a, b) != 0.0) parent[static_cast<std::size_t>(find(b))] = find(a);
    }
  }
  std::vector<std::vector<int>> groups;
  std::vector<int> slot(static_cast<std::size_t>(J), -1);
  for (int a = 0; a < J; ++a) {
    const int root = find(a);
    if (slot[static_cast<std::size_t>(root)] < 0) {
      slot[static_cast<std::size_t>(root)] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(slot[static_cast<std::size_t>(root)])].push_back(a);
  }
  return groups;
}

std::vector<std::size_t> group_columns(const ModelParams& params, const std::vector<int>& group) {
  const auto off = params.region_offsets();
  std::vector<std::size_t> cols;
  for (int j : group) {
    for (std::size_t v = off[static_cast<std::size_t>(j)]; v < off[static_cast<std::size_t>(j) + 1]; ++v) {
      cols.push_back(v);
    }
  }
  return cols;
}

bool contiguous(const std::vector<std::size_t>& cols) {
  for (std::size_t k = 1; k < cols.size(); ++k) {
    if (cols[k] != cols[k - 1] + 1) return false;
  }
  return true;
}

// out[:, cols] = in[:, cols] * L^T, or a copy when L is empty (identity).
void apply_block(const Eigen::MatrixXd& in, const std::vector<std::size_t>& cols, const Eigen::MatrixXd& lower,
                 Eigen::MatrixXd& out) {
  if (cols.empty()) return;
  const auto n = static_cast<Eigen::Index>(cols.size());
  if (contiguous(cols)) {
    const auto first = static_cast<Eigen::Index>(cols.front());
    if (lower.size() == 0) {
      out.middleCols(first, n) = in.middleCols(first, n);
    } else {
      out.middleCols(first, n).noalias() = in.middleCols(first, n) * lower.transpose().triangularView<Eigen::Upper>();
    }
    return;
  }
  Eigen::MatrixXd z(in.rows(), n);
  for (Eigen::Index k = 0; k < n; ++k) z.col(k) = in.col(static_cast<Eigen::Index>(cols[static_cast<std::size_t>(k)]));
  if (lower.size() != 0) z = (z * lower.transpose().triangularView<Eigen::Upper>()).eval();
  for (Eigen::Index k = 0; k < n; ++k) out.col(static_cast<Eigen::Index>(cols[static_cast<std::size_t>(k)])) = z.col(k);
}

}  // namespace

std::optional<JitteredFactor> jittered_cholesky(const Eigen::MatrixXd& cov) {
  const double scale = cov.diagonal().maxCoeff();
  for (double rel : {0.0, 1e-12, 1e-10, 1e-8}) {
    Eigen::MatrixXd m = cov;
    m.diagonal().array() += rel * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd lower = llt.matrixL();
      if (lower.allFinite()) return JitteredFactor{std::move(lower), rel * scale};
    }
  }
  return std::nullopt;
}

Eigen::MatrixXd build_signal_covariance(const ModelParams& params) {
  validate(params);
  const auto off = params.region_offsets();
  const auto N = static_cast<Eigen::Index>(params.voxel_count());
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(N, N);
  const auto J = params.regions.size();
  for (std::size_t a = 0; a < J; ++a) {
    const auto& ra = params.regions[a];
    const auto ba = static_cast<Eigen::Index>(off[a]);
    const auto na = static_cast<Eigen::Index>(ra.voxel_count());
    cov.block(ba, ba, na, na) = region_block(ra, params.intra, ra.sigma * ra.sigma);
    for (std::size_t b = a + 1; b < J; ++b) {
      const auto& rb = params.regions[b];
      const double c = ra.sigma * rb.sigma * params.inter_corr(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      const auto bb = static_cast<Eigen::Index>(off[b]);
      const auto nb = static_cast<Eigen::Index>(rb.voxel_count());
      cov.block(ba, bb, na, nb).setConstant(c);
      cov.block(bb, ba, nb, na).setConstant(c);
    }
  }
  if (!jittered_cholesky(cov)) {
    throw NotPositiveSemidefinite("signal covariance is not positive semidefinite (jitter up to 1e-8): " +
                                  describe(params));
  }
  return cov;
}

FieldSampler::FieldSampler(ModelParams params) : params_(std::move(params)) {
  validate(params_);
  const auto off = params_.region_offsets();

  std::vector<Eigen::MatrixXd> intra(params_.regions.size());
  for (std::size_t j = 0; j < params_.regions.size(); ++j) {
    const auto& r = params_.regions[j];
    intra[j] = region_block(r, params_.intra, r.sigma * r.sigma);
  }

  for (const auto& group : correlated_groups(params_)) {
    Block block;
    block.columns = group_columns(params_, group);
    const auto n = static_cast<Eigen::Index>(block.columns.size());
    Eigen::MatrixXd cov(n, n);
    Eigen::Index pa = 0;
    for (int a : group) {
      const auto na = static_cast<Eigen::Index>(params_.regions[static_cast<std::size_t>(a)].voxel_count());
      Eigen::Index pb = 0;
      for (int b : group) {
        const auto nb = static_cast<Eigen::Index>(params_.regions[static_cast<std::size_t>(b)].voxel_count());
        if (a == b) {
          cov.block(pa, pb, na, nb) = intra[static_cast<std::size_t>(a)];
        } else {
          cov.block(pa, pb, na, nb)
              .setConstant(params_.regions[static_cast<std::size_t>(a)].sigma *
                           params_.regions[static_cast<std::size_t>(b)].sigma * params_.inter_corr(a, b));
        }
        pb += nb;
      }
      pa += na;
    }
    auto factor = jittered_cholesky(cov);
    if (!factor && params_.psd_repair == PsdRepair::project) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
      const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
      Eigen::MatrixXd repaired = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
      repaired = (0.5 * (repaired + repaired.transpose())).eval();
      RepairReport rep;
      rep.regions = group;
      rep.min_eigenvalue = eig.eigenvalues().minCoeff();
      rep.frobenius_distance = (repaired - cov).norm();
      rep.max_abs_change = (repaired - cov).cwiseAbs().maxCoeff();
      repairs_.push_back(rep);
      factor = jittered_cholesky(repaired);
    }
    if (!factor) {
      throw NotPositiveSemidefinite("signal covariance is not positive semidefinite (jitter up to 1e-8): " +
                                    describe(params_));
    }
    max_jitter_ = std::max(max_jitter_, factor->jitter);
    block.lower = std::move(factor->lower);
    signal_blocks_.push_back(std::move(block));
  }

  const bool white = params_.noise_support() == 1;
  for (std::size_t j = 0; j < params_.regions.size(); ++j) {
    Block block;
    for (std::size_t v = off[j]; v < off[j + 1]; ++v) block.columns.push_back(v);
    if (!white) {
      auto factor = jittered_cholesky(region_block(params_.regions[j], params_.noise_corr, 1.0));
      if (!factor) {
        throw NotPositiveSemidefinite(
            fmt::format("local-noise correlation of region {} is not positive semidefinite", j));
      }
      block.lower = std::move(factor->lower);
    }
    noise_blocks_.push_back(std::move(block));
  }
}

FieldComponents FieldSampler::draw(std::size_t T, std::uint64_t seed, Execution exec) const {
  if (T < 2) throw std::invalid_argument("simulate: T must be >= 2");
  const auto N = static_cast<Eigen::Index>(params_.voxel_count());
  const auto rows = static_cast<Eigen::Index>(T);
  Eigen::MatrixXd z_signal(rows, N), z_local(rows, N);
  FieldComponents out;
  out.T = T;
  out.seed = seed;
  out.global.resize(rows);
  kernels::draw_slice_innovations(seed, z_signal, z_local, out.global, exec);

  out.signal.resize(rows, N);
  for (const auto& b : signal_blocks_) apply_block(z_signal, b.columns, b.lower, out.signal);
  if (params_.noise_support() == 1) {
    out.local = std::move(z_local);
  } else {
    out.local.resize(rows, N);
    for (const auto& b : noise_blocks_) apply_block(z_local, b.columns, b.lower, out.local);
  }
  return out;
}

Dataset FieldSampler::compose(const FieldComponents& c, double sigma_eps, double sigma_e) const {
  if (!(sigma_eps >= 0.0) || !(sigma_e >= 0.0)) throw std::invalid_argument("noise scales must be >= 0");
  Dataset d;
  d.params = params_;
  d.params.sigma_eps = sigma_eps;
  d.params.sigma_e = sigma_e;
  d.T = c.T;
  d.seed = c.seed;
  d.series = c.signal;
  if (sigma_eps != 0.0) d.series.noalias() += sigma_eps * c.local;
  if (sigma_e != 0.0) d.series.colwise() += sigma_e * c.global;
  return d;
}

Dataset FieldSampler::simulate(std::size_t T, std::uint64_t seed, Execution exec) const {
  return compose(draw(T, seed, exec), params_.sigma_eps, params_.sigma_e);
}

Dataset simulate(const ModelParams& params, std::size_t T, std::uint64_t seed) {
  return FieldSampler(params).simulate(T, seed);
}

std::size_t Dataset::region_begin(int region) const {
  return params.region_offsets().at(static_cast<std::size_t>(region));
}

std::size_t Dataset::region_size(int region) const {
  return params.regions.at(static_cast<std::size_t>(region)).voxel_count();
}

std::size_t Dataset::column(int region, const VoxelIndex& v) const {
  const auto& spec = params.regions.at(static_cast<std::size_t>(region));
  return region_begin(region) + spec.local_index(v);
}

double noise_variance_from_snr(double snr_db, double sigma_j, double sigma_jp) {
  if (!std::isfinite(snr_db)) throw std::invalid_argument("SNR must be finite");
  return std::pow(10.0, -snr_db / 10.0) * std::min(sigma_j * sigma_j, sigma_jp * sigma_jp);
}

double noise_variance_from_snr(double snr_db, const ModelParams& params, int target_j, int target_jp) {
  return noise_variance_from_snr(snr_db, params.regions.at(static_cast<std::size_t>(target_j)).sigma,
                                 params.regions.at(static_cast<std::size_t>(target_jp)).sigma);
}

}  // namespace aggcorr
