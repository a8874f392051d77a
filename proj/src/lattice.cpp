#include "aggcorr/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace aggcorr {

VoxelIndex::VoxelIndex(std::initializer_list<int> c) : dim(static_cast<int>(c.size())) {
  if (c.size() == 0 || c.size() > kMaxDim) {
    throw std::invalid_argument("VoxelIndex: dimension must be 1, 2 or 3");
  }
  std::copy(c.begin(), c.end(), coords.begin());
}

std::string to_string(const VoxelIndex& v) {
  std::string s = "(";
  for (int c = 0; c < v.dim; ++c) {
    if (c > 0) s += ",";
    s += std::to_string(v[c]);
  }
  return s + ")";
}

int uniform_distance(const VoxelIndex& a, const VoxelIndex& b) {
  if (a.dim != b.dim) {
    throw std::invalid_argument("uniform_distance: dimension mismatch " + to_string(a) + " vs " +
                                to_string(b));
  }
  int d = 0;
  for (int c = 0; c < a.dim; ++c) d = std::max(d, std::abs(a[c] - b[c]));
  return d;
}

std::size_t Box::size() const {
  std::size_t n = 1;
  for (int c = 0; c < dim(); ++c) n *= static_cast<std::size_t>(shape[static_cast<std::size_t>(c)]);
  return n;
}

bool Box::contains(const VoxelIndex& v) const {
  if (v.dim != dim()) return false;
  for (int c = 0; c < dim(); ++c) {
    if (v[c] < origin[c] || v[c] > upper(c)) return false;
  }
  return true;
}

int box_distance(const Box& a, const Box& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("box_distance: dimension mismatch");
  int d = 0;
  for (int c = 0; c < a.dim(); ++c) {
    const int gap = std::max(b.origin[c] - a.upper(c), a.origin[c] - b.upper(c));
    d = std::max(d, gap);
  }
  return d;
}

std::size_t RegionSpec::local_index(const VoxelIndex& v) const {
  if (!box.contains(v)) {
    throw std::out_of_range("voxel " + to_string(v) + " outside region " + std::to_string(id));
  }
  std::size_t idx = 0;
  std::size_t stride = 1;
  for (int c = 0; c < dim(); ++c) {
    idx += static_cast<std::size_t>(v[c] - box.origin[c]) * stride;
    stride *= static_cast<std::size_t>(side(c));
  }
  return idx;
}

VoxelIndex RegionSpec::voxel_at(std::size_t local) const {
  VoxelIndex v = box.origin;
  for (int c = 0; c < dim(); ++c) {
    const auto n = static_cast<std::size_t>(side(c));
    v[c] = box.origin[c] + static_cast<int>(local % n);
    local /= n;
  }
  return v;
}

RegionSpec make_region(int id, VoxelIndex origin, std::initializer_list<int> shape, double sigma) {
  RegionSpec r;
  r.id = id;
  r.box.origin = origin;
  if (static_cast<int>(shape.size()) != origin.dim) {
    throw std::invalid_argument("make_region: shape and origin dimensions differ");
  }
  std::copy(shape.begin(), shape.end(), r.box.shape.begin());
  r.sigma = sigma;
  validate(r);
  return r;
}

void validate(const RegionSpec& spec) {
  const int d = spec.dim();
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("region: dimension must be 1, 2 or 3");
  for (int c = 0; c < d; ++c) {
    if (spec.side(c) < 1) {
      throw std::invalid_argument("region " + std::to_string(spec.id) + ": side lengths must be positive");
    }
  }
  if (!(spec.sigma > 0.0) || !std::isfinite(spec.sigma)) {
    throw std::invalid_argument("region " + std::to_string(spec.id) + ": sigma must be positive");
  }
}

std::vector<VoxelIndex> region_voxels(const RegionSpec& spec) {
  std::vector<VoxelIndex> out;
  out.reserve(spec.voxel_count());
  for (std::size_t i = 0; i < spec.voxel_count(); ++i) out.push_back(spec.voxel_at(i));
  return out;
}

std::size_t Neighborhood::size() const {
  std::size_t n = 1;
  for (int c = 0; c < center.dim; ++c) n *= static_cast<std::size_t>(2 * nu + 1);
  return n;
}

Box Neighborhood::box() const {
  Box b;
  b.origin = center;
  for (int c = 0; c < center.dim; ++c) {
    b.origin[c] -= nu;
    b.shape[static_cast<std::size_t>(c)] = 2 * nu + 1;
  }
  return b;
}

std::vector<VoxelIndex> Neighborhood::voxels() const {
  RegionSpec tmp;
  tmp.box = box();
  return region_voxels(tmp);
}

namespace {

void check_nu(int nu) {
  if (nu < 0) throw std::invalid_argument("neighborhood radius nu must be >= 0");
}

// Inclusive range of admissible values along one axis for the lower element
// of a configuration spanning `extent` voxels.
std::pair<int, int> placement_range(const RegionSpec& region, int axis, int extent) {
  return {region.box.origin[axis], region.box.upper(axis) - extent + 1};
}

}  // namespace

std::size_t admissible_centers(const RegionSpec& region, int nu) {
  check_nu(nu);
  std::size_t n = 1;
  for (int c = 0; c < region.dim(); ++c) {
    const int free = region.side(c) - 2 * nu;
    if (free <= 0) return 0;
    n *= static_cast<std::size_t>(free);
  }
  return n;
}

Neighborhood sample_neighborhood(const RegionSpec& region, int nu, Rng& rng) {
  if (admissible_centers(region, nu) == 0) {
    throw std::invalid_argument("region " + std::to_string(region.id) + " too small for nu=" +
                                std::to_string(nu) + " (needs side >= " + std::to_string(2 * nu + 1) + ")");
  }
  Neighborhood nb;
  nb.nu = nu;
  nb.region_id = region.id;
  nb.center = region.box.origin;
  for (int c = 0; c < region.dim(); ++c) {
    auto [lo, hi] = placement_range(region, c, 2 * nu + 1);
    std::uniform_int_distribution<int> pick(lo, hi);
    nb.center[c] = pick(rng) + nu;
  }
  return nb;
}

NeighborhoodPair sample_neighborhood_pair(const RegionSpec& region, int nu, int delta, Rng& rng) {
  check_nu(nu);
  if (delta < 1) throw std::invalid_argument("replicate distance delta must be >= 1");
  const int width = 2 * nu + 1;
  const int shift = 2 * nu + delta;

  // Placement count when the pair is laid out along each axis.
  std::array<double, kMaxDim> counts{};
  double total = 0.0;
  for (int axis = 0; axis < region.dim(); ++axis) {
    double n = 1.0;
    for (int c = 0; c < region.dim(); ++c) {
      const int extent = c == axis ? width + shift : width;
      n *= std::max(0, region.side(c) - extent + 1);
    }
    counts[static_cast<std::size_t>(axis)] = n;
    total += n;
  }
  if (total == 0.0) {
    throw std::invalid_argument("region " + std::to_string(region.id) + " admits no pair of " +
                                std::to_string(nu) + "-neighborhoods at distance " + std::to_string(delta));
  }

  std::discrete_distribution<int> pick_axis(counts.begin(), counts.begin() + region.dim());
  const int axis = pick_axis(rng);

  NeighborhoodPair pair;
  pair.axis = axis;
  pair.first.nu = pair.second.nu = nu;
  pair.first.region_id = pair.second.region_id = region.id;
  pair.first.center = region.box.origin;
  for (int c = 0; c < region.dim(); ++c) {
    const int extent = c == axis ? width + shift : width;
    auto [lo, hi] = placement_range(region, c, extent);
    std::uniform_int_distribution<int> pick(lo, hi);
    pair.first.center[c] = pick(rng) + nu;
  }
  pair.second.center = pair.first.center;
  pair.second.center[axis] += shift;
  return pair;
}

CorrelationFunction CorrelationFunction::intra(double k_max, double r_min) {
  if (!(k_max > 0.0)) throw std::invalid_argument("intra-correlation: k_max must be positive");
  if (!(r_min > 0.0 && r_min <= 1.0)) throw std::invalid_argument("intra-correlation: r_min must be in (0,1]");
  CorrelationFunction f;
  f.kind_ = Kind::intra;
  f.k_max_ = k_max;
  f.r_min_ = r_min;
  return f;
}

CorrelationFunction CorrelationFunction::noise(std::vector<double> weights) {
  if (weights.empty()) throw std::invalid_argument("noise correlation: support p must be >= 1");
  if (weights.front() != 1.0) throw std::invalid_argument("noise correlation: eta_0 must equal 1");
  for (double w : weights) {
    if (!(w >= -1.0 && w <= 1.0)) throw std::invalid_argument("noise correlation: weights must lie in [-1,1]");
  }
  CorrelationFunction f;
  f.kind_ = Kind::noise;
  f.weights_ = std::move(weights);
  return f;
}

double CorrelationFunction::operator()(int distance) const {
  if (distance < 0) throw std::invalid_argument("correlation evaluated at negative distance");
  if (kind_ == Kind::intra) {
    return std::max(1.0 - static_cast<double>(distance) / k_max_, r_min_);
  }
  return distance < static_cast<int>(weights_.size()) ? weights_[static_cast<std::size_t>(distance)] : 0.0;
}

double mean_correlation(const Box& a, const Box& b, const CorrelationFunction& corr) {
  const int d = a.dim();
  if (d != b.dim()) throw std::invalid_argument("mean_correlation: dimension mismatch");

  // Per axis: counts[k] = #{(x, x') : x in a, x' in b, x' - x = lo + k}.
  std::array<std::vector<double>, kMaxDim> counts;
  std::array<int, kMaxDim> lo{};
  for (int c = 0; c < d; ++c) {
    const int na = a.shape[static_cast<std::size_t>(c)];
    const int nb = b.shape[static_cast<std::size_t>(c)];
    lo[static_cast<std::size_t>(c)] = b.origin[c] - a.upper(c);
    auto& h = counts[static_cast<std::size_t>(c)];
    h.assign(static_cast<std::size_t>(na + nb - 1), 0.0);
    for (int k = 0; k < na + nb - 1; ++k) {
      const int diff = lo[static_cast<std::size_t>(c)] + k;
      // x in [a0, a0+na), x + diff in [b0, b0+nb)
      const int x_lo = std::max(a.origin[c], b.origin[c] - diff);
      const int x_hi = std::min(a.upper(c), b.upper(c) - diff);
      h[static_cast<std::size_t>(k)] = std::max(0, x_hi - x_lo + 1);
    }
  }

  double sum = 0.0;
  std::array<std::size_t, kMaxDim> k{};
  const auto len = [&](int c) { return counts[static_cast<std::size_t>(c)].size(); };
  while (true) {
    double weight = 1.0;
    int dist = 0;
    for (int c = 0; c < d; ++c) {
      const auto kc = k[static_cast<std::size_t>(c)];
      weight *= counts[static_cast<std::size_t>(c)][kc];
      dist = std::max(dist, std::abs(lo[static_cast<std::size_t>(c)] + static_cast<int>(kc)));
    }
    if (weight != 0.0) sum += weight * corr(dist);

    int c = 0;
    while (c < d && ++k[static_cast<std::size_t>(c)] == len(c)) {
      k[static_cast<std::size_t>(c)] = 0;
      ++c;
    }
    if (c == d) break;
  }
  return sum / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

namespace {

Box centered_ball(int nu, int dim) {
  Neighborhood nb;
  nb.nu = nu;
  nb.center.dim = dim;
  return nb.box();
}

}  // namespace

double neighborhood_mean_correlation(int nu, int dim, const CorrelationFunction& corr) {
  check_nu(nu);
  const Box ball = centered_ball(nu, dim);
  return mean_correlation(ball, ball, corr);
}

double region_mean_correlation(const RegionSpec& region, const CorrelationFunction& corr) {
  return mean_correlation(region.box, region.box, corr);
}

double neighborhood_pair_mean_correlation(int nu, int delta, int dim, const CorrelationFunction& corr) {
  check_nu(nu);
  if (delta < 0) throw std::invalid_argument("neighborhood distance delta must be >= 0");
  const Box first = centered_ball(nu, dim);
  Box second = first;
  if (delta > 0) second.origin[0] += 2 * nu + delta;
  return mean_correlation(first, second, corr);
}

}  // namespace aggcorr
