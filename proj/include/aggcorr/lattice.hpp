#pragma once

// Integer-lattice geometry for voxelised regions: indices, uniform-norm
// distances, neighborhood sampling and exact aggregated correlation sums.

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

namespace aggcorr {

inline constexpr int kMaxDim = 3;

using Rng = std::mt19937_64;

struct VoxelIndex {
  std::array<int, kMaxDim> coords{};
  int dim = 2;

  VoxelIndex() = default;
  VoxelIndex(std::initializer_list<int> c);

  int operator[](int axis) const { return coords[static_cast<std::size_t>(axis)]; }
  int& operator[](int axis) { return coords[static_cast<std::size_t>(axis)]; }

  friend bool operator==(const VoxelIndex&, const VoxelIndex&) = default;
};

std::string to_string(const VoxelIndex& v);

/// Max over coordinates of |a_c - b_c|. Throws std::invalid_argument when
/// the dimensions differ.
int uniform_distance(const VoxelIndex& a, const VoxelIndex& b);

/// Axis-aligned block of lattice indices.
struct Box {
  VoxelIndex origin;
  std::array<int, kMaxDim> shape{1, 1, 1};

  int dim() const { return origin.dim; }
  std::size_t size() const;
  int upper(int axis) const { return origin[axis] + shape[static_cast<std::size_t>(axis)] - 1; }
  bool contains(const VoxelIndex& v) const;
};

/// Uniform-norm distance between two boxes (0 when they overlap).
int box_distance(const Box& a, const Box& b);

struct RegionSpec {
  int id = 0;
  Box box;
  double sigma = 1.0;

  int dim() const { return box.dim(); }
  std::size_t voxel_count() const { return box.size(); }
  int side(int axis) const { return box.shape[static_cast<std::size_t>(axis)]; }

  // Row-major position with the first axis varying fastest.
  std::size_t local_index(const VoxelIndex& v) const;
  VoxelIndex voxel_at(std::size_t local) const;
};

RegionSpec make_region(int id, VoxelIndex origin, std::initializer_list<int> shape, double sigma);

/// Throws std::invalid_argument on nonpositive sides, dim outside {1,2,3}
/// or sigma <= 0.
void validate(const RegionSpec& spec);

/// All voxels of the region, first axis fastest: a 2x2 block at the origin
/// yields (0,0),(1,0),(0,1),(1,1).
std::vector<VoxelIndex> region_voxels(const RegionSpec& spec);

struct Neighborhood {
  VoxelIndex center;
  int nu = 0;
  int region_id = 0;

  std::size_t size() const;
  Box box() const;
  std::vector<VoxelIndex> voxels() const;
};

/// Two disjoint nu-neighborhoods of one region whose voxel sets are exactly
/// `delta` apart in uniform norm. The second center is the first translated
/// by 2*nu + delta along `axis`.
struct NeighborhoodPair {
  Neighborhood first;
  Neighborhood second;
  int axis = 0;
};

/// Number of centers whose full nu-ball fits inside the region.
std::size_t admissible_centers(const RegionSpec& region, int nu);

/// Center drawn uniformly among admissible centers. Throws
/// std::invalid_argument when a side is shorter than 2*nu + 1.
Neighborhood sample_neighborhood(const RegionSpec& region, int nu, Rng& rng);

/// Unordered axis-aligned pair drawn uniformly among all admissible
/// placements (axis chosen with probability proportional to its placement
/// count). Throws std::invalid_argument when no placement fits.
NeighborhoodPair sample_neighborhood_pair(const RegionSpec& region, int nu, int delta, Rng& rng);

/// Stationary correlation as a function of uniform distance.
///   intra: rho_d = max(1 - d / k_max, r_min)
///   noise: eta_d = weights[d] for d < p = weights.size(), 0 beyond
class CorrelationFunction {
 public:
  enum class Kind { intra, noise };

  static CorrelationFunction intra(double k_max, double r_min);
  static CorrelationFunction noise(std::vector<double> weights);
  /// rho == 1 at every distance.
  static CorrelationFunction constant_one() { return intra(1.0, 1.0); }
  /// eta_0 = 1 and zero elsewhere (p = 1).
  static CorrelationFunction white() { return noise({1.0}); }

  double operator()(int distance) const;

  Kind kind() const { return kind_; }
  double k_max() const { return k_max_; }
  double r_min() const { return r_min_; }
  const std::vector<double>& weights() const { return weights_; }
  /// Noise support p; 0 for intra functions.
  int support() const { return kind_ == Kind::noise ? static_cast<int>(weights_.size()) : 0; }

 private:
  Kind kind_ = Kind::intra;
  double k_max_ = 1.0;
  double r_min_ = 1.0;
  std::vector<double> weights_;
};

/// Exact mean of corr(|i' - i|) over all ordered pairs i in a, i' in b.
/// Pairs are counted per difference vector, so the cost is
/// prod_c (a_c + b_c - 1) rather than |a| * |b|.
double mean_correlation(const Box& a, const Box& b, const CorrelationFunction& corr);

/// Mean over one nu-neighborhood (rho-bar_nu, eta-bar_nu). nu = 0 gives corr(0).
double neighborhood_mean_correlation(int nu, int dim, const CorrelationFunction& corr);

/// Mean over a whole region (rho-bar^(j), eta-bar^(j)).
double region_mean_correlation(const RegionSpec& region, const CorrelationFunction& corr);

/// Cross mean between two nu-neighborhoods at ball distance delta in the
/// axis-aligned geometry used by sample_neighborhood_pair (rho-bar_{nu,delta}).
/// delta = 0 is taken as coincident neighborhoods.
double neighborhood_pair_mean_correlation(int nu, int delta, int dim, const CorrelationFunction& corr);

}  // namespace aggcorr
