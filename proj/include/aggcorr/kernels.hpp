#pragma once

// Data-parallel inner loops. Each kernel has a serial path kept as the
// reference; the OpenMP path must reproduce it bit for bit.

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>

#include "aggcorr/model.hpp"

namespace aggcorr::kernels {

/// Fill row t of `signal` and `local` and entry t of `global` with N(0,1)
/// draws from the stream split_seed(seed, {t}). Shapes must already be set.
void draw_slice_innovations(std::uint64_t seed, Eigen::MatrixXd& signal, Eigen::MatrixXd& local,
                            Eigen::VectorXd& global, Execution exec);

/// Sum over columns [begin, end) of z_v = (y_v - mean) / ||y_v - mean||.
/// The inner product of two such sums is the sum of all pairwise sample
/// correlations between the two column ranges.
/// Throws DegenerateSeries if a column is constant.
Eigen::VectorXd standardized_sum(const Eigen::MatrixXd& series, std::size_t begin, std::size_t end,
                                 Execution exec);

/// Mean of sample_cor over every (a, b) column pair, by direct loops.
/// O(|a| |b| T); used only to check the sufficient-statistic route.
double mean_pairwise_correlation_reference(const Eigen::MatrixXd& series, std::size_t a_begin,
                                           std::size_t a_end, std::size_t b_begin, std::size_t b_end);

}  // namespace aggcorr::kernels
