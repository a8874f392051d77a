#include "aggcorr/kernels.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "aggcorr/rng.hpp"
#include "aggcorr/stats.hpp"

namespace aggcorr::kernels {

namespace {

void fill_slice(std::uint64_t seed, Eigen::Index t, Eigen::MatrixXd& signal, Eigen::MatrixXd& local,
                Eigen::VectorXd& global) {
  Rng rng(split_seed(seed, {static_cast<std::uint64_t>(t)}));
  std::normal_distribution<double> z;
  for (Eigen::Index v = 0; v < signal.cols(); ++v) signal(t, v) = z(rng);
  for (Eigen::Index v = 0; v < local.cols(); ++v) local(t, v) = z(rng);
  global(t) = z(rng);
}

}  // namespace

void draw_slice_innovations(std::uint64_t seed, Eigen::MatrixXd& signal, Eigen::MatrixXd& local,
                            Eigen::VectorXd& global, Execution exec) {
  const Eigen::Index T = signal.rows();
  if (exec == Execution::serial) {
    for (Eigen::Index t = 0; t < T; ++t) fill_slice(seed, t, signal, local, global);
    return;
  }
#pragma omp parallel for schedule(static)
  for (Eigen::Index t = 0; t < T; ++t) fill_slice(seed, t, signal, local, global);
}

Eigen::VectorXd standardized_sum(const Eigen::MatrixXd& series, std::size_t begin, std::size_t end,
                                 Execution exec) {
  const auto b = static_cast<Eigen::Index>(begin);
  const auto n = static_cast<Eigen::Index>(end - begin);
  const Eigen::Index T = series.rows();
  Eigen::VectorXd mean(n), inv_norm(n);

  const auto column_moments = [&](Eigen::Index k) {
    const auto col = series.col(b + k);
    const double m = col.mean();
    const double ss = (col.array() - m).square().sum();
    mean(k) = m;
    inv_norm(k) = ss > 0.0 ? 1.0 / std::sqrt(ss) : 0.0;
  };
  // Each output entry sums columns in the same fixed order on both paths.
  Eigen::VectorXd out(T);
  const auto row_sum = [&](Eigen::Index t) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) s += (series(t, b + k) - mean(k)) * inv_norm(k);
    out(t) = s;
  };

  if (exec == Execution::serial) {
    for (Eigen::Index k = 0; k < n; ++k) column_moments(k);
  } else {
#pragma omp parallel for schedule(static)
    for (Eigen::Index k = 0; k < n; ++k) column_moments(k);
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    if (inv_norm(k) == 0.0) throw DegenerateSeries("degenerate series");
  }
  if (exec == Execution::serial) {
    for (Eigen::Index t = 0; t < T; ++t) row_sum(t);
  } else {
#pragma omp parallel for schedule(static)
    for (Eigen::Index t = 0; t < T; ++t) row_sum(t);
  }
  return out;
}

double mean_pairwise_correlation_reference(const Eigen::MatrixXd& series, std::size_t a_begin,
                                           std::size_t a_end, std::size_t b_begin, std::size_t b_end) {
  const auto T = static_cast<std::size_t>(series.rows());
  double sum = 0.0;
  for (std::size_t i = a_begin; i < a_end; ++i) {
    const Series yi{series.col(static_cast<Eigen::Index>(i)).data(), T};
    for (std::size_t k = b_begin; k < b_end; ++k) {
      sum += sample_cor(yi, Series{series.col(static_cast<Eigen::Index>(k)).data(), T});
    }
  }
  return sum / (static_cast<double>(a_end - a_begin) * static_cast<double>(b_end - b_begin));
}

}  // namespace aggcorr::kernels
