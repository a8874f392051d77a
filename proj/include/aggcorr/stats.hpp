#pragma once

// Sample moments and the difference-based correlation functionals. All
// variances and covariances use the 1/(T-1) divisor.

#include <span>
#include <stdexcept>
#include <string>

namespace aggcorr {

using Series = std::span<const double>;

/// Raised when a correlation-type ratio has no valid denominator.
class DegenerateSeries : public std::runtime_error {
 public:
  explicit DegenerateSeries(const std::string& what) : std::runtime_error(what) {}
};

double sample_mean(Series a);
double sample_var(Series a);
double sample_sd(Series a);
double sample_cov(Series a, Series b);
/// Throws DegenerateSeries("degenerate series") when either variance is 0.
double sample_cor(Series a, Series b);

/// (var(u - v) + var(u - w) - var(v - w)) / 2. May be negative.
double s_hat_squared(Series u, Series v, Series w);

/// cov(y1 - y3, y2 - y4) / (s(y1, y3, y4) * s(y2, y3, y4)), not clamped.
/// Throws DegenerateSeries when either s-hat^2 is not positive.
double cor_tilde(Series y1, Series y2, Series y3, Series y4);

}  // namespace aggcorr
