#include "aggcorr/stats.hpp"

#include <cmath>
#include <cstddef>

namespace aggcorr {

namespace {

void require_length(Series a) {
  if (a.size() < 2) throw std::invalid_argument("series must have length >= 2");
}

void require_same(Series a, Series b) {
  if (a.size() != b.size()) throw std::invalid_argument("series lengths differ");
  require_length(a);
}

// Covariance of (a - b) with (c - d); empty spans stand for the zero series.
double diff_cov(Series a, Series b, Series c, Series d) {
  const std::size_t n = a.size();
  const auto at = [](Series s, std::size_t t) { return s.empty() ? 0.0 : s[t]; };
  double mx = 0.0, my = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    mx += a[t] - at(b, t);
    my += c[t] - at(d, t);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double s = 0.0;
  for (std::size_t t = 0; t < n; ++t) s += (a[t] - at(b, t) - mx) * (c[t] - at(d, t) - my);
  return s / static_cast<double>(n - 1);
}

}  // namespace

double sample_mean(Series a) {
  require_length(a);
  double s = 0.0;
  for (double x : a) s += x;
  return s / static_cast<double>(a.size());
}

double sample_var(Series a) {
  require_length(a);
  return diff_cov(a, {}, a, {});
}

double sample_sd(Series a) { return std::sqrt(sample_var(a)); }

double sample_cov(Series a, Series b) {
  require_same(a, b);
  return diff_cov(a, {}, b, {});
}

double sample_cor(Series a, Series b) {
  require_same(a, b);
  const double va = diff_cov(a, {}, a, {});
  const double vb = diff_cov(b, {}, b, {});
  if (!(va > 0.0) || !(vb > 0.0)) throw DegenerateSeries("degenerate series");
  return diff_cov(a, {}, b, {}) / std::sqrt(va * vb);
}

double s_hat_squared(Series u, Series v, Series w) {
  require_same(u, v);
  require_same(u, w);
  return (diff_cov(u, v, u, v) + diff_cov(u, w, u, w) - diff_cov(v, w, v, w)) / 2.0;
}

double cor_tilde(Series y1, Series y2, Series y3, Series y4) {
  require_same(y1, y2);
  require_same(y1, y3);
  require_same(y1, y4);
  const double s1 = s_hat_squared(y1, y3, y4);
  const double s2 = s_hat_squared(y2, y3, y4);
  if (!(s1 > 0.0) || !(s2 > 0.0)) throw DegenerateSeries("undefined difference-correlation");
  return diff_cov(y1, y3, y2, y4) / std::sqrt(s1 * s2);
}

}  // namespace aggcorr
