#pragma once

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <span>
#include <vector>

#include "minor_dyson/core/error.hpp"

namespace minor_dyson {

/// Kolmogorov survival function Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
inline double kolmogorov_q(double x) {
  if (x < 1e-3) return 1.0;
  if (x < 1.18) {
    // Jacobi theta form converges faster for small x.
    const double y = std::exp(-1.2337005501361697 / (x * x));  // pi^2 / 8
    const double s = 2.5066282746310002 / x;  // sqrt(2 pi) / x
    const double cdf = s * (y + std::pow(y, 9) + std::pow(y, 25) + std::pow(y, 49));
    return 1.0 - cdf;
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value and the
/// (sqrt(ne) + 0.12 + 0.11/sqrt(ne)) small-sample correction.
inline KsResult ks_two_sample(std::vector<double> xs, std::vector<double> ys) {
  if (xs.empty() || ys.empty()) throw InvalidInput("ks_two_sample: empty sample");
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double nx = static_cast<double>(xs.size()), ny = static_cast<double>(ys.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < xs.size() && j < ys.size()) {
    const double v = std::min(xs[i], ys[j]);
    while (i < xs.size() && xs[i] == v) ++i;
    while (j < ys.size() && ys[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  const double ne = nx * ny / (nx + ny);
  const double sq = std::sqrt(ne);
  return {d, kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)};
}

/// One-sample KS against a continuous CDF.
template <class Cdf>
KsResult ks_one_sample(std::vector<double> xs, Cdf&& cdf) {
  if (xs.empty()) throw InvalidInput("ks_one_sample: empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  const double sq = std::sqrt(n);
  return {d, kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)};
}

inline double chi_square_sf(double x, double dof) {
  if (x <= 0.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), x));
}

/// Two-sided normal p-value of a z-score.
inline double normal_two_sided_p(double z) {
  return 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal(), std::abs(z)));
}

/// Running mean and variance (Welford).
class MeanAccumulator {
 public:
  void add(double x) noexcept {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  std::uint64_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double stderr_mean() const noexcept {
    return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

inline MeanAccumulator accumulate(std::span<const double> xs) {
  MeanAccumulator a;
  for (double x : xs) a.add(x);
  return a;
}

struct MomentEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

inline MomentEstimate mean_estimate(std::span<const double> xs) {
  const auto a = accumulate(xs);
  return {a.mean(), a.stderr_mean()};
}

/// Pearson chi-square on a histogram against expected counts (cells with tiny
/// expectation are pooled into their neighbour).
inline double chi_square_p(std::span<const double> observed, std::span<const double> expected,
                           int fitted_parameters = 0, double min_expected = 5.0) {
  detail::require(observed.size() == expected.size(), "histogram size mismatch");
  double chi2 = 0.0, o = 0.0, e = 0.0;
  int cells = 0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    o += observed[k];
    e += expected[k];
    if (e >= min_expected) {
      chi2 += (o - e) * (o - e) / e;
      ++cells;
      o = e = 0.0;
    }
  }
  if (e > 0.0) {
    chi2 += (o - e) * (o - e) / e;
    ++cells;
  }
  const int dof = cells - 1 - fitted_parameters;
  if (dof < 1) throw InvalidInput("chi-square test needs at least two populated cells");
  return chi_square_sf(chi2, dof);
}

}  // namespace minor_dyson
