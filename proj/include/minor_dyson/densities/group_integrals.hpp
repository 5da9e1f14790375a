#pragma once

// Monte Carlo over O(m), U(m), Sp(m) of exp(Tr X U Y U^{-1} + 2 Re <w, U v>), and the
// pair transition density built from it.

#include <algorithm>
#include <cmath>
#include <vector>

#include "minor_dyson/algebra/ensemble.hpp"
#include "minor_dyson/densities/invariant.hpp"
#include "minor_dyson/verification/stats.hpp"

namespace minor_dyson {

namespace detail {

/// log of the integrand at a given U.
inline double log_g_integrand(const AlgebraMatrix& u, std::span<const double> x, std::span<const double> y,
                              std::span<const AlgebraElement> w, std::span<const AlgebraElement> v) {
  const std::size_t m = x.size();
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) s += x[i] * y[j] * u(i, j).norm2();
  if (!w.empty()) {
    const int nc = components(u.beta());
    for (std::size_t i = 0; i < m; ++i) {
      AlgebraElement uv(u.beta());
      for (std::size_t j = 0; j < m; ++j) uv += algebra_mul(u(i, j), v[j]);
      for (int r = 0; r < nc; ++r) s += 2.0 * w[i][r] * uv[r];
    }
  }
  return s;
}

/// Mean and standard error of exp(logs), both divided by exp(log_scale) to stay in range.
struct ScaledMean {
  double log_scale = 0.0;
  double mean = 0.0;
  double stderr_ = 0.0;
};

inline ScaledMean scaled_mean(const std::vector<double>& logs) {
  ScaledMean r;
  r.log_scale = *std::max_element(logs.begin(), logs.end());
  MeanAccumulator acc;
  for (double l : logs) acc.add(std::exp(l - r.log_scale));
  r.mean = acc.mean();
  r.stderr_ = acc.stderr_mean();
  return r;
}

}  // namespace detail

/// Haar average of exp(Tr X U Y U^{-1} + 2 Re <w, U v>) from `samples` draws.
/// Empty w and v mean w = v = 0.
inline MomentEstimate g_integral_mc(std::span<const double> x, std::span<const double> y,
                                   std::span<const AlgebraElement> w, std::span<const AlgebraElement> v, Beta beta,
                                   std::size_t samples, RandomStream& rng) {
  detail::require(!x.empty() && x.size() == y.size(), "g_integral_mc: X and Y must have equal positive size");
  detail::require(w.size() == v.size() && (w.empty() || w.size() == x.size()), "g_integral_mc: w, v size mismatch");
  detail::require(samples >= 2, "g_integral_mc needs at least two samples");
  for (const auto& z : w) detail::require(z.beta() == beta, "g_integral_mc: w over a different algebra");
  for (const auto& z : v) detail::require(z.beta() == beta, "g_integral_mc: v over a different algebra");
  std::vector<double> logs(samples);
  for (auto& l : logs) l = detail::log_g_integrand(sample_haar(x.size(), beta, rng), x, y, w, v);
  const auto s = detail::scaled_mean(logs);
  const double k = std::exp(s.log_scale);
  return {k * s.mean, k * s.stderr_};
}

/// Pair transition density from (lambda_bar, mu_bar) to (lambda, mu) over time t, with the
/// sphere integrals and the group integral sampled jointly. Uses the normalizer of the
/// invariant pair law, so that the estimate tends to invariant_density_pair as t grows.
inline MomentEstimate transition_density_pair_mc(double t, const InterlacedPair& pair_bar, const InterlacedPair& pair,
                                                 Beta beta_tag, std::size_t samples, RandomStream& rng) {
  if (!(t > 0.0)) throw InvalidInput("transition density needs t > 0");
  detail::require(pair.n() == pair_bar.n(), "transition density: size mismatch");
  detail::require(samples >= 2, "transition density needs at least two samples");
  const std::size_t n = pair.n(), m = n - 1;
  const double beta = beta_value(beta_tag);
  const Constants k = constants(n, beta);
  const auto& lam = pair.lambda().values();
  const auto& mu = pair.mu().values();
  const auto& lam_bar = pair_bar.lambda().values();
  const auto& mu_bar = pair_bar.mu().values();
  const BorderWeights rw = r_from_spectra(pair), rw_bar = r_from_spectra(pair_bar);

  const double c = std::exp(-t);
  const double one_minus_c2 = -std::expm1(-2.0 * t);
  const double a = beta * c / one_minus_c2;
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) quad += lam[i] * lam[i] + c * c * lam_bar[i] * lam_bar[i];

  // Normalized prefactor times vol(S^{beta-1})^{2m}, so the sphere integrals become averages
  // over uniform unit vectors.
  double log_pref = k.log_pair_normalizer() - k.N * std::log(one_minus_c2) -
                    beta * quad / (2.0 * one_minus_c2) + a * rw.r_n * rw_bar.r_n;
  const double lv = detail::log_or_minus_inf(vandermonde(lam)) + detail::log_or_minus_inf(vandermonde(mu));
  if (lv == -std::numeric_limits<double>::infinity()) return {0.0, 0.0};
  log_pref += lv;
  if (beta != 2.0) log_pref += (0.5 * beta - 1.0) * detail::log_or_minus_inf(mixed_vandermonde(lam, mu));

  if (m == 0) return {std::exp(log_pref), 0.0};
  std::vector<double> x(m), y(mu_bar.begin(), mu_bar.end());
  for (std::size_t i = 0; i < m; ++i) x[i] = a * mu[i];
  std::vector<AlgebraElement> w(m, AlgebraElement(beta_tag)), v(m, AlgebraElement(beta_tag));
  std::vector<double> logs(samples);
  for (auto& l : logs) {
    for (std::size_t i = 0; i < m; ++i) {
      w[i] = random_unit(beta_tag, rng) * (a * rw.r[i]);
      v[i] = random_unit(beta_tag, rng) * rw_bar.r[i];
    }
    l = detail::log_g_integrand(sample_haar(m, beta_tag, rng), x, y, w, v);
  }
  const auto s = detail::scaled_mean(logs);
  const double scale = std::exp(log_pref + s.log_scale);
  return {scale * s.mean, scale * s.stderr_};
}

}  // namespace minor_dyson
