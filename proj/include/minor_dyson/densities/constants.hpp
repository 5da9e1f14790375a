#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "minor_dyson/core/error.hpp"

namespace minor_dyson {

/// N = n/2 + (beta/4) n (n-1)
inline double dimension_n(std::size_t n, double beta) noexcept {
  const double nn = static_cast<double>(n);
  return 0.5 * nn + 0.25 * beta * nn * (nn - 1.0);
}

/// Surface measure of S^k for k = 0..3 with the convention vol(S^0) = 1.
inline double sphere_volume(int k) {
  switch (k) {
    case 0: return 1.0;
    case 1: return 2.0 * std::numbers::pi;
    case 2: return 4.0 * std::numbers::pi;
    case 3: return 2.0 * std::numbers::pi * std::numbers::pi;
    default: throw InvalidInput("sphere_volume: only S^0..S^3 are tabulated");
  }
}

inline double log_factorial(std::size_t n) noexcept { return std::lgamma(static_cast<double>(n) + 1.0); }

struct Constants {
  std::size_t n = 1;
  double beta = 2.0;
  double N = 0.5;
  double log_z_inv = 0.0;     // matrix density 2^{-n/2} (beta/pi)^N
  double log_c_inv = 0.0;     // eigenvalue density, Selberg form
  double log_zhat_inv = std::numeric_limits<double>::quiet_NaN();  // pair constant as printed
  std::array<double, 4> sphere{};

  /// Factor n! that turns the unordered eigenvalue law into a density on the chamber
  /// lambda_1 < ... < lambda_n.
  double log_chamber_factor() const noexcept { return log_factorial(n); }

  /// Normalizer of exp(-(beta/2) sum lambda^2) |Delta(lambda) Delta(mu)| |Delta(lambda,mu)|^{beta/2-1}
  /// on the interlacing cell, valid for every beta > 0.
  double log_pair_normalizer() const noexcept {
    return log_chamber_factor() + log_c_inv + std::lgamma(0.5 * beta * static_cast<double>(n)) -
           static_cast<double>(n) * std::lgamma(0.5 * beta);
  }

  /// Printed pair prefactor Zhat^{-1} vol(S^{beta-1})^{2(n-1)}.
  double log_printed_pair_prefactor() const {
    detail::require(std::isfinite(log_zhat_inv), "printed pair constant needs beta in {1,2,4}");
    return log_zhat_inv + 2.0 * static_cast<double>(n - 1) * std::log(sphere_volume(sphere_index()));
  }

  /// Factor by which the printed pair prefactor must be multiplied to normalize.
  double pair_correction() const { return std::exp(log_pair_normalizer() - log_printed_pair_prefactor()); }

  /// Closed form of the same factor: (n-1)! [pi^{beta/2} / (Gamma(beta/2) vol(S^{beta-1}))]^{n-1}.
  double pair_correction_closed_form() const {
    const double per = std::pow(std::numbers::pi, 0.5 * beta) / (std::tgamma(0.5 * beta) * sphere_volume(sphere_index()));
    return std::exp(log_factorial(n - 1)) * std::pow(per, static_cast<double>(n - 1));
  }

  int sphere_index() const { return static_cast<int>(beta) - 1; }
};

inline Constants constants(std::size_t n, double beta) {
  detail::require(n >= 1, "constants: n must be at least 1");
  if (!(beta > 0.0)) throw InvalidInput("constants: beta must be positive");
  Constants c;
  c.n = n;
  c.beta = beta;
  c.N = dimension_n(n, beta);
  for (int k = 0; k < 4; ++k) c.sphere[static_cast<std::size_t>(k)] = sphere_volume(k);
  const double nn = static_cast<double>(n);
  const double log2pi = std::log(2.0 * std::numbers::pi);
  c.log_z_inv = -0.5 * nn * std::log(2.0) + c.N * std::log(beta / std::numbers::pi);
  c.log_c_inv = -0.5 * nn * log2pi + c.N * std::log(beta);
  const double g1 = std::lgamma(1.0 + 0.5 * beta);
  for (std::size_t j = 1; j <= n; ++j) c.log_c_inv += g1 - std::lgamma(1.0 + 0.5 * beta * static_cast<double>(j));
  if (beta == 1.0 || beta == 2.0 || beta == 4.0) {
    double s = c.N * std::log(beta) + (nn - 1.0) * g1 - 0.5 * nn * log2pi -
               0.5 * beta * (nn - 1.0) * std::log(std::numbers::pi) -
               (nn - 1.0) * std::log(sphere_volume(static_cast<int>(beta) - 1));
    for (std::size_t j = 1; j < n; ++j) s -= std::lgamma(1.0 + 0.5 * beta * static_cast<double>(j));
    c.log_zhat_inv = s;
  }
  return c;
}

}  // namespace minor_dyson
