#pragma once

// Characteristic polynomials and Vandermonde products, always in product form.

#include <cmath>
#include <cstddef>
#include <span>

namespace minor_dyson {

/// prod_k (x - roots_k)
inline double poly_eval(std::span<const double> roots, double x) noexcept {
  double p = 1.0;
  for (double r : roots) p *= x - r;
  return p;
}

/// P'(roots_i) = prod_{k != i} (roots_i - roots_k)
inline double poly_derivative_at_root(std::span<const double> roots, std::size_t i) noexcept {
  double p = 1.0;
  for (std::size_t k = 0; k < roots.size(); ++k)
    if (k != i) p *= roots[i] - roots[k];
  return p;
}

/// P'(x) / P(x) = sum_k 1 / (x - roots_k)
inline double poly_log_derivative(std::span<const double> roots, double x) noexcept {
  double s = 0.0;
  for (double r : roots) s += 1.0 / (x - r);
  return s;
}

/// prod_{j > i} (x_j - x_i)
inline double vandermonde(std::span<const double> x) noexcept {
  double p = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) p *= x[j] - x[i];
  return p;
}

inline double log_abs_vandermonde(std::span<const double> x) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) s += std::log(std::abs(x[j] - x[i]));
  return s;
}

/// prod_i prod_j (lambda_i - mu_j)
inline double mixed_vandermonde(std::span<const double> lambda, std::span<const double> mu) noexcept {
  double p = 1.0;
  for (double l : lambda)
    for (double m : mu) p *= l - m;
  return p;
}

inline double log_abs_mixed_vandermonde(std::span<const double> lambda,
                                        std::span<const double> mu) noexcept {
  double s = 0.0;
  for (double l : lambda)
    for (double m : mu) s += std::log(std::abs(l - m));
  return s;
}

}  // namespace minor_dyson
