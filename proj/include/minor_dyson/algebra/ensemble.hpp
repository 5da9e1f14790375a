#pragma once

#include <cmath>

#include "minor_dyson/algebra/matrix.hpp"
#include "minor_dyson/core/rng.hpp"

namespace minor_dyson {

/// Draw from the density proportional to exp(-(beta/2) Tr B^2): diagonal variance
/// 1/beta, every off-diagonal real component variance 1/(2 beta).
inline SelfAdjointMatrix sample_gaussian_ensemble(std::size_t n, Beta beta, RandomStream& rng) {
  detail::require(n >= 1, "ensemble size must be at least 1");
  const double b = beta_value(beta);
  const double sd_diag = 1.0 / std::sqrt(b);
  const double sd_off = 1.0 / std::sqrt(2.0 * b);
  SelfAdjointMatrix m(beta, n);
  for (std::size_t i = 0; i < n; ++i) m.set_diagonal(i, sd_diag * rng.normal());
  const int nc = components(beta);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      AlgebraElement z(beta);
      for (int r = 0; r < nc; ++r) z[r] = sd_off * rng.normal();
      m.set_offdiagonal(i, j, z);
    }
  return m;
}

/// Uniform unit element of the algebra (a point of S^{beta-1}).
inline AlgebraElement random_unit(Beta beta, RandomStream& rng) {
  AlgebraElement z(beta);
  const int nc = components(beta);
  double n2 = 0.0;
  while (n2 < 1e-300) {
    n2 = 0.0;
    for (int r = 0; r < nc; ++r) {
      z[r] = rng.normal();
      n2 += z[r] * z[r];
    }
  }
  return z * (1.0 / std::sqrt(n2));
}

/// Haar-distributed element of O(n), U(n) or Sp(n): Gram-Schmidt on a Ginibre matrix,
/// with scalars acting from the right.
inline AlgebraMatrix sample_haar(std::size_t n, Beta beta, RandomStream& rng) {
  AlgebraMatrix u(beta, n, n);
  const int nc = components(beta);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (int r = 0; r < nc; ++r) u(i, j)[r] = rng.normal();
  for (std::size_t j = 0; j < n; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        AlgebraElement dot(beta);
        for (std::size_t i = 0; i < n; ++i) dot += algebra_mul(u(i, k).conj(), u(i, j));
        for (std::size_t i = 0; i < n; ++i) u(i, j) -= algebra_mul(u(i, k), dot);
      }
    }
    double n2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) n2 += u(i, j).norm2();
    if (n2 < 1e-300) throw NumericalFailure("sample_haar: rank-deficient Ginibre draw");
    const double inv = 1.0 / std::sqrt(n2);
    for (std::size_t i = 0; i < n; ++i) u(i, j) *= inv;
  }
  return u;
}

}  // namespace minor_dyson
