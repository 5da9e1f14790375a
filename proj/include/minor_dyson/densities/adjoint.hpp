#pragma once

// Divergence-form forward operators by central differences:
//   A_lambda^T f = sum_i (1/beta) d^2 f / d lambda_i^2 - d/d lambda_i (D_i f),
//   D_i = -lambda_i + sum_{j != i} 1 / (lambda_i - lambda_j),
// the same on mu, and the cross term
//   A_{lambda mu}^T f = -(2/beta) sum_{i,j} d^2/(d lambda_i d mu_j) (K_ij f),
//   K_ij = P_{n-1}(lambda_i) P_n(mu_j) / ((lambda_i - mu_j)^2 P_n'(lambda_i) P_{n-1}'(mu_j)).

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "minor_dyson/minor_geometry.hpp"
#include "minor_dyson/spectral_sde.hpp"

namespace minor_dyson {

enum class AdjointPart { kLambda, kMu, kCross, kFull };

using PairFunction = std::function<double(std::span<const double> lambda, std::span<const double> mu)>;
using SpectrumFunction = std::function<double(std::span<const double> lambda)>;

struct AdjointValue {
  double value = 0.0;
  double scale = 0.0;  // sum of the magnitudes of the individual difference terms
  double h = 0.0;
  double relative() const noexcept { return std::abs(value) / std::max(scale, 1e-300); }
};

namespace detail {

/// Dyson divergence-form terms on the block z[offset, offset+size).
template <class Eval>
void dyson_adjoint_terms(Eval& eval, std::vector<double>& z, std::size_t offset, std::size_t size, double beta,
                         double h, double f0, double& value, double& scale) {
  auto drift = [&](std::size_t i) {
    return dyson_drift(std::span<const double>(z.data() + offset, size), i - offset);
  };
  for (std::size_t i = offset; i < offset + size; ++i) {
    const double keep = z[i];
    z[i] = keep + h;
    const double fp = eval(z), dp = drift(i);
    z[i] = keep - h;
    const double fm = eval(z), dm = drift(i);
    z[i] = keep;
    const double second = (fp - 2.0 * f0 + fm) / (beta * h * h);
    const double flux = (dp * fp - dm * fm) / (2.0 * h);
    value += second - flux;
    scale += std::abs(second) + std::abs(flux);
  }
}

inline double cross_kernel(std::span<const double> lambda, std::span<const double> mu, std::size_t i, std::size_t j) {
  const double d = lambda[i] - mu[j];
  return poly_eval(mu, lambda[i]) * poly_eval(lambda, mu[j]) /
         (d * d * poly_derivative_at_root(lambda, i) * poly_derivative_at_root(mu, j));
}

/// Largest usable step: halve until every two-coordinate perturbation keeps the order.
inline double fit_step(double h, double min_gap) {
  if (!(min_gap > 0.0)) throw DomainError("adjoint stencil needs strictly separated points");
  for (int k = 0; k < 60 && !(2.0 * h < 0.8 * min_gap); ++k) h *= 0.5;
  if (!(2.0 * h < 0.8 * min_gap) || h <= 0.0) throw DomainError("adjoint stencil cannot fit inside the cell");
  return h;
}

/// Balances truncation against roundoff, which grows like eps / h^2.
inline double default_adjoint_step(double min_gap, bool richardson) {
  return (richardson ? 2e-2 : 3e-3) * std::min(min_gap, 1.0);
}

inline AdjointValue apply_pair_once(AdjointPart which, const PairFunction& f, const InterlacedPair& point,
                                    double beta, double h) {
  const std::size_t n = point.n();
  std::vector<double> z(point.lambda().values());
  z.insert(z.end(), point.mu().values().begin(), point.mu().values().end());
  auto eval = [&](const std::vector<double>& p) {
    const double v = f(std::span<const double>(p.data(), n), std::span<const double>(p.data() + n, n - 1));
    if (!std::isfinite(v)) throw NumericalFailure("adjoint: non-finite function value");
    return v;
  };
  const double f0 = eval(z);
  AdjointValue out;
  out.h = h;
  if (which == AdjointPart::kLambda || which == AdjointPart::kFull)
    dyson_adjoint_terms(eval, z, 0, n, beta, h, f0, out.value, out.scale);
  if (which == AdjointPart::kMu || which == AdjointPart::kFull)
    dyson_adjoint_terms(eval, z, n, n - 1, beta, h, f0, out.value, out.scale);
  if (which == AdjointPart::kCross || which == AdjointPart::kFull) {
    auto g = [&](std::size_t i, std::size_t j) {
      return cross_kernel(std::span<const double>(z.data(), n), std::span<const double>(z.data() + n, n - 1), i, j) *
             eval(z);
    };
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j + 1 < n; ++j) {
        const std::size_t jj = n + j;
        const double zi = z[i], zj = z[jj];
        double acc = 0.0;
        for (int si = -1; si <= 1; si += 2)
          for (int sj = -1; sj <= 1; sj += 2) {
            z[i] = zi + si * h;
            z[jj] = zj + sj * h;
            acc += si * sj * g(i, j);
          }
        z[i] = zi;
        z[jj] = zj;
        const double term = -(2.0 / beta) * acc / (4.0 * h * h);
        out.value += term;
        out.scale += std::abs(term);
      }
  }
  return out;
}

}  // namespace detail

/// Forward operator `which` applied to f at a strictly interlaced point. h <= 0 picks a
/// default; steps that would leave the cell are halved. With `richardson` the h and h/2
/// values are combined to cancel the O(h^2) error.
inline AdjointValue adjoint_generator_apply(AdjointPart which, const PairFunction& f, const InterlacedPair& point,
                                            double beta, double h = 0.0, bool richardson = false) {
  if (!(beta > 0.0)) throw InvalidInput("adjoint: beta must be positive");
  detail::require(point.n() >= 2, "adjoint on pairs needs n >= 2");
  if (!point.strict()) throw DomainError("adjoint needs strict interlacing");
  const double gap = point.min_gap();
  h = detail::fit_step(h > 0.0 ? h : detail::default_adjoint_step(gap, richardson), gap);
  AdjointValue a = detail::apply_pair_once(which, f, point, beta, h);
  if (!richardson) return a;
  const AdjointValue b = detail::apply_pair_once(which, f, point, beta, 0.5 * h);
  a.value = (4.0 * b.value - a.value) / 3.0;
  return a;
}

/// Dyson forward operator on a single spectrum.
inline AdjointValue adjoint_dyson_apply(const SpectrumFunction& f, std::span<const double> lambda, double beta,
                                        double h = 0.0, bool richardson = false) {
  if (!(beta > 0.0)) throw InvalidInput("adjoint: beta must be positive");
  const Spectrum s{std::vector<double>(lambda.begin(), lambda.end())};
  const double gap = s.size() > 1 ? s.min_gap() : 1.0;
  h = detail::fit_step(h > 0.0 ? h : detail::default_adjoint_step(gap, richardson), gap);
  auto once = [&](double step) {
    std::vector<double> z(lambda.begin(), lambda.end());
    auto eval = [&](const std::vector<double>& p) {
      const double v = f(p);
      if (!std::isfinite(v)) throw NumericalFailure("adjoint: non-finite function value");
      return v;
    };
    AdjointValue out;
    out.h = step;
    detail::dyson_adjoint_terms(eval, z, 0, z.size(), beta, step, eval(z), out.value, out.scale);
    return out;
  };
  AdjointValue a = once(h);
  if (!richardson) return a;
  a.value = (4.0 * once(0.5 * h).value - a.value) / 3.0;
  return a;
}

}  // namespace minor_dyson
