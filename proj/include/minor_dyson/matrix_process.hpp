#pragma once

// Matrix Ornstein-Uhlenbeck dynamics dB = -B dt + noise with invariant law
// proportional to exp(-(beta/2) Tr B^2).

#include <cmath>
#include <functional>
#include <vector>

#include "minor_dyson/algebra.hpp"
#include "minor_dyson/core/rng.hpp"

namespace minor_dyson {

struct MatrixPathConfig {
  std::size_t n = 2;
  Beta beta = Beta::kComplex;
  std::vector<double> t_grid{0.0};
  std::uint64_t seed = 0;
  std::uint64_t paths = 1;

  /// e^{-t} at grid point k.
  double c(std::size_t k) const { return std::exp(-t_grid.at(k)); }

  void validate() const {
    detail::require(n >= 1, "n must be at least 1");
    detail::require(paths >= 1, "paths must be at least 1");
    detail::require(!t_grid.empty() && t_grid.front() == 0.0, "time grid must start at 0");
    for (std::size_t k = 1; k < t_grid.size(); ++k)
      detail::require(t_grid[k] > t_grid[k - 1], "time grid must be strictly increasing");
  }
};

/// Exact transition over time t: e^{-t} B0 + sqrt(1 - e^{-2t}) G with G a Gaussian-ensemble draw.
inline SelfAdjointMatrix ou_step_exact(const SelfAdjointMatrix& b0, double t, RandomStream& rng) {
  if (!(t >= 0.0)) throw InvalidInput("ou_step_exact: negative duration");
  if (t == 0.0) return b0;
  const double c = std::exp(-t);
  const double s = std::sqrt(-std::expm1(-2.0 * t));
  const SelfAdjointMatrix g = sample_gaussian_ensemble(b0.n(), b0.beta(), rng);
  return b0.scaled_sum(c, g, s);
}

/// One path sampled exactly on the grid; path `index` owns its own stream.
inline std::vector<SelfAdjointMatrix> ou_path(const SelfAdjointMatrix& b0, const MatrixPathConfig& cfg,
                                              std::uint64_t index = 0) {
  cfg.validate();
  detail::require(b0.n() == cfg.n && b0.beta() == cfg.beta, "initial matrix does not match config");
  RandomStream rng(cfg.seed, index, StreamPurpose::kMatrixPath);
  std::vector<SelfAdjointMatrix> path;
  path.reserve(cfg.t_grid.size());
  path.push_back(b0);
  for (std::size_t k = 1; k < cfg.t_grid.size(); ++k)
    path.push_back(ou_step_exact(path.back(), cfg.t_grid[k] - cfg.t_grid[k - 1], rng));
  return path;
}

/// Default finite-difference step for the matrix generator.
inline double default_generator_step(const SelfAdjointMatrix& b) {
  return 1e-4 * (1.0 + b.max_abs());
}

/// Generator of the matrix process applied to f at B by central differences in every
/// free real parameter p: sum_p coef_p d^2f/dp^2 - p df/dp, with coef 1/beta on the
/// diagonal and 1/(2 beta) per off-diagonal component. With `richardson`, the h and
/// h/2 estimates are combined to cancel the O(h^2) term.
inline double apply_dyson_generator(const std::function<double(const SelfAdjointMatrix&)>& f,
                                    const SelfAdjointMatrix& b, double h = 0.0,
                                    bool richardson = false) {
  if (h <= 0.0) h = default_generator_step(b);
  const Beta beta = b.beta();
  const std::size_t n = b.n();
  std::vector<double> p = b.parameters();
  const double f0 = f(b);
  if (!std::isfinite(f0)) throw NumericalFailure("generator: non-finite function value");
  auto eval = [&](double step) {
    double total = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double keep = p[k];
      p[k] = keep + step;
      const double fp = f(SelfAdjointMatrix::from_parameters(beta, n, p));
      p[k] = keep - step;
      const double fm = f(SelfAdjointMatrix::from_parameters(beta, n, p));
      p[k] = keep;
      if (!std::isfinite(fp) || !std::isfinite(fm))
        throw NumericalFailure("generator: non-finite function value");
      const double coef = (k < n ? 1.0 : 0.5) / beta_value(beta);
      total += coef * (fp - 2.0 * f0 + fm) / (step * step) - keep * (fp - fm) / (2.0 * step);
    }
    return total;
  };
  const double a = eval(h);
  if (!richardson) return a;
  return (4.0 * eval(0.5 * h) - a) / 3.0;
}

/// Closed-form generator image of Tr B^2: 4N/beta - 2 Tr B^2 with N = n/2 + beta n(n-1)/4.
inline double dyson_generator_trace_square(const SelfAdjointMatrix& b) {
  const double n = static_cast<double>(b.n());
  const double beta = beta_value(b.beta());
  return 2.0 * n / beta + n * (n - 1.0) - 2.0 * b.trace_square();
}

/// E Tr B_t^2 given B_0: stationary value 2N/beta plus e^{-2t} times the initial excess.
inline double expected_trace_square(double trace_square0, std::size_t n, double beta, double t) {
  const double nn = static_cast<double>(n);
  const double stationary = nn / beta + nn * (nn - 1.0) / 2.0;
  return stationary + std::exp(-2.0 * t) * (trace_square0 - stationary);
}

}  // namespace minor_dyson
