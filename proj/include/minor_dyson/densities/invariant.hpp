#pragma once

// Invariant laws of the eigenvalue process and of the (lambda, mu) pair, and the
// beta = 2 eigenvalue transition density. Everything is assembled in log space.

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "minor_dyson/core/report.hpp"
#include "minor_dyson/densities/constants.hpp"
#include "minor_dyson/densities/hciz.hpp"
#include "minor_dyson/densities/quadrature.hpp"
#include "minor_dyson/minor_geometry.hpp"

namespace minor_dyson {

namespace detail {

inline bool weakly_sorted(std::span<const double> x) noexcept {
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] >= x[i - 1])) return false;
  return true;
}

inline double log_or_minus_inf(double x) noexcept {
  return x == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(std::abs(x));
}

}  // namespace detail

/// n! C^{-1} exp(-(beta/2) sum lambda^2) |Delta(lambda)|^beta, a probability density on the
/// ordered chamber, with the constant computed once.
class InvariantLambdaDensity {
 public:
  InvariantLambdaDensity(std::size_t n, double beta) : n_(n), beta_(beta) {
    const Constants k = constants(n, beta);
    log_norm_ = k.log_chamber_factor() + k.log_c_inv;
  }

  /// -inf on coincidences.
  double log(std::span<const double> lambda) const {
    detail::require(lambda.size() == n_, "invariant density: wrong number of eigenvalues");
    if (!detail::weakly_sorted(lambda)) throw InvalidInput("invariant density expects sorted eigenvalues");
    double sq = 0.0;
    for (double l : lambda) sq += l * l;
    return log_norm_ - 0.5 * beta_ * sq + beta_ * detail::log_or_minus_inf(vandermonde(lambda));
  }
  double operator()(std::span<const double> lambda) const { return std::exp(log(lambda)); }

 private:
  std::size_t n_;
  double beta_;
  double log_norm_ = 0.0;
};

inline double log_invariant_density_lambda(std::span<const double> lambda, double beta) {
  detail::require(!lambda.empty(), "invariant density needs at least one eigenvalue");
  return InvariantLambdaDensity(lambda.size(), beta).log(lambda);
}

inline double invariant_density_lambda(std::span<const double> lambda, double beta) {
  return std::exp(log_invariant_density_lambda(lambda, beta));
}

inline double invariant_density_lambda(const Spectrum& lambda, double beta) {
  return invariant_density_lambda(lambda.values(), beta);
}

enum class OutsidePolicy { kThrow, kZero };

/// log of K exp(-(beta/2) sum lambda^2) |Delta(lambda) Delta(mu)| |Delta(lambda, mu)|^{beta/2 - 1}
/// with K = n! C^{-1} Gamma(n beta/2) / Gamma(beta/2)^n, the normalizer on the interlacing cell.
inline double log_invariant_density_pair(std::span<const double> lambda, std::span<const double> mu, double beta,
                                         OutsidePolicy outside = OutsidePolicy::kThrow) {
  detail::require(!lambda.empty() && mu.size() + 1 == lambda.size(), "pair density needs sizes n and n-1");
  if (!interlace_check(lambda, mu, false)) {
    if (outside == OutsidePolicy::kZero) return -std::numeric_limits<double>::infinity();
    throw DomainError("pair density evaluated off the interlacing cell");
  }
  const Constants k = constants(lambda.size(), beta);
  double sq = 0.0;
  for (double l : lambda) sq += l * l;
  const double mixed = detail::log_or_minus_inf(mixed_vandermonde(lambda, mu));
  const double vdm = detail::log_or_minus_inf(vandermonde(lambda)) + detail::log_or_minus_inf(vandermonde(mu));
  if (vdm == -std::numeric_limits<double>::infinity()) return vdm;
  // At a boundary the mixed factor is 0^{beta/2-1}: 0 for beta > 2, 1 at beta = 2, +inf below.
  const double mixed_term = beta == 2.0 ? 0.0 : (0.5 * beta - 1.0) * mixed;
  return k.log_pair_normalizer() - 0.5 * beta * sq + vdm + mixed_term;
}

inline double invariant_density_pair(std::span<const double> lambda, std::span<const double> mu, double beta,
                                     OutsidePolicy outside = OutsidePolicy::kThrow) {
  return std::exp(log_invariant_density_pair(lambda, mu, beta, outside));
}

inline double invariant_density_pair(const InterlacedPair& pair, double beta) {
  return invariant_density_pair(pair.lambda().values(), pair.mu().values(), beta);
}

/// Same law with the printed prefactor Zhat^{-1} vol(S^{beta-1})^{2(n-1)} (beta in {1,2,4}).
inline double invariant_density_pair_printed(const InterlacedPair& pair, double beta) {
  const Constants k = constants(pair.n(), beta);
  return invariant_density_pair(pair, beta) / k.pair_correction();
}

/// log of the beta = 2 transition density of the ordered eigenvalues from lambda_bar to
/// lambda over time t: n! C^{-1} (1-c^2)^{-N} exp(-(beta/(2(1-c^2))) sum (lambda^2 + c^2 lambda_bar^2))
/// F(beta c/(1-c^2) lambda, lambda_bar) |Delta(lambda)|^beta with c = e^{-t}.
inline double log_transition_density_lambda(double t, std::span<const double> lambda_bar,
                                            std::span<const double> lambda) {
  if (!(t > 0.0)) throw InvalidInput("transition density needs t > 0");
  detail::require(!lambda.empty() && lambda.size() == lambda_bar.size(), "transition density: size mismatch");
  if (!detail::weakly_sorted(lambda) || !detail::weakly_sorted(lambda_bar))
    throw InvalidInput("transition density expects sorted eigenvalues");
  constexpr double beta = 2.0;
  const Constants k = constants(lambda.size(), beta);
  const double vdm = detail::log_or_minus_inf(vandermonde(lambda));
  if (vdm == -std::numeric_limits<double>::infinity()) return vdm;
  const double c = std::exp(-t);
  const double one_minus_c2 = -std::expm1(-2.0 * t);
  const double a = beta * c / one_minus_c2;
  double quad = 0.0;
  std::vector<double> x(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    quad += lambda[i] * lambda[i] + c * c * lambda_bar[i] * lambda_bar[i];
    x[i] = a * lambda[i];
  }
  const LogValue f = hciz_log(x, lambda_bar);
  if (f.sign <= 0) throw NumericalFailure("transition density: HCIZ integral is not positive");
  return k.log_chamber_factor() + k.log_c_inv - k.N * std::log(one_minus_c2) - beta * quad / (2.0 * one_minus_c2) +
         f.log_abs + beta * vdm;
}

inline double transition_density_lambda(double t, std::span<const double> lambda_bar, std::span<const double> lambda) {
  return std::exp(log_transition_density_lambda(t, lambda_bar, lambda));
}

/// Half-width of a box holding all but ~e^{-30} of the invariant mass.
inline double invariant_support_bound(std::size_t n, double beta) {
  return (std::sqrt(2.0 * static_cast<double>(n)) + 8.0) / std::sqrt(beta);
}

/// Integral of g(lambda) * density(lambda) over the ordered chamber for n in {1, 2, 3}.
template <class Density, class G>
double chamber_integral(std::size_t n, double bound, Density&& density, G&& g,
                        const QuadratureOptions& opt = {}) {
  const double lo = -bound;
  switch (n) {
    case 1:
      return integrate_1d(
          [&](double x) {
            const double l[1] = {x};
            return g(std::span<const double>(l, 1)) * density(std::span<const double>(l, 1));
          },
          lo, bound, opt);
    case 2:
      return integrate_2d(
          [&](double x2, double x1) {
            const double l[2] = {x1, x2};
            return g(std::span<const double>(l, 2)) * density(std::span<const double>(l, 2));
          },
          lo, bound, [&](double) { return lo; }, [](double x2) { return x2; }, opt);
    case 3:
      return integrate_3d(
          [&](double x3, double x2, double x1) {
            const double l[3] = {x1, x2, x3};
            return g(std::span<const double>(l, 3)) * density(std::span<const double>(l, 3));
          },
          lo, bound, [&](double) { return lo; }, [](double x3) { return x3; },
          [&](double, double) { return lo; }, [](double, double x2) { return x2; }, opt);
    default:
      throw InvalidInput("chamber quadrature is limited to n <= 3");
  }
}

/// Moments of the invariant eigenvalue law by quadrature.
struct SpectralMoments {
  double mass = 0.0;
  double sum_mean = 0.0;     // E sum x
  double sum_second = 0.0;   // E (sum x)^2
  double sq_mean = 0.0;      // E sum x^2
  double sq_second = 0.0;    // E (sum x^2)^2
};

inline SpectralMoments invariant_moments_by_quadrature(std::size_t n, double beta, double tolerance = 1e-9) {
  const QuadratureOptions opt{tolerance, 12};
  const double bound = invariant_support_bound(n, beta);
  const InvariantLambdaDensity density(n, beta);
  auto sum = [](std::span<const double> l) {
    double s = 0.0;
    for (double x : l) s += x;
    return s;
  };
  auto sq = [](std::span<const double> l) {
    double s = 0.0;
    for (double x : l) s += x * x;
    return s;
  };
  SpectralMoments m;
  m.mass = chamber_integral(n, bound, density, [](std::span<const double>) { return 1.0; }, opt);
  m.sum_mean = chamber_integral(n, bound, density, sum, opt);
  m.sum_second = chamber_integral(n, bound, density, [&](std::span<const double> l) { return sum(l) * sum(l); }, opt);
  m.sq_mean = chamber_integral(n, bound, density, sq, opt);
  m.sq_second = chamber_integral(n, bound, density, [&](std::span<const double> l) { return sq(l) * sq(l); }, opt);
  return m;
}

/// Integral over mu of the pair density at fixed lambda (n = 2 or 3).
inline double pair_density_mu_marginal(std::span<const double> lambda, double beta, const QuadratureOptions& opt = {}) {
  auto dens = [&](std::span<const double> mu) {
    return invariant_density_pair(lambda, mu, beta, OutsidePolicy::kZero);
  };
  if (lambda.size() == 2)
    return integrate_1d([&](double m) { return dens(std::span<const double>(&m, 1)); }, lambda[0], lambda[1], opt);
  if (lambda.size() == 3)
    return integrate_2d(
        [&](double m1, double m2) {
          const double mu[2] = {m1, m2};
          return dens(std::span<const double>(mu, 2));
        },
        lambda[0], lambda[1], [&](double) { return lambda[1]; }, [&](double) { return lambda[2]; }, opt);
  throw InvalidInput("mu marginal quadrature is limited to n in {2, 3}");
}

/// Pair constant as printed against the normalizer obtained from quadrature-checked
/// marginalization; the correction factor is reported rather than folded in silently.
inline ExperimentReport pair_constant_report(std::size_t n, double beta) {
  const Constants k = constants(n, beta);
  ExperimentReport r;
  r.name = "pair_constant";
  r.param("n", static_cast<std::int64_t>(n));
  r.param("beta", beta);
  r.stat("N", k.N);
  r.stat("log_c_inv", k.log_c_inv);
  r.stat("log_pair_normalizer", k.log_pair_normalizer());
  if (std::isfinite(k.log_zhat_inv)) {
    r.stat("log_zhat_inv_printed", k.log_zhat_inv);
    r.stat("pair_correction_factor", k.pair_correction());
    r.stat("pair_correction_closed_form", k.pair_correction_closed_form());
  }
  return r;
}

}  // namespace minor_dyson
