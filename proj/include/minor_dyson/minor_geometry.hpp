#pragma once

// Geometry of two consecutive minors: interlacing, the bordered form of a
// self-adjoint matrix and the algebraic identities tying (lambda, mu) to the
// border weights r.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "minor_dyson/algebra.hpp"
#include "minor_dyson/core/report.hpp"
#include "minor_dyson/spectral_poly.hpp"

namespace minor_dyson {

/// True iff lambda_1 <= mu_1 <= lambda_2 <= ... <= mu_{n-1} <= lambda_n (strict if asked).
inline bool interlace_check(std::span<const double> lambda, std::span<const double> mu,
                            bool strict) {
  if (lambda.empty() || mu.size() + 1 != lambda.size()) return false;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (strict ? !(lambda[i] < mu[i] && mu[i] < lambda[i + 1])
               : !(lambda[i] <= mu[i] && mu[i] <= lambda[i + 1]))
      return false;
  }
  for (std::size_t i = 1; i < lambda.size(); ++i)
    if (strict ? !(lambda[i - 1] < lambda[i]) : !(lambda[i - 1] <= lambda[i])) return false;
  return true;
}

/// Spectra of a matrix (size n) and of its leading (n-1) minor.
class InterlacedPair {
 public:
  InterlacedPair() = default;
  InterlacedPair(Spectrum lambda, Spectrum mu) : lambda_(std::move(lambda)), mu_(std::move(mu)) {
    detail::require(lambda_.size() >= 1 && mu_.size() + 1 == lambda_.size(),
                    "interlaced pair needs sizes n and n-1");
    if (!interlace_check(lambda_.values(), mu_.values(), false))
      throw DomainError("spectra do not interlace");
  }
  InterlacedPair(std::vector<double> lambda, std::vector<double> mu)
      : InterlacedPair(Spectrum(std::move(lambda)), Spectrum(std::move(mu))) {}
  InterlacedPair(std::initializer_list<double> lambda, std::initializer_list<double> mu)
      : InterlacedPair(std::vector<double>(lambda), std::vector<double>(mu)) {}

  std::size_t n() const noexcept { return lambda_.size(); }
  const Spectrum& lambda() const noexcept { return lambda_; }
  const Spectrum& mu() const noexcept { return mu_; }
  bool strict() const noexcept { return interlace_check(lambda_.values(), mu_.values(), true); }

  /// Smallest distance between neighbours in the merged chain.
  double min_gap() const noexcept {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mu_.size(); ++i)
      g = std::min({g, mu_[i] - lambda_[i], lambda_[i + 1] - mu_[i]});
    if (mu_.size() == 0) g = 1.0;
    return g;
  }
  double diameter() const noexcept { return lambda_.diameter(); }

 private:
  Spectrum lambda_;
  Spectrum mu_;
};

/// Spectrum of B together with the spectrum of its leading (n-1) minor.
inline InterlacedPair spectral_pair(const SelfAdjointMatrix& b) {
  detail::require(b.n() >= 2, "spectral pair needs n >= 2");
  return InterlacedPair(eigenvalues(b), eigenvalues(b.leading_minor(b.n() - 1)));
}

/// Random strictly interlaced pair: 2n-1 sorted points on a random scale, taken alternately.
inline InterlacedPair sample_interlaced_pair(std::size_t n, RandomStream& rng) {
  const double scale = std::exp(2.0 * rng.uniform() - 1.0) * std::sqrt(static_cast<double>(n));
  const double shift = rng.normal();
  std::vector<double> pts(2 * n - 1);
  for (;;) {
    for (double& p : pts) p = shift + scale * (2.0 * rng.uniform() - 1.0);
    std::sort(pts.begin(), pts.end());
    bool ok = true;
    for (std::size_t i = 1; i < pts.size(); ++i) ok = ok && pts[i] - pts[i - 1] > 1e-6 * scale;
    if (ok) break;
  }
  std::vector<double> lambda(n), mu(n - 1);
  for (std::size_t i = 0; i < pts.size(); ++i) (i % 2 == 0 ? lambda[i / 2] : mu[i / 2]) = pts[i];
  return InterlacedPair(std::move(lambda), std::move(mu));
}

/// Degeneracy threshold relative to the spectral diameter.
inline constexpr double kDegeneracyTolerance = 1e-10;

inline void require_simple(const Spectrum& s, const std::string& what) {
  const double tol = kDegeneracyTolerance * std::max(s.diameter(), 1e-300);
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i] - s[i - 1] <= tol) throw DegenerateSpectrum(what + " has colliding eigenvalues");
}

struct BorderWeights {
  std::vector<double> r;  // r_1..r_{n-1} >= 0
  double r_n = 0.0;
};

/// r_k^2 = -P_n(mu_k) / P'_{n-1}(mu_k), r_n = sum lambda - sum mu.
inline BorderWeights r_from_spectra(const InterlacedPair& pair) {
  const auto& lam = pair.lambda().values();
  const auto& mu = pair.mu().values();
  require_simple(pair.mu(), "mu");
  BorderWeights w;
  w.r.resize(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const double r2 = -poly_eval(lam, mu[k]) / poly_derivative_at_root(mu, k);
    if (!(r2 >= 0.0)) {
      const double scale = std::pow(std::max(pair.diameter(), 1e-300), static_cast<double>(lam.size() - mu.size()) + 1.0);
      if (r2 < -1e-12 * scale || std::isnan(r2)) throw DomainError("negative border weight: spectra do not interlace");
    }
    w.r[k] = std::sqrt(std::max(r2, 0.0));
  }
  w.r_n = pair.lambda().sum() - pair.mu().sum();
  return w;
}

/// Coordinates of diag(U, 1) B diag(U, 1)^* = [[diag(mu), r u], [(r u)^*, r_n]].
struct BorderedForm {
  Spectrum mu;
  std::vector<double> r;
  double r_n = 0.0;
  std::vector<AlgebraElement> u;
  AlgebraMatrix conjugator;  // U, (n-1) x (n-1)

  Beta beta() const noexcept { return conjugator.beta(); }
  std::size_t n() const noexcept { return mu.size() + 1; }
};

/// The bordered matrix itself.
inline SelfAdjointMatrix bordered_matrix(const BorderedForm& f) {
  const std::size_t n = f.n();
  detail::require(f.r.size() == n - 1 && f.u.size() == n - 1, "bordered form has inconsistent sizes");
  SelfAdjointMatrix m(f.beta(), n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    m.set_diagonal(i, f.mu[i]);
    detail::require(f.r[i] >= 0.0, "border weights must be nonnegative");
    m.set_offdiagonal(i, n - 1, f.u[i] * f.r[i]);
  }
  m.set_diagonal(n - 1, f.r_n);
  return m;
}

inline AlgebraMatrix block_conjugator(const AlgebraMatrix& u) {
  const std::size_t n = u.rows() + 1;
  AlgebraMatrix full(u.beta(), n, n);
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = 0; j + 1 < n; ++j) full(i, j) = u(i, j);
  full(n - 1, n - 1) = AlgebraElement::unit(u.beta());
  return full;
}

inline BorderedForm bordered_form(const SelfAdjointMatrix& b) {
  const std::size_t n = b.n();
  detail::require(n >= 1, "bordered_form needs n >= 1");
  const Beta beta = b.beta();
  BorderedForm f;
  f.r_n = b(n - 1, n - 1).re();
  if (n == 1) {
    f.conjugator = AlgebraMatrix(beta, 0, 0);
    return f;
  }
  const EigenDecomposition ed = eigen_decompose(b.leading_minor(n - 1));
  require_simple(ed.values, "leading minor");
  f.mu = ed.values;
  f.conjugator = ed.vectors.adjoint();
  f.r.resize(n - 1);
  f.u.resize(n - 1, AlgebraElement::unit(beta));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    AlgebraElement w(beta);
    for (std::size_t k = 0; k + 1 < n; ++k) w += algebra_mul(f.conjugator(i, k), b(k, n - 1));
    f.r[i] = w.abs();
    if (f.r[i] > 0.0) f.u[i] = w * (1.0 / f.r[i]);
  }
  return f;
}

/// Inverse of bordered_form: diag(U, 1)^* B_bord diag(U, 1).
inline SelfAdjointMatrix reconstruct(const BorderedForm& f) {
  if (f.n() == 1) return SelfAdjointMatrix::diagonal(f.beta(), {f.r_n});
  const AlgebraMatrix c = block_conjugator(f.conjugator);
  return SelfAdjointMatrix(c.adjoint() * bordered_matrix(f).matrix() * c, 1e-10);
}

/// Border form with identity conjugator and chosen unit directions, built from spectra.
inline BorderedForm border_from_spectra(const InterlacedPair& pair, Beta beta,
                                        std::vector<AlgebraElement> u = {}) {
  const BorderWeights w = r_from_spectra(pair);
  BorderedForm f;
  f.mu = pair.mu();
  f.r = w.r;
  f.r_n = w.r_n;
  if (u.empty()) u.assign(pair.n() - 1, AlgebraElement::unit(beta));
  detail::require(u.size() == pair.n() - 1, "need n-1 unit directions");
  f.u = std::move(u);
  f.conjugator = AlgebraMatrix::identity(beta, pair.n() - 1);
  return f;
}

/// P_{n-1}(lambda_a) / P'_n(lambda_a)
inline double lambda_prefactor(std::span<const double> lambda, std::span<const double> mu,
                               std::size_t a) noexcept {
  return poly_eval(mu, lambda[a]) / poly_derivative_at_root(lambda, a);
}

namespace detail {

inline double relative(double residual, double scale) noexcept {
  return std::abs(residual) / std::max(scale, std::numeric_limits<double>::min());
}

}  // namespace detail

/// Residuals of the sum-of-squares and product formulas for r, the two families of
/// resolvent identities at each lambda_l, and the residue identity for the lambda
/// quadratic variation. All residuals are relative to the magnitude of the terms.
inline ExperimentReport identity_suite(const InterlacedPair& pair, double beta = 2.0) {
  detail::require(pair.strict(), "identity_suite needs strict interlacing");
  const auto& lam = pair.lambda().values();
  const auto& mu = pair.mu().values();
  const std::size_t n = lam.size();
  const BorderWeights w = r_from_spectra(pair);
  const double k2 = 2.0 / beta;

  ExperimentReport rep;
  rep.name = "identity_suite";
  rep.param("n", static_cast<std::int64_t>(n));
  rep.param("beta", beta);

  double s_r2 = 0.0, s_l2 = 0.0, s_m2 = 0.0;
  for (double r : w.r) s_r2 += r * r;
  for (double l : lam) s_l2 += l * l;
  for (double m : mu) s_m2 += m * m;
  const double sq_lhs = s_r2 + 0.5 * w.r_n * w.r_n;
  const double sq_rhs = 0.5 * (s_l2 - s_m2);
  const double sum_of_squares = detail::relative(sq_lhs - sq_rhs, sq_lhs + 0.5 * (s_l2 + s_m2));

  double log_prod = 0.0;
  for (double r : w.r) log_prod += 2.0 * std::log(r);
  const double log_rhs = log_abs_mixed_vandermonde(lam, mu) - 2.0 * log_abs_vandermonde(mu);
  const double product = std::abs(std::expm1(log_prod - log_rhs));

  double resolvent = 0.0, derivative = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    double s = 0.0, sabs = 0.0, q = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double t = w.r[i] * w.r[i] / (lam[l] - mu[i]);
      s += t;
      sabs += std::abs(t);
      const double v = w.r[i] / (lam[l] - mu[i]);
      q += v * v;
    }
    resolvent = std::max(resolvent, detail::relative(s + w.r_n - lam[l],
                                                     sabs + std::abs(w.r_n) + std::abs(lam[l])));
    const double lhs = 1.0 / lambda_prefactor(lam, mu, l);
    derivative = std::max(derivative, detail::relative(lhs - q - 1.0, std::abs(lhs) + q + 1.0));
  }

  double residue = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t g = 0; g < n; ++g) {
      const double pa = lambda_prefactor(lam, mu, a), pg = lambda_prefactor(lam, mu, g);
      double total = 1.0, absolute = 1.0;
      auto add = [&](double t) {
        total += t;
        absolute += std::abs(t);
      };
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const double da = lam[a] - mu[i], dg = lam[g] - mu[i];
        const double ri2 = w.r[i] * w.r[i];
        for (std::size_t j = i + 1; j + 1 < n; ++j) {
          const double rj2 = w.r[j] * w.r[j];
          add(2.0 * ri2 * rj2 / (da * (lam[a] - mu[j]) * dg * (lam[g] - mu[j])));
        }
        add(ri2 * ri2 / (da * da * dg * dg));
        add(2.0 * ri2 / (da * dg));
      }
      const double value = k2 * pa * pg * total;
      const double target = a == g ? k2 : 0.0;
      residue = std::max(residue, detail::relative(value - target, k2 * std::abs(pa * pg) * absolute));
    }
  }

  const double signature = mixed_vandermonde(lam, mu) * ((n * (n - 1) / 2) % 2 == 0 ? 1.0 : -1.0);

  rep.stat("sum_of_squares_residual", sum_of_squares);
  rep.stat("product_residual", product);
  rep.stat("resolvent_residual", resolvent);
  rep.stat("resolvent_derivative_residual", derivative);
  rep.stat("residue_residual", residue);
  rep.stat("signed_mixed_vandermonde", signature);
  constexpr double tol = 1e-8;
  rep.check_below("sum_of_squares", sum_of_squares, tol);
  rep.check_below("product", product, tol);
  rep.check_below("resolvent", resolvent, tol);
  rep.check_below("resolvent_derivative", derivative, tol);
  rep.check_below("residue", residue, tol);
  rep.check("mixed_vandermonde_signature", signature, signature >= 0.0);
  return rep;
}

struct JacobianComparison {
  double analytic = 0.0;
  double numeric = 0.0;
  double step = 0.0;
  double relative_error() const noexcept {
    return std::abs(analytic - numeric) / std::abs(analytic);
  }
};

/// (r_1^2, ..., r_{n-1}^2, r_n) as functions of lambda at fixed mu.
inline std::vector<double> border_coordinates(std::span<const double> lambda, std::span<const double> mu) {
  std::vector<double> c(lambda.size());
  for (std::size_t k = 0; k < mu.size(); ++k)
    c[k] = -poly_eval(lambda, mu[k]) / poly_derivative_at_root(mu, k);
  double s = 0.0;
  for (double l : lambda) s += l;
  for (double m : mu) s -= m;
  c[lambda.size() - 1] = s;
  return c;
}

/// det d(r_1^2, ..., r_{n-1}^2, r_n)/d(lambda) at fixed mu: (-1)^{n-1} Delta_n(lambda)/Delta_{n-1}(mu)
/// against a central finite-difference determinant.
inline JacobianComparison jacobian_check(const InterlacedPair& pair) {
  detail::require(pair.strict(), "jacobian_check needs strict interlacing");
  const std::size_t n = pair.n();
  const auto& mu = pair.mu().values();
  std::vector<double> lam = pair.lambda().values();
  JacobianComparison out;
  out.analytic = ((n - 1) % 2 == 0 ? 1.0 : -1.0) * vandermonde(lam) / vandermonde(mu);
  const double diam = std::max(pair.diameter(), 1e-300);
  out.step = std::min(pair.min_gap() * 1e-3, 1e-6 * diam);
  const double h = out.step;
  Eigen::MatrixXd jac(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const double keep = lam[j];
    lam[j] = keep + h;
    const auto plus = border_coordinates(lam, mu);
    lam[j] = keep - h;
    const auto minus = border_coordinates(lam, mu);
    lam[j] = keep;
    for (std::size_t i = 0; i < n; ++i)
      jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (plus[i] - minus[i]) / (2.0 * h);
  }
  out.numeric = jac.determinant();
  return out;
}

/// The Cauchy-type matrix Gamma with rows (1/(lambda_i - mu_1), ..., 1/(lambda_i - mu_{n-1}), 1).
inline Eigen::MatrixXd cauchy_gamma(const InterlacedPair& pair) {
  const std::size_t n = pair.n();
  Eigen::MatrixXd g(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j + 1 < n; ++j)
      g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0 / (pair.lambda()[i] - pair.mu()[j]);
    g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n - 1)) = 1.0;
  }
  return g;
}

/// Closed form (-1)^{(n-1)(n+2)/2} Delta_n(lambda) Delta_{n-1}(mu) / Delta_n(lambda, mu).
inline double cauchy_gamma_determinant(const InterlacedPair& pair) {
  const std::size_t n = pair.n();
  const auto& lam = pair.lambda().values();
  const auto& mu = pair.mu().values();
  const std::size_t e = (n - 1) * (n + 2) / 2;
  return (e % 2 == 0 ? 1.0 : -1.0) * vandermonde(lam) * vandermonde(mu) / mixed_vandermonde(lam, mu);
}

}  // namespace minor_dyson
