#pragma once

// F(X, Y) = int_{U(n)} exp(Tr X U Y U^*) dU = prod_{p<n} p! det[e^{x_i y_j}] / (Delta(x) Delta(y)).

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

#include "minor_dyson/algebra/spectral.hpp"
#include "minor_dyson/densities/constants.hpp"
#include "minor_dyson/spectral_poly.hpp"

namespace minor_dyson {

/// sign * exp(log_abs)
struct LogValue {
  double log_abs = -std::numeric_limits<double>::infinity();
  int sign = 0;
  double value() const noexcept { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }
};

/// Relative node gap below which the divided-difference form is used.
inline constexpr double kConfluentGap = 1e-6;
/// Estimated relative error above which the divided-difference form is also tried.
inline constexpr double kCancellationGuard = 1e-12;

namespace detail {

inline double min_gap(std::span<const double> x) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < s.size(); ++i) g = std::min(g, s[i] - s[i - 1]);
  return g;
}

inline double span_diameter(std::span<const double> x) {
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *hi - *lo;
}

inline double log_superfactorial(std::size_t n) {
  double s = 0.0;
  for (std::size_t p = 1; p < n; ++p) s += log_factorial(p);
  return s;
}

/// log|det| with sign; `rel_error` receives eps * source_max * sum |m^{-1}|, a first-order
/// bound on the relative determinant error when every entry carries an absolute error
/// of eps * source_max.
inline LogValue log_det(const Eigen::MatrixXd& m, double source_max = 0.0, double* rel_error = nullptr) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m.rows(), m.cols());
  lu.setThreshold(std::numeric_limits<double>::min());
  lu.compute(m);
  if (rel_error != nullptr) {
    *rel_error = lu.isInvertible()
                     ? std::numeric_limits<double>::epsilon() * source_max * lu.inverse().cwiseAbs().sum()
                     : std::numeric_limits<double>::infinity();
  }
  const Eigen::MatrixXd& u = lu.matrixLU();
  LogValue r{0.0, static_cast<int>(lu.permutationP().determinant() * lu.permutationQ().determinant())};
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const double d = u(i, i);
    if (d == 0.0) return {};
    r.log_abs += std::log(std::abs(d));
    if (d < 0.0) r.sign = -r.sign;
  }
  return r;
}

}  // namespace detail

/// Determinant-ratio form with rows rescaled to keep the exponentials in range.
inline LogValue hciz_log_determinant_form(std::span<const double> x, std::span<const double> y,
                                          double* rel_error = nullptr) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd m(n, n);
  double shift = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double row_max = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) row_max = std::max(row_max, x[i] * y[j]);
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = std::exp(x[i] * y[j] - row_max);
    shift += row_max;
  }
  LogValue r = detail::log_det(m, 1.0, rel_error);
  if (r.sign == 0) return r;
  const double vx = vandermonde(x), vy = vandermonde(y);
  if (vx == 0.0 || vy == 0.0) throw DomainError("hciz: coincident nodes in the determinant form");
  r.log_abs += shift + detail::log_superfactorial(x.size()) - std::log(std::abs(vx)) - std::log(std::abs(vy));
  if ((vx < 0.0) != (vy < 0.0)) r.sign = -r.sign;
  return r;
}

/// Confluent form: det of the divided differences e^{xy}[x_0..x_i; y_0..y_j], read off
/// exp(Z_y (x) Z_x) with Z bidiagonal (nodes on the diagonal, ones above it).
inline LogValue hciz_log_divided_difference_form(std::span<const double> x, std::span<const double> y,
                                                  double* rel_error = nullptr) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd zx = Eigen::MatrixXd::Zero(n, n), zy = Eigen::MatrixXd::Zero(n, n);
  double shift = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    zx(i, i) = x[i];
    zy(i, i) = y[i];
    if (i + 1 < n) zx(i, i + 1) = zy(i, i + 1) = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) shift = std::max(shift, x[i] * y[j]);
  }
  Eigen::MatrixXd k = Eigen::kroneckerProduct(zy, zx);
  k.diagonal().array() -= shift;
  const Eigen::MatrixXd e = k.exp();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) d(i, j) = e(0, j * n + i);
  // Error of the exponential itself can grow like exp(||K - s||_1) for non-normal K.
  const double growth = std::exp(std::min(k.cwiseAbs().colwise().sum().maxCoeff(), 700.0));
  LogValue r = detail::log_det(d, e.cwiseAbs().maxCoeff() * growth, rel_error);
  if (r.sign == 0) return r;
  r.log_abs += static_cast<double>(n) * shift + detail::log_superfactorial(x.size());
  return r;
}

/// True when some node gap is below kConfluentGap of the spread, where the determinant
/// ratio is unusable.
inline bool hciz_confluent(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2) return false;
  return detail::min_gap(x) <= kConfluentGap * detail::span_diameter(x) ||
         detail::min_gap(y) <= kConfluentGap * detail::span_diameter(y);
}

/// Both arguments are centred first, using
/// F(X' + a, Y' + b) = exp(b Tr X' + a Tr Y' + n a b) F(X', Y').
inline LogValue hciz_log(std::span<const double> x, std::span<const double> y) {
  detail::require(x.size() == y.size() && !x.empty(), "hciz: arguments must have equal positive size");
  const auto n = static_cast<double>(x.size());
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    a += x[i] / n;
    b += y[i] / n;
  }
  std::vector<double> xc(x.begin(), x.end()), yc(y.begin(), y.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xc[i] -= a;
    yc[i] -= b;
  }
  LogValue r;
  if (hciz_confluent(xc, yc)) {
    r = hciz_log_divided_difference_form(xc, yc);
  } else {
    // The determinant ratio is preferred; when its error estimate is poor the
    // divided-difference form is tried and the better-conditioned one kept.
    double err_det = 0.0, err_dd = 0.0;
    r = hciz_log_determinant_form(xc, yc, &err_det);
    if (!(err_det < kCancellationGuard)) {
      const LogValue alt = hciz_log_divided_difference_form(xc, yc, &err_dd);
      if (err_dd < err_det) r = alt;
    }
  }
  // Tr X' = Tr Y' = 0, so only the n a b term survives.
  r.log_abs += n * a * b;
  return r;
}

inline double hciz(std::span<const double> x, std::span<const double> y) { return hciz_log(x, y).value(); }

inline double hciz(const Spectrum& x, const Spectrum& y) { return hciz(x.values(), y.values()); }

}  // namespace minor_dyson
