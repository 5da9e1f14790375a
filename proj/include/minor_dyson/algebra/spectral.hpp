#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>
#include <vector>

#include "minor_dyson/algebra/jacobi.hpp"
#include "minor_dyson/algebra/matrix.hpp"

namespace minor_dyson {

/// Ascending real eigenvalues.
class Spectrum {
 public:
  Spectrum() = default;
  /// Values must already be weakly increasing.
  explicit Spectrum(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t i = 1; i < values_.size(); ++i)
      detail::require(values_[i - 1] <= values_[i], "spectrum must be sorted ascending");
  }
  Spectrum(std::initializer_list<double> values) : Spectrum(std::vector<double>(values)) {}

  static Spectrum from_unsorted(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return Spectrum(std::move(values));
  }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  double sum() const noexcept {
    double s = 0.0;
    for (double x : values_) s += x;
    return s;
  }
  double diameter() const noexcept {
    return values_.empty() ? 0.0 : values_.back() - values_.front();
  }
  double min_gap() const noexcept {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < values_.size(); ++i) g = std::min(g, values_[i] - values_[i - 1]);
    return g;
  }

 private:
  std::vector<double> values_;
};

/// Complex 2n x 2n representation of a quaternion self-dual matrix.
inline Eigen::MatrixXcd embed_quaternion_matrix(const SelfAdjointMatrix& b) {
  if (b.beta() != Beta::kQuaternion)
    throw InvalidInput("embed_quaternion_matrix requires beta = 4");
  return b.to_complex();
}

namespace detail {

/// Collapses the doubly degenerate spectrum of a quaternion embedding.
inline std::vector<double> collapse_pairs(const Eigen::VectorXd& doubled, double rel_tol) {
  const Eigen::Index m = doubled.size();
  if (m % 2 != 0) throw NumericalFailure("quaternion embedding has odd dimension");
  const double scale = std::max(doubled(m - 1) - doubled(0), doubled.cwiseAbs().maxCoeff());
  std::vector<double> out(static_cast<std::size_t>(m / 2));
  for (Eigen::Index k = 0; k < m / 2; ++k) {
    const double a = doubled(2 * k), b = doubled(2 * k + 1);
    if (b - a > rel_tol * scale)
      throw NumericalFailure("quaternion eigenvalues failed to pair: gap " + std::to_string(b - a));
    out[static_cast<std::size_t>(k)] = 0.5 * (a + b);
  }
  return out;
}

}  // namespace detail

inline constexpr double kPairingTolerance = 1e-7;

inline Spectrum eigenvalues(const SelfAdjointMatrix& b, double pairing_tol = kPairingTolerance) {
  if (b.n() == 0) return Spectrum{};
  const HermitianEigen e = jacobi_eigen(b.to_complex(), false);
  if (b.beta() == Beta::kQuaternion) return Spectrum(detail::collapse_pairs(e.values, pairing_tol));
  return Spectrum(std::vector<double>(e.values.data(), e.values.data() + e.values.size()));
}

/// Spectrum together with an algebra-valued unitary whose columns are eigenvectors:
/// B = U diag(values) U^*.
struct EigenDecomposition {
  Spectrum values;
  AlgebraMatrix vectors;
};

inline EigenDecomposition eigen_decompose(const SelfAdjointMatrix& b,
                                          double pairing_tol = kPairingTolerance) {
  const std::size_t n = b.n();
  const HermitianEigen e = jacobi_eigen(b.to_complex(), true);
  EigenDecomposition out;
  out.vectors = AlgebraMatrix(b.beta(), n, n);
  if (b.beta() != Beta::kQuaternion) {
    out.values = Spectrum(std::vector<double>(e.values.data(), e.values.data() + e.values.size()));
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        const auto x = e.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        AlgebraElement z(b.beta());
        z[0] = x.real();
        if (b.beta() == Beta::kComplex) z[1] = x.imag();
        out.vectors(i, j) = z;
      }
    return out;
  }
  out.values = Spectrum(detail::collapse_pairs(e.values, pairing_tol));
  // One complex eigenvector per degenerate pair gives a quaternion column q with
  // q_i = (Re a, Im a, -Re b, Im b), a = x_{2i}, b = x_{2i+1}.
  for (std::size_t j = 0; j < n; ++j) {
    const auto col = static_cast<Eigen::Index>(2 * j);
    for (std::size_t i = 0; i < n; ++i) {
      const auto a = e.vectors(static_cast<Eigen::Index>(2 * i), col);
      const auto c = e.vectors(static_cast<Eigen::Index>(2 * i + 1), col);
      out.vectors(i, j) = AlgebraElement(Beta::kQuaternion, {a.real(), a.imag(), -c.real(), c.imag()});
    }
  }
  return out;
}

}  // namespace minor_dyson
