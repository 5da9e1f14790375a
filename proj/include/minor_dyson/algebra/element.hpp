#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "minor_dyson/core/error.hpp"

namespace minor_dyson {

/// Dyson index of a classical matrix ensemble: real, complex or quaternion entries.
enum class Beta : int { kReal = 1, kComplex = 2, kQuaternion = 4 };

inline constexpr int components(Beta b) noexcept { return static_cast<int>(b); }
inline constexpr double beta_value(Beta b) noexcept { return static_cast<double>(b); }

inline Beta to_beta(double beta) {
  if (beta == 1.0) return Beta::kReal;
  if (beta == 2.0) return Beta::kComplex;
  if (beta == 4.0) return Beta::kQuaternion;
  throw InvalidInput("beta must be 1, 2 or 4 for matrix models, got " + std::to_string(beta));
}

inline bool is_classical_beta(double beta) noexcept {
  return beta == 1.0 || beta == 2.0 || beta == 4.0;
}

/// An element of R, C or H stored as beta real components z0 + z1 e1 + z2 e2 + z3 e3.
/// Unused components are kept at zero.
class AlgebraElement {
 public:
  AlgebraElement() = default;
  explicit AlgebraElement(Beta beta) : beta_(beta) {}
  AlgebraElement(Beta beta, std::array<double, 4> z) : beta_(beta), z_(z) {
    for (int r = components(beta); r < 4; ++r)
      detail::require(z_[r] == 0.0, "component beyond the algebra dimension must be zero");
  }

  static AlgebraElement real(Beta beta, double x) { return {beta, {x, 0, 0, 0}}; }
  static AlgebraElement unit(Beta beta) { return real(beta, 1.0); }
  /// Imaginary unit e_r, r in 1..beta-1.
  static AlgebraElement basis(Beta beta, int r) {
    detail::require(r >= 0 && r < components(beta), "basis index out of range");
    std::array<double, 4> z{};
    z[r] = 1.0;
    return {beta, z};
  }

  Beta beta() const noexcept { return beta_; }
  double operator[](int r) const noexcept { return z_[r]; }
  double& operator[](int r) noexcept { return z_[r]; }
  const std::array<double, 4>& data() const noexcept { return z_; }

  double re() const noexcept { return z_[0]; }
  double norm2() const noexcept {
    return z_[0] * z_[0] + z_[1] * z_[1] + z_[2] * z_[2] + z_[3] * z_[3];
  }
  double abs() const noexcept { return std::sqrt(norm2()); }

  AlgebraElement conj() const noexcept {
    AlgebraElement c = *this;
    c.z_[1] = -c.z_[1];
    c.z_[2] = -c.z_[2];
    c.z_[3] = -c.z_[3];
    return c;
  }

  AlgebraElement& operator+=(const AlgebraElement& o) {
    check_same(o);
    for (int r = 0; r < 4; ++r) z_[r] += o.z_[r];
    return *this;
  }
  AlgebraElement& operator-=(const AlgebraElement& o) {
    check_same(o);
    for (int r = 0; r < 4; ++r) z_[r] -= o.z_[r];
    return *this;
  }
  AlgebraElement& operator*=(double s) noexcept {
    for (double& x : z_) x *= s;
    return *this;
  }

  friend AlgebraElement operator+(AlgebraElement a, const AlgebraElement& b) { return a += b; }
  friend AlgebraElement operator-(AlgebraElement a, const AlgebraElement& b) { return a -= b; }
  friend AlgebraElement operator-(AlgebraElement a) { return a *= -1.0; }
  friend AlgebraElement operator*(AlgebraElement a, double s) noexcept { return a *= s; }
  friend AlgebraElement operator*(double s, AlgebraElement a) noexcept { return a *= s; }
  friend AlgebraElement operator*(const AlgebraElement& a, const AlgebraElement& b);

  friend bool operator==(const AlgebraElement&, const AlgebraElement&) = default;

  /// Upper-left entry of the 2x2 complex block; for beta <= 2 this is the complex value itself.
  std::complex<double> complex_a() const noexcept { return {z_[0], z_[1]}; }
  std::complex<double> complex_b() const noexcept { return {z_[2], z_[3]}; }

 private:
  void check_same(const AlgebraElement& o) const {
    if (o.beta_ != beta_) throw InvalidInput("algebra elements over different algebras");
  }

  Beta beta_ = Beta::kReal;
  std::array<double, 4> z_{};
};

/// Hamilton product with e1 e2 = e3, e2 e3 = e1, e3 e1 = e2.
inline AlgebraElement algebra_mul(const AlgebraElement& a, const AlgebraElement& b) {
  if (a.beta() != b.beta()) throw InvalidInput("algebra_mul: mismatched beta");
  const auto& x = a.data();
  const auto& y = b.data();
  return AlgebraElement(
      a.beta(), {x[0] * y[0] - x[1] * y[1] - x[2] * y[2] - x[3] * y[3],
                 x[0] * y[1] + x[1] * y[0] + x[2] * y[3] - x[3] * y[2],
                 x[0] * y[2] - x[1] * y[3] + x[2] * y[0] + x[3] * y[1],
                 x[0] * y[3] + x[1] * y[2] - x[2] * y[1] + x[3] * y[0]});
}

inline AlgebraElement operator*(const AlgebraElement& a, const AlgebraElement& b) {
  return algebra_mul(a, b);
}

/// Multiplicative inverse; throws on zero.
inline AlgebraElement inverse(const AlgebraElement& a) {
  const double n2 = a.norm2();
  if (n2 == 0.0) throw DomainError("inverse of zero algebra element");
  return a.conj() * (1.0 / n2);
}

/// 2x2 complex block [[z0 + i z1, z2 + i z3], [-z2 + i z3, z0 - i z1]] representing a quaternion.
inline std::array<std::complex<double>, 4> quaternion_block(const AlgebraElement& z) {
  return {std::complex<double>{z[0], z[1]}, std::complex<double>{z[2], z[3]},
          std::complex<double>{-z[2], z[3]}, std::complex<double>{z[0], -z[1]}};
}

}  // namespace minor_dyson
