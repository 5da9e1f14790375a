#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "minor_dyson/algebra/element.hpp"

namespace minor_dyson {

/// Dense rows x cols matrix with entries in R, C or H.
class AlgebraMatrix {
 public:
  AlgebraMatrix() = default;
  AlgebraMatrix(Beta beta, std::size_t rows, std::size_t cols)
      : beta_(beta), rows_(rows), cols_(cols), data_(rows * cols, AlgebraElement(beta)) {}

  static AlgebraMatrix identity(Beta beta, std::size_t n) {
    AlgebraMatrix m(beta, n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = AlgebraElement::unit(beta);
    return m;
  }

  Beta beta() const noexcept { return beta_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  const AlgebraElement& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  AlgebraElement& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  /// Conjugate transpose.
  AlgebraMatrix adjoint() const {
    AlgebraMatrix a(beta_, cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) a(j, i) = (*this)(i, j).conj();
    return a;
  }

  friend AlgebraMatrix operator*(const AlgebraMatrix& a, const AlgebraMatrix& b) {
    detail::require(a.beta_ == b.beta_, "matrix product over different algebras");
    detail::require(a.cols_ == b.rows_, "matrix product with incompatible shapes");
    AlgebraMatrix c(a.beta_, a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const AlgebraElement& x = a(i, k);
        if (x.norm2() == 0.0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += algebra_mul(x, b(k, j));
      }
    return c;
  }

  /// Upper-left k x k block.
  AlgebraMatrix leading_minor(std::size_t k) const {
    detail::require(k <= rows_ && k <= cols_, "minor larger than matrix");
    AlgebraMatrix m(beta_, k, k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) m(i, j) = (*this)(i, j);
    return m;
  }

  double max_abs() const noexcept {
    double m = 0.0;
    for (const auto& z : data_) m = std::max(m, z.abs());
    return m;
  }

 private:
  Beta beta_ = Beta::kReal;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<AlgebraElement> data_;
};

/// Complex representation: the entries themselves for beta <= 2, and the
/// 2x2 block embedding (interleaved index 2i + a) for quaternions.
inline Eigen::MatrixXcd complex_representation(const AlgebraMatrix& m) {
  if (m.beta() != Beta::kQuaternion) {
    Eigen::MatrixXcd c(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) c(i, j) = m(i, j).complex_a();
    return c;
  }
  Eigen::MatrixXcd c(2 * m.rows(), 2 * m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const auto blk = quaternion_block(m(i, j));
      c(2 * i, 2 * j) = blk[0];
      c(2 * i, 2 * j + 1) = blk[1];
      c(2 * i + 1, 2 * j) = blk[2];
      c(2 * i + 1, 2 * j + 1) = blk[3];
    }
  return c;
}

/// n x n self-adjoint matrix, B(k, l) = conj(B(l, k)), real diagonal.
class SelfAdjointMatrix {
 public:
  SelfAdjointMatrix() = default;
  SelfAdjointMatrix(Beta beta, std::size_t n) : m_(beta, n, n) {}

  /// Hermitizes nothing: the input must already be self-adjoint to `tol` (relative).
  explicit SelfAdjointMatrix(AlgebraMatrix m, double tol = 1e-12) : m_(std::move(m)) {
    detail::require(m_.rows() == m_.cols(), "self-adjoint matrix must be square");
    const double scale = std::max(1.0, m_.max_abs());
    for (std::size_t i = 0; i < n(); ++i) {
      for (int r = 1; r < 4; ++r)
        detail::require(std::abs(m_(i, i)[r]) <= tol * scale, "diagonal entries must be real");
      m_(i, i) = AlgebraElement::real(beta(), m_(i, i).re());
      for (std::size_t j = i + 1; j < n(); ++j) {
        const AlgebraElement d = m_(i, j) - m_(j, i).conj();
        detail::require(d.abs() <= tol * scale, "matrix is not self-adjoint");
        m_(j, i) = m_(i, j).conj();
      }
    }
  }

  static SelfAdjointMatrix diagonal(Beta beta, const std::vector<double>& d) {
    SelfAdjointMatrix b(beta, d.size());
    for (std::size_t i = 0; i < d.size(); ++i) b.set_diagonal(i, d[i]);
    return b;
  }

  Beta beta() const noexcept { return m_.beta(); }
  std::size_t n() const noexcept { return m_.rows(); }
  const AlgebraElement& operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const AlgebraMatrix& matrix() const noexcept { return m_; }

  void set_diagonal(std::size_t i, double x) { m_(i, i) = AlgebraElement::real(beta(), x); }
  /// Sets B(i, j) = z and B(j, i) = conj(z), i != j.
  void set_offdiagonal(std::size_t i, std::size_t j, const AlgebraElement& z) {
    detail::require(i != j, "set_offdiagonal needs i != j");
    detail::require(z.beta() == beta(), "entry over wrong algebra");
    m_(i, j) = z;
    m_(j, i) = z.conj();
  }

  static std::size_t parameter_count(Beta beta, std::size_t n) {
    return n + static_cast<std::size_t>(components(beta)) * n * (n - 1) / 2;
  }
  std::size_t parameter_count() const { return parameter_count(beta(), n()); }

  /// Free real parameters: diagonal first, then each upper entry (row-major) by component.
  std::vector<double> parameters() const {
    std::vector<double> p;
    p.reserve(parameter_count());
    for (std::size_t i = 0; i < n(); ++i) p.push_back(m_(i, i).re());
    const int nc = components(beta());
    for (std::size_t i = 0; i < n(); ++i)
      for (std::size_t j = i + 1; j < n(); ++j)
        for (int r = 0; r < nc; ++r) p.push_back(m_(i, j)[r]);
    return p;
  }

  static SelfAdjointMatrix from_parameters(Beta beta, std::size_t n, const std::vector<double>& p) {
    detail::require(p.size() == parameter_count(beta, n), "wrong parameter count");
    SelfAdjointMatrix b(beta, n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) b.set_diagonal(i, p[k++]);
    const int nc = components(beta);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        AlgebraElement z(beta);
        for (int r = 0; r < nc; ++r) z[r] = p[k++];
        b.set_offdiagonal(i, j, z);
      }
    return b;
  }

  /// Whether parameter k sits on the diagonal.
  bool parameter_is_diagonal(std::size_t k) const noexcept { return k < n(); }

  SelfAdjointMatrix leading_minor(std::size_t k) const {
    SelfAdjointMatrix b;
    b.m_ = m_.leading_minor(k);
    return b;
  }

  /// Sum of the n diagonal entries (the quaternion trace is never the 2n x 2n one).
  double trace() const noexcept {
    double t = 0.0;
    for (std::size_t i = 0; i < n(); ++i) t += m_(i, i).re();
    return t;
  }

  /// Tr B^2 = sum_ij |B_ij|^2.
  double trace_square() const noexcept {
    double t = 0.0;
    for (std::size_t i = 0; i < n(); ++i)
      for (std::size_t j = 0; j < n(); ++j) t += m_(i, j).norm2();
    return t;
  }

  double max_abs() const noexcept { return m_.max_abs(); }

  /// U B U^* for a unitary (orthogonal, symplectic) U.
  SelfAdjointMatrix conjugate_by(const AlgebraMatrix& u) const {
    return SelfAdjointMatrix(u * m_ * u.adjoint(), 1e-10);
  }

  SelfAdjointMatrix scaled_sum(double a, const SelfAdjointMatrix& other, double b) const {
    detail::require(other.beta() == beta() && other.n() == n(), "shape mismatch");
    SelfAdjointMatrix r(beta(), n());
    for (std::size_t i = 0; i < n(); ++i)
      for (std::size_t j = 0; j < n(); ++j) r.m_(i, j) = a * m_(i, j) + b * other.m_(i, j);
    return r;
  }

  Eigen::MatrixXcd to_complex() const { return complex_representation(m_); }

 private:
  AlgebraMatrix m_;
};

}  // namespace minor_dyson
