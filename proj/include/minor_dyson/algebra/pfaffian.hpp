#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <utility>

#include "minor_dyson/algebra/matrix.hpp"

namespace minor_dyson {

/// Pfaffian of a skew-symmetric matrix by Parlett-Reid elimination with pivoting.
template <class Scalar>
Scalar pfaffian(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a) {
  const Eigen::Index m = a.rows();
  if (a.cols() != m) throw InvalidInput("pfaffian: matrix must be square");
  if (m % 2 != 0) return Scalar(0);
  Scalar pf(1);
  for (Eigen::Index k = 0; k + 1 < m; k += 2) {
    // Bring the largest entry of row k (right of the diagonal) to column k+1.
    Eigen::Index piv = k + 1;
    double best = std::abs(a(k, k + 1));
    for (Eigen::Index j = k + 2; j < m; ++j)
      if (std::abs(a(k, j)) > best) {
        best = std::abs(a(k, j));
        piv = j;
      }
    if (best == 0.0) return Scalar(0);
    if (piv != k + 1) {
      a.row(k + 1).swap(a.row(piv));
      a.col(k + 1).swap(a.col(piv));
      pf = -pf;
    }
    const Scalar akk1 = a(k, k + 1);
    pf *= akk1;
    // A(i,j) -= tau_i A(k+1,j) - tau_j A(k+1,i), tau_j = A(k,j)/A(k,k+1).
    for (Eigen::Index i = k + 2; i < m; ++i) {
      const Scalar ti = a(k, i) / akk1;
      for (Eigen::Index j = k + 2; j < m; ++j) {
        const Scalar tj = a(k, j) / akk1;
        a(i, j) += -ti * a(k + 1, j) + tj * a(k + 1, i);
      }
    }
  }
  return pf;
}

/// Recursive expansion along the first row. Exponential cost, test oracle only.
template <class Scalar>
Scalar pfaffian_expansion(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a) {
  const Eigen::Index m = a.rows();
  if (m == 0) return Scalar(1);
  if (m % 2 != 0) return Scalar(0);
  Scalar total(0);
  for (Eigen::Index j = 1; j < m; ++j) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> sub(m - 2, m - 2);
    Eigen::Index r = 0;
    for (Eigen::Index i = 1; i < m; ++i) {
      if (i == j) continue;
      Eigen::Index c = 0;
      for (Eigen::Index l = 1; l < m; ++l) {
        if (l == j) continue;
        sub(r, c++) = a(i, l);
      }
      ++r;
    }
    const double sign = (j % 2 == 1) ? 1.0 : -1.0;
    total += sign * a(0, j) * pfaffian_expansion<Scalar>(sub);
  }
  return total;
}

/// Skew matrix whose Pfaffian is the quaternion determinant: embedding times (I_n kron J),
/// J = [[0, 1], [-1, 0]] on each interleaved 2x2 block.
inline Eigen::MatrixXcd quaternion_skew_form(const SelfAdjointMatrix& b) {
  if (b.beta() != Beta::kQuaternion) throw InvalidInput("quaternion determinant requires beta = 4");
  Eigen::MatrixXcd e = b.to_complex();
  Eigen::MatrixXcd s(e.rows(), e.cols());
  for (Eigen::Index j = 0; j < e.cols(); j += 2) {
    s.col(j) = -e.col(j + 1);
    s.col(j + 1) = e.col(j);
  }
  return s;
}

inline double quaternion_determinant(const SelfAdjointMatrix& b) {
  const std::complex<double> pf = pfaffian<std::complex<double>>(quaternion_skew_form(b));
  const double scale = std::max(1.0, std::abs(pf));
  if (std::abs(pf.imag()) > 1e-8 * scale)
    throw NumericalFailure("quaternion determinant has a non-real Pfaffian");
  return pf.real();
}

}  // namespace minor_dyson
