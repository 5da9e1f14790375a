#pragma once

// Cyclic Jacobi eigensolver for small dense Hermitian matrices.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "minor_dyson/core/error.hpp"

namespace minor_dyson {

struct HermitianEigen {
  Eigen::VectorXd values;    // ascending
  Eigen::MatrixXcd vectors;  // columns match values
};

/// Diagonalizes a Hermitian matrix by cyclic sweeps of complex Givens rotations.
/// Each rotation V = D R first rotates the (p, q) entry onto the real axis with a
/// diagonal phase D and then zeroes it with a real rotation R.
inline HermitianEigen jacobi_eigen(Eigen::MatrixXcd a, bool want_vectors = true,
                                   int max_sweeps = 64) {
  using cd = std::complex<double>;
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw InvalidInput("jacobi_eigen: matrix must be square");
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Identity(n, n);

  const double fro2 = a.squaredNorm();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    if (off <= 1e-32 * fro2 || off == 0.0) break;
    if (sweep + 1 == max_sweeps) throw NumericalFailure("jacobi_eigen: no convergence");

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = std::abs(a(p, q));
        if (apq == 0.0) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        if (sweep > 3 && apq < 1e-18 * (std::abs(app) + std::abs(aqq))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const cd phase = a(p, q) / apq;  // e^{i phi}
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::hypot(1.0, theta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = t * c;
        // V = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] on coordinates (p, q).
        const cd vpp = c, vpq = s, vqp = -s * std::conj(phase), vqq = c * std::conj(phase);
        for (Eigen::Index k = 0; k < n; ++k) {  // a <- a V
          const cd akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * vpp + akq * vqp;
          a(k, q) = akp * vpq + akq * vqq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {  // a <- V^H a
          const cd apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(vpp) * apk + std::conj(vqp) * aqk;
          a(q, k) = std::conj(vpq) * apk + std::conj(vqq) * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        if (want_vectors) {
          for (Eigen::Index k = 0; k < n; ++k) {
            const cd vkp = v(k, p), vkq = v(k, q);
            v(k, p) = vkp * vpp + vkq * vqp;
            v(k, q) = vkp * vpq + vkq * vqq;
          }
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index i, Eigen::Index j) { return a(i, i).real() < a(j, j).real(); });
  HermitianEigen out;
  out.values.resize(n);
  if (want_vectors) out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]).real();
    if (want_vectors) out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

}  // namespace minor_dyson
