#pragma once

// Spectra of three nested minors and, for beta = 2 and n = 3, the explicit matrices that
// realize a given triple with a prescribed phase sum s = eta_1 + eta_2 + eta_3:
//   B = [[B11, rho3 e^{i eta3}, rho2 e^{-i eta2}],
//        [.,   B22,             rho1 e^{i eta1}],
//        [.,   .,               B33]].

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "minor_dyson/algebra.hpp"
#include "minor_dyson/minor_geometry.hpp"

namespace minor_dyson {

struct TripleSpectra {
  std::vector<double> lambda;  // n
  std::vector<double> mu;      // n - 1
  std::vector<double> nu;      // n - 2

  std::size_t n() const noexcept { return lambda.size(); }

  void validate(bool strict = true) const {
    detail::require(lambda.size() >= 2 && mu.size() + 1 == lambda.size() && nu.size() + 1 == mu.size(),
                    "triple needs sizes n, n-1, n-2");
    if (!interlace_check(lambda, mu, strict) || (!nu.empty() && !interlace_check(mu, nu, strict)))
      throw DomainError("triple is not doubly interlaced");
  }
};

/// Phase sum s in [0, 2 pi) and the two free phases; eta_3 = s - eta_1 - eta_2.
struct AngleGauge {
  double s = 0.0;
  double eta1 = 0.0;
  double eta2 = 0.0;

  double eta3() const noexcept { return s - eta1 - eta2; }
};

inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a < 0.0) a += two_pi;
  return a >= two_pi ? 0.0 : a + 0.0;
}

/// Which root of the constraint system: the larger or the smaller rho_1.
enum class Branch { kPlus, kMinus };

inline TripleSpectra spectral_triple(const SelfAdjointMatrix& b) {
  detail::require(b.n() >= 2, "spectral triple needs n >= 2");
  TripleSpectra t;
  t.lambda = eigenvalues(b).values();
  t.mu = eigenvalues(b.leading_minor(b.n() - 1)).values();
  if (b.n() >= 3) t.nu = eigenvalues(b.leading_minor(b.n() - 2)).values();
  return t;
}

/// Quantities of the constraint system for fixed spectra. With p = rho1^2 = S sin^2(phi/2),
/// q = rho2^2 = S cos^2(phi/2) the determinant equation reads
///   a0 + a1 cos(phi) + cos(s) a2 sin(phi) = 0,  phi in [0, pi].
struct TripleConstraints {
  double b11 = 0.0, b22 = 0.0, b33 = 0.0;
  double rho3 = 0.0;
  double S = 0.0;  // rho1^2 + rho2^2
  double a0 = 0.0, a1 = 0.0, a2 = 0.0;

  explicit TripleConstraints(const TripleSpectra& t) {
    detail::require(t.n() == 3, "explicit reconstruction is for n = 3");
    t.validate(true);
    const auto& l = t.lambda;
    const auto& m = t.mu;
    const double nu = t.nu[0];
    b11 = nu;
    b22 = m[0] + m[1] - nu;
    b33 = l[0] + l[1] + l[2] - m[0] - m[1];
    const double r3sq = (m[1] - nu) * (nu - m[0]);
    rho3 = std::sqrt(r3sq);
    S = 0.5 * (l[0] * l[0] + l[1] * l[1] + l[2] * l[2] - b11 * b11 - b22 * b22 - b33 * b33) - r3sq;
    const double f1 = b11 * b22 * b33 - r3sq * b33 - l[0] * l[1] * l[2];
    a0 = f1 - 0.5 * S * (b11 + b22);
    a1 = 0.5 * S * (b11 - b22);
    a2 = rho3 * S;
  }

  /// Roots phi in [0, pi] for phase sum s, ascending in rho_1.
  std::vector<double> roots(double s, double* margin = nullptr) const {
    const double c2 = std::cos(s) * a2;
    const double amp = std::hypot(a1, c2);
    const double scale = std::abs(a0) + amp + 1e-300;
    if (margin) *margin = (amp - std::abs(a0)) / scale;
    std::vector<double> out;
    if (!(S > 0.0)) return out;
    if (amp < std::abs(a0)) {
      if (std::abs(a0) - amp > 1e-12 * scale) return out;
    }
    const double psi = std::atan2(c2, a1);
    const double delta = std::acos(std::clamp(-a0 / std::max(amp, 1e-300), -1.0, 1.0));
    constexpr double pi = std::numbers::pi;
    const double tol = 1e-12;
    for (double cand : {psi + delta, psi - delta}) {
      for (double shift : {-2.0 * pi, 0.0, 2.0 * pi}) {
        double phi = cand + shift;
        if (phi < -tol || phi > pi + tol) continue;
        phi = std::clamp(phi, 0.0, pi);
        bool dup = false;
        for (double o : out) dup = dup || std::abs(o - phi) < 1e-12;
        if (!dup) out.push_back(phi);
      }
    }
    std::sort(out.begin(), out.end());  // sin^2(phi/2) increases with phi
    return out;
  }

  /// Admissible cos(s) interval, intersected with [-1, 1]; empty when lo > hi. On (0, pi)
  /// cos(s) = -(a0 + a1 cos phi) / (a2 sin phi), which is onto when |a0| <= |a1| and is
  /// otherwise bounded on one side by -sign(a0) sqrt(a0^2 - a1^2) / a2.
  std::array<double, 2> admissible_cos_range() const {
    const double need = a0 * a0 - a1 * a1;
    if (need <= 0.0) return {-1.0, 1.0};
    if (!(a2 > 0.0)) return {1.0, -1.0};
    const double c = std::sqrt(need) / a2;
    if (c > 1.0) return {1.0, -1.0};
    return a0 < 0.0 ? std::array<double, 2>{c, 1.0} : std::array<double, 2>{-1.0, -c};
  }
};

struct TripleReconstruction {
  SelfAdjointMatrix matrix;
  double rho1 = 0.0, rho2 = 0.0, rho3 = 0.0;
  std::size_t solutions = 0;  // distinct roots for this s (branches coincide when 1)
  double margin = 0.0;        // relative distance to the feasibility boundary; 0 on it
  bool at_boundary = false;
};

inline constexpr double kTripleTolerance = 1e-9;

/// Matrix with spectra (lambda, mu, nu) and phase sum gauge.s on the chosen branch.
/// Throws InfeasibleGauge when no nonnegative (rho1, rho2) exists.
inline TripleReconstruction reconstruct_triple_n3_detailed(const TripleSpectra& triple, const AngleGauge& gauge,
                                                           Branch branch) {
  const TripleConstraints k(triple);
  double margin = 0.0;
  const std::vector<double> roots = k.roots(gauge.s, &margin);
  if (roots.empty()) {
    const auto range = k.admissible_cos_range();
    const std::string admissible = range[0] > range[1] ? "none"
                                   : "cos s in [" + std::to_string(range[0]) + ", " + std::to_string(range[1]) + "]";
    throw InfeasibleGauge("no nonnegative (rho1, rho2) for s = " + std::to_string(gauge.s) + "; admissible: " +
                          admissible);
  }
  const double phi = branch == Branch::kPlus ? roots.back() : roots.front();
  TripleReconstruction out;
  out.solutions = roots.size();
  out.margin = margin;
  out.at_boundary = std::abs(margin) < 1e-9;
  out.rho1 = std::sqrt(k.S) * std::sin(0.5 * phi);
  out.rho2 = std::sqrt(k.S) * std::cos(0.5 * phi);
  out.rho3 = k.rho3;

  auto polar = [](double r, double angle) {
    return AlgebraElement(Beta::kComplex, {r * std::cos(angle), r * std::sin(angle), 0.0, 0.0});
  };
  SelfAdjointMatrix b(Beta::kComplex, 3);
  b.set_diagonal(0, k.b11);
  b.set_diagonal(1, k.b22);
  b.set_diagonal(2, k.b33);
  b.set_offdiagonal(0, 1, polar(out.rho3, gauge.eta3()));
  b.set_offdiagonal(1, 2, polar(out.rho1, gauge.eta1));
  b.set_offdiagonal(0, 2, polar(out.rho2, -gauge.eta2));

  const TripleSpectra check = spectral_triple(b);
  double scale = 1.0, err = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    scale = std::max(scale, std::abs(triple.lambda[i]));
    err = std::max(err, std::abs(check.lambda[i] - triple.lambda[i]));
  }
  for (std::size_t i = 0; i < 2; ++i) err = std::max(err, std::abs(check.mu[i] - triple.mu[i]));
  err = std::max(err, std::abs(check.nu[0] - triple.nu[0]));
  if (err > kTripleTolerance * scale)
    throw NumericalFailure("triple reconstruction misses its spectra by " + std::to_string(err));
  out.matrix = std::move(b);
  return out;
}

inline SelfAdjointMatrix reconstruct_triple_n3(const TripleSpectra& triple, const AngleGauge& gauge, Branch branch) {
  return reconstruct_triple_n3_detailed(triple, gauge, branch).matrix;
}

struct TripleExtraction {
  TripleSpectra triple;
  AngleGauge gauge;
  Branch branch = Branch::kPlus;
};

/// Inverse of reconstruction for a beta = 2, n = 3 matrix whose minors interlace strictly.
/// The branch is the one whose root reproduces |B_23|.
inline TripleExtraction extract_triple_n3(const SelfAdjointMatrix& b) {
  detail::require(b.n() == 3 && b.beta() == Beta::kComplex, "triple extraction is for beta = 2, n = 3");
  TripleExtraction e;
  e.triple = spectral_triple(b);
  auto arg = [](const AlgebraElement& z) { return std::atan2(z[1], z[0]); };
  e.gauge.eta1 = wrap_angle(arg(b(1, 2)));
  e.gauge.eta2 = wrap_angle(-arg(b(0, 2)));
  const double eta3 = arg(b(0, 1));
  e.gauge.s = wrap_angle(e.gauge.eta1 + e.gauge.eta2 + eta3);
  const TripleConstraints k(e.triple);
  const std::vector<double> roots = k.roots(e.gauge.s);
  if (roots.empty()) throw NumericalFailure("extracted gauge is not feasible for its own triple");
  const double rho1 = b(1, 2).abs();
  auto dist = [&](double phi) { return std::abs(std::sqrt(k.S) * std::sin(0.5 * phi) - rho1); };
  e.branch = dist(roots.back()) <= dist(roots.front()) ? Branch::kPlus : Branch::kMinus;
  return e;
}

/// det of the matrix with row and column i removed (n = 3, beta = 2).
inline double minor_determinant(const SelfAdjointMatrix& b, std::size_t i) {
  detail::require(b.n() == 3, "minor_determinant is for n = 3");
  std::array<std::size_t, 2> k{};
  std::size_t c = 0;
  for (std::size_t j = 0; j < 3; ++j)
    if (j != i) k[c++] = j;
  return b(k[0], k[0]).re() * b(k[1], k[1]).re() - b(k[0], k[1]).norm2();
}

}  // namespace minor_dyson
