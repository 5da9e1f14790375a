#pragma once

// Nested adaptive Gauss-Kronrod quadrature, up to three dimensions.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "minor_dyson/core/error.hpp"

namespace minor_dyson {

struct QuadratureOptions {
  double tolerance = 1e-10;
  unsigned max_depth = 15;
};

/// Integral of f over [a, b]; infinite endpoints are allowed.
template <class F>
double integrate_1d(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
  if (a == b) return 0.0;
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
      f, a, b, opt.max_depth, opt.tolerance, &err);
  if (!std::isfinite(v)) throw NumericalFailure("quadrature produced a non-finite value");
  return v;
}

/// Integral of f(x, y) for x in [a, b], y in [lo(x), hi(x)].
template <class F, class Lo, class Hi>
double integrate_2d(F&& f, double a, double b, Lo&& lo, Hi&& hi, const QuadratureOptions& opt = {}) {
  return integrate_1d(
      [&](double x) { return integrate_1d([&](double y) { return f(x, y); }, lo(x), hi(x), opt); }, a, b,
      opt);
}

/// Integral of f(x, y, z) for x in [a, b], y in [lo1(x), hi1(x)], z in [lo2(x,y), hi2(x,y)].
template <class F, class Lo1, class Hi1, class Lo2, class Hi2>
double integrate_3d(F&& f, double a, double b, Lo1&& lo1, Hi1&& hi1, Lo2&& lo2, Hi2&& hi2,
                    const QuadratureOptions& opt = {}) {
  return integrate_1d(
      [&](double x) {
        return integrate_1d(
            [&](double y) {
              return integrate_1d([&](double z) { return f(x, y, z); }, lo2(x, y), hi2(x, y), opt);
            },
            lo1(x), hi1(x), opt);
      },
      a, b, opt);
}

}  // namespace minor_dyson
