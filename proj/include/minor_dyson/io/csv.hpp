#pragma once

// CSV writers for matrix paths, spectral paths and density grids. Numbers use the shortest
// round-trip form from std::to_chars, so output is locale independent with '.' as decimal
// separator; rows end in '\n' and every file starts with a header row.

#include <charconv>
#include <cmath>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "minor_dyson/algebra.hpp"

namespace minor_dyson::io {

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

/// Rows `path,t,i,j,comp,value` for the upper triangle; diagonal entries have comp 0 only,
/// off-diagonal entries one row per real component.
class MatrixPathCsv {
 public:
  explicit MatrixPathCsv(std::ostream& os) : os_(os) { os_ << "path,t,i,j,comp,value\n"; }

  void write(std::uint64_t path, double t, const SelfAdjointMatrix& b) {
    const std::string ts = format_double(t);
    const int nc = components(b.beta());
    for (std::size_t i = 0; i < b.n(); ++i)
      for (std::size_t j = i; j < b.n(); ++j)
        for (int c = 0; c < (i == j ? 1 : nc); ++c)
          os_ << path << ',' << ts << ',' << i << ',' << j << ',' << c << ',' << format_double(b(i, j)[c]) << '\n';
  }

 private:
  std::ostream& os_;
};

/// Rows `path,t,kind,index,value` with kind `lam` or `mu`.
class SpectralPathCsv {
 public:
  explicit SpectralPathCsv(std::ostream& os) : os_(os) { os_ << "path,t,kind,index,value\n"; }

  void write(std::uint64_t path, double t, std::span<const double> lambda, std::span<const double> mu) {
    const std::string ts = format_double(t);
    for (std::size_t i = 0; i < lambda.size(); ++i)
      os_ << path << ',' << ts << ",lam," << i << ',' << format_double(lambda[i]) << '\n';
    for (std::size_t i = 0; i < mu.size(); ++i)
      os_ << path << ',' << ts << ",mu," << i << ',' << format_double(mu[i]) << '\n';
  }

 private:
  std::ostream& os_;
};

/// Rows `coord_1,...,coord_k,density`.
class DensityGridCsv {
 public:
  DensityGridCsv(std::ostream& os, const std::vector<std::string>& coords) : os_(os), k_(coords.size()) {
    for (const auto& c : coords) os_ << c << ',';
    os_ << "density\n";
  }

  void write(std::span<const double> point, double density) {
    detail::require(point.size() == k_, "density row has the wrong number of coordinates");
    for (double x : point) os_ << format_double(x) << ',';
    os_ << format_double(density) << '\n';
  }

 private:
  std::ostream& os_;
  std::size_t k_;
};

}  // namespace minor_dyson::io
