#pragma once

// Compact binary path dump. Everything is little-endian, integers are u64, reals are IEEE f64.
//   header (64 bytes): magic "MDYFRAME", version, kind, beta, n, paths, times, width
//   records: paths * times records, path-major, each = t followed by `width` values
// kind 1 (matrix): values are SelfAdjointMatrix::parameters(), width = n + n(n-1)/2 * beta.
// kind 2 (spectral): values are lambda_1..lambda_n then mu_1..mu_{n-1}, width = 2n - 1.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "minor_dyson/core/error.hpp"

namespace minor_dyson::io {

enum class FrameKind : std::uint64_t { kMatrix = 1, kSpectral = 2 };

inline constexpr char kFrameMagic[8] = {'M', 'D', 'Y', 'F', 'R', 'A', 'M', 'E'};
inline constexpr std::uint64_t kFrameVersion = 1;
inline constexpr std::size_t kFrameHeaderBytes = 64;

struct FrameHeader {
  FrameKind kind = FrameKind::kSpectral;
  double beta = 2.0;
  std::uint64_t n = 0;
  std::uint64_t paths = 0;
  std::uint64_t times = 0;
  std::uint64_t width = 0;
};

namespace detail {

inline void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline void put_f64(std::ostream& os, double x) { put_u64(os, std::bit_cast<std::uint64_t>(x)); }

inline std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw InvalidInput("frame: truncated input");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

}  // namespace detail

/// Writes the header on construction; records must arrive path-major.
class FrameWriter {
 public:
  FrameWriter(std::ostream& os, const FrameHeader& h) : os_(os), h_(h) {
    os_.write(kFrameMagic, 8);
    detail::put_u64(os_, kFrameVersion);
    detail::put_u64(os_, static_cast<std::uint64_t>(h.kind));
    detail::put_f64(os_, h.beta);
    detail::put_u64(os_, h.n);
    detail::put_u64(os_, h.paths);
    detail::put_u64(os_, h.times);
    detail::put_u64(os_, h.width);
  }

  void write(double t, std::span<const double> values) {
    if (values.size() != h_.width) throw InvalidInput("frame: record width mismatch");
    if (written_ >= h_.paths * h_.times) throw InvalidInput("frame: more records than announced");
    detail::put_f64(os_, t);
    for (double v : values) detail::put_f64(os_, v);
    ++written_;
  }

  bool complete() const noexcept { return written_ == h_.paths * h_.times; }

 private:
  std::ostream& os_;
  FrameHeader h_;
  std::uint64_t written_ = 0;
};

struct FrameRecord {
  double t = 0.0;
  std::vector<double> values;
};

struct Frame {
  FrameHeader header;
  std::vector<FrameRecord> records;  // path-major

  const FrameRecord& at(std::uint64_t path, std::uint64_t time) const {
    return records.at(path * header.times + time);
  }
};

inline Frame read_frame(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kFrameMagic, 8) != 0) throw InvalidInput("frame: bad magic");
  if (detail::get_u64(is) != kFrameVersion) throw InvalidInput("frame: unsupported version");
  Frame f;
  const std::uint64_t kind = detail::get_u64(is);
  if (kind != 1 && kind != 2) throw InvalidInput("frame: unknown kind");
  f.header.kind = static_cast<FrameKind>(kind);
  f.header.beta = detail::get_f64(is);
  f.header.n = detail::get_u64(is);
  f.header.paths = detail::get_u64(is);
  f.header.times = detail::get_u64(is);
  f.header.width = detail::get_u64(is);
  const std::uint64_t count = f.header.paths * f.header.times;
  f.records.resize(count);
  for (auto& r : f.records) {
    r.t = detail::get_f64(is);
    r.values.resize(f.header.width);
    for (double& v : r.values) v = detail::get_f64(is);
  }
  return f;
}

}  // namespace minor_dyson::io
