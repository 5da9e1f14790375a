#pragma once

// Counter-based random streams. Every Monte Carlo path owns a stream keyed by
// (seed, purpose) and addressed by its path index, so a path draws the same
// numbers no matter which worker runs it or in which order.

#include <array>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace minor_dyson {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter round(const Counter& c, const Key& k) noexcept {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }

  static constexpr Counter apply(Counter c, Key k) noexcept {
    c = round(c, k);
    for (int r = 1; r < 10; ++r) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
      c = round(c, k);
    }
    return c;
  }
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char ch : text) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace detail

/// Labels separating independent families of streams under one seed.
enum class StreamPurpose : std::uint64_t {
  kGeneric = 0,
  kInitialCondition = 1,
  kMatrixPath = 2,
  kSpectralPath = 3,
  kQuadraticVariation = 4,
  kReference = 5,
  kHaar = 6,
  kWitness = 7,
  kTrials = 8,
};

/// A uniform random bit generator over one Philox stream.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint64_t stream_id,
               StreamPurpose purpose = StreamPurpose::kGeneric) noexcept {
    const std::uint64_t k =
        detail::splitmix64(seed ^ detail::splitmix64(static_cast<std::uint64_t>(purpose) + 1));
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    counter_ = {0u, 0u, static_cast<std::uint32_t>(stream_id),
                static_cast<std::uint32_t>(stream_id >> 32)};
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    if (index_ >= 4) refill();
    const std::uint64_t lo = block_[index_];
    const std::uint64_t hi = block_[index_ + 1];
    index_ += 2;
    return (hi << 32) | lo;
  }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return normal_(*this); }

  /// Number of Philox blocks consumed so far.
  std::uint64_t blocks_used() const noexcept {
    return (std::uint64_t{counter_[1]} << 32) | counter_[0];
  }

 private:
  void refill() noexcept {
    block_ = Philox4x32::apply(counter_, key_);
    if (++counter_[0] == 0) ++counter_[1];
    index_ = 0;
  }

  Philox4x32::Key key_{};
  Philox4x32::Counter counter_{};
  Philox4x32::Counter block_{};
  unsigned index_ = 4;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace minor_dyson
