#pragma once

// Counter-based random streams (Philox4x32-10).
//
// A stream is addressed by (master_seed, stream_id, substream); the draw
// sequence is a pure function of that triple, so ensembles give the same
// numbers regardless of how paths are scheduled across workers.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace mesugaki {

namespace detail {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline PhiloxCounter philox_round(const PhiloxCounter& c, const PhiloxKey& k) {
  constexpr std::uint64_t m0 = 0xD2511F53u;
  constexpr std::uint64_t m1 = 0xCD9E8D57u;
  const std::uint64_t p0 = m0 * c[0];
  const std::uint64_t p1 = m1 * c[2];
  const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const auto lo0 = static_cast<std::uint32_t>(p0);
  const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const auto lo1 = static_cast<std::uint32_t>(p1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

/// Ten-round Philox4x32 bijection.
inline PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
  constexpr std::uint32_t w0 = 0x9E3779B9u;
  constexpr std::uint32_t w1 = 0xBB67AE85u;
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      key[0] += w0;
      key[1] += w1;
    }
    ctr = philox_round(ctr, key);
  }
  return ctr;
}

}  // namespace detail

class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id,
            std::uint32_t substream = 0)
      : seed_(master_seed), stream_(stream_id), substream_(substream) {}

  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }
  std::uint32_t substream_id() const { return substream_; }
  /// Number of 32-bit words consumed so far.
  std::uint64_t draws() const { return words_; }

  /// Independent stream sharing the seed and stream id; starts fresh.
  RngStream substream(std::uint32_t id) const {
    return RngStream(seed_, stream_, id);
  }

  std::uint32_t next_u32() {
    if (pos_ == 4) refill();
    ++words_;
    return buffer_[pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    return (hi << 32) | lo;
  }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal (Box-Muller, second variate cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double phi = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

 private:
  void refill() {
    const detail::PhiloxCounter ctr{
        block_, substream_, static_cast<std::uint32_t>(stream_),
        static_cast<std::uint32_t>(stream_ >> 32)};
    const detail::PhiloxKey key{static_cast<std::uint32_t>(seed_),
                                static_cast<std::uint32_t>(seed_ >> 32)};
    buffer_ = detail::philox4x32_10(ctr, key);
    ++block_;
    pos_ = 0;
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint32_t substream_;
  std::uint32_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int pos_ = 4;
  std::uint64_t words_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline RngStream derive_stream(std::uint64_t master_seed,
                               std::uint64_t stream_id) {
  return RngStream(master_seed, stream_id);
}

}  // namespace mesugaki
