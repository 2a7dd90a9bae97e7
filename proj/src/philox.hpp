#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace mfdp::rng {

// Philox 4x32, 10 rounds: counter-based block cipher generator. Streams are
// addressed by (key, counter) alone, so replicate streams are independent of
// thread scheduling and platform.
struct Philox4x32 {
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kBump0 = 0x9E3779B9u;
    constexpr std::uint32_t kBump1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kBump0;
        key[1] += kBump1;
      }
      const std::uint64_t r0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t r1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(r1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(r1),
             static_cast<std::uint32_t>(r0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(r0)};
    }
    return ctr;
  }
};

// Uniform/normal stream on top of Philox: key = seed, counter words 2..3 hold
// the stream id, words 0..1 the running block index.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_lo_(static_cast<std::uint32_t>(stream)),
        stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

  std::uint32_t next_u32() {
    if (idx_ == 4) refill();
    return buf_[idx_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return lo | (hi << 32);
  }

  // 53-bit uniform on (0,1]
  double uniform() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  // 52-bit uniform on (0,1), both endpoints excluded
  double uniform_open() { return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52; }

  // Box-Muller pair, one value cached
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

 private:
  void refill() {
    buf_ = Philox4x32::block({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                              stream_lo_, stream_hi_},
                             key_);
    ++block_;
    idx_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_lo_;
  std::uint32_t stream_hi_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int idx_ = 4;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace mfdp::rng
