#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace ustail {

/// Philox4x32-10 counter-based generator.
///
/// The 64-bit key selects an independent stream; the upper 64 bits of the
/// 128-bit counter select a substream (e.g. a replication index) and the
/// lower 64 bits advance within it. Satisfies UniformRandomBitGenerator.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using block_type = std::array<std::uint32_t, 4>;

  Philox4x32(std::uint64_t key, std::uint64_t substream) noexcept
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
        hi_(substream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (pos_ == 4) {
      block_ = generate({static_cast<std::uint32_t>(lo_), static_cast<std::uint32_t>(lo_ >> 32),
                         static_cast<std::uint32_t>(hi_), static_cast<std::uint32_t>(hi_ >> 32)},
                        key_);
      ++lo_;
      pos_ = 0;
    }
    return block_[pos_++];
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept {
    const std::uint64_t a = (*this)();
    const std::uint64_t b = (*this)();
    return static_cast<double>(((a << 32) | b) >> 11) * 0x1.0p-53;
  }

  /// The raw bijection: ten rounds of Philox on one counter block.
  static block_type generate(block_type ctr, std::array<std::uint32_t, 2> key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t hi_;
  std::uint64_t lo_ = 0;
  block_type block_{};
  int pos_ = 4;
};

}  // namespace ustail
