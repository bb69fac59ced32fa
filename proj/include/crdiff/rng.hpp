#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace crdiff {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Stateless:
/// the output block is a pure function of (counter, key).
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block generate(Block ctr, Key key) {
    ctr = round(ctr, key);
    for (int r = 1; r < 10; ++r) {
      key[0] += kW0;
      key[1] += kW1;
      ctr = round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  static Block round(const Block& c, const Key& k) {
    const std::uint64_t p0 = std::uint64_t{kM0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kM1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Independent stream for one Monte Carlo path: key = seed, counter =
/// (block index, path index). Reproducible regardless of which worker runs it.
class PathStream {
 public:
  PathStream(std::uint64_t seed, std::uint64_t path_index)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        path_(path_index) {}

  Philox4x32::Block next_block() {
    const Philox4x32::Block ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                static_cast<std::uint32_t>(path_), static_cast<std::uint32_t>(path_ >> 32)};
    ++block_;
    return Philox4x32::generate(ctr, key_);
  }

  /// Two independent standard normals (Box-Muller on one block).
  std::array<double, 2> normal_pair() {
    const auto b = next_block();
    const std::uint64_t w0 = (std::uint64_t{b[1]} << 32) | b[0];
    const std::uint64_t w1 = (std::uint64_t{b[3]} << 32) | b[2];
    constexpr double kScale = 0x1.0p-53;
    const double u1 = 1.0 - static_cast<double>(w0 >> 11) * kScale;  // (0, 1]
    const double u2 = static_cast<double>(w1 >> 11) * kScale;        // [0, 1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
  }

  std::uint64_t blocks_used() const { return block_; }

 private:
  Philox4x32::Key key_;
  std::uint64_t path_;
  std::uint64_t block_ = 0;
};

}  // namespace crdiff
