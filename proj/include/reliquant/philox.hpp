#pragma once

#include <array>
#include <cstdint>

namespace reliquant {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// A pure function of (counter, key): any block can be computed
/// independently, which is what makes seeded sampling replayable and
/// splittable across workers.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr const char* name = "philox4x32-10";

  static constexpr Block generate(Block ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85;
};

/// Draw stream discipline used for sampling. Draw `d` of a stream keyed by
/// `seed` reads block (lo32 d, hi32 d, attempt, 0) under key (lo32 seed,
/// hi32 seed); words 0-1 and 2-3 form two 64-bit outputs.
struct DrawBlock {
  std::uint64_t first = 0;
  std::uint64_t second = 0;
};

inline DrawBlock draw_block(std::uint64_t seed, std::uint64_t draw, std::uint32_t attempt) noexcept {
  const auto out = Philox4x32::generate(
      {static_cast<std::uint32_t>(draw), static_cast<std::uint32_t>(draw >> 32), attempt, 0},
      {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  return {(std::uint64_t{out[1]} << 32) | out[0], (std::uint64_t{out[3]} << 32) | out[2]};
}

/// Uniform double in [0,1) from the top 53 bits.
inline double to_unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace reliquant
