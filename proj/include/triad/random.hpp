#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace triad {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based random stream keyed by a 64-bit seed and addressed by two
/// 32-bit stream coordinates.
///
/// Every (seed, major, minor) triple owns a disjoint slice of the Philox
/// counter space, so streams can be created in any order or in parallel and
/// never overlap. Satisfies UniformRandomBitGenerator with 64-bit output.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint32_t major, std::uint32_t minor);

  /// Stream for one shot of a dataset.
  static RandomStream for_shot(std::uint64_t seed, std::uint32_t time_index,
                               std::uint32_t shot_index) {
    return RandomStream(seed, time_index, shot_index);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  std::uint64_t draws() const { return draws_; }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t major_;
  std::uint32_t minor_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;  // 64-bit words left in buffer_
  std::uint64_t draws_ = 0;
};

}  // namespace triad
