#include "triad/random.hpp"

namespace triad {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = std::uint64_t(a) * b;
  hi = std::uint32_t(p >> 32);
  lo = std::uint32_t(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint32_t major, std::uint32_t minor)
    : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)}, major_(major), minor_(minor) {}

RandomStream::result_type RandomStream::operator()() {
  if (buffered_ == 0) {
    // Counter layout: (block lo, block hi, minor, major).
    buffer_ = philox4x32({std::uint32_t(block_), std::uint32_t(block_ >> 32), minor_, major_},
                         key_);
    ++block_;
    buffered_ = 2;
  }
  const int w = 2 - buffered_;
  --buffered_;
  ++draws_;
  return (std::uint64_t(buffer_[2 * w + 1]) << 32) | buffer_[2 * w];
}

double RandomStream::uniform() { return double((*this)() >> 11) * 0x1.0p-53; }

}  // namespace triad
