#pragma once

#include <cstdint>

namespace abcr {

namespace detail {

// SplitMix64 output function (Steele, Lea, Flood 2014).
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

}  // namespace detail

// Counter-based random stream. Each logical unit of work (one rejection draw,
// one oracle grid point, ...) gets its own stream derived from (seed, index),
// so results do not depend on scheduling or worker count. Output longevity is
// a hashed counter, splitmix64-style.
class StreamRng {
 public:
  explicit StreamRng(std::uint64_t base) : base_(base), ctr_(0) {}

  static StreamRng for_index(std::uint64_t seed, std::uint64_t index) {
    // Two mixing rounds decouple seed and index bits.
    return StreamRng(detail::mix64(detail::mix64(seed + detail::kGolden) ^ index));
  }

  std::uint64_t next_u64() { return detail::mix64(base_ + (++ctr_) * detail::kGolden); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t base_;
  std::uint64_t ctr_;
};

}  // namespace abcr
