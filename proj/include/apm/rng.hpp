#pragma once

#include <cstdint>

namespace apm {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Counter-based stream: the i-th output is mix64(base + (i + 1) * golden),
// with base derived from (seed, key). Streams with different keys are
// independent of each other and of the order in which they are consumed.
class CounterStream {
 public:
  constexpr CounterStream(std::uint64_t seed, std::uint64_t key) noexcept
      : base_(mix64(seed ^ mix64(key * kGolden + 0x632be59bd9b4e019ull))) {}

  constexpr std::uint64_t next() noexcept { return mix64(base_ + (++counter_) * kGolden); }

  // Uniform on (0, 1] with 53-bit resolution.
  constexpr double uniform() noexcept {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  constexpr std::uint64_t position() const noexcept { return counter_; }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

}  // namespace apm
