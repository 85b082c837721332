#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace apm {

// The index set m = l, l + k, l + 2k, ... (m >= 1). (k = 1, l = 0) is the
// whole natural series.
class Progression {
 public:
  constexpr Progression() = default;

  // Throws std::invalid_argument unless k >= 1, l < k and gcd(k, l) = 1.
  Progression(std::uint64_t modulus, std::uint64_t residue) : k_(modulus), l_(residue) {
    if (k_ == 0) throw std::invalid_argument("progression modulus must be >= 1");
    if (l_ >= k_) {
      throw std::invalid_argument("progression residue " + std::to_string(l_) +
                                  " must be < modulus " + std::to_string(k_));
    }
    if (std::gcd(k_, l_) != 1) {
      throw std::invalid_argument("progression requires gcd(k, l) = 1, got k=" + std::to_string(k_) +
                                  " l=" + std::to_string(l_));
    }
  }

  static Progression natural() { return Progression{1, 0}; }

  std::uint64_t modulus() const noexcept { return k_; }
  std::uint64_t residue() const noexcept { return l_; }
  bool is_natural() const noexcept { return k_ == 1; }

  bool contains(std::uint64_t m) const noexcept { return m >= 1 && m % k_ == l_; }

  // Smallest member (>= 1).
  std::uint64_t first_member() const noexcept { return l_ == 0 ? k_ : l_; }

  // Number of members m <= n.
  std::uint64_t count_upto(std::uint64_t n) const noexcept {
    const std::uint64_t first = first_member();
    return n < first ? 0 : (n - first) / k_ + 1;
  }

  // The i-th member (0-based).
  std::uint64_t member(std::uint64_t i) const noexcept { return first_member() + i * k_; }

  friend bool operator==(const Progression&, const Progression&) = default;

 private:
  std::uint64_t k_ = 1;
  std::uint64_t l_ = 0;
};

}  // namespace apm
