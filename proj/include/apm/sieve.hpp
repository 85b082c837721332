#pragma once

// Prime generation (odd-only segmented Eratosthenes), progression filtering,
// smallest-prime-factor tables and bulk factorization of progression members.

#include "apm/progression.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace apm {

struct SieveConfig {
  // Integers covered per segment (odd-only storage uses half as many bytes).
  std::uint64_t block_size = std::uint64_t{1} << 20;
  // Members per factorization block.
  std::uint64_t factor_block_members = std::uint64_t{1} << 16;
  std::uint64_t ceiling = std::uint64_t{1} << 34;
  unsigned workers = 1;

  // Throws std::invalid_argument when a block size is outside [2^10, 2^30].
  void validate() const;
};

struct PrimePower {
  std::uint64_t prime = 0;
  unsigned exponent = 0;

  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

using Factorization = std::vector<PrimePower>;

struct PrimeRange {
  std::uint64_t limit = 0;
  std::optional<Progression> filter;
  std::vector<std::uint64_t> primes;
};

std::uint64_t euler_phi(std::uint64_t k);

std::uint64_t isqrt(std::uint64_t n) noexcept;

// Inverse of a modulo the prime p; p must not divide a.
std::uint64_t inverse_mod(std::uint64_t a, std::uint64_t p);

// Plain whole-range sieve; the reference the segmented sieve is checked
// against, and the source of base primes.
std::vector<std::uint64_t> monolithic_sieve(std::uint64_t limit);

// Calls visit(primes) once per segment with the primes <= limit of that
// segment, in ascending order. Segments may be sieved concurrently
// (config.workers) but are always visited in order.
void for_each_prime_block(std::uint64_t limit, const SieveConfig& config,
                          const std::function<void(std::span<const std::uint64_t>)>& visit);

PrimeRange sieve_primes(std::uint64_t limit, const SieveConfig& config = {});

// Primes p <= limit with p = l (mod k). Primes dividing k never qualify.
PrimeRange primes_in_progression(std::uint64_t limit, const Progression& prog,
                                 const SieveConfig& config = {});

// Whole-range smallest-prime-factor table with 32-bit entries.
class SpfTable {
 public:
  // Throws std::invalid_argument unless 1 <= limit < 2^32.
  explicit SpfTable(std::uint64_t limit);

  std::uint64_t limit() const noexcept { return spf_.size() - 1; }
  // spf(1) = 1.
  std::uint64_t spf(std::uint64_t m) const;

 private:
  std::vector<std::uint32_t> spf_;
};

Factorization factorize(std::uint64_t m, const SpfTable& table);

// Factorizations of every progression member in [lo, hi), produced by
// dividing out each base prime along its arithmetic sub-progression.
class SpfBlock {
 public:
  // Base primes must cover every prime <= sqrt(hi - 1).
  SpfBlock(std::uint64_t lo, std::uint64_t hi, const Progression& prog,
           std::shared_ptr<const std::vector<std::uint64_t>> base_primes);

  std::uint64_t lo() const noexcept { return lo_; }
  std::uint64_t hi() const noexcept { return hi_; }
  const Progression& progression() const noexcept { return prog_; }
  std::size_t size() const noexcept { return count_.size(); }

  // Member value at slot i.
  std::uint64_t member(std::size_t i) const noexcept { return first_ + i * prog_.modulus(); }
  bool covers(std::uint64_t m) const noexcept {
    return m >= lo_ && m < hi_ && prog_.contains(m);
  }

  // Smallest prime factor of a covered member (m itself when prime; 1 for m = 1).
  std::uint64_t spf(std::uint64_t m) const;
  Factorization factorization(std::uint64_t m) const;

  // Raw per-slot view used by bulk evaluators: base-prime indices and
  // exponents of the sieved factors, then one optional large prime cofactor
  // (exponent 1, > sqrt(hi - 1)); cofactor 1 means none.
  std::size_t factor_count(std::size_t i) const noexcept { return count_[i]; }
  std::uint32_t factor_index(std::size_t i, std::size_t j) const noexcept {
    return index_[i * kMaxFactors + j];
  }
  unsigned factor_exponent(std::size_t i, std::size_t j) const noexcept {
    return exponent_[i * kMaxFactors + j];
  }
  std::uint64_t cofactor(std::size_t i) const noexcept { return rest_[i]; }
  const std::vector<std::uint64_t>& base_primes() const noexcept { return *base_; }

  // 15 distinct primes already exceed 2^64 / 47.
  static constexpr std::size_t kMaxFactors = 15;

 private:
  std::size_t slot(std::uint64_t m) const;

  std::uint64_t lo_;
  std::uint64_t hi_;
  std::uint64_t first_;
  Progression prog_;
  std::shared_ptr<const std::vector<std::uint64_t>> base_;
  std::vector<std::uint8_t> count_;
  std::vector<std::uint32_t> index_;
  std::vector<std::uint8_t> exponent_;
  std::vector<std::uint64_t> rest_;
};

Factorization factorize(std::uint64_t m, const SpfBlock& block);

// Partition of the members m <= n of prog into consecutive SpfBlocks of
// config.factor_block_members members each. Blocks are independent and may be
// built concurrently.
struct MemberBlocks {
  std::uint64_t n;
  Progression prog;
  std::shared_ptr<const std::vector<std::uint64_t>> base_primes;
  std::uint64_t members_per_block;

  MemberBlocks(std::uint64_t n, const Progression& prog, const SieveConfig& config);

  std::size_t block_count() const noexcept;
  SpfBlock block(std::size_t index) const;
};

}  // namespace apm
