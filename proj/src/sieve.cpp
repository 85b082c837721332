#include "apm/sieve.hpp"

#include "apm/parallel.hpp"
#include "apm/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace apm {

void SieveConfig::validate() const {
  constexpr std::uint64_t kMin = std::uint64_t{1} << 10;
  constexpr std::uint64_t kMax = std::uint64_t{1} << 30;
  if (block_size < kMin || block_size > kMax || block_size % 2 != 0) {
    throw std::invalid_argument("sieve block size " + std::to_string(block_size) +
                                " violates the memory budget [2^10, 2^30] (even)");
  }
  if (factor_block_members < 1 || factor_block_members > (kMax >> 4)) {
    throw std::invalid_argument("factor block of " + std::to_string(factor_block_members) +
                                " members violates the memory budget [1, 2^26]");
  }
}

std::uint64_t euler_phi(std::uint64_t k) {
  if (k == 0) throw std::invalid_argument("euler_phi: k must be >= 1");
  std::uint64_t result = k;
  std::uint64_t n = k;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p != 0) continue;
    while (n % p == 0) n /= p;
    result -= result / p;
  }
  if (n > 1) result -= result / n;
  return result;
}

std::uint64_t isqrt(std::uint64_t n) noexcept {
  constexpr std::uint64_t top = 0xffffffffull;
  auto r = std::min(top, static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n))));
  while (r * r > n) --r;
  while (r < top && (r + 1) * (r + 1) <= n) ++r;
  return r;
}

std::vector<std::uint64_t> monolithic_sieve(std::uint64_t limit) {
  std::vector<std::uint64_t> primes;
  if (limit < 2) return primes;
  std::vector<char> composite(limit + 1, 0);
  for (std::uint64_t i = 2; i * i <= limit; ++i) {
    if (composite[i]) continue;
    for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = 1;
  }
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (!composite[i]) primes.push_back(i);
  }
  return primes;
}

namespace {

void check_limit(std::uint64_t limit, const SieveConfig& config) {
  if (limit < 2) throw std::invalid_argument("sieve limit must be >= 2");
  if (limit > config.ceiling) {
    throw std::invalid_argument("sieve limit " + std::to_string(limit) + " exceeds ceiling " +
                                std::to_string(config.ceiling));
  }
  config.validate();
}

// Primes in [lo, hi), lo even. Odd-only flags: byte i <-> lo + 2i + 1.
std::vector<std::uint64_t> sieve_segment(std::uint64_t lo, std::uint64_t hi,
                                         const std::vector<std::uint64_t>& base) {
  const std::size_t bytes = static_cast<std::size_t>((hi - lo) / 2);
  std::vector<std::uint8_t> flags(bytes, 1);
  if (lo == 0 && bytes > 0) flags[0] = 0;  // 1
  for (std::uint64_t p : base) {
    if (p == 2) continue;
    if (p * p >= hi) break;
    std::uint64_t m = std::max(p * p, (lo + 1 + p - 1) / p * p);
    if (m % 2 == 0) m += p;
    for (std::uint64_t i = (m - lo - 1) / 2; i < bytes; i += p) flags[i] = 0;
  }
  std::vector<std::uint32_t> idx(bytes);
  const std::size_t count = simd::kernels().collect_nonzero(flags.data(), bytes, idx.data());
  std::vector<std::uint64_t> primes;
  primes.reserve(count + 1);
  if (lo == 0 && hi > 2) primes.push_back(2);
  for (std::size_t i = 0; i < count; ++i) primes.push_back(lo + 2 * idx[i] + 1);
  return primes;
}

}  // namespace

void for_each_prime_block(std::uint64_t limit, const SieveConfig& config,
                          const std::function<void(std::span<const std::uint64_t>)>& visit) {
  check_limit(limit, config);
  const auto base = monolithic_sieve(isqrt(limit));
  const std::uint64_t span = config.block_size;
  const std::uint64_t end = limit + 1 + (limit + 1) % 2;  // even, covers limit
  const std::size_t segments = static_cast<std::size_t>((end + span - 1) / span);
  ordered_parallel(
      segments, config.workers,
      [&](std::size_t j) {
        const std::uint64_t lo = j * span;
        const std::uint64_t hi = std::min(lo + span, end);
        auto primes = sieve_segment(lo, hi, base);
        while (!primes.empty() && primes.back() > limit) primes.pop_back();
        return primes;
      },
      [&](std::size_t, std::vector<std::uint64_t>&& primes) { visit(primes); });
}

PrimeRange sieve_primes(std::uint64_t limit, const SieveConfig& config) {
  PrimeRange range{limit, std::nullopt, {}};
  for_each_prime_block(limit, config, [&](std::span<const std::uint64_t> block) {
    range.primes.insert(range.primes.end(), block.begin(), block.end());
  });
  return range;
}

PrimeRange primes_in_progression(std::uint64_t limit, const Progression& prog,
                                 const SieveConfig& config) {
  PrimeRange range{limit, prog, {}};
  for_each_prime_block(limit, config, [&](std::span<const std::uint64_t> block) {
    for (std::uint64_t p : block) {
      if (prog.contains(p)) range.primes.push_back(p);
    }
  });
  return range;
}

SpfTable::SpfTable(std::uint64_t limit) {
  if (limit < 1 || limit >= (std::uint64_t{1} << 32)) {
    throw std::invalid_argument("SpfTable limit must lie in [1, 2^32)");
  }
  spf_.assign(limit + 1, 0);
  spf_[1] = 1;
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (spf_[i] != 0) continue;
    spf_[i] = static_cast<std::uint32_t>(i);
    for (std::uint64_t j = i * i; j <= limit; j += i) {
      if (spf_[j] == 0) spf_[j] = static_cast<std::uint32_t>(i);
    }
  }
}

std::uint64_t SpfTable::spf(std::uint64_t m) const {
  if (m == 0 || m > limit()) {
    throw std::out_of_range("SpfTable::spf: " + std::to_string(m) + " outside [1, " +
                            std::to_string(limit()) + "]");
  }
  return spf_[m];
}

Factorization factorize(std::uint64_t m, const SpfTable& table) {
  if (m == 0) throw std::invalid_argument("factorize: m must be >= 1");
  Factorization out;
  while (m > 1) {
    const std::uint64_t p = table.spf(m);
    unsigned a = 0;
    while (m % p == 0) {
      m /= p;
      ++a;
    }
    out.push_back({p, a});
  }
  return out;
}

std::uint64_t inverse_mod(std::uint64_t a, std::uint64_t p) {
  if (p < 2 || a % p == 0) throw std::invalid_argument("inverse_mod: no inverse");
  std::int64_t t = 0;
  std::int64_t new_t = 1;
  auto r = static_cast<std::int64_t>(p);
  auto new_r = static_cast<std::int64_t>(a % p);
  while (new_r != 0) {
    const std::int64_t q = r / new_r;
    t = std::exchange(new_t, t - q * new_t);
    r = std::exchange(new_r, r - q * new_r);
  }
  if (t < 0) t += static_cast<std::int64_t>(p);
  return static_cast<std::uint64_t>(t);
}

SpfBlock::SpfBlock(std::uint64_t lo, std::uint64_t hi, const Progression& prog,
                   std::shared_ptr<const std::vector<std::uint64_t>> base_primes)
    : lo_(std::max<std::uint64_t>(lo, 1)), hi_(hi), prog_(prog), base_(std::move(base_primes)) {
  const std::uint64_t k = prog_.modulus();
  first_ = std::max(prog_.first_member(), lo_ + (prog_.residue() + k - lo_ % k) % k);
  const std::size_t n = first_ < hi_ ? static_cast<std::size_t>((hi_ - 1 - first_) / k + 1) : 0;
  count_.assign(n, 0);
  index_.assign(n * kMaxFactors, 0);
  exponent_.assign(n * kMaxFactors, 0);
  rest_.resize(n);
  for (std::size_t i = 0; i < n; ++i) rest_[i] = member(i);
  if (n == 0) return;

  const std::uint64_t top = hi_ - 1;
  for (std::size_t bi = 0; bi < base_->size(); ++bi) {
    const std::uint64_t p = (*base_)[bi];
    if (p * p > top) break;
    if (k % p == 0) continue;
    const std::uint64_t inv = inverse_mod(k % p, p);
    const std::uint64_t i0 = (p - first_ % p) % p * inv % p;
    for (std::uint64_t i = i0; i < n; i += p) {
      std::uint64_t r = rest_[i];
      unsigned a = 0;
      do {
        r /= p;
        ++a;
      } while (r % p == 0);
      rest_[i] = r;
      const std::size_t at = i * kMaxFactors + count_[i]++;
      index_[at] = static_cast<std::uint32_t>(bi);
      exponent_[at] = static_cast<std::uint8_t>(a);
    }
  }
}

std::size_t SpfBlock::slot(std::uint64_t m) const {
  if (!covers(m)) {
    throw std::out_of_range("SpfBlock: " + std::to_string(m) + " is not a member in [" +
                            std::to_string(lo_) + ", " + std::to_string(hi_) + ")");
  }
  return static_cast<std::size_t>((m - first_) / prog_.modulus());
}

std::uint64_t SpfBlock::spf(std::uint64_t m) const {
  const std::size_t i = slot(m);
  return count_[i] > 0 ? (*base_)[index_[i * kMaxFactors]] : rest_[i];
}

Factorization SpfBlock::factorization(std::uint64_t m) const {
  const std::size_t i = slot(m);
  Factorization out;
  out.reserve(count_[i] + 1);
  for (std::size_t j = 0; j < count_[i]; ++j) {
    out.push_back({(*base_)[factor_index(i, j)], factor_exponent(i, j)});
  }
  if (rest_[i] > 1) out.push_back({rest_[i], 1});
  return out;
}

Factorization factorize(std::uint64_t m, const SpfBlock& block) {
  if (m == 0) throw std::invalid_argument("factorize: m must be >= 1");
  return block.factorization(m);
}

MemberBlocks::MemberBlocks(std::uint64_t n_, const Progression& prog_, const SieveConfig& config)
    : n(n_),
      prog(prog_),
      base_primes(std::make_shared<const std::vector<std::uint64_t>>(monolithic_sieve(isqrt(n_)))),
      members_per_block(config.factor_block_members) {
  config.validate();
  if (n > config.ceiling) {
    throw std::invalid_argument("limit " + std::to_string(n) + " exceeds ceiling " +
                                std::to_string(config.ceiling));
  }
}

std::size_t MemberBlocks::block_count() const noexcept {
  const std::uint64_t members = prog.count_upto(n);
  return static_cast<std::size_t>((members + members_per_block - 1) / members_per_block);
}

SpfBlock MemberBlocks::block(std::size_t index) const {
  const std::uint64_t lo = prog.member(index * members_per_block);
  const std::uint64_t hi = std::min(lo + members_per_block * prog.modulus(), n + 1);
  return SpfBlock(lo, hi, prog, base_primes);
}

}  // namespace apm
