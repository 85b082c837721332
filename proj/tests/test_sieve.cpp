#include "doctest.h"

#include "apm/sieve.hpp"

#include <algorithm>
#include <numeric>

using namespace apm;

namespace {

bool trial_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

SieveConfig small_blocks(unsigned workers = 1) {
  SieveConfig c;
  c.block_size = 1 << 10;
  c.factor_block_members = 97;
  c.workers = workers;
  return c;
}

}  // namespace

TEST_CASE("euler phi") {
  CHECK(euler_phi(1) == 1);
  CHECK(euler_phi(4) == 2);
  CHECK(euler_phi(12) == 4);
  CHECK(euler_phi(97) == 96);
  CHECK(euler_phi(1u << 20) == (1u << 19));
  CHECK_THROWS_AS(euler_phi(0), std::invalid_argument);
  for (std::uint64_t k = 1; k <= 200; ++k) {
    std::uint64_t count = 0;
    for (std::uint64_t r = 0; r < k; ++r) count += std::gcd(k, r) == 1;
    CHECK(euler_phi(k) == count);
  }
}

TEST_CASE("isqrt and inverse_mod") {
  for (std::uint64_t n : {0ull, 1ull, 3ull, 4ull, 99ull, 100ull, 101ull, (1ull << 62) + 5,
                          ~0ull}) {
    const std::uint64_t r = isqrt(n);
    CHECK(static_cast<unsigned __int128>(r) * r <= n);
    CHECK(static_cast<unsigned __int128>(r + 1) * (r + 1) > n);
  }
  CHECK(inverse_mod(3, 7) == 5);
  CHECK(inverse_mod(4, 5) == 4);
  CHECK_THROWS(inverse_mod(10, 5));
}

TEST_CASE("small prime lists") {
  CHECK(sieve_primes(10).primes == std::vector<std::uint64_t>{2, 3, 5, 7});
  const auto r30 = sieve_primes(30);
  CHECK(r30.primes.size() == 10);
  CHECK(r30.primes.back() == 29);
  CHECK_FALSE(r30.filter.has_value());
  CHECK(primes_in_progression(30, Progression(4, 1)).primes ==
        std::vector<std::uint64_t>{5, 13, 17, 29});
  CHECK(primes_in_progression(30, Progression::natural()).primes == r30.primes);
  CHECK(primes_in_progression(10, Progression(4, 3)).primes == std::vector<std::uint64_t>{3, 7});
  CHECK(sieve_primes(2).primes == std::vector<std::uint64_t>{2});
  CHECK_THROWS_AS(sieve_primes(1), std::invalid_argument);
}

TEST_CASE("primes agree with trial division up to 1e5") {
  const auto r = sieve_primes(100000, small_blocks());
  std::vector<std::uint64_t> expect;
  for (std::uint64_t n = 2; n <= 100000; ++n) {
    if (trial_prime(n)) expect.push_back(n);
  }
  CHECK(r.primes == expect);
}

TEST_CASE("segmented matches monolithic") {
  const auto mono = monolithic_sieve(10000000);
  CHECK(mono.size() == 664579);
  CHECK(sieve_primes(10000000).primes == mono);
  // odd limits and limits on segment boundaries
  for (std::uint64_t limit : {1023ull, 1024ull, 1025ull, 2048ull, 65537ull}) {
    CHECK(sieve_primes(limit, small_blocks()).primes == monolithic_sieve(limit));
  }
}

TEST_CASE("worker count does not change the output") {
  const auto one = sieve_primes(2000000, small_blocks(1));
  const auto four = sieve_primes(2000000, small_blocks(4));
  CHECK(one.primes == four.primes);
}

TEST_CASE("pi(1e8)") {
  std::uint64_t count = 0;
  for_each_prime_block(100000000, {}, [&](std::span<const std::uint64_t> b) { count += b.size(); });
  CHECK(count == 5761455);
}

TEST_CASE("residue classes partition the primes") {
  const std::uint64_t x = 200000;
  const auto all = sieve_primes(x).primes;
  for (std::uint64_t k : {1ull, 3ull, 4ull, 10ull, 12ull, 30ull}) {
    std::vector<std::uint64_t> merged;
    for (std::uint64_t l = 0; l < k; ++l) {
      if (std::gcd(k, l) != 1) continue;
      const auto part = primes_in_progression(x, Progression(k, l)).primes;
      for (auto p : part) CHECK(p % k == l);
      merged.insert(merged.end(), part.begin(), part.end());
    }
    for (auto p : all) {
      if (k % p == 0) merged.push_back(p);
    }
    std::sort(merged.begin(), merged.end());
    CHECK(merged == all);
  }
}

TEST_CASE("sieve config validation") {
  SieveConfig c;
  c.block_size = 100;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.block_size = 1 << 12;
  CHECK_NOTHROW(c.validate());
  c.factor_block_members = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  SieveConfig low;
  low.ceiling = 1000;
  CHECK_THROWS(sieve_primes(1001, low));
}

TEST_CASE("spf table factorization") {
  const SpfTable t(100000);
  CHECK(t.spf(1) == 1);
  CHECK(factorize(1, t).empty());
  CHECK(factorize(360, t) == Factorization{{2, 3}, {3, 2}, {5, 1}});
  CHECK(factorize(29, t) == Factorization{{29, 1}});
  CHECK_THROWS(factorize(0, t));
  for (std::uint64_t m = 2; m <= 100000; ++m) {
    const auto p = t.spf(m);
    CHECK_MESSAGE(m % p == 0, m);
    CHECK((p == m) == trial_prime(m));
    std::uint64_t prod = 1;
    std::uint64_t last = 0;
    for (const auto& [q, a] : factorize(m, t)) {
      CHECK(q > last);
      last = q;
      for (unsigned i = 0; i < a; ++i) prod *= q;
    }
    CHECK(prod == m);
  }
}

TEST_CASE("progression blocks factor every member") {
  const SpfTable t(300000);
  for (const auto& prog : {Progression::natural(), Progression(4, 1), Progression(4, 3),
                           Progression(7, 0 + 3), Progression(12, 11), Progression(2, 1)}) {
    const MemberBlocks blocks(300000, prog, small_blocks());
    std::uint64_t seen = 0;
    for (std::size_t b = 0; b < blocks.block_count(); ++b) {
      const auto block = blocks.block(b);
      for (std::size_t i = 0; i < block.size(); ++i) {
        const auto m = block.member(i);
        REQUIRE(block.covers(m));
        CHECK(factorize(m, block) == factorize(m, t));
        CHECK(block.spf(m) == t.spf(m));
        ++seen;
      }
    }
    CHECK(seen == prog.count_upto(300000));
  }
}

TEST_CASE("block members beyond 2^32") {
  const std::uint64_t lo = (1ull << 33) + 1;
  const auto base = std::make_shared<const std::vector<std::uint64_t>>(monolithic_sieve(isqrt(lo + 5000)));
  const SpfBlock block(lo, lo + 4000, Progression(4, 1), base);
  for (std::size_t i = 0; i < block.size(); ++i) {
    const auto m = block.member(i);
    std::uint64_t prod = 1;
    for (const auto& [q, a] : block.factorization(m)) {
      CHECK(trial_prime(q));
      for (unsigned j = 0; j < a; ++j) prod *= q;
    }
    CHECK(prod == m);
  }
}
