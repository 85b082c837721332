#include "doctest.h"

#include "apm/moments.hpp"

#include <cmath>
#include <numeric>
#include <random>

using namespace apm;

namespace {

const AdditiveFunction& omega() {
  static const auto f = builtin("omega").fn;
  return f;
}

std::vector<double> naive_central(const std::vector<double>& v, unsigned umax) {
  long double mean = 0;
  for (double x : v) mean += x;
  mean /= v.size();
  std::vector<double> out(umax + 1, 0.0);
  for (unsigned u = 0; u <= umax; ++u) {
    long double s = 0;
    for (double x : v) s += std::pow((long double)x - mean, (int)u);
    out[u] = static_cast<double>(s / v.size());
  }
  return out;
}

}  // namespace

TEST_CASE("hand-enumerated summaries") {
  const auto s = empirical_moments(omega(), Progression(4, 1), 30);
  CHECK(s.count == 8);
  CHECK(s.mean == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.central_moments[2] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(s.sigma == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.central_moments[0] == 1.0);
  CHECK(s.central_moments[1] == doctest::Approx(0.0).scale(1.0));
  CHECK(s.central_moments.size() == 7);

  // omega over 1..10 is 0 1 1 1 1 2 1 1 1 2
  const auto t = empirical_moments(omega(), Progression::natural(), 10);
  CHECK(t.mean == doctest::Approx(1.1).epsilon(1e-15));

  const AdditiveFunction zero{PrimeFunctionSpec::constant(0.0), AdditiveExtension::strong()};
  const auto z = empirical_moments(zero, Progression(3, 2), 1000, 8);
  CHECK(z.mean == 0.0);
  for (unsigned u = 1; u <= 8; ++u) CHECK(z.central_moments[u] == 0.0);

  CHECK_THROWS_AS(empirical_moments(omega(), Progression(4, 3), 2), std::invalid_argument);
  CHECK_THROWS_AS(empirical_moments(omega(), Progression(4, 1), 100, 1), std::invalid_argument);
  CHECK_THROWS_AS(empirical_moments(omega(), Progression(4, 1), 100, 11), std::invalid_argument);
}

TEST_CASE("count formula") {
  for (std::uint64_t n : {1ull, 5ull, 29ull, 30ull, 1000ull}) {
    const auto s = empirical_moments(omega(), Progression(4, 1), n);
    CHECK(s.count == (n - 1) / 4 + 1);
  }
}

TEST_CASE("counting identity on small cases") {
  CHECK(mean_via_counts(omega().spec, omega().ext, Progression(4, 1), 30) ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mean_via_counts(omega().spec, omega().ext, Progression::natural(), 10) ==
        doctest::Approx(1.1).epsilon(1e-15));
  CHECK(members_divisible_by(Progression(4, 1), 30, 3) == 2);
  CHECK(members_divisible_by(Progression(4, 1), 30, 5) == 2);
  CHECK(members_divisible_by(Progression(4, 1), 30, 7) == 1);
  CHECK(members_divisible_by(Progression(4, 1), 30, 2) == 0);
  CHECK(members_divisible_by(Progression(4, 1), 30, 31) == 0);
  CHECK_THROWS_AS(mean_via_counts(omega().spec, AdditiveExtension::complete(), Progression(4, 1), 30),
                  std::invalid_argument);
  CHECK_THROWS_AS(mean_via_counts(omega().spec, omega().ext, Progression(4, 3), 2),
                  std::invalid_argument);
  for (std::uint64_t n = 1; n <= 2000; n += 13) {
    for (const auto& prog : {Progression::natural(), Progression(6, 5), Progression(10, 3)}) {
      if (prog.count_upto(n) == 0) continue;
      CHECK(mean_via_counts(omega().spec, omega().ext, prog, n) ==
            doctest::Approx(empirical_moments(omega(), prog, n).mean).epsilon(1e-12));
    }
  }
}

TEST_CASE("streaming moments match a two-pass oracle") {
  const AdditiveFunction f{PrimeFunctionSpec::sqrt_loglog(), AdditiveExtension::complete()};
  for (const auto& prog : {Progression::natural(), Progression(4, 3), Progression(11, 2)}) {
    SieveConfig cfg;
    cfg.factor_block_members = 777;
    const auto values = collect_values(f, prog, 100000, cfg);
    const auto s = empirical_moments(f, prog, 100000, 6, cfg);
    const auto ref = naive_central(values, 6);
    REQUIRE(values.size() == s.count);
    for (unsigned u = 2; u <= 6; ++u) {
      CHECK(s.central_moments[u] == doctest::Approx(ref[u]).epsilon(1e-9));
    }
  }
}

TEST_CASE("moments are translation invariant") {
  const AdditiveFunction f{PrimeFunctionSpec::inv_log(), AdditiveExtension::strong()};
  const auto values = collect_values(f, Progression(4, 1), 50000);
  MomentAccumulator a(6), b(6);
  a.add(values);
  auto shifted = values;
  for (auto& v : shifted) v += 3.0;
  b.add(shifted);
  CHECK(b.mean() == doctest::Approx(a.mean() + 3.0).epsilon(1e-14));
  for (unsigned u = 2; u <= 6; ++u) {
    CHECK(b.central_moment(u) == doctest::Approx(a.central_moment(u)).epsilon(1e-9));
  }
}

TEST_CASE("merging is order independent up to rounding") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> d(5.0, 2.0);
  std::vector<double> v(10000);
  for (auto& x : v) x = d(rng);
  MomentAccumulator whole(8);
  whole.add(v);
  MomentAccumulator left(8), right(8);
  left.add(std::span(v).first(3333));
  right.add(std::span(v).subspan(3333));
  left.merge(right);
  MomentAccumulator empty(8);
  left.merge(empty);
  CHECK(left.count() == whole.count());
  for (unsigned u = 2; u <= 8; ++u) {
    CHECK(left.central_moment(u) == doctest::Approx(whole.central_moment(u)).epsilon(1e-11));
  }
  MomentAccumulator other(4);
  CHECK_THROWS(left.merge(other));
}

TEST_CASE("worker count does not change summaries") {
  SieveConfig one;
  one.factor_block_members = 1000;
  SieveConfig four = one;
  four.workers = 4;
  const auto a = empirical_moments(omega(), Progression(4, 1), 300000, 6, one);
  const auto b = empirical_moments(omega(), Progression(4, 1), 300000, 6, four);
  CHECK(a.mean == b.mean);
  CHECK(a.central_moments == b.central_moments);
}

TEST_CASE("chebyshev coverage") {
  std::vector<double> values;
  const auto s = empirical_moments(omega(), Progression(4, 1), 30, 6, {},
                                   [&](std::span<const double> b) {
                                     values.insert(values.end(), b.begin(), b.end());
                                   });
  const std::vector<double> bs{1.0, 2.0};
  const auto r = chebyshev_check(s, values, bs);
  CHECK(r.bound[0] == 0.0);
  CHECK(r.coverage[1] == 1.0);
  CHECK(r.bound[1] == 0.75);
  CHECK_FALSE(r.degenerate);

  std::vector<double> big;
  const auto s6 = empirical_moments(omega(), Progression(4, 1), 1000000, 2, {},
                                    [&](std::span<const double> b) {
                                      big.insert(big.end(), b.begin(), b.end());
                                    });
  const auto r6 = chebyshev_check(s6, big, kDefaultChebyshevB);
  for (std::size_t i = 0; i < r6.b_values.size(); ++i) {
    CHECK(r6.coverage[i] >= r6.bound[i]);
    CHECK(r6.coverage[i] <= 1.0);
    if (i > 0) CHECK(r6.coverage[i] >= r6.coverage[i - 1]);
  }

  const std::vector<double> flat(10, 2.0);
  MomentAccumulator acc(2);
  acc.add(flat);
  const auto d = chebyshev_check(MomentSummary::from(acc, 10, Progression::natural()), flat, bs);
  CHECK(d.degenerate);
  CHECK(d.coverage[0] == 1.0);
}

TEST_CASE("law of large numbers records") {
  CHECK(b_of_n(BofN::LogLogCubeRoot, 2) == 1.0);
  CHECK(b_of_n(BofN::LogLog, 1000000) == doctest::Approx(std::log(std::log(1e6))));
  CHECK(parse_b_of_n(to_string(BofN::LogLogSqrt)) == BofN::LogLogSqrt);
  const std::vector<std::uint64_t> ns{10000, 1000000};
  const auto recs = lln_check(omega(), Progression(4, 1), ns);
  REQUIRE(recs.size() == 2);
  for (const auto& r : recs) {
    CHECK(r.b > 1.0);
    CHECK(r.coverage_sigma >= r.bound);
    REQUIRE(r.coverage_turan.has_value());
    CHECK(*r.coverage_turan > r.bound);
  }
  const std::vector<std::uint64_t> single{1};
  const auto one = lln_check(omega(), Progression(4, 1), single);
  CHECK(one[0].count == 1);
  CHECK(one[0].coverage_sigma == 1.0);
  CHECK_FALSE(one[0].coverage_turan.has_value());
}
