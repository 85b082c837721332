#include "doctest.h"

#include "apm/arith_fn.hpp"
#include "apm/error.hpp"
#include "apm/sieve.hpp"

#include <cmath>
#include <numeric>

using namespace apm;

namespace {

const SpfTable& table() {
  static const SpfTable t(1000000);
  return t;
}

double eval(const AdditiveFunction& f, std::uint64_t m) {
  return eval_additive(f.spec, f.ext, factorize(m, table()));
}

}  // namespace

TEST_CASE("values at primes") {
  const auto f = PrimeFunctionSpec::inv_loglog();
  CHECK(f.start_prime() == 11);
  // ln ln 11 = 0.874591...
  CHECK(f.at(11) == doctest::Approx(1.0 / std::log(std::log(11.0))).epsilon(1e-15));
  CHECK(f.at(11) == doctest::Approx(1.143392).epsilon(1e-6));
  CHECK(f.at(7) == 0.0);
  CHECK(PrimeFunctionSpec::constant(0.7).at(5) == 0.7);
  CHECK(PrimeFunctionSpec::inv_log().at(2) == 0.0);
  CHECK(PrimeFunctionSpec::inv_log().at(3) == doctest::Approx(1.0 / std::log(3.0)));
  CHECK(PrimeFunctionSpec::one_minus_inv_p().at(2) == 0.5);
  CHECK(PrimeFunctionSpec::scaled(PrimeFunctionSpec::indicator(), -0.7).at(13) ==
        doctest::Approx(-0.7));
}

TEST_CASE("start prime rules") {
  CHECK_THROWS_AS(PrimeFunctionSpec::inv_loglog(7), std::invalid_argument);
  CHECK_THROWS_AS(PrimeFunctionSpec::inv_log(2), std::invalid_argument);
  CHECK_THROWS_AS(PrimeFunctionSpec::sqrt_loglog(2), std::invalid_argument);
  CHECK_NOTHROW(PrimeFunctionSpec::inv_loglog(13));
  const auto c = PrimeFunctionSpec::constant(2.0).with_start_prime(5);
  CHECK(c.at(3) == 0.0);
  CHECK(c.at(5) == 2.0);
  const auto s = PrimeFunctionSpec::scaled(PrimeFunctionSpec::indicator(), 3.0).with_start_prime(7);
  CHECK(s.at(5) == 0.0);
  CHECK(s.at(7) == 3.0);
}

TEST_CASE("tabulated lookups") {
  const auto t = PrimeFunctionSpec::tabulated({{2, 0.25}, {3, -1.0}});
  CHECK(t.at(2) == 0.25);
  CHECK(t.at(3) == -1.0);
  CHECK_THROWS_AS(t.at(5), LookupError);
  const auto d = PrimeFunctionSpec::tabulated({{2, 0.25}}, 0.5);
  CHECK(d.at(7) == 0.5);
  CHECK(d.may_be_negative() == false);
  CHECK(t.may_be_negative());
  CHECK_THROWS(t.continuous(3.0));
}

TEST_CASE("boundedness audit for 1/ln ln p") {
  const auto f = PrimeFunctionSpec::inv_loglog();
  const double top = 1.0 / std::log(std::log(11.0));
  std::size_t above_one = 0;
  for (auto p : sieve_primes(1000000).primes) {
    const double v = f.at(p);
    if (p < 11) {
      CHECK(v == 0.0);
      continue;
    }
    CHECK(v > 0.0);
    CHECK(v <= top);
    if (v > 1.0) ++above_one;
  }
  // ln ln p < 1 for p < e^e ~ 15.15, so 11 and 13 exceed 1.
  CHECK(above_one == 2);
  CHECK(f.sup_abs() == doctest::Approx(top));
}

TEST_CASE("continuous forms and derivatives") {
  for (const auto& f :
       {PrimeFunctionSpec::inv_loglog(), PrimeFunctionSpec::inv_log(),
        PrimeFunctionSpec::sqrt_loglog(), PrimeFunctionSpec::one_minus_inv_p(),
        PrimeFunctionSpec::one_minus_inv_log(), PrimeFunctionSpec::constant(0.3),
        PrimeFunctionSpec::scaled(PrimeFunctionSpec::inv_log(), -2.0)}) {
    for (double t : {20.0, 1e3, 1e6}) {
      const double h = t * 1e-6;
      const double fd = (f.continuous(t + h) - f.continuous(t - h)) / (2 * h);
      CHECK_MESSAGE(f.derivative(t) == doctest::Approx(fd).epsilon(1e-5), f.describe());
    }
    CHECK(f.continuous(101.0) == doctest::Approx(f.at(101)));
  }
}

TEST_CASE("additive evaluation") {
  const auto omega = builtin("omega").fn;
  const auto big = builtin("Omega").fn;
  CHECK(eval(omega, 360) == 3.0);
  CHECK(eval(big, 360) == 6.0);
  CHECK(eval(omega, 12) == 2.0);
  CHECK(eval(big, 12) == 3.0);
  CHECK(eval(omega, 1) == 0.0);
  const AdditiveFunction s{PrimeFunctionSpec::sqrt_loglog(), AdditiveExtension::strong()};
  CHECK(eval(s, 11 * 13) == doctest::Approx(1.906).epsilon(1e-3));
  CHECK(eval(s, 11 * 13) ==
        doctest::Approx(std::sqrt(std::log(std::log(11.0))) + std::sqrt(std::log(std::log(13.0)))));
}

TEST_CASE("builtins") {
  const auto half = builtin("half_omega");
  CHECK(eval(half.fn, 7) == 0.5);
  CHECK(eval(half.fn, 30) == 1.5);
  const auto w1 = builtin("omega1");
  REQUIRE(w1.domain.has_value());
  CHECK(*w1.domain == Progression(4, 1));
  CHECK(eval(w1.fn, 13) == 1.0);
  CHECK(builtin("bigomega").fn.ext.mode == ExtensionMode::Complete);
  CHECK_THROWS_AS(builtin("phi"), std::invalid_argument);
}

TEST_CASE("additivity over coprime pairs") {
  std::vector<AdditiveFunction> fns{
      builtin("omega").fn, builtin("Omega").fn, builtin("half_omega").fn,
      {PrimeFunctionSpec::inv_log(), AdditiveExtension::complete()},
      {PrimeFunctionSpec::sqrt_loglog(), AdditiveExtension::strong().with_override(2, 3, 5.0)}};
  for (const auto& f : fns) {
    for (std::uint64_t m = 1; m <= 10000; m += 37) {
      for (std::uint64_t n = 1; n <= 10000 && m * n <= 1000000; n += 53) {
        if (std::gcd(m, n) != 1) continue;
        CHECK(eval(f, m * n) == doctest::Approx(eval(f, m) + eval(f, n)));
      }
    }
  }
}

TEST_CASE("strong and complete additivity") {
  const AdditiveFunction f{PrimeFunctionSpec::inv_log(), AdditiveExtension::strong()};
  for (auto p : sieve_primes(100).primes) {
    std::uint64_t q = 1;
    for (unsigned a = 1; a <= 5 && q * p <= 1000000; ++a) {
      q *= p;
      CHECK(eval(f, q) == eval(f, p));
    }
  }
  const auto big = builtin("Omega").fn;
  for (std::uint64_t m = 1; m <= 1000; ++m) {
    for (std::uint64_t n = 1; n <= 1000; n += 7) CHECK(eval(big, m * n) == eval(big, m) + eval(big, n));
  }
}

TEST_CASE("overrides") {
  const auto ext = AdditiveExtension::strong().with_override(2, 2, 10.0);
  const AdditiveFunction f{PrimeFunctionSpec::indicator(), ext};
  CHECK(f.at_prime_power(2, 1) == 1.0);
  CHECK(f.at_prime_power(2, 2) == 10.0);
  CHECK(f.at_prime_power(2, 3) == 1.0);
  CHECK(eval(f, 12) == 11.0);
  CHECK(eval(f, 24) == 2.0);
  CHECK(ext.overridden());
  CHECK_FALSE(ext.strongly_additive());
  CHECK_THROWS(AdditiveExtension::strong().with_override(4, 1, 1.0));
  CHECK_THROWS(AdditiveExtension::strong().with_override(2, 0, 1.0));
}

TEST_CASE("function pair validation") {
  const auto omega = builtin("omega").fn;
  const auto big = builtin("Omega").fn;
  CHECK_NOTHROW((FunctionPair{omega, big, FunctionClass::H}.validate()));
  const auto half = builtin("half_omega").fn;
  CHECK_THROWS_AS((FunctionPair{omega, half, FunctionClass::H}.validate()), std::invalid_argument);
  CHECK_NOTHROW((FunctionPair{omega, half, FunctionClass::V}.validate()));
}

TEST_CASE("bulk evaluator matches direct evaluation") {
  const SieveConfig cfg{.block_size = 1 << 12, .factor_block_members = 301};
  for (const auto& prog : {Progression::natural(), Progression(4, 1), Progression(9, 7)}) {
    const MemberBlocks blocks(200000, prog, cfg);
    for (const auto& f : {builtin("omega").fn, builtin("Omega").fn,
                          AdditiveFunction{PrimeFunctionSpec::sqrt_loglog(),
                                           AdditiveExtension::complete().with_override(3, 2, -4.0)}}) {
      const AdditiveEvaluator ev(f, *blocks.base_primes);
      std::vector<double> out;
      for (std::size_t b = 0; b < blocks.block_count(); ++b) {
        const auto block = blocks.block(b);
        ev.evaluate(block, out);
        REQUIRE(out.size() == block.size());
        for (std::size_t i = 0; i < block.size(); ++i) {
          CHECK(out[i] == doctest::Approx(eval(f, block.member(i))).epsilon(1e-14));
        }
      }
    }
  }
}

TEST_CASE("parsing round trips") {
  for (const char* text : {"const:0.7", "one", "invloglog", "invlog", "sqrtloglog", "oneminusinvp",
                           "oneminusinvlog", "scaled:-1:invloglog", "scaled:0.5:one",
                           "table:2=0.5,3=-1,default=0.25"}) {
    const auto spec = parse_prime_function(text);
    CHECK_MESSAGE(parse_prime_function(spec.describe()) == spec, text);
  }
  CHECK(parse_function("omega").fn.spec.kind() == PrimeKind::Indicator);
  CHECK(parse_function("const:2").fn.spec.at(3) == 2.0);
  CHECK(parse_extension("complete") == ExtensionMode::Complete);
  CHECK_THROWS_AS(parse_prime_function("const:"), std::invalid_argument);
  CHECK_THROWS_AS(parse_prime_function("cubic"), std::invalid_argument);
  CHECK_THROWS_AS(parse_prime_function("table:2=x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_extension("weak"), std::invalid_argument);
}
