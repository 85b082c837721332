#pragma once

// Declarative prime functions f(p), their extension to prime powers, and the
// bulk evaluation of additive functions over progression members.

#include "apm/progression.hpp"
#include "apm/sieve.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace apm {

enum class PrimeKind {
  Constant,        // f(p) = C
  Indicator,       // f(p) = 1
  InvLogLog,       // 1 / ln ln p
  InvLog,          // 1 / ln p
  SqrtLogLog,      // sqrt(ln ln p)
  OneMinusInvP,    // 1 - 1/p
  OneMinusInvLog,  // 1 - 1/ln p
  Scaled,          // c * inner(p)
  Tabulated,       // explicit prime -> value map
};

// f(p) for primes p >= start_prime; primes below start_prime contribute 0.
class PrimeFunctionSpec {
 public:
  static PrimeFunctionSpec constant(double c, std::uint64_t p0 = 2);
  static PrimeFunctionSpec indicator(std::uint64_t p0 = 2);
  static PrimeFunctionSpec inv_loglog(std::uint64_t p0 = 11);
  static PrimeFunctionSpec inv_log(std::uint64_t p0 = 3);
  static PrimeFunctionSpec sqrt_loglog(std::uint64_t p0 = 3);
  static PrimeFunctionSpec one_minus_inv_p(std::uint64_t p0 = 2);
  static PrimeFunctionSpec one_minus_inv_log(std::uint64_t p0 = 2);
  static PrimeFunctionSpec scaled(const PrimeFunctionSpec& inner, double factor);
  static PrimeFunctionSpec tabulated(std::map<std::uint64_t, double> table,
                                     std::optional<double> fallback = std::nullopt,
                                     std::uint64_t p0 = 2);

  // Smallest admissible start prime for the kind: 11 for 1/ln ln p (ln ln p
  // changes sign at e), 3 for 1/ln p and sqrt(ln ln p), 2 otherwise.
  static std::uint64_t minimum_start(PrimeKind kind) noexcept;

  // Copy with a different start prime; throws std::invalid_argument below the
  // kind's minimum.
  PrimeFunctionSpec with_start_prime(std::uint64_t p0) const;

  PrimeKind kind() const noexcept { return kind_; }
  std::uint64_t start_prime() const noexcept { return p0_; }
  // Constant value for Constant, factor for Scaled, 1 otherwise.
  double parameter() const noexcept { return param_; }
  const PrimeFunctionSpec* inner() const noexcept { return inner_.get(); }
  const std::map<std::uint64_t, double>& table() const noexcept { return table_; }
  std::optional<double> fallback() const noexcept { return fallback_; }

  // Value at a prime; 0 below start_prime. Throws LookupError for a
  // tabulated prime without entry or fallback.
  double at(std::uint64_t p) const;

  // Smooth extension to real t >= start_prime and its derivative; used by the
  // quadrature routines. Throw std::invalid_argument for tabulated kinds.
  double continuous(double t) const;
  double derivative(double t) const;
  bool has_continuous_form() const noexcept;

  // sup |f(p)| over primes p >= start_prime (infinity when unbounded).
  double sup_abs() const;
  bool may_be_negative() const;

  // Round-trips through parse_prime_function.
  std::string describe() const;

  friend bool operator==(const PrimeFunctionSpec& a, const PrimeFunctionSpec& b);

 private:
  PrimeFunctionSpec(PrimeKind kind, double param, std::uint64_t p0)
      : kind_(kind), param_(param), p0_(p0) {}

  double raw(double t) const;

  PrimeKind kind_;
  double param_;
  std::uint64_t p0_;
  std::shared_ptr<const PrimeFunctionSpec> inner_;
  std::map<std::uint64_t, double> table_;
  std::optional<double> fallback_;
};

double eval_at_prime(const PrimeFunctionSpec& spec, std::uint64_t p);

enum class ExtensionMode {
  Strong,    // f(p^a) = f(p)
  Complete,  // f(p^a) = a f(p)
};

// How f extends from primes to prime powers, plus a finite set of
// prime-power overrides (a class-H perturbation of the base rule).
struct AdditiveExtension {
  ExtensionMode mode = ExtensionMode::Strong;
  std::map<std::pair<std::uint64_t, unsigned>, double> overrides;

  static AdditiveExtension strong() { return {ExtensionMode::Strong, {}}; }
  static AdditiveExtension complete() { return {ExtensionMode::Complete, {}}; }
  AdditiveExtension with_override(std::uint64_t p, unsigned a, double value) const;

  bool overridden() const noexcept { return !overrides.empty(); }
  bool strongly_additive() const noexcept {
    return mode == ExtensionMode::Strong && overrides.empty();
  }
  // Value at p^a under the base rule, ignoring overrides.
  double base_value(double fp, unsigned a) const noexcept {
    return mode == ExtensionMode::Strong ? fp : a * fp;
  }

  friend bool operator==(const AdditiveExtension&, const AdditiveExtension&) = default;
};

struct AdditiveFunction {
  PrimeFunctionSpec spec;
  AdditiveExtension ext;

  // f(p^a) including overrides.
  double at_prime_power(std::uint64_t p, unsigned a) const;
};

// Sum over the prime powers p^a || m of f(p^a); 0 for the empty factorization.
double eval_additive(const PrimeFunctionSpec& spec, const AdditiveExtension& ext,
                     std::span<const PrimePower> factorization);

// Evaluates an additive function on every member of SpfBlocks sharing one
// base-prime table, caching f at the base primes.
class AdditiveEvaluator {
 public:
  AdditiveEvaluator(AdditiveFunction fn, const std::vector<std::uint64_t>& base_primes);

  // out.size() becomes block.size().
  void evaluate(const SpfBlock& block, std::vector<double>& out) const;

  const AdditiveFunction& function() const noexcept { return fn_; }

 private:
  AdditiveFunction fn_;
  std::vector<double> base_values_;
};

enum class FunctionClass { H, V };

// Comparison pair; f_star is the strongly additive reference.
struct FunctionPair {
  AdditiveFunction f_star;
  AdditiveFunction f;
  FunctionClass declared_class = FunctionClass::V;

  // Class H requires f and f_star to agree at every prime outside the finite
  // override lists; throws std::invalid_argument otherwise.
  void validate() const;
};

enum class Builtin { Omega, BigOmega, Omega1, HalfOmega };

struct BuiltinFunction {
  std::string name;
  AdditiveFunction fn;
  // Evaluation domain when the function is defined on a progression (omega1).
  std::optional<Progression> domain;
};

// omega1 is omega evaluated over the members of `domain` (default 4k+1).
BuiltinFunction builtin(Builtin which, std::optional<Progression> domain = std::nullopt);
// Accepts omega, Omega (or bigomega), omega1, half_omega.
BuiltinFunction builtin(const std::string& name, std::optional<Progression> domain = std::nullopt);

// CLI syntax: const:C | one | invloglog | invlog | sqrtloglog | oneminusinvp |
// oneminusinvlog | scaled:C:<inner> | table:p=v,p=v[,default=v] | any builtin
// name. Throws std::invalid_argument on malformed input.
BuiltinFunction parse_function(const std::string& text);
PrimeFunctionSpec parse_prime_function(const std::string& text);
ExtensionMode parse_extension(const std::string& text);
std::string to_string(ExtensionMode mode);

}  // namespace apm
