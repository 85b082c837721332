#pragma once

// Sums of f(p)^u / p over primes in a residue class: exact partial sums,
// integral and closed-form asymptotics with the two error magnitudes of the
// prime-sum formula, symbolic decay classification and numerical probes.

#include "apm/arith_fn.hpp"
#include "apm/progression.hpp"
#include "apm/quadrature.hpp"
#include "apm/sieve.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace apm {

struct PrimeSumResult {
  std::uint64_t x = 0;
  Progression prog;
  unsigned u = 1;
  double value = 0.0;
  std::uint64_t term_count = 0;
  bool compensated = true;
};

// Which primes p <= x enter a prime sum.
enum class PrimeSelection {
  Restricted,  // p = l (mod k)
  Density,     // every p not dividing k
};

// Exact sum over p <= x, p = l (mod k), p >= p0 of f(p)^u / p.
PrimeSumResult prime_power_sum(const PrimeFunctionSpec& spec, unsigned u, std::uint64_t x,
                               const Progression& prog, const SieveConfig& config = {},
                               PrimeSelection selection = PrimeSelection::Restricted);

// The same sum evaluated at every checkpoint (ascending) in one sieve pass.
std::vector<PrimeSumResult> prime_power_sums_at(const PrimeFunctionSpec& spec, unsigned u,
                                                std::span<const std::uint64_t> checkpoints,
                                                const Progression& prog,
                                                const SieveConfig& config = {},
                                                PrimeSelection selection =
                                                    PrimeSelection::Restricted);

enum class FormulaTag { GenericQuadrature, LnLnLn, PowerOfLogLog, Mertens };

std::string to_string(FormulaTag tag);

struct AsymptoticEstimate {
  // (1/phi(k)) * integral_{p0}^{x} f(t)^u / (t ln t) dt.
  double main_term = 0.0;
  // Closed forms: the antiderivative at x alone (no lower-limit constant).
  // Quadrature: equal to main_term.
  double leading_term = 0.0;
  // |g(x)| x^{1/2} ln x with g(t) = f(t)^u / t.
  double error_magnitude_1 = 0.0;
  // integral_{p0}^{x} |g'(t)| t^{1/2} ln t dt.
  double error_magnitude_2 = 0.0;
  FormulaTag formula_tag = FormulaTag::GenericQuadrature;
};

AsymptoticEstimate integral_asymptotic(const PrimeFunctionSpec& spec, unsigned u, double x,
                                       std::uint64_t k, const QuadratureOptions& options = {});

// Throws NoClosedFormError when (spec, u) has no catalogued closed form.
AsymptoticEstimate closed_form_asymptotic(const PrimeFunctionSpec& spec, unsigned u, double x,
                                          std::uint64_t k, const QuadratureOptions& options = {});

enum class DecayClass {
  Case1,      // f -> C constant
  Case2,      // monotone with limit C != 0
  Case3,      // decays like C / ln ln p or slower: sum grows like ln ln ln x
  Case4,      // sum converges (C / ln p or faster, or f^u with u >= 2 of case 3)
  Unbounded,  // |f| grows without bound; outside the |f| <= 1 conclusions
};

std::string to_string(DecayClass c);

struct DecayCase {
  DecayClass which = DecayClass::Case4;
  // Sign of f^u for large p (0 for the zero function).
  int sign = 0;
  // The constant C of the asymptotic (limit of f^u, or the coefficient of
  // the decay law); NaN when not meaningful.
  double constant = 0.0;
};

// Symbolic in the kind; throws InconclusiveError for tabulated functions.
DecayCase classify_decay(const PrimeFunctionSpec& spec, unsigned u);

enum class Verdict { Converging, Diverging, Inconclusive };

std::string to_string(Verdict v);

// Verdicts compare the decay of successive increments per unit of ln x. If
// increments shrink like (ln x)^-alpha, the series converges iff alpha > 1;
// iterated-logarithm factors bias the finite-range estimate upwards by about
// 1 / ln ln x, so the cut sits at `split` with an inconclusive band around it.
struct ProbeThresholds {
  double split = 1.5;
  double band = 0.1;
};

struct ConvergenceProbe {
  std::vector<std::uint64_t> checkpoints;
  std::vector<double> partial_sums;
  Verdict verdict = Verdict::Inconclusive;
  // Estimated exponent alpha over the last two checkpoint intervals.
  double decay_exponent = 0.0;
  std::optional<double> tail_bound;
};

Verdict judge_increments(std::span<const std::uint64_t> checkpoints,
                         std::span<const double> partial_sums, const ProbeThresholds& thresholds,
                         double* exponent_out = nullptr);

// I(n) = integral_{p0}^{n} t g'(t) / ln t dt with g(t) = f(t)^u / t at each
// checkpoint.
ConvergenceProbe divergence_probe(const PrimeFunctionSpec& spec, unsigned u,
                                  std::span<const std::uint64_t> checkpoints,
                                  const ProbeThresholds& thresholds = {},
                                  const QuadratureOptions& options = {});

enum class Series { InvPSquared, InvPLog2P, InvPLogP, Custom };

Series parse_series(const std::string& text);
std::string to_string(Series s);

// Exact partial sums over primes of the class at each checkpoint. For Custom
// the terms are f(p)^u / p.
ConvergenceProbe convergence_probe(Series series, const Progression& prog,
                                   std::span<const std::uint64_t> checkpoints,
                                   const std::optional<PrimeFunctionSpec>& custom = std::nullopt,
                                   unsigned u = 1, const ProbeThresholds& thresholds = {},
                                   const SieveConfig& config = {});

}  // namespace apm
