#pragma once

// The independent model S_n = sum_p X_p with X_p = f(p) w.p. 1/p and 0
// otherwise: exact cumulants and central moments, the per-term
// approximation sum f^u(p)/p, Monte Carlo realizations, the Lindeberg-type
// tail ratio and comparisons of function pairs.

#include "apm/arith_fn.hpp"
#include "apm/moments.hpp"
#include "apm/progression.hpp"
#include "apm/sieve.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace apm {

enum class ModelMode {
  Restricted,  // primes p = l (mod k)
  Density,     // all primes not dividing k
};

ModelMode parse_model_mode(const std::string& text);
std::string to_string(ModelMode mode);

struct BernoulliTerm {
  std::uint64_t p = 0;
  double value = 0.0;
  double success_prob = 0.0;

  static BernoulliTerm for_prime(std::uint64_t p, double value) {
    return {p, value, 1.0 / static_cast<double>(p)};
  }
  // E[X^j] = value^j * success_prob, j >= 1.
  double raw_moment(unsigned j) const noexcept;
};

// K_j(q) = sum_d coeff[j][d] q^d, the j-th cumulant of Bernoulli(q), from
// K_1 = q and K_{j+1} = q (1 - q) dK_j/dq. Row 0 is unused.
using CumulantPolynomials = std::array<std::array<double, kMaxUmax + 1>, kMaxUmax + 1>;
const CumulantPolynomials& bernoulli_cumulant_polynomials();

struct ModelMoments {
  std::uint64_t n = 0;
  Progression prog;
  ModelMode mode = ModelMode::Restricted;
  unsigned u_max = kDefaultUmax;
  std::uint64_t term_count = 0;
  // Indexed by order 0..u_max; slot 0 of kappa / paper_approx / gap_bound is 0.
  std::vector<double> kappa;
  std::vector<double> mu;            // mu[0] = 1, mu[1] = 0
  std::vector<double> paper_approx;  // sum f^u(p) / p
  std::vector<double> gap_bound;     // sum |f(p)|^u / p^2
};

// mu from cumulants via m_n = sum_i C(n-1, i-1) kappa_i m_{n-i} with kappa_1 = 0.
std::vector<double> central_from_cumulants(std::span<const double> kappa);

ModelMoments exact_moments(const PrimeFunctionSpec& spec, const Progression& prog,
                           std::uint64_t n, unsigned u_max = kDefaultUmax,
                           ModelMode mode = ModelMode::Restricted,
                           const SieveConfig& config = {});

// Same computation for an explicit list of terms.
ModelMoments exact_moments(std::span<const BernoulliTerm> terms, unsigned u_max);

// The claimed asymptotic of mu_u: sum over the progression of f^u(p)/p.
double paper_central_moment(const PrimeFunctionSpec& spec, const Progression& prog,
                            std::uint64_t n, unsigned u, const SieveConfig& config = {});

struct SampleSet {
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;
  std::vector<double> values;
};

// T independent realizations of S_n. Each prime scatters f(p) into the trial
// slots it succeeds in, found by geometric gap skipping on a stream keyed by
// (seed, p); expected work O(T sum 1/p + pi(n)). Primes are grouped in fixed
// chunks whose per-slot partial sums are added in chunk order, so the output
// does not depend on config.workers.
SampleSet sample(const PrimeFunctionSpec& spec, const Progression& prog, std::uint64_t n,
                 std::uint64_t trials, std::uint64_t seed, ModelMode mode = ModelMode::Restricted,
                 const SieveConfig& config = {});

struct LindebergResult {
  double epsilon = 0.0;
  double variance = 0.0;    // D(n) = sum f^2(p) / p
  double tail_ratio = 0.0;  // (1/D) sum_{|f(p)| > eps sqrt(D)} f^2(p) / p
  double max_abs_f = 0.0;
  double corollary = 0.0;   // max |f(p)| / sqrt(D)
  std::uint64_t term_count = 0;
};

// Throws DegenerateError when D(n) = 0.
LindebergResult lindeberg_check(const PrimeFunctionSpec& spec, const Progression& prog,
                                std::uint64_t n, double epsilon,
                                ModelMode mode = ModelMode::Restricted,
                                const SieveConfig& config = {});

struct Predictions {
  std::vector<double> restricted_sum;  // by order, slot 0 unused
  std::vector<double> density_sum;
};

Predictions predictions(const PrimeFunctionSpec& spec, const Progression& prog, std::uint64_t n,
                        unsigned u_max, const SieveConfig& config = {});

struct PairComparison {
  FunctionClass declared_class = FunctionClass::V;
  MomentSummary f_star;
  MomentSummary f;
  MomentSummary difference;       // moments of f(m) - f_star(m)
  std::vector<double> mu_difference;  // mu_u(f) - mu_u(f_star)
  Predictions f_star_predictions;
  Predictions f_predictions;
  // Class H: sum over overridden prime powers of |f(p^a) - f_star(p^a)| times
  // the density (1/p^a)(1 - 1/p) of members with p^a || m.
  std::optional<double> override_contribution;
};

PairComparison compare_pair(const FunctionPair& pair, const Progression& prog, std::uint64_t n,
                            unsigned u_max = kDefaultUmax, const SieveConfig& config = {});

}  // namespace apm
