#pragma once

// Empirical moments of an additive function over the members of a
// progression, the counting identity for the exact mean, and Chebyshev /
// law-of-large-numbers coverage.

#include "apm/arith_fn.hpp"
#include "apm/compensated.hpp"
#include "apm/progression.hpp"
#include "apm/sieve.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace apm {

inline constexpr unsigned kDefaultUmax = 6;
inline constexpr unsigned kMaxUmax = 10;

// Streaming, mergeable central power sums up to order umax. Blocks are folded
// in with the binomial shift identity, so the accumulator never needs more
// than one block of values at a time.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(unsigned umax = kDefaultUmax);

  void add(std::span<const double> values);
  void merge(const MomentAccumulator& other);

  unsigned umax() const noexcept { return umax_; }
  std::uint64_t count() const noexcept { return n_; }
  double mean() const noexcept;
  // Population central moment (divides by count); u in [0, umax].
  double central_moment(unsigned u) const;

 private:
  unsigned umax_;
  std::uint64_t n_ = 0;
  CompensatedSum sum_;
  double center_ = 0.0;
  // power_[j] = sum (x - center_)^j
  std::vector<double> power_;
};

struct MomentSummary {
  std::uint64_t n = 0;
  Progression prog;
  std::uint64_t count = 0;
  double mean = 0.0;
  double sigma = 0.0;
  // central_moments[u] = mu_u for u = 0..u_max (mu_0 = 1, mu_1 = 0).
  std::vector<double> central_moments;
  unsigned u_max = kDefaultUmax;

  static MomentSummary from(const MomentAccumulator& acc, std::uint64_t n,
                            const Progression& prog);
};

using ValueSink = std::function<void(std::span<const double>)>;

// Evaluates each function on all members m <= n of prog, block by block and
// in ascending member order; visit receives one value span per function.
void for_each_value_block(std::span<const AdditiveFunction> fns, const Progression& prog,
                          std::uint64_t n, const SieveConfig& config,
                          const std::function<void(std::span<const std::vector<double>>)>& visit);

// Throws std::invalid_argument when the progression has no member <= n or
// u_max is outside [2, 10]. sink, when set, sees every value in order.
MomentSummary empirical_moments(const AdditiveFunction& fn, const Progression& prog,
                                std::uint64_t n, unsigned u_max = kDefaultUmax,
                                const SieveConfig& config = {}, const ValueSink& sink = {});

std::vector<double> collect_values(const AdditiveFunction& fn, const Progression& prog,
                                   std::uint64_t n, const SieveConfig& config = {});

// Exact mean of a strongly additive f over the members m <= n, computed as
// sum_p f(p) N_p / count with N_p = #{members divisible by p} solved from the
// simultaneous congruences. Throws std::invalid_argument for other extensions
// or an empty progression.
double mean_via_counts(const PrimeFunctionSpec& spec, const AdditiveExtension& ext,
                       const Progression& prog, std::uint64_t n, const SieveConfig& config = {});

// N_p for one prime (0 when p divides k).
std::uint64_t members_divisible_by(const Progression& prog, std::uint64_t n, std::uint64_t p);

struct ChebyshevReport {
  std::vector<double> b_values;
  std::vector<double> coverage;
  std::vector<double> bound;  // 1 - 1/b^2
  bool degenerate = false;    // sigma = 0: coverage is 1 for every b
};

inline const std::vector<double> kDefaultChebyshevB{1.5, 2.0, 3.0};

// values must be the data summary was computed from.
ChebyshevReport chebyshev_check(const MomentSummary& summary, std::span<const double> values,
                                std::span<const double> b_list);

// Unboundedly increasing b(n) choices for the law-of-large-numbers check.
enum class BofN { LogLogCubeRoot, LogLogSqrt, LogLog };

BofN parse_b_of_n(const std::string& text);
std::string to_string(BofN b);
// max(1, g(ln ln n)); 1 for n < 3.
double b_of_n(BofN choice, std::uint64_t n);

struct LlnRecord {
  std::uint64_t n = 0;
  double b = 1.0;
  std::uint64_t count = 0;
  double mean = 0.0;
  double sigma = 0.0;
  double bound = 0.0;                    // 1 - 1/b^2
  double coverage_sigma = 1.0;           // P(|f - A_n| <= b sigma_n)
  std::optional<double> coverage_turan;  // P(|f - A_n| <= b sqrt(A_n)); unset when A_n <= 0
};

std::vector<LlnRecord> lln_check(const AdditiveFunction& fn, const Progression& prog,
                                 std::span<const std::uint64_t> n_list,
                                 BofN choice = BofN::LogLogCubeRoot,
                                 const SieveConfig& config = {});

}  // namespace apm
