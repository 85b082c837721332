#include "apm/prime_sums.hpp"

#include "apm/compensated.hpp"
#include "apm/error.hpp"
#include "apm/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace apm {

namespace {

void check_checkpoints(std::span<const std::uint64_t> checkpoints, std::uint64_t minimum) {
  if (checkpoints.empty()) throw std::invalid_argument("at least one checkpoint is required");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < minimum) {
      throw std::invalid_argument("checkpoint " + std::to_string(checkpoints[i]) +
                                  " is below the minimum " + std::to_string(minimum));
    }
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) {
      throw std::invalid_argument("checkpoints must be strictly increasing");
    }
  }
}

bool selected(std::uint64_t p, const Progression& prog, PrimeSelection selection) {
  return selection == PrimeSelection::Restricted ? prog.contains(p)
                                                 : prog.modulus() % p != 0;
}

// sum over selected primes of (term_num(p))^u / p, reported at each checkpoint.
template <class Numerator>
std::vector<PrimeSumResult> checkpoint_sums(std::span<const std::uint64_t> checkpoints,
                                            const Progression& prog, unsigned u,
                                            std::uint64_t p0, PrimeSelection selection,
                                            const SieveConfig& config, Numerator&& numerator) {
  if (u < 1) throw std::invalid_argument("order u must be >= 1");
  check_checkpoints(checkpoints, 2);
  std::vector<PrimeSumResult> out;
  out.reserve(checkpoints.size());
  const auto& k = simd::kernels();
  CompensatedSum total;
  std::uint64_t terms = 0;
  std::size_t next = 0;
  std::vector<double> num;
  std::vector<double> den;
  std::vector<std::uint64_t> ps;

  auto flush = [&](std::size_t begin, std::size_t end) {
    if (end <= begin) return;
    const auto s = k.sum_pow_ratio(num.data() + begin, den.data() + begin, end - begin, u);
    total += CompensatedSum(s.hi, s.lo);
    terms += end - begin;
  };

  for_each_prime_block(checkpoints.back(), config, [&](std::span<const std::uint64_t> block) {
    num.clear();
    den.clear();
    ps.clear();
    for (std::uint64_t p : block) {
      if (p < p0 || !selected(p, prog, selection)) continue;
      ps.push_back(p);
      num.push_back(numerator(p));
      den.push_back(static_cast<double>(p));
    }
    std::size_t begin = 0;
    while (next < checkpoints.size()) {
      const auto split = static_cast<std::size_t>(
          std::upper_bound(ps.begin(), ps.end(), checkpoints[next]) - ps.begin());
      if (split == ps.size() && (block.empty() || block.back() < checkpoints[next])) break;
      flush(begin, split);
      begin = split;
      out.push_back({checkpoints[next], prog, u, total.value(), terms, true});
      ++next;
    }
    flush(begin, ps.size());
  });
  while (next < checkpoints.size()) {
    out.push_back({checkpoints[next], prog, u, total.value(), terms, true});
    ++next;
  }
  return out;
}

double ipow(double x, unsigned u) {
  double r = 1.0;
  for (unsigned i = 0; i < u; ++i) r *= x;
  return r;
}

}  // namespace

std::vector<PrimeSumResult> prime_power_sums_at(const PrimeFunctionSpec& spec, unsigned u,
                                                std::span<const std::uint64_t> checkpoints,
                                                const Progression& prog,
                                                const SieveConfig& config,
                                                PrimeSelection selection) {
  return checkpoint_sums(checkpoints, prog, u, spec.start_prime(), selection, config,
                         [&](std::uint64_t p) { return spec.at(p); });
}

PrimeSumResult prime_power_sum(const PrimeFunctionSpec& spec, unsigned u, std::uint64_t x,
                               const Progression& prog, const SieveConfig& config,
                               PrimeSelection selection) {
  const std::uint64_t cp[] = {x};
  return prime_power_sums_at(spec, u, cp, prog, config, selection).front();
}

std::string to_string(FormulaTag tag) {
  switch (tag) {
    case FormulaTag::GenericQuadrature:
      return "generic-quadrature";
    case FormulaTag::LnLnLn:
      return "lnlnln";
    case FormulaTag::PowerOfLogLog:
      return "power-of-loglog";
    case FormulaTag::Mertens:
      return "mertens";
  }
  return "?";
}

namespace {

// t^2 g'(t) for g(t) = f(t)^u / t.
double t2_gprime(const PrimeFunctionSpec& spec, unsigned u, double t) {
  const double f = spec.continuous(t);
  return u * ipow(f, u - 1) * spec.derivative(t) * t - ipow(f, u);
}

void check_asymptotic_args(const PrimeFunctionSpec& spec, unsigned u, double x) {
  if (u < 1) throw std::invalid_argument("order u must be >= 1");
  if (!spec.has_continuous_form()) {
    throw std::invalid_argument("asymptotics need a continuous form; " + spec.describe() +
                                " has none");
  }
  if (!(x > static_cast<double>(spec.start_prime()))) {
    throw std::invalid_argument("asymptotics need x > p0 = " + std::to_string(spec.start_prime()));
  }
}

void fill_error_magnitudes(AsymptoticEstimate& est, const PrimeFunctionSpec& spec, unsigned u,
                           double x, const QuadratureOptions& options) {
  est.error_magnitude_1 = std::fabs(ipow(spec.continuous(x), u)) / std::sqrt(x) * std::log(x);
  const double lo = std::log(static_cast<double>(spec.start_prime()));
  const auto r = adaptive_simpson(
      [&](double v) {
        const double t = std::exp(v);
        return std::fabs(t2_gprime(spec, u, t)) / std::sqrt(t) * v;
      },
      lo, std::log(x), options);
  est.error_magnitude_2 = r.value;
}

}  // namespace

AsymptoticEstimate integral_asymptotic(const PrimeFunctionSpec& spec, unsigned u, double x,
                                       std::uint64_t k, const QuadratureOptions& options) {
  check_asymptotic_args(spec, u, x);
  const double phi = static_cast<double>(euler_phi(k));
  const auto r = adaptive_simpson(
      [&](double v) { return ipow(spec.continuous(std::exp(v)), u) / v; },
      std::log(static_cast<double>(spec.start_prime())), std::log(x), options);
  AsymptoticEstimate est;
  est.main_term = r.value / phi;
  est.leading_term = est.main_term;
  est.formula_tag = FormulaTag::GenericQuadrature;
  fill_error_magnitudes(est, spec, u, x, options);
  return est;
}

namespace {

// f = coefficient * (ln ln t)^power, when the kind has that shape.
struct LogLogPower {
  double coefficient;
  double power;
};

std::optional<LogLogPower> loglog_power(const PrimeFunctionSpec& spec) {
  switch (spec.kind()) {
    case PrimeKind::Constant:
      return LogLogPower{spec.parameter(), 0.0};
    case PrimeKind::Indicator:
      return LogLogPower{1.0, 0.0};
    case PrimeKind::InvLogLog:
      return LogLogPower{1.0, -1.0};
    case PrimeKind::SqrtLogLog:
      return LogLogPower{1.0, 0.5};
    case PrimeKind::Scaled: {
      auto inner = loglog_power(*spec.inner());
      if (inner) inner->coefficient *= spec.parameter();
      return inner;
    }
    default:
      return std::nullopt;
  }
}

}  // namespace

AsymptoticEstimate closed_form_asymptotic(const PrimeFunctionSpec& spec, unsigned u, double x,
                                          std::uint64_t k, const QuadratureOptions& options) {
  check_asymptotic_args(spec, u, x);
  const auto shape = loglog_power(spec);
  if (!shape) {
    throw NoClosedFormError("no catalogued closed form for " + spec.describe() +
                            "; use integral_asymptotic");
  }
  const double phi = static_cast<double>(euler_phi(k));
  const double c = ipow(shape->coefficient, u);
  const double a = shape->power * u;
  AsymptoticEstimate est;
  double (*antiderivative)(double, double);
  if (a == 0.0) {
    est.formula_tag = FormulaTag::Mertens;
    antiderivative = [](double y, double) { return y; };
  } else if (a == -1.0) {
    est.formula_tag = FormulaTag::LnLnLn;
    antiderivative = [](double y, double) { return std::log(y); };
  } else {
    est.formula_tag = FormulaTag::PowerOfLogLog;
    antiderivative = [](double y, double a) { return std::pow(y, a + 1.0) / (a + 1.0); };
  }
  const double yx = std::log(std::log(x));
  const double y0 = std::log(std::log(static_cast<double>(spec.start_prime())));
  est.leading_term = c / phi * antiderivative(yx, a);
  est.main_term = c / phi * (antiderivative(yx, a) - antiderivative(y0, a));
  fill_error_magnitudes(est, spec, u, x, options);
  return est;
}

std::string to_string(DecayClass c) {
  switch (c) {
    case DecayClass::Case1:
      return "Case1";
    case DecayClass::Case2:
      return "Case2";
    case DecayClass::Case3:
      return "Case3";
    case DecayClass::Case4:
      return "Case4";
    case DecayClass::Unbounded:
      return "Unbounded";
  }
  return "?";
}

DecayCase classify_decay(const PrimeFunctionSpec& spec, unsigned u) {
  if (u < 1) throw std::invalid_argument("order u must be >= 1");
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  switch (spec.kind()) {
    case PrimeKind::Constant: {
      const double c = ipow(spec.parameter(), u);
      if (c == 0.0) return {DecayClass::Case4, 0, 0.0};
      return {DecayClass::Case1, c > 0 ? 1 : -1, c};
    }
    case PrimeKind::Indicator:
      return {DecayClass::Case1, 1, 1.0};
    case PrimeKind::OneMinusInvP:
    case PrimeKind::OneMinusInvLog:
      return {DecayClass::Case2, 1, 1.0};
    case PrimeKind::InvLogLog:
      // sum 1/(p (ln ln p)^u) converges for u >= 2
      return {u == 1 ? DecayClass::Case3 : DecayClass::Case4, 1, 1.0};
    case PrimeKind::InvLog:
      return {DecayClass::Case4, 1, 1.0};
    case PrimeKind::SqrtLogLog:
      return {DecayClass::Unbounded, 1, nan};
    case PrimeKind::Scaled: {
      const double c = ipow(spec.parameter(), u);
      if (c == 0.0) return {DecayClass::Case4, 0, 0.0};
      DecayCase inner = classify_decay(*spec.inner(), u);
      inner.sign *= c > 0 ? 1 : -1;
      inner.constant *= c;
      return inner;
    }
    case PrimeKind::Tabulated:
      break;
  }
  throw InconclusiveError("tabulated prime function " + spec.describe() +
                          " has no symbolic decay form");
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Converging:
      return "converging";
    case Verdict::Diverging:
      return "diverging";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

Verdict judge_increments(std::span<const std::uint64_t> checkpoints,
                         std::span<const double> partial_sums, const ProbeThresholds& thresholds,
                         double* exponent_out) {
  if (exponent_out) *exponent_out = std::numeric_limits<double>::quiet_NaN();
  const std::size_t m = checkpoints.size();
  if (m < 3 || partial_sums.size() != m) return Verdict::Inconclusive;
  const double v0 = std::log(static_cast<double>(checkpoints[m - 3]));
  const double v1 = std::log(static_cast<double>(checkpoints[m - 2]));
  const double v2 = std::log(static_cast<double>(checkpoints[m - 1]));
  const double d1 = partial_sums[m - 2] - partial_sums[m - 3];
  const double d2 = partial_sums[m - 1] - partial_sums[m - 2];
  if (d1 == 0.0 && d2 == 0.0) {
    if (exponent_out) *exponent_out = std::numeric_limits<double>::infinity();
    return Verdict::Converging;
  }
  if (d1 == 0.0 || (d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) return Verdict::Inconclusive;
  if (d2 == 0.0) {
    if (exponent_out) *exponent_out = std::numeric_limits<double>::infinity();
    return Verdict::Converging;
  }
  const double h1 = d1 / (v1 - v0);
  const double h2 = d2 / (v2 - v1);
  const double alpha = -std::log(h2 / h1) / std::log((v1 + v2) / (v0 + v1));
  if (exponent_out) *exponent_out = alpha;
  if (alpha > thresholds.split + thresholds.band / 2) return Verdict::Converging;
  if (alpha < thresholds.split - thresholds.band / 2) return Verdict::Diverging;
  return Verdict::Inconclusive;
}

ConvergenceProbe divergence_probe(const PrimeFunctionSpec& spec, unsigned u,
                                  std::span<const std::uint64_t> checkpoints,
                                  const ProbeThresholds& thresholds,
                                  const QuadratureOptions& options) {
  if (u < 1) throw std::invalid_argument("order u must be >= 1");
  if (!spec.has_continuous_form()) {
    throw std::invalid_argument("divergence probe needs a continuous form; " + spec.describe() +
                                " has none");
  }
  check_checkpoints(checkpoints, spec.start_prime() + 1);
  ConvergenceProbe probe;
  probe.checkpoints.assign(checkpoints.begin(), checkpoints.end());
  auto integrand = [&](double v) { return t2_gprime(spec, u, std::exp(v)) / v; };
  CompensatedSum running;
  double lo = std::log(static_cast<double>(spec.start_prime()));
  for (std::uint64_t c : checkpoints) {
    const double hi = std::log(static_cast<double>(c));
    running += adaptive_simpson(integrand, lo, hi, options).value;
    probe.partial_sums.push_back(running.value());
    lo = hi;
  }
  probe.verdict =
      judge_increments(checkpoints, probe.partial_sums, thresholds, &probe.decay_exponent);
  return probe;
}

Series parse_series(const std::string& text) {
  if (text == "inv_p_squared" || text == "p2") return Series::InvPSquared;
  if (text == "inv_p_log2p" || text == "plog2p") return Series::InvPLog2P;
  if (text == "inv_p_logp" || text == "plogp") return Series::InvPLogP;
  if (text == "custom") return Series::Custom;
  throw std::invalid_argument("unknown series '" + text +
                              "' (inv_p_squared | inv_p_log2p | inv_p_logp | custom)");
}

std::string to_string(Series s) {
  switch (s) {
    case Series::InvPSquared:
      return "inv_p_squared";
    case Series::InvPLog2P:
      return "inv_p_log2p";
    case Series::InvPLogP:
      return "inv_p_logp";
    case Series::Custom:
      return "custom";
  }
  return "?";
}

ConvergenceProbe convergence_probe(Series series, const Progression& prog,
                                   std::span<const std::uint64_t> checkpoints,
                                   const std::optional<PrimeFunctionSpec>& custom, unsigned u,
                                   const ProbeThresholds& thresholds, const SieveConfig& config) {
  std::vector<PrimeSumResult> sums;
  switch (series) {
    case Series::InvPSquared:
      sums = checkpoint_sums(checkpoints, prog, 1, 2, PrimeSelection::Restricted, config,
                             [](std::uint64_t p) { return 1.0 / static_cast<double>(p); });
      break;
    case Series::InvPLog2P:
      sums = checkpoint_sums(checkpoints, prog, 1, 2, PrimeSelection::Restricted, config,
                             [](std::uint64_t p) {
                               const double l = std::log(static_cast<double>(p));
                               return 1.0 / (l * l);
                             });
      break;
    case Series::InvPLogP:
      sums = checkpoint_sums(checkpoints, prog, 1, 2, PrimeSelection::Restricted, config,
                             [](std::uint64_t p) {
                               return 1.0 / std::log(static_cast<double>(p));
                             });
      break;
    case Series::Custom:
      if (!custom) throw std::invalid_argument("custom series requires a prime function");
      sums = prime_power_sums_at(*custom, u, checkpoints, prog, config);
      break;
  }
  ConvergenceProbe probe;
  probe.checkpoints.assign(checkpoints.begin(), checkpoints.end());
  for (const auto& s : sums) probe.partial_sums.push_back(s.value);
  probe.verdict =
      judge_increments(checkpoints, probe.partial_sums, thresholds, &probe.decay_exponent);
  // Tails bounded by the integer comparison series over the class.
  const double x = static_cast<double>(checkpoints.back());
  const double k = static_cast<double>(prog.modulus());
  if (series == Series::InvPSquared) {
    probe.tail_bound = 1.0 / (x * x) + 1.0 / (k * x);
  } else if (series == Series::InvPLog2P) {
    const double l = std::log(x);
    probe.tail_bound = 1.0 / (x * l * l) + 1.0 / (k * l);
  }
  return probe;
}

}  // namespace apm
