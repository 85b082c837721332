#include "apm/model.hpp"

#include "apm/compensated.hpp"
#include "apm/error.hpp"
#include "apm/parallel.hpp"
#include "apm/rng.hpp"
#include "apm/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace apm {

static_assert(kMaxUmax == simd::kMaxOrder);

namespace {

constexpr std::size_t kPoly = simd::kMaxOrder + 1;
constexpr std::size_t kSampleChunk = std::size_t{1} << 16;

void check_umax(unsigned u_max) {
  if (u_max < 1 || u_max > kMaxUmax) {
    throw std::invalid_argument("u_max must be in [1, " + std::to_string(kMaxUmax) + "]");
  }
}

bool selected(std::uint64_t p, const Progression& prog, ModelMode mode) {
  return mode == ModelMode::Restricted ? prog.contains(p) : prog.modulus() % p != 0;
}

// Calls visit(primes, values) per sieve segment for the selected primes
// p0 <= p <= n with f(p) != 0.
template <class Visit>
void for_each_term_block(const PrimeFunctionSpec& spec, const Progression& prog, std::uint64_t n,
                         ModelMode mode, const SieveConfig& config, Visit&& visit) {
  if (n < 2) return;
  std::vector<std::uint64_t> ps;
  std::vector<double> fs;
  for_each_prime_block(n, config, [&](std::span<const std::uint64_t> block) {
    ps.clear();
    fs.clear();
    for (const auto p : block) {
      if (p < spec.start_prime() || !selected(p, prog, mode)) continue;
      const double v = spec.at(p);
      if (v == 0.0) continue;
      ps.push_back(p);
      fs.push_back(v);
    }
    if (!ps.empty()) visit(std::span<const std::uint64_t>(ps), std::span<const double>(fs));
  });
}

std::vector<double> flat_polynomials() {
  const auto& table = bernoulli_cumulant_polynomials();
  std::vector<double> flat(kPoly * kPoly, 0.0);
  for (std::size_t j = 0; j < kPoly; ++j) {
    for (std::size_t d = 0; d < kPoly; ++d) flat[j * kPoly + d] = table[j][d];
  }
  return flat;
}

struct CumulantSums {
  std::vector<CompensatedSum> kappa, approx, gap;
  std::uint64_t terms = 0;

  CumulantSums() : kappa(kPoly), approx(kPoly), gap(kPoly) {}

  void add(std::span<const double> f, std::span<const double> q, unsigned u_max,
           const std::vector<double>& poly) {
    std::vector<simd::SumPair> k(kPoly), a(kPoly), g(kPoly);
    simd::kernels().bernoulli_cumulant_sums(f.data(), q.data(), f.size(), u_max, poly.data(),
                                            k.data(), a.data(), g.data());
    for (unsigned j = 1; j <= u_max; ++j) {
      kappa[j] += CompensatedSum(k[j].hi, k[j].lo);
      approx[j] += CompensatedSum(a[j].hi, a[j].lo);
      gap[j] += CompensatedSum(g[j].hi, g[j].lo);
    }
    terms += f.size();
  }

  void finish(ModelMoments& out) const {
    out.term_count = terms;
    out.kappa.assign(out.u_max + 1, 0.0);
    out.paper_approx.assign(out.u_max + 1, 0.0);
    out.gap_bound.assign(out.u_max + 1, 0.0);
    for (unsigned j = 1; j <= out.u_max; ++j) {
      out.kappa[j] = kappa[j].value();
      out.paper_approx[j] = approx[j].value();
      out.gap_bound[j] = gap[j].value();
    }
    out.mu = central_from_cumulants(out.kappa);
  }
};

}  // namespace

ModelMode parse_model_mode(const std::string& text) {
  if (text == "restricted") return ModelMode::Restricted;
  if (text == "density") return ModelMode::Density;
  throw std::invalid_argument("unknown model mode '" + text + "' (restricted|density)");
}

std::string to_string(ModelMode mode) {
  return mode == ModelMode::Restricted ? "restricted" : "density";
}

double BernoulliTerm::raw_moment(unsigned j) const noexcept {
  return std::pow(value, static_cast<double>(j)) * success_prob;
}

const CumulantPolynomials& bernoulli_cumulant_polynomials() {
  static const CumulantPolynomials table = [] {
    CumulantPolynomials t{};
    t[1][1] = 1.0;
    for (std::size_t j = 1; j < kMaxUmax; ++j) {
      // q (1 - q) d/dq sum c_d q^d = sum d c_d q^d - sum d c_d q^(d+1)
      for (std::size_t d = 1; d <= kMaxUmax; ++d) {
        const double c = static_cast<double>(d) * t[j][d];
        if (c == 0.0) continue;
        t[j + 1][d] += c;
        if (d + 1 <= kMaxUmax) t[j + 1][d + 1] -= c;
      }
    }
    return t;
  }();
  return table;
}

std::vector<double> central_from_cumulants(std::span<const double> kappa) {
  const std::size_t top = kappa.empty() ? 0 : kappa.size() - 1;
  std::vector<double> mu(top + 1, 0.0);
  mu[0] = 1.0;
  for (std::size_t m = 2; m <= top; ++m) {
    double s = 0.0;
    double binom = 1.0;  // C(m-1, i-1)
    for (std::size_t i = 1; i <= m; ++i) {
      if (i >= 2) s += binom * kappa[i] * mu[m - i];
      binom = binom * static_cast<double>(m - i) / static_cast<double>(i);
    }
    mu[m] = s;
  }
  return mu;
}

ModelMoments exact_moments(const PrimeFunctionSpec& spec, const Progression& prog,
                           std::uint64_t n, unsigned u_max, ModelMode mode,
                           const SieveConfig& config) {
  check_umax(u_max);
  ModelMoments out;
  out.n = n;
  out.prog = prog;
  out.mode = mode;
  out.u_max = u_max;
  const auto poly = flat_polynomials();
  CumulantSums sums;
  std::vector<double> q;
  for_each_term_block(spec, prog, n, mode, config,
                      [&](std::span<const std::uint64_t> ps, std::span<const double> fs) {
                        q.resize(ps.size());
                        for (std::size_t i = 0; i < ps.size(); ++i) {
                          q[i] = 1.0 / static_cast<double>(ps[i]);
                        }
                        sums.add(fs, q, u_max, poly);
                      });
  sums.finish(out);
  return out;
}

ModelMoments exact_moments(std::span<const BernoulliTerm> terms, unsigned u_max) {
  check_umax(u_max);
  ModelMoments out;
  out.u_max = u_max;
  const auto poly = flat_polynomials();
  std::vector<double> f, q;
  for (const auto& t : terms) {
    if (t.success_prob < 0.0 || t.success_prob > 1.0) {
      throw std::invalid_argument("success probability must lie in [0, 1]");
    }
    f.push_back(t.value);
    q.push_back(t.success_prob);
  }
  CumulantSums sums;
  sums.add(f, q, u_max, poly);
  sums.finish(out);
  return out;
}

double paper_central_moment(const PrimeFunctionSpec& spec, const Progression& prog,
                            std::uint64_t n, unsigned u, const SieveConfig& config) {
  if (u < 1 || u > kMaxUmax) throw std::invalid_argument("order u out of range");
  return exact_moments(spec, prog, n, std::max(u, 1u), ModelMode::Restricted, config)
      .paper_approx[u];
}

SampleSet sample(const PrimeFunctionSpec& spec, const Progression& prog, std::uint64_t n,
                 std::uint64_t trials, std::uint64_t seed, ModelMode mode,
                 const SieveConfig& config) {
  if (trials == 0) throw std::invalid_argument("trials must be >= 1");
  SampleSet out;
  out.seed = seed;
  out.trials = trials;
  out.values.assign(trials, 0.0);

  std::vector<std::uint64_t> ps;
  std::vector<double> fs;
  for_each_term_block(spec, prog, n, mode, config,
                      [&](std::span<const std::uint64_t> bp, std::span<const double> bf) {
                        ps.insert(ps.end(), bp.begin(), bp.end());
                        fs.insert(fs.end(), bf.begin(), bf.end());
                      });

  const std::size_t chunks = (ps.size() + kSampleChunk - 1) / kSampleChunk;
  const double total = static_cast<double>(trials);
  ordered_parallel(
      chunks, config.workers,
      [&](std::size_t c) {
        std::vector<double> partial(trials, 0.0);
        const std::size_t end = std::min(ps.size(), (c + 1) * kSampleChunk);
        for (std::size_t i = c * kSampleChunk; i < end; ++i) {
          const double log_miss = std::log1p(-1.0 / static_cast<double>(ps[i]));
          CounterStream rng(seed, ps[i]);
          double slot = 0.0;
          for (;;) {
            // failures before the next success ~ Geometric(1/p)
            slot += std::floor(std::log(rng.uniform()) / log_miss);
            if (!(slot < total)) break;
            partial[static_cast<std::size_t>(slot)] += fs[i];
            slot += 1.0;
          }
        }
        return partial;
      },
      [&](std::size_t, std::vector<double>&& partial) {
        for (std::uint64_t t = 0; t < trials; ++t) out.values[t] += partial[t];
      });
  return out;
}

LindebergResult lindeberg_check(const PrimeFunctionSpec& spec, const Progression& prog,
                                std::uint64_t n, double epsilon, ModelMode mode,
                                const SieveConfig& config) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  std::vector<double> fs, ws;
  CompensatedSum d;
  for_each_term_block(spec, prog, n, mode, config,
                      [&](std::span<const std::uint64_t> ps, std::span<const double> bf) {
                        for (std::size_t i = 0; i < ps.size(); ++i) {
                          const double w = bf[i] * bf[i] / static_cast<double>(ps[i]);
                          fs.push_back(bf[i]);
                          ws.push_back(w);
                          d += w;
                        }
                      });
  LindebergResult out;
  out.epsilon = epsilon;
  out.variance = d.value();
  out.term_count = fs.size();
  if (!(out.variance > 0.0)) {
    throw DegenerateError("D(n) = 0: f vanishes on every selected prime up to " +
                          std::to_string(n));
  }
  const double threshold = epsilon * std::sqrt(out.variance);
  CompensatedSum tail;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const double a = std::abs(fs[i]);
    out.max_abs_f = std::max(out.max_abs_f, a);
    if (a > threshold) tail += ws[i];
  }
  out.tail_ratio = tail.value() / out.variance;
  out.corollary = out.max_abs_f / std::sqrt(out.variance);
  return out;
}

Predictions predictions(const PrimeFunctionSpec& spec, const Progression& prog, std::uint64_t n,
                        unsigned u_max, const SieveConfig& config) {
  Predictions out;
  out.restricted_sum =
      exact_moments(spec, prog, n, u_max, ModelMode::Restricted, config).paper_approx;
  out.density_sum = exact_moments(spec, prog, n, u_max, ModelMode::Density, config).paper_approx;
  return out;
}

PairComparison compare_pair(const FunctionPair& pair, const Progression& prog, std::uint64_t n,
                            unsigned u_max, const SieveConfig& config) {
  pair.validate();
  if (prog.count_upto(n) == 0) {
    throw std::invalid_argument("the progression has no member <= " + std::to_string(n));
  }
  const std::vector<AdditiveFunction> fns{pair.f_star, pair.f};
  MomentAccumulator acc_star(u_max), acc_f(u_max), acc_diff(u_max);
  std::vector<double> diff;
  for_each_value_block(fns, prog, n, config, [&](std::span<const std::vector<double>> values) {
    const auto& vs = values[0];
    const auto& vf = values[1];
    diff.resize(vs.size());
    for (std::size_t i = 0; i < vs.size(); ++i) diff[i] = vf[i] - vs[i];
    acc_star.add(vs);
    acc_f.add(vf);
    acc_diff.add(diff);
  });

  PairComparison out;
  out.declared_class = pair.declared_class;
  out.f_star = MomentSummary::from(acc_star, n, prog);
  out.f = MomentSummary::from(acc_f, n, prog);
  out.difference = MomentSummary::from(acc_diff, n, prog);
  out.mu_difference.assign(u_max + 1, 0.0);
  for (unsigned u = 0; u <= u_max; ++u) {
    out.mu_difference[u] = out.f.central_moments[u] - out.f_star.central_moments[u];
  }
  out.f_star_predictions = predictions(pair.f_star.spec, prog, n, u_max, config);
  out.f_predictions = predictions(pair.f.spec, prog, n, u_max, config);

  if (pair.declared_class == FunctionClass::H) {
    std::set<std::pair<std::uint64_t, unsigned>> keys;
    for (const auto& [key, value] : pair.f.ext.overrides) keys.insert(key);
    for (const auto& [key, value] : pair.f_star.ext.overrides) keys.insert(key);
    CompensatedSum total;
    for (const auto& [p, a] : keys) {
      if (p < 2 || a < 1 || prog.modulus() % p == 0) continue;
      const double delta = pair.f.at_prime_power(p, a) - pair.f_star.at_prime_power(p, a);
      const double pd = static_cast<double>(p);
      total += std::abs(delta) * std::pow(pd, -static_cast<double>(a)) * (1.0 - 1.0 / pd);
    }
    out.override_contribution = total.value();
  }
  return out;
}

}  // namespace apm
