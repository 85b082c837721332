#include "apm/moments.hpp"

#include "apm/parallel.hpp"
#include "apm/simd/kernels.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace apm {

namespace {

constexpr auto kBinomial = [] {
  std::array<std::array<double, kMaxUmax + 1>, kMaxUmax + 1> c{};
  for (unsigned n = 0; n <= kMaxUmax; ++n) {
    c[n][0] = 1.0;
    for (unsigned k = 1; k <= n; ++k) c[n][k] = c[n - 1][k - 1] + (k <= n - 1 ? c[n - 1][k] : 0.0);
  }
  return c;
}();

void check_umax(unsigned umax) {
  if (umax < 2 || umax > kMaxUmax) {
    throw std::invalid_argument("u_max must lie in [2, " + std::to_string(kMaxUmax) + "], got " +
                                std::to_string(umax));
  }
}

}  // namespace

MomentAccumulator::MomentAccumulator(unsigned umax) : umax_(umax), power_(umax + 1, 0.0) {
  check_umax(umax);
}

double MomentAccumulator::mean() const noexcept {
  return n_ == 0 ? 0.0 : sum_.value() / static_cast<double>(n_);
}

void MomentAccumulator::add(std::span<const double> values) {
  if (values.empty()) return;
  const auto& k = simd::kernels();
  simd::SumPair sums[kMaxUmax + 1];
  k.central_power_sums(values.data(), values.size(), 0.0, 1, sums);
  MomentAccumulator block(umax_);
  block.n_ = values.size();
  block.sum_ = CompensatedSum(sums[1].hi, sums[1].lo);
  block.center_ = block.sum_.value() / static_cast<double>(block.n_);
  k.central_power_sums(values.data(), values.size(), block.center_, umax_, sums);
  for (unsigned j = 0; j <= umax_; ++j) block.power_[j] = sums[j].hi + sums[j].lo;
  merge(block);
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.umax_ != umax_) throw std::invalid_argument("merging accumulators of different order");
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  const double delta = other.center_ - center_;
  const double da = -nb * delta / n;
  const double db = na * delta / n;
  std::vector<double> merged(umax_ + 1, 0.0);
  for (unsigned p = 0; p <= umax_; ++p) {
    double s = 0.0;
    double pa = 1.0;
    double pb = 1.0;
    for (unsigned j = 0; j <= p; ++j) {
      s += kBinomial[p][j] * (power_[p - j] * pa + other.power_[p - j] * pb);
      pa *= da;
      pb *= db;
    }
    merged[p] = s;
  }
  power_ = std::move(merged);
  center_ -= da;
  n_ += other.n_;
  sum_ += other.sum_;
}

double MomentAccumulator::central_moment(unsigned u) const {
  if (u > umax_) throw std::invalid_argument("order exceeds accumulator u_max");
  if (n_ == 0) return 0.0;
  if (u == 0) return 1.0;
  const double d = center_ - mean();
  double s = 0.0;
  double pd = 1.0;
  for (unsigned j = 0; j <= u; ++j) {
    s += kBinomial[u][j] * power_[u - j] * pd;
    pd *= d;
  }
  return s / static_cast<double>(n_);
}

MomentSummary MomentSummary::from(const MomentAccumulator& acc, std::uint64_t n,
                                  const Progression& prog) {
  MomentSummary s;
  s.n = n;
  s.prog = prog;
  s.count = acc.count();
  s.u_max = acc.umax();
  s.mean = acc.mean();
  s.central_moments.assign(acc.umax() + 1, 0.0);
  s.central_moments[0] = 1.0;
  for (unsigned u = 2; u <= acc.umax(); ++u) s.central_moments[u] = acc.central_moment(u);
  s.central_moments[2] = std::max(s.central_moments[2], 0.0);
  s.sigma = std::sqrt(s.central_moments[2]);
  return s;
}

void for_each_value_block(std::span<const AdditiveFunction> fns, const Progression& prog,
                          std::uint64_t n, const SieveConfig& config,
                          const std::function<void(std::span<const std::vector<double>>)>& visit) {
  const MemberBlocks blocks(n, prog, config);
  std::vector<AdditiveEvaluator> evaluators;
  evaluators.reserve(fns.size());
  for (const auto& fn : fns) evaluators.emplace_back(fn, *blocks.base_primes);
  ordered_parallel(
      blocks.block_count(), config.workers,
      [&](std::size_t i) {
        const SpfBlock block = blocks.block(i);
        std::vector<std::vector<double>> values(evaluators.size());
        for (std::size_t f = 0; f < evaluators.size(); ++f) evaluators[f].evaluate(block, values[f]);
        return values;
      },
      [&](std::size_t, std::vector<std::vector<double>>&& values) { visit(values); });
}

MomentSummary empirical_moments(const AdditiveFunction& fn, const Progression& prog,
                                std::uint64_t n, unsigned u_max, const SieveConfig& config,
                                const ValueSink& sink) {
  check_umax(u_max);
  if (prog.count_upto(n) == 0) {
    throw std::invalid_argument("progression (" + std::to_string(prog.modulus()) + ", " +
                                std::to_string(prog.residue()) + ") has no member <= " +
                                std::to_string(n));
  }
  MomentAccumulator acc(u_max);
  const AdditiveFunction fns[] = {fn};
  for_each_value_block(fns, prog, n, config, [&](std::span<const std::vector<double>> v) {
    acc.add(v[0]);
    if (sink) sink(v[0]);
  });
  return MomentSummary::from(acc, n, prog);
}

std::vector<double> collect_values(const AdditiveFunction& fn, const Progression& prog,
                                   std::uint64_t n, const SieveConfig& config) {
  std::vector<double> out;
  out.reserve(prog.count_upto(n));
  const AdditiveFunction fns[] = {fn};
  for_each_value_block(fns, prog, n, config, [&](std::span<const std::vector<double>> v) {
    out.insert(out.end(), v[0].begin(), v[0].end());
  });
  return out;
}

namespace {
__extension__ typedef unsigned __int128 u128;
}

std::uint64_t members_divisible_by(const Progression& prog, std::uint64_t n, std::uint64_t p) {
  const std::uint64_t k = prog.modulus();
  if (k % p == 0) return 0;
  const std::uint64_t count = prog.count_upto(n);
  if (count == 0) return 0;
  const std::uint64_t first = prog.first_member();
  const std::uint64_t inv = inverse_mod(k % p, p);
  // first + i k = 0 (mod p)
  const auto i0 = static_cast<std::uint64_t>(
      static_cast<u128>((p - first % p) % p) * inv % p);
  const std::uint64_t last = count - 1;
  return i0 > last ? 0 : (last - i0) / p + 1;
}

double mean_via_counts(const PrimeFunctionSpec& spec, const AdditiveExtension& ext,
                       const Progression& prog, std::uint64_t n, const SieveConfig& config) {
  if (!ext.strongly_additive()) {
    throw std::invalid_argument("mean_via_counts requires a strongly additive extension");
  }
  const std::uint64_t count = prog.count_upto(n);
  if (count == 0) {
    throw std::invalid_argument("progression has no member <= " + std::to_string(n));
  }
  if (n < 2) return 0.0;
  CompensatedSum total;
  for_each_prime_block(n, config, [&](std::span<const std::uint64_t> primes) {
    for (std::uint64_t p : primes) {
      const std::uint64_t np = members_divisible_by(prog, n, p);
      if (np != 0) total += spec.at(p) * static_cast<double>(np);
    }
  });
  return total.value() / static_cast<double>(count);
}

ChebyshevReport chebyshev_check(const MomentSummary& summary, std::span<const double> values,
                                std::span<const double> b_list) {
  if (values.size() != summary.count) {
    throw std::invalid_argument("chebyshev_check: value count does not match the summary");
  }
  ChebyshevReport report;
  report.degenerate = summary.sigma == 0.0;
  const auto& k = simd::kernels();
  for (double b : b_list) {
    if (!(b > 0.0)) throw std::invalid_argument("chebyshev_check: b must be positive");
    report.b_values.push_back(b);
    report.bound.push_back(1.0 - 1.0 / (b * b));
    if (report.degenerate || values.empty()) {
      report.coverage.push_back(1.0);
      continue;
    }
    const std::size_t inside = k.count_within(values.data(), values.size(), summary.mean,
                                              b * summary.sigma);
    report.coverage.push_back(static_cast<double>(inside) / static_cast<double>(values.size()));
  }
  return report;
}

BofN parse_b_of_n(const std::string& text) {
  if (text == "loglog_cbrt") return BofN::LogLogCubeRoot;
  if (text == "loglog_sqrt") return BofN::LogLogSqrt;
  if (text == "loglog") return BofN::LogLog;
  throw std::invalid_argument("b(n) must be loglog_cbrt, loglog_sqrt or loglog");
}

std::string to_string(BofN b) {
  switch (b) {
    case BofN::LogLogCubeRoot:
      return "loglog_cbrt";
    case BofN::LogLogSqrt:
      return "loglog_sqrt";
    case BofN::LogLog:
      return "loglog";
  }
  return "?";
}

double b_of_n(BofN choice, std::uint64_t n) {
  if (n < 3) return 1.0;
  const double y = std::log(std::log(static_cast<double>(n)));
  double b = 1.0;
  switch (choice) {
    case BofN::LogLogCubeRoot:
      b = std::cbrt(y);
      break;
    case BofN::LogLogSqrt:
      b = std::sqrt(std::max(y, 0.0));
      break;
    case BofN::LogLog:
      b = y;
      break;
  }
  return std::max(1.0, b);
}

std::vector<LlnRecord> lln_check(const AdditiveFunction& fn, const Progression& prog,
                                 std::span<const std::uint64_t> n_list, BofN choice,
                                 const SieveConfig& config) {
  std::vector<LlnRecord> out;
  const auto& k = simd::kernels();
  for (std::uint64_t n : n_list) {
    std::vector<double> values;
    const auto summary = empirical_moments(fn, prog, n, 2, config, [&](std::span<const double> v) {
      values.insert(values.end(), v.begin(), v.end());
    });
    LlnRecord r;
    r.n = n;
    r.b = b_of_n(choice, n);
    r.count = summary.count;
    r.mean = summary.mean;
    r.sigma = summary.sigma;
    r.bound = 1.0 - 1.0 / (r.b * r.b);
    const auto m = static_cast<double>(values.size());
    r.coverage_sigma =
        summary.sigma == 0.0
            ? 1.0
            : static_cast<double>(k.count_within(values.data(), values.size(), summary.mean,
                                                 r.b * summary.sigma)) /
                  m;
    if (summary.mean > 0.0) {
      r.coverage_turan = static_cast<double>(k.count_within(values.data(), values.size(),
                                                            summary.mean,
                                                            r.b * std::sqrt(summary.mean))) /
                         m;
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace apm
