#include "apm/compensated.hpp"
#include "apm/simd/kernels.hpp"

#include <cmath>

namespace apm::simd {
namespace {

inline double ipow(double x, unsigned u) noexcept {
  double r = x;
  for (unsigned i = 1; i < u; ++i) r *= x;
  return r;
}

inline void add(SumPair& acc, double v) noexcept {
  double err;
  two_sum(acc.hi, v, acc.hi, err);
  acc.lo += err;
}

SumPair sum_pow_ratio(const double* num, const double* den, std::size_t n, unsigned u) {
  SumPair acc;
  for (std::size_t i = 0; i < n; ++i) add(acc, ipow(num[i], u) / den[i]);
  return acc;
}

void central_power_sums(const double* x, std::size_t n, double shift, unsigned umax,
                        SumPair* out) {
  for (unsigned j = 0; j <= umax; ++j) out[j] = {};
  out[0].hi = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - shift;
    double p = d;
    for (unsigned j = 1; j <= umax; ++j) {
      add(out[j], p);
      p *= d;
    }
  }
}

std::size_t count_within(const double* x, std::size_t n, double center, double radius) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += std::fabs(x[i] - center) <= radius ? 1 : 0;
  return c;
}

void bernoulli_cumulant_sums(const double* f, const double* q, std::size_t n, unsigned umax,
                             const double* poly, SumPair* kappa, SumPair* approx, SumPair* gap) {
  for (std::size_t i = 0; i < n; ++i) {
    const double qi = q[i];
    const double q2 = qi * qi;
    const double af = std::fabs(f[i]);
    double fp = f[i];
    double afp = af;
    for (unsigned j = 1; j <= umax; ++j) {
      const double* c = poly + j * (kMaxOrder + 1);
      double k = c[j];
      for (unsigned d = j; d-- > 0;) k = k * qi + c[d];
      add(kappa[j], fp * k);
      add(approx[j], fp * qi);
      add(gap[j], afp * q2);
      fp *= f[i];
      afp *= af;
    }
  }
}

std::size_t collect_nonzero(const std::uint8_t* flags, std::size_t n, std::uint32_t* out) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (flags[i]) out[c++] = static_cast<std::uint32_t>(i);
  }
  return c;
}

}  // namespace

namespace detail {
const KernelTable kScalarTable{Isa::Scalar,     &sum_pow_ratio,           &central_power_sums,
                               &count_within,   &bernoulli_cumulant_sums, &collect_nonzero};
}  // namespace detail

}  // namespace apm::simd
