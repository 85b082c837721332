// Compiled with -mavx2 (no FMA, so per-element products round exactly as in
// the scalar kernels; only the summation order differs).

#include "apm/compensated.hpp"
#include "apm/simd/kernels.hpp"

#include <immintrin.h>

#include <bit>
#include <cmath>

namespace apm::simd {
namespace {

struct Acc4 {
  __m256d hi = _mm256_setzero_pd();
  __m256d lo = _mm256_setzero_pd();

  void add(__m256d v) noexcept {
    const __m256d s = _mm256_add_pd(hi, v);
    const __m256d bb = _mm256_sub_pd(s, hi);
    const __m256d err =
        _mm256_add_pd(_mm256_sub_pd(hi, _mm256_sub_pd(s, bb)), _mm256_sub_pd(v, bb));
    hi = s;
    lo = _mm256_add_pd(lo, err);
  }

  // Folds the four lanes into a scalar pair, lane 0 first.
  void reduce_into(SumPair& out) const noexcept {
    alignas(32) double h[4];
    alignas(32) double l[4];
    _mm256_store_pd(h, hi);
    _mm256_store_pd(l, lo);
    for (int i = 0; i < 4; ++i) {
      double err;
      two_sum(out.hi, h[i], out.hi, err);
      out.lo += err + l[i];
    }
  }
};

inline void add(SumPair& acc, double v) noexcept {
  double err;
  two_sum(acc.hi, v, acc.hi, err);
  acc.lo += err;
}

inline double ipow(double x, unsigned u) noexcept {
  double r = x;
  for (unsigned i = 1; i < u; ++i) r *= x;
  return r;
}

inline __m256d ipow4(__m256d x, unsigned u) noexcept {
  __m256d r = x;
  for (unsigned i = 1; i < u; ++i) r = _mm256_mul_pd(r, x);
  return r;
}

inline __m256d abs4(__m256d x) noexcept {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
}

SumPair sum_pow_ratio(const double* num, const double* den, std::size_t n, unsigned u) {
  Acc4 acc;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_div_pd(ipow4(_mm256_loadu_pd(num + i), u), _mm256_loadu_pd(den + i));
    acc.add(v);
  }
  SumPair out;
  acc.reduce_into(out);
  for (; i < n; ++i) add(out, ipow(num[i], u) / den[i]);
  return out;
}

void central_power_sums(const double* x, std::size_t n, double shift, unsigned umax,
                        SumPair* out) {
  Acc4 acc[kMaxOrder + 1];
  const __m256d s4 = _mm256_set1_pd(shift);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), s4);
    __m256d p = d;
    for (unsigned j = 1; j <= umax; ++j) {
      acc[j].add(p);
      p = _mm256_mul_pd(p, d);
    }
  }
  for (unsigned j = 0; j <= umax; ++j) out[j] = {};
  out[0].hi = static_cast<double>(n);
  for (unsigned j = 1; j <= umax; ++j) acc[j].reduce_into(out[j]);
  for (; i < n; ++i) {
    const double d = x[i] - shift;
    double p = d;
    for (unsigned j = 1; j <= umax; ++j) {
      add(out[j], p);
      p *= d;
    }
  }
}

std::size_t count_within(const double* x, std::size_t n, double center, double radius) {
  const __m256d c4 = _mm256_set1_pd(center);
  const __m256d r4 = _mm256_set1_pd(radius);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = abs4(_mm256_sub_pd(_mm256_loadu_pd(x + i), c4));
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(d, r4, _CMP_LE_OQ));
    count += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(mask)));
  }
  for (; i < n; ++i) count += std::fabs(x[i] - center) <= radius ? 1 : 0;
  return count;
}

void bernoulli_cumulant_sums(const double* f, const double* q, std::size_t n, unsigned umax,
                             const double* poly, SumPair* kappa, SumPair* approx, SumPair* gap) {
  Acc4 kacc[kMaxOrder + 1];
  Acc4 aacc[kMaxOrder + 1];
  Acc4 gacc[kMaxOrder + 1];
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d q4 = _mm256_loadu_pd(q + i);
    const __m256d f4 = _mm256_loadu_pd(f + i);
    const __m256d af4 = abs4(f4);
    const __m256d q2 = _mm256_mul_pd(q4, q4);
    __m256d fp = f4;
    __m256d afp = af4;
    for (unsigned j = 1; j <= umax; ++j) {
      const double* c = poly + j * (kMaxOrder + 1);
      __m256d k = _mm256_set1_pd(c[j]);
      for (unsigned d = j; d-- > 0;) k = _mm256_add_pd(_mm256_mul_pd(k, q4), _mm256_set1_pd(c[d]));
      kacc[j].add(_mm256_mul_pd(fp, k));
      aacc[j].add(_mm256_mul_pd(fp, q4));
      gacc[j].add(_mm256_mul_pd(afp, q2));
      fp = _mm256_mul_pd(fp, f4);
      afp = _mm256_mul_pd(afp, af4);
    }
  }
  for (unsigned j = 1; j <= umax; ++j) {
    kacc[j].reduce_into(kappa[j]);
    aacc[j].reduce_into(approx[j]);
    gacc[j].reduce_into(gap[j]);
  }
  for (; i < n; ++i) {
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
  const __m256i zero = _mm256_setzero_si256();
  std::size_t c = 0;
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(flags + i));
    auto bits = ~static_cast<std::uint32_t>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(v, zero)));
    while (bits != 0) {
      out[c++] = static_cast<std::uint32_t>(i + std::countr_zero(bits));
      bits &= bits - 1;
    }
  }
  for (; i < n; ++i) {
    if (flags[i]) out[c++] = static_cast<std::uint32_t>(i);
  }
  return c;
}

}  // namespace

namespace detail {
const KernelTable kAvx2Table{Isa::Avx2,     &sum_pow_ratio,           &central_power_sums,
                             &count_within, &bernoulli_cumulant_sums, &collect_nonzero};
}  // namespace detail

}  // namespace apm::simd
