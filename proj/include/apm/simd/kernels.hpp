#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference version and,
// on x86-64, an AVX2 version; the active table is chosen once at startup from
// CPUID (override with APM_ISA=scalar). The two variants agree to rounding,
// not bit-for-bit, since lane-wise accumulation reorders the additions.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace apm::simd {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa) noexcept;

// Compensated partial sum returned by accumulating kernels: total = hi + lo.
struct SumPair {
  double hi = 0.0;
  double lo = 0.0;
};

// Highest cumulant order the cumulant kernel handles.
inline constexpr unsigned kMaxOrder = 10;

struct KernelTable {
  Isa isa;

  // sum_i num[i]^u / den[i], u >= 1.
  SumPair (*sum_pow_ratio)(const double* num, const double* den, std::size_t n, unsigned u);

  // out[j] = sum_i (x[i] - shift)^j for j = 0..umax (out[0] = n). Each order
  // is accumulated with compensation.
  void (*central_power_sums)(const double* x, std::size_t n, double shift, unsigned umax,
                             SumPair* out);

  // #{ i : |x[i] - center| <= radius }.
  std::size_t (*count_within)(const double* x, std::size_t n, double center, double radius);

  // For independent terms f[i] * Bernoulli(q[i]): kappa[j] += f^j * K_j(q),
  // approx[j] += f^j * q, gap[j] += |f|^j * q^2 for j = 1..umax, where
  // K_j(q) = sum_d poly[j * (kMaxOrder + 1) + d] * q^d. Arrays are indexed
  // by order (slot 0 unused).
  void (*bernoulli_cumulant_sums)(const double* f, const double* q, std::size_t n, unsigned umax,
                                  const double* poly, SumPair* kappa, SumPair* approx,
                                  SumPair* gap);

  // Writes the indices of non-zero bytes of flags[0..n) to out in ascending
  // order; returns how many were written. out must hold n entries.
  std::size_t (*collect_nonzero)(const std::uint8_t* flags, std::size_t n, std::uint32_t* out);
};

bool isa_supported(Isa isa) noexcept;

// Throws std::invalid_argument if the ISA is not usable on this machine.
const KernelTable& kernels_for(Isa isa);

// The table selected for this process.
const KernelTable& kernels();

namespace detail {
extern const KernelTable kScalarTable;
#if defined(__x86_64__) || defined(_M_X64)
extern const KernelTable kAvx2Table;
#endif
}  // namespace detail

}  // namespace apm::simd
