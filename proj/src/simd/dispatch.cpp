#include "apm/simd/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace apm::simd {

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::invalid_argument("instruction set '" + std::string(isa_name(isa)) +
                                "' is not supported on this machine");
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (isa == Isa::Avx2) return detail::kAvx2Table;
#endif
  return detail::kScalarTable;
}

namespace {

const KernelTable& select() {
  if (const char* env = std::getenv("APM_ISA"); env != nullptr && std::string(env) == "scalar") {
    return detail::kScalarTable;
  }
  return isa_supported(Isa::Avx2) ? kernels_for(Isa::Avx2) : detail::kScalarTable;
}

}  // namespace

const KernelTable& kernels() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace apm::simd
