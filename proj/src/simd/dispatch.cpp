#include <cstdlib>
#include <string>

#include "igkit/error.hpp"
#include "igkit/simd/kernels.hpp"
#include "variants.hpp"

namespace igkit::simd {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Avx512: return "avx512";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
#if IGKIT_HAVE_X86_VARIANTS
    case Isa::Avx2:
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    case Isa::Avx512:
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx512f") && __builtin_cpu_supports("fma");
#endif
#if IGKIT_HAVE_NEON_VARIANT
    case Isa::Neon: return true;
#endif
    default: return false;
  }
}

Isa best_isa() {
  for (Isa isa : {Isa::Avx512, Isa::Avx2, Isa::Neon})
    if (isa_supported(isa)) return isa;
  return Isa::Scalar;
}

Isa active_isa() {
  static const Isa chosen = [] {
    const Isa best = best_isa();
    const char* env = std::getenv("IGKIT_ISA");
    if (!env) return best;
    const std::string want = env;
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Avx512, Isa::Neon})
      if (want == isa_name(isa) && isa_supported(isa)) return isa;
    return best;
  }();
  return chosen;
}

const KernelTable& kernels(Isa isa) {
  if (!isa_supported(isa)) throw ContractError("kernel variant not supported on this CPU: " + std::string(isa_name(isa)));
  switch (isa) {
#if IGKIT_HAVE_X86_VARIANTS
    case Isa::Avx2: return avx2::table();
    case Isa::Avx512: return avx512::table();
#endif
#if IGKIT_HAVE_NEON_VARIANT
    case Isa::Neon: return neon::table();
#endif
    default: return scalar::table();
  }
}

const KernelTable& kernels() {
  static const KernelTable& active = kernels(active_isa());
  return active;
}

void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, double alpha, const double* a,
          std::size_t lda, const double* b, std::size_t ldb, double beta, double* c, std::size_t ldc) {
  kernels().gemm_f64(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, float alpha, const float* a,
          std::size_t lda, const float* b, std::size_t ldb, float beta, float* c, std::size_t ldc) {
  kernels().gemm_f32(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

}  // namespace igkit::simd
