// AVX2 + FMA variant. Compiled with -mavx2 -mfma; only reached after the
// dispatcher has confirmed both feature bits.

#include <immintrin.h>

#include "variant_prelude.hpp"
#include "variants.hpp"

namespace igkit::simd::avx2 {

struct F64 {
  using value_type = double;
  using reg = __m256d;
  static constexpr int width = 4;
  static reg zero() { return _mm256_setzero_pd(); }
  static reg load(const double* p) { return _mm256_loadu_pd(p); }
  static void store(double* p, reg v) { _mm256_storeu_pd(p, v); }
  static reg broadcast(double v) { return _mm256_set1_pd(v); }
  static reg fmadd(reg a, reg b, reg c) { return _mm256_fmadd_pd(a, b, c); }
  static reg add(reg a, reg b) { return _mm256_add_pd(a, b); }
  static reg mul(reg a, reg b) { return _mm256_mul_pd(a, b); }
  static reg max(reg a, reg b) { return _mm256_max_pd(a, b); }
};

struct F32 {
  using value_type = float;
  using reg = __m256;
  static constexpr int width = 8;
  static reg zero() { return _mm256_setzero_ps(); }
  static reg load(const float* p) { return _mm256_loadu_ps(p); }
  static void store(float* p, reg v) { _mm256_storeu_ps(p, v); }
  static reg broadcast(float v) { return _mm256_set1_ps(v); }
  static reg fmadd(reg a, reg b, reg c) { return _mm256_fmadd_ps(a, b, c); }
  static reg add(reg a, reg b) { return _mm256_add_ps(a, b); }
  static reg mul(reg a, reg b) { return _mm256_mul_ps(a, b); }
  static reg max(reg a, reg b) { return _mm256_max_ps(a, b); }
};

// 6 x 8 doubles / 6 x 16 floats: 12 accumulators + 2 B vectors + 1 broadcast.
constexpr int kMrF64 = 6, kNvF64 = 2;
constexpr int kMrF32 = 6, kNvF32 = 2;

#include "gemm_impl.inl"
#include "variant_common.inl"

const KernelTable& table() {
  static const KernelTable t{Isa::Avx2, &gemm_f64, &gemm_f32, &axpy_f64, &mul_f64, &relu_f64};
  return t;
}

}  // namespace igkit::simd::avx2
