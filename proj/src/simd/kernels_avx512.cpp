// AVX-512F variant. Compiled with -mavx512f -mfma.

#include <immintrin.h>

#include "variant_prelude.hpp"
#include "variants.hpp"

namespace igkit::simd::avx512 {

struct F64 {
  using value_type = double;
  using reg = __m512d;
  static constexpr int width = 8;
  static reg zero() { return _mm512_setzero_pd(); }
  static reg load(const double* p) { return _mm512_loadu_pd(p); }
  static void store(double* p, reg v) { _mm512_storeu_pd(p, v); }
  static reg broadcast(double v) { return _mm512_set1_pd(v); }
  static reg fmadd(reg a, reg b, reg c) { return _mm512_fmadd_pd(a, b, c); }
  static reg add(reg a, reg b) { return _mm512_add_pd(a, b); }
  static reg mul(reg a, reg b) { return _mm512_mul_pd(a, b); }
  static reg max(reg a, reg b) { return _mm512_max_pd(a, b); }
};

struct F32 {
  using value_type = float;
  using reg = __m512;
  static constexpr int width = 16;
  static reg zero() { return _mm512_setzero_ps(); }
  static reg load(const float* p) { return _mm512_loadu_ps(p); }
  static void store(float* p, reg v) { _mm512_storeu_ps(p, v); }
  static reg broadcast(float v) { return _mm512_set1_ps(v); }
  static reg fmadd(reg a, reg b, reg c) { return _mm512_fmadd_ps(a, b, c); }
  static reg add(reg a, reg b) { return _mm512_add_ps(a, b); }
  static reg mul(reg a, reg b) { return _mm512_mul_ps(a, b); }
  static reg max(reg a, reg b) { return _mm512_max_ps(a, b); }
};

// 8 x 16 doubles / 8 x 32 floats: 16 zmm accumulators out of 32.
constexpr int kMrF64 = 8, kNvF64 = 2;
constexpr int kMrF32 = 8, kNvF32 = 2;

#include "gemm_impl.inl"
#include "variant_common.inl"

const KernelTable& table() {
  static const KernelTable t{Isa::Avx512, &gemm_f64, &gemm_f32, &axpy_f64, &mul_f64, &relu_f64};
  return t;
}

}  // namespace igkit::simd::avx512
