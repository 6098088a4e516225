// AArch64 NEON variant (Advanced SIMD is mandatory on AArch64).

#include <arm_neon.h>

#include "variant_prelude.hpp"
#include "variants.hpp"

namespace igkit::simd::neon {

struct F64 {
  using value_type = double;
  using reg = float64x2_t;
  static constexpr int width = 2;
  static reg zero() { return vdupq_n_f64(0.0); }
  static reg load(const double* p) { return vld1q_f64(p); }
  static void store(double* p, reg v) { vst1q_f64(p, v); }
  static reg broadcast(double v) { return vdupq_n_f64(v); }
  static reg fmadd(reg a, reg b, reg c) { return vfmaq_f64(c, a, b); }
  static reg add(reg a, reg b) { return vaddq_f64(a, b); }
  static reg mul(reg a, reg b) { return vmulq_f64(a, b); }
  static reg max(reg a, reg b) { return vmaxq_f64(a, b); }
};

struct F32 {
  using value_type = float;
  using reg = float32x4_t;
  static constexpr int width = 4;
  static reg zero() { return vdupq_n_f32(0.0f); }
  static reg load(const float* p) { return vld1q_f32(p); }
  static void store(float* p, reg v) { vst1q_f32(p, v); }
  static reg broadcast(float v) { return vdupq_n_f32(v); }
  static reg fmadd(reg a, reg b, reg c) { return vfmaq_f32(c, a, b); }
  static reg add(reg a, reg b) { return vaddq_f32(a, b); }
  static reg mul(reg a, reg b) { return vmulq_f32(a, b); }
  static reg max(reg a, reg b) { return vmaxq_f32(a, b); }
};

// 8 x 4 doubles / 8 x 8 floats: 16 accumulators out of 32 registers.
constexpr int kMrF64 = 8, kNvF64 = 2;
constexpr int kMrF32 = 8, kNvF32 = 2;

#include "gemm_impl.inl"
#include "variant_common.inl"

const KernelTable& table() {
  static const KernelTable t{Isa::Neon, &gemm_f64, &gemm_f32, &axpy_f64, &mul_f64, &relu_f64};
  return t;
}

}  // namespace igkit::simd::neon
