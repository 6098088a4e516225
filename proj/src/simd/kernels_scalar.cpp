// Scalar reference variant. Built with -ffp-contract=off so every multiply
// and add rounds separately.

#include "variant_prelude.hpp"
#include "variants.hpp"

namespace igkit::simd::scalar {

template <class T>
struct ScalarVec {
  using value_type = T;
  using reg = T;
  static constexpr int width = 1;
  static reg zero() { return T(0); }
  static reg load(const T* p) { return *p; }
  static void store(T* p, reg v) { *p = v; }
  static reg broadcast(T v) { return v; }
  static reg fmadd(reg a, reg b, reg c) { return a * b + c; }
  static reg add(reg a, reg b) { return a + b; }
  static reg mul(reg a, reg b) { return a * b; }
  static reg max(reg a, reg b) { return a > b ? a : b; }
};

using F64 = ScalarVec<double>;
using F32 = ScalarVec<float>;
constexpr int kMrF64 = 4, kNvF64 = 4;
constexpr int kMrF32 = 4, kNvF32 = 4;

#include "gemm_impl.inl"
#include "variant_common.inl"

const KernelTable& table() {
  static const KernelTable t{Isa::Scalar, &gemm_f64, &gemm_f32, &axpy_f64, &mul_f64, &relu_f64};
  return t;
}

}  // namespace igkit::simd::scalar
