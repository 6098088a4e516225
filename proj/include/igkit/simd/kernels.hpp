#pragma once

// Runtime-dispatched arithmetic kernels.
//
// Every kernel has a scalar reference implementation plus SIMD variants
// (AVX2+FMA and AVX-512F on x86-64, NEON on AArch64). Variants are compiled
// in separate translation units with their own target flags and selected at
// runtime from the CPU feature bits. IGKIT_ISA=scalar|avx2|avx512|neon
// overrides the choice (downgrade only).
//
// Elementwise kernels are bit-identical across variants. GEMM variants use
// fused multiply-add and agree with the scalar reference to rounding error;
// within one variant, results do not depend on the worker count.

#include <cstddef>
#include <string_view>

namespace igkit::simd {

enum class Isa { Scalar, Avx2, Avx512, Neon };

enum class Trans { No, Yes };

std::string_view isa_name(Isa isa);
bool isa_supported(Isa isa);
/// Best variant this CPU can run.
Isa best_isa();
/// Variant used by the free functions below.
Isa active_isa();

template <class T>
using GemmFn = void (*)(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, T alpha, const T* a,
                        std::size_t lda, const T* b, std::size_t ldb, T beta, T* c, std::size_t ldc);

struct KernelTable {
  Isa isa;
  // C = alpha * op(A) * op(B) + beta * C, row-major, op(A) is m x k and
  // op(B) is k x n. beta == 0 overwrites C without reading it.
  GemmFn<double> gemm_f64;
  GemmFn<float> gemm_f32;
  // y = y + alpha * x
  void (*axpy_f64)(std::size_t n, double alpha, const double* x, double* y);
  // out = a * b
  void (*mul_f64)(std::size_t n, const double* a, const double* b, double* out);
  // out = max(x, 0)
  void (*relu_f64)(std::size_t n, const double* x, double* out);
};

/// Table for a specific variant; throws ContractError when unsupported.
const KernelTable& kernels(Isa isa);
const KernelTable& kernels();

void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, double alpha, const double* a,
          std::size_t lda, const double* b, std::size_t ldb, double beta, double* c, std::size_t ldc);
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, float alpha, const float* a,
          std::size_t lda, const float* b, std::size_t ldb, float beta, float* c, std::size_t ldc);

}  // namespace igkit::simd
