// Elementwise kernels and table entry points shared by every variant.
// Expects traits F64 (and F32) plus MR/NV constants for both precisions.
// Elementwise math uses separate multiply and add so results are
// bit-identical to the scalar reference.

void gemm_f64(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, double alpha, const double* a,
              std::size_t lda, const double* b, std::size_t ldb, double beta, double* c, std::size_t ldc) {
  detail::gemm<F64, kMrF64, kNvF64>(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

void gemm_f32(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, float alpha, const float* a,
              std::size_t lda, const float* b, std::size_t ldb, float beta, float* c, std::size_t ldc) {
  detail::gemm<F32, kMrF32, kNvF32>(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

void axpy_f64(std::size_t n, double alpha, const double* x, double* y) {
  std::size_t i = 0;
  const auto av = F64::broadcast(alpha);
  for (; i + F64::width <= n; i += F64::width) F64::store(y + i, F64::add(F64::load(y + i), F64::mul(av, F64::load(x + i))));
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void mul_f64(std::size_t n, const double* a, const double* b, double* out) {
  std::size_t i = 0;
  for (; i + F64::width <= n; i += F64::width) F64::store(out + i, F64::mul(F64::load(a + i), F64::load(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void relu_f64(std::size_t n, const double* x, double* out) {
  std::size_t i = 0;
  const auto zero = F64::zero();
  for (; i + F64::width <= n; i += F64::width) F64::store(out + i, F64::max(F64::load(x + i), zero));
  for (; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}
