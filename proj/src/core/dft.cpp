#include <cmath>
#include <numbers>
#include <vector>

#include "igkit/error.hpp"
#include "igkit/ops.hpp"
#include "igkit/simd/kernels.hpp"

namespace igkit::ops {

namespace {

using simd::Trans;

struct Twiddles {
  std::vector<double> c, s;  // cos and sin of 2*pi*u*h/n, n x n
};

Twiddles twiddles(std::int64_t n) {
  Twiddles t;
  t.c.resize(n * n);
  t.s.resize(n * n);
  for (std::int64_t u = 0; u < n; ++u)
    for (std::int64_t h = 0; h < n; ++h) {
      // Reduce the index product first so large arguments keep full precision.
      const double angle = 2.0 * std::numbers::pi * static_cast<double>((u * h) % n) / static_cast<double>(n);
      t.c[u * n + h] = std::cos(angle);
      t.s[u * n + h] = std::sin(angle);
    }
  return t;
}

// Computes F_H (a + ib) F_W per plane with F = C + i*sign*S.
Complex transform(const Tensor& a, const Tensor* b, double sign) {
  if (a.rank() != 4) throw DimensionError("dft2 expects a rank-4 tensor, got " + shape_str(a.shape()));
  if (b && b->shape() != a.shape()) throw DimensionError("dft2: real and imaginary shapes differ");
  const std::int64_t planes = a.dim(0) * a.dim(1), h = a.dim(2), w = a.dim(3);
  const Twiddles th = twiddles(h), tw = twiddles(w);
  const std::size_t hw = static_cast<std::size_t>(h * w);

  // Row pass: T = F_H x, per plane.
  Tensor tr(a.shape()), ti(a.shape());
  for (std::int64_t p = 0; p < planes; ++p) {
    const double* ar = a.ptr() + p * hw;
    double* r = tr.ptr() + p * hw;
    double* im = ti.ptr() + p * hw;
    simd::gemm(Trans::No, Trans::No, h, w, h, 1.0, th.c.data(), h, ar, w, 0.0, r, w);
    simd::gemm(Trans::No, Trans::No, h, w, h, sign, th.s.data(), h, ar, w, 0.0, im, w);
    if (b) {
      const double* bi = b->ptr() + p * hw;
      simd::gemm(Trans::No, Trans::No, h, w, h, -sign, th.s.data(), h, bi, w, 1.0, r, w);
      simd::gemm(Trans::No, Trans::No, h, w, h, 1.0, th.c.data(), h, bi, w, 1.0, im, w);
    }
  }

  // Column pass: X = T F_W over all planes at once (F_W is symmetric).
  const std::size_t rows = static_cast<std::size_t>(planes * h);
  Complex out{Tensor(a.shape()), Tensor(a.shape())};
  simd::gemm(Trans::No, Trans::No, rows, w, w, 1.0, tr.ptr(), w, tw.c.data(), w, 0.0, out.real.ptr(), w);
  simd::gemm(Trans::No, Trans::No, rows, w, w, -sign, ti.ptr(), w, tw.s.data(), w, 1.0, out.real.ptr(), w);
  simd::gemm(Trans::No, Trans::No, rows, w, w, 1.0, ti.ptr(), w, tw.c.data(), w, 0.0, out.imag.ptr(), w);
  simd::gemm(Trans::No, Trans::No, rows, w, w, sign, tr.ptr(), w, tw.s.data(), w, 1.0, out.imag.ptr(), w);
  return out;
}

}  // namespace

Complex dft2(const Tensor& input) { return transform(input, nullptr, -1.0); }

Complex dft2(const Tensor& real, const Tensor& imag, bool inverse) {
  return transform(real, &imag, inverse ? 1.0 : -1.0);
}

}  // namespace igkit::ops
