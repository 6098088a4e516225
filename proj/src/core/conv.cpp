#include <algorithm>
#include <string>
#include <vector>

#include "igkit/error.hpp"
#include "igkit/ops.hpp"
#include "igkit/simd/kernels.hpp"

namespace igkit::ops {

namespace {

using simd::Trans;

// Upper bound on im2col buffer elements; larger images are processed in
// horizontal bands of rows.
constexpr std::size_t kMaxColElems = std::size_t{1} << 22;

template <class T>
void im2col(const T* in, int c_in, int h, int w, int k, int pad, int h0, int h1, T* col) {
  const std::size_t len = static_cast<std::size_t>(h1 - h0) * w;
  for (int c = 0; c < c_in; ++c) {
    const T* plane = in + static_cast<std::size_t>(c) * h * w;
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        T* dst = col + (static_cast<std::size_t>(c) * k * k + i * k + j) * len;
        for (int y = h0; y < h1; ++y) {
          const int sy = y + i - pad;
          T* row = dst + static_cast<std::size_t>(y - h0) * w;
          if (sy < 0 || sy >= h) {
            std::fill(row, row + w, T(0));
            continue;
          }
          const T* src = plane + static_cast<std::size_t>(sy) * w;
          const int shift = j - pad;
          const int x_lo = std::max(0, -shift), x_hi = std::min(w, w - shift);
          std::fill(row, row + std::max(0, std::min(x_lo, w)), T(0));
          for (int x = x_lo; x < x_hi; ++x) row[x] = src[x + shift];
          if (x_hi < w) std::fill(row + std::max(0, x_hi), row + w, T(0));
        }
      }
    }
  }
}

void col2im_add(const double* col, int c_in, int h, int w, int k, int pad, int h0, int h1, double* out) {
  const std::size_t len = static_cast<std::size_t>(h1 - h0) * w;
  for (int c = 0; c < c_in; ++c) {
    double* plane = out + static_cast<std::size_t>(c) * h * w;
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        const double* src = col + (static_cast<std::size_t>(c) * k * k + i * k + j) * len;
        for (int y = h0; y < h1; ++y) {
          const int sy = y + i - pad;
          if (sy < 0 || sy >= h) continue;
          const double* row = src + static_cast<std::size_t>(y - h0) * w;
          double* dst = plane + static_cast<std::size_t>(sy) * w;
          const int shift = j - pad;
          const int x_lo = std::max(0, -shift), x_hi = std::min(w, w - shift);
          for (int x = x_lo; x < x_hi; ++x) dst[x + shift] += row[x];
        }
      }
    }
  }
}

int band_rows(std::size_t col_rows, int h, int w) {
  const std::size_t per_row = std::max<std::size_t>(1, col_rows * static_cast<std::size_t>(w));
  return static_cast<int>(std::clamp<std::size_t>(kMaxColElems / per_row, 1, static_cast<std::size_t>(h)));
}

struct ConvDims {
  int n, c_in, h, w, c_out, k;
};

ConvDims check_conv(const Shape& in, const Shape& ker, int padding) {
  if (in.size() != 4) throw DimensionError("conv2d input must be rank 4, got " + shape_str(in));
  if (ker.size() != 4) throw DimensionError("conv2d kernel must be rank 4, got " + shape_str(ker));
  if (ker[2] != ker[3]) throw DimensionError("conv2d kernel must be square, got " + shape_str(ker));
  if (ker[2] % 2 == 0) throw DimensionError("conv2d kernel size must be odd, got " + shape_str(ker));
  if (in[1] != ker[1])
    throw DimensionError("conv2d channel mismatch: input " + shape_str(in) + " kernel " + shape_str(ker));
  if (padding != (ker[2] - 1) / 2) throw ContractError("conv2d padding must be (k-1)/2");
  return {static_cast<int>(in[0]), static_cast<int>(in[1]), static_cast<int>(in[2]), static_cast<int>(in[3]),
          static_cast<int>(ker[0]), static_cast<int>(ker[2])};
}

}  // namespace

int same_padding(const Tensor& kernel) { return static_cast<int>((kernel.dim(2) - 1) / 2); }

Tensor conv2d(const Tensor& input, const Tensor& kernel, int padding) {
  const ConvDims d = check_conv(input.shape(), kernel.shape(), padding);
  Tensor out(Shape{d.n, d.c_out, d.h, d.w});
  const std::size_t hw = static_cast<std::size_t>(d.h) * d.w;
  const std::size_t kk = static_cast<std::size_t>(d.c_in) * d.k * d.k;
  if (d.k == 1) {
    for (int n = 0; n < d.n; ++n)
      simd::gemm(Trans::No, Trans::No, d.c_out, hw, kk, 1.0, kernel.ptr(), kk, input.ptr() + n * kk * hw, hw, 0.0,
                 out.ptr() + n * d.c_out * hw, hw);
    return out;
  }
  const int rows = band_rows(kk, d.h, d.w);
  std::vector<double> col(kk * static_cast<std::size_t>(rows) * d.w);
  for (int n = 0; n < d.n; ++n) {
    const double* in = input.ptr() + n * static_cast<std::size_t>(d.c_in) * hw;
    double* o = out.ptr() + n * static_cast<std::size_t>(d.c_out) * hw;
    for (int h0 = 0; h0 < d.h; h0 += rows) {
      const int h1 = std::min(d.h, h0 + rows);
      const std::size_t len = static_cast<std::size_t>(h1 - h0) * d.w;
      im2col(in, d.c_in, d.h, d.w, d.k, padding, h0, h1, col.data());
      simd::gemm(Trans::No, Trans::No, d.c_out, len, kk, 1.0, kernel.ptr(), kk, col.data(), len, 0.0,
                 o + static_cast<std::size_t>(h0) * d.w, hw);
    }
  }
  return out;
}

Tensor conv2d_grad_input(const Tensor& grad_out, const Tensor& kernel, int padding, const Shape& input_shape) {
  const ConvDims d = check_conv(input_shape, kernel.shape(), padding);
  if (grad_out.shape() != Shape{d.n, d.c_out, d.h, d.w})
    throw DimensionError("conv2d_grad_input: gradient shape " + shape_str(grad_out.shape()));
  Tensor gin(input_shape);
  const std::size_t hw = static_cast<std::size_t>(d.h) * d.w;
  const std::size_t kk = static_cast<std::size_t>(d.c_in) * d.k * d.k;
  if (d.k == 1) {
    for (int n = 0; n < d.n; ++n)
      simd::gemm(Trans::Yes, Trans::No, kk, hw, d.c_out, 1.0, kernel.ptr(), kk, grad_out.ptr() + n * d.c_out * hw,
                 hw, 0.0, gin.ptr() + n * kk * hw, hw);
    return gin;
  }
  const int rows = band_rows(kk, d.h, d.w);
  std::vector<double> col(kk * static_cast<std::size_t>(rows) * d.w);
  for (int n = 0; n < d.n; ++n) {
    const double* g = grad_out.ptr() + n * static_cast<std::size_t>(d.c_out) * hw;
    double* gi = gin.ptr() + n * static_cast<std::size_t>(d.c_in) * hw;
    for (int h0 = 0; h0 < d.h; h0 += rows) {
      const int h1 = std::min(d.h, h0 + rows);
      const std::size_t len = static_cast<std::size_t>(h1 - h0) * d.w;
      simd::gemm(Trans::Yes, Trans::No, kk, len, d.c_out, 1.0, kernel.ptr(), kk, g + static_cast<std::size_t>(h0) * d.w,
                 hw, 0.0, col.data(), len);
      col2im_add(col.data(), d.c_in, d.h, d.w, d.k, padding, h0, h1, gi);
    }
  }
  return gin;
}

Tensor conv2d_grad_kernel(const Tensor& grad_out, const Tensor& input, int padding, const Shape& kernel_shape) {
  const ConvDims d = check_conv(input.shape(), kernel_shape, padding);
  if (grad_out.shape() != Shape{d.n, d.c_out, d.h, d.w})
    throw DimensionError("conv2d_grad_kernel: gradient shape " + shape_str(grad_out.shape()));
  Tensor gk(kernel_shape);
  const std::size_t hw = static_cast<std::size_t>(d.h) * d.w;
  const std::size_t kk = static_cast<std::size_t>(d.c_in) * d.k * d.k;
  if (d.k == 1) {
    for (int n = 0; n < d.n; ++n)
      simd::gemm(Trans::No, Trans::Yes, d.c_out, kk, hw, 1.0, grad_out.ptr() + n * d.c_out * hw, hw,
                 input.ptr() + n * kk * hw, hw, 1.0, gk.ptr(), kk);
    return gk;
  }
  const int rows = band_rows(kk, d.h, d.w);
  std::vector<double> col(kk * static_cast<std::size_t>(rows) * d.w);
  for (int n = 0; n < d.n; ++n) {
    const double* in = input.ptr() + n * static_cast<std::size_t>(d.c_in) * hw;
    const double* g = grad_out.ptr() + n * static_cast<std::size_t>(d.c_out) * hw;
    for (int h0 = 0; h0 < d.h; h0 += rows) {
      const int h1 = std::min(d.h, h0 + rows);
      const std::size_t len = static_cast<std::size_t>(h1 - h0) * d.w;
      im2col(in, d.c_in, d.h, d.w, d.k, padding, h0, h1, col.data());
      simd::gemm(Trans::No, Trans::Yes, d.c_out, kk, len, 1.0, g + static_cast<std::size_t>(h0) * d.w, hw, col.data(),
                 len, 1.0, gk.ptr(), kk);
    }
  }
  return gk;
}

std::size_t conv2d_f32_workspace(int c_in, int h, int w, int k) {
  if (k == 1) return 0;
  const std::size_t kk = static_cast<std::size_t>(c_in) * k * k;
  return kk * static_cast<std::size_t>(band_rows(kk, h, w)) * w;
}

void conv2d_f32(std::span<const float> input, int c_in, int h, int w, std::span<const float> kernel, int c_out,
                int k, std::span<float> out) {
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  const std::size_t kk = static_cast<std::size_t>(c_in) * k * k;
  if (input.size() != c_in * hw || kernel.size() != c_out * kk || out.size() != c_out * hw || k % 2 == 0)
    throw DimensionError("conv2d_f32: buffer sizes do not match the stated shapes");
  if (k == 1) {
    simd::gemm(Trans::No, Trans::No, c_out, hw, kk, 1.0f, kernel.data(), kk, input.data(), hw, 0.0f, out.data(), hw);
    return;
  }
  const int rows = band_rows(kk, h, w);
  std::vector<float> col(kk * static_cast<std::size_t>(rows) * w);
  for (int h0 = 0; h0 < h; h0 += rows) {
    const int h1 = std::min(h, h0 + rows);
    const std::size_t len = static_cast<std::size_t>(h1 - h0) * w;
    im2col(input.data(), c_in, h, w, k, (k - 1) / 2, h0, h1, col.data());
    simd::gemm(Trans::No, Trans::No, c_out, len, kk, 1.0f, kernel.data(), kk, col.data(), len, 0.0f,
               out.data() + static_cast<std::size_t>(h0) * w, hw);
  }
}

}  // namespace igkit::ops
