#include <algorithm>
#include <cmath>
#include <string>

#include "igkit/error.hpp"
#include "igkit/ops.hpp"
#include "igkit/simd/kernels.hpp"

namespace igkit::ops {

namespace {

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw DimensionError(std::string(op) + ": shape " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

template <class F>
Tensor map(const Tensor& a, F f) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = f(a[i]);
  return out;
}

int norm_axis(int axis, std::size_t rank, const char* op) {
  if (axis < 0) axis += static_cast<int>(rank);
  if (axis < 0 || axis >= static_cast<int>(rank)) throw DimensionError(std::string(op) + ": axis out of range");
  return axis;
}

// outer = product of extents before axis, inner = product after.
void split_extents(const Shape& s, int axis, std::int64_t& outer, std::int64_t& inner) {
  outer = 1;
  inner = 1;
  for (int i = 0; i < axis; ++i) outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same(a, b, "add");
  Tensor out = a;
  simd::kernels().axpy_f64(a.numel(), 1.0, b.ptr(), out.ptr());
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same(a, b, "sub");
  Tensor out = a;
  simd::kernels().axpy_f64(a.numel(), -1.0, b.ptr(), out.ptr());
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same(a, b, "mul");
  Tensor out(a.shape());
  simd::kernels().mul_f64(a.numel(), a.ptr(), b.ptr(), out.ptr());
  return out;
}

Tensor scale(const Tensor& a, double s) {
  return map(a, [s](double v) { return v * s; });
}

Tensor add_scalar(const Tensor& a, double s) {
  return map(a, [s](double v) { return v + s; });
}

Tensor sigmoid(const Tensor& a) {
  return map(a, [](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
}

Tensor relu(const Tensor& a) {
  Tensor out(a.shape());
  simd::kernels().relu_f64(a.numel(), a.ptr(), out.ptr());
  return out;
}

Tensor sin(const Tensor& a) {
  return map(a, [](double v) { return std::sin(v); });
}

Tensor cos(const Tensor& a) {
  return map(a, [](double v) { return std::cos(v); });
}

Tensor abs(const Tensor& a) {
  return map(a, [](double v) { return std::abs(v); });
}

double sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  return s;
}

double mean(const Tensor& a) { return sum(a) / static_cast<double>(a.numel()); }

void axpy(double alpha, const Tensor& x, Tensor& y) {
  require_same(x, y, "axpy");
  simd::kernels().axpy_f64(x.numel(), alpha, x.ptr(), y.ptr());
}

Tensor permute(const Tensor& a, const std::vector<int>& axes) {
  const std::size_t rank = a.rank();
  if (axes.size() != rank) throw DimensionError("permute: axes count does not match rank");
  std::vector<bool> seen(rank, false);
  Shape out_shape(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    if (axes[i] < 0 || axes[i] >= static_cast<int>(rank) || seen[axes[i]])
      throw DimensionError("permute: axes must be a permutation");
    seen[axes[i]] = true;
    out_shape[i] = a.dim(axes[i]);
  }
  std::vector<std::int64_t> in_stride(rank, 1);
  for (std::size_t i = rank - 1; i > 0; --i) in_stride[i - 1] = in_stride[i] * a.dim(i);
  std::vector<std::int64_t> stride(rank);
  for (std::size_t i = 0; i < rank; ++i) stride[i] = in_stride[axes[i]];

  Tensor out(out_shape);
  std::vector<std::int64_t> idx(rank, 0);
  std::int64_t src = 0;
  const std::int64_t inner = out_shape[rank - 1], inner_stride = stride[rank - 1];
  double* dst = out.ptr();
  const double* in = a.ptr();
  for (std::size_t o = 0; o < out.numel(); o += inner) {
    for (std::int64_t j = 0; j < inner; ++j) *dst++ = in[src + j * inner_stride];
    for (int ax = static_cast<int>(rank) - 2; ax >= 0; --ax) {
      src += stride[ax];
      if (++idx[ax] < out_shape[ax]) break;
      src -= stride[ax] * out_shape[ax];
      idx[ax] = 0;
    }
  }
  return out;
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  const Shape& first = parts[0].shape();
  axis = norm_axis(axis, first.size(), "concat");
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const auto& p : parts) {
    if (p.rank() != first.size()) throw DimensionError("concat: rank mismatch");
    for (std::size_t i = 0; i < first.size(); ++i)
      if (static_cast<int>(i) != axis && p.dim(i) != first[i])
        throw DimensionError("concat: shape " + shape_str(p.shape()) + " vs " + shape_str(first));
    out_shape[axis] += p.dim(axis);
  }
  std::int64_t outer, inner;
  split_extents(out_shape, axis, outer, inner);
  Tensor out(out_shape);
  const std::int64_t out_row = out_shape[axis] * inner;
  std::int64_t offset = 0;
  for (const auto& p : parts) {
    const std::int64_t row = p.dim(axis) * inner;
    for (std::int64_t o = 0; o < outer; ++o)
      std::copy_n(p.ptr() + o * row, row, out.ptr() + o * out_row + offset);
    offset += row;
  }
  return out;
}

Tensor slice(const Tensor& a, int axis, std::int64_t start, std::int64_t length) {
  axis = norm_axis(axis, a.rank(), "slice");
  if (start < 0 || length < 1 || start + length > a.dim(axis))
    throw DimensionError("slice: range out of bounds for " + shape_str(a.shape()));
  Shape out_shape = a.shape();
  out_shape[axis] = length;
  std::int64_t outer, inner;
  split_extents(a.shape(), axis, outer, inner);
  Tensor out(out_shape);
  const std::int64_t in_row = a.dim(axis) * inner, row = length * inner;
  for (std::int64_t o = 0; o < outer; ++o)
    std::copy_n(a.ptr() + o * in_row + start * inner, row, out.ptr() + o * row);
  return out;
}

Tensor add_channel_bias(const Tensor& x, const Tensor& bias) {
  if (x.rank() != 4 || static_cast<std::int64_t>(bias.numel()) != x.dim(1))
    throw DimensionError("add_channel_bias: " + shape_str(x.shape()) + " with bias " + shape_str(bias.shape()));
  Tensor out = x;
  const std::int64_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < c; ++j) {
      double* p = out.ptr() + (i * c + j) * hw;
      for (std::int64_t k = 0; k < hw; ++k) p[k] += bias[j];
    }
  return out;
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (x.rank() != 2 || weight.rank() != 2 || x.dim(1) != weight.dim(1))
    throw DimensionError("linear: x " + shape_str(x.shape()) + " weight " + shape_str(weight.shape()));
  const std::int64_t p = x.dim(0), in = x.dim(1), outw = weight.dim(0);
  Tensor out(Shape{p, outw});
  if (!bias.empty()) {
    if (static_cast<std::int64_t>(bias.numel()) != outw) throw DimensionError("linear: bias size");
    for (std::int64_t i = 0; i < p; ++i) std::copy_n(bias.ptr(), outw, out.ptr() + i * outw);
  }
  simd::gemm(simd::Trans::No, simd::Trans::Yes, p, outw, in, 1.0, x.ptr(), in, weight.ptr(), in,
             bias.empty() ? 0.0 : 1.0, out.ptr(), outw);
  return out;
}

Tensor depth_to_space(const Tensor& input, int r) {
  if (input.rank() != 4 || r < 1 || input.dim(1) % (static_cast<std::int64_t>(r) * r) != 0)
    throw DimensionError("depth_to_space: channels of " + shape_str(input.shape()) + " not divisible by r^2, r=" +
                         std::to_string(r));
  const std::int64_t n = input.dim(0), c = input.dim(1) / (r * r), h = input.dim(2), w = input.dim(3);
  // [N, C, r, r, H, W] -> [N, C, H, r, W, r]
  return permute(input.reshaped(Shape{n, c, r, r, h, w}), {0, 1, 4, 2, 5, 3}).reshaped(Shape{n, c, h * r, w * r});
}

Tensor space_to_depth(const Tensor& input, int r) {
  if (input.rank() != 4 || r < 1 || input.dim(2) % r != 0 || input.dim(3) % r != 0)
    throw DimensionError("space_to_depth: spatial size of " + shape_str(input.shape()) + " not divisible by r=" +
                         std::to_string(r));
  const std::int64_t n = input.dim(0), c = input.dim(1), h = input.dim(2) / r, w = input.dim(3) / r;
  return permute(input.reshaped(Shape{n, c, h, r, w, r}), {0, 1, 3, 5, 2, 4}).reshaped(Shape{n, c * r * r, h, w});
}

}  // namespace igkit::ops
