#include "igkit/functional.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "igkit/error.hpp"
#include "igkit/ops.hpp"
#include "igkit/simd/kernels.hpp"

namespace igkit::fn {

using ag::make_op;

namespace {

// Gradient for `v` if it needs one, else an empty tensor.
template <class F>
Tensor if_needed(const Var& v, F&& f) {
  return v.requires_grad() ? f() : Tensor();
}

}  // namespace

Var add(const Var& a, const Var& b) {
  return make_op(ops::add(a.value(), b.value()), {a, b}, [](const Tensor& g) { return std::vector<Tensor>{g, g}; });
}

Var sub(const Var& a, const Var& b) {
  return make_op(ops::sub(a.value(), b.value()), {a, b},
                 [](const Tensor& g) { return std::vector<Tensor>{g, ops::scale(g, -1.0)}; });
}

Var mul(const Var& a, const Var& b) {
  return make_op(ops::mul(a.value(), b.value()), {a, b}, [a, b](const Tensor& g) {
    return std::vector<Tensor>{if_needed(a, [&] { return ops::mul(g, b.value()); }),
                               if_needed(b, [&] { return ops::mul(g, a.value()); })};
  });
}

Var scale(const Var& a, double s) {
  return make_op(ops::scale(a.value(), s), {a}, [s](const Tensor& g) { return std::vector<Tensor>{ops::scale(g, s)}; });
}

Var add_scalar(const Var& a, double s) {
  return make_op(ops::add_scalar(a.value(), s), {a}, [](const Tensor& g) { return std::vector<Tensor>{g}; });
}

Var sigmoid(const Var& a) {
  Tensor y = ops::sigmoid(a.value());
  return make_op(y, {a}, [y](const Tensor& g) {
    Tensor d(g.shape());
    for (std::size_t i = 0; i < g.numel(); ++i) d[i] = g[i] * y[i] * (1.0 - y[i]);
    return std::vector<Tensor>{std::move(d)};
  });
}

Var relu(const Var& a) {
  return make_op(ops::relu(a.value()), {a}, [a](const Tensor& g) {
    Tensor d(g.shape());
    const Tensor& x = a.value();
    for (std::size_t i = 0; i < g.numel(); ++i) d[i] = x[i] > 0.0 ? g[i] : 0.0;
    return std::vector<Tensor>{std::move(d)};
  });
}

Var sin(const Var& a) {
  return make_op(ops::sin(a.value()), {a},
                 [a](const Tensor& g) { return std::vector<Tensor>{ops::mul(g, ops::cos(a.value()))}; });
}

Var cos(const Var& a) {
  return make_op(ops::cos(a.value()), {a},
                 [a](const Tensor& g) { return std::vector<Tensor>{ops::mul(g, ops::scale(ops::sin(a.value()), -1.0))}; });
}

Var abs(const Var& a) {
  return make_op(ops::abs(a.value()), {a}, [a](const Tensor& g) {
    Tensor d(g.shape());
    const Tensor& x = a.value();
    for (std::size_t i = 0; i < g.numel(); ++i) d[i] = x[i] > 0.0 ? g[i] : (x[i] < 0.0 ? -g[i] : 0.0);
    return std::vector<Tensor>{std::move(d)};
  });
}

Var sum(const Var& a) {
  const Shape shape = a.shape();
  return make_op(Tensor::scalar(ops::sum(a.value())), {a},
                 [shape](const Tensor& g) { return std::vector<Tensor>{Tensor(shape, g[0])}; });
}

Var mean(const Var& a) {
  const Shape shape = a.shape();
  const double inv = 1.0 / static_cast<double>(a.value().numel());
  return make_op(Tensor::scalar(ops::mean(a.value())), {a},
                 [shape, inv](const Tensor& g) { return std::vector<Tensor>{Tensor(shape, g[0] * inv)}; });
}

Var reshape(const Var& a, Shape shape) {
  const Shape original = a.shape();
  return make_op(a.value().reshaped(std::move(shape)), {a},
                 [original](const Tensor& g) { return std::vector<Tensor>{g.reshaped(original)}; });
}

Var permute(const Var& a, const std::vector<int>& axes) {
  std::vector<int> inverse(axes.size());
  for (std::size_t i = 0; i < axes.size(); ++i) inverse.at(axes[i]) = static_cast<int>(i);
  return make_op(ops::permute(a.value(), axes), {a},
                 [inverse](const Tensor& g) { return std::vector<Tensor>{ops::permute(g, inverse)}; });
}

Var concat(const std::vector<Var>& parts, int axis) {
  std::vector<Tensor> values;
  std::vector<std::int64_t> extents;
  for (const auto& p : parts) {
    values.push_back(p.value());
    extents.push_back(p.shape().at(axis < 0 ? axis + p.shape().size() : axis));
  }
  Tensor out = ops::concat(values, axis);
  return make_op(std::move(out), parts, [parts, extents, axis](const Tensor& g) {
    std::vector<Tensor> grads;
    std::int64_t start = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      grads.push_back(if_needed(parts[i], [&] { return ops::slice(g, axis, start, extents[i]); }));
      start += extents[i];
    }
    return grads;
  });
}

Var slice(const Var& a, int axis, std::int64_t start, std::int64_t length) {
  const Shape shape = a.shape();
  return make_op(ops::slice(a.value(), axis, start, length), {a}, [shape, axis, start](const Tensor& g) {
    const int ax = axis < 0 ? axis + static_cast<int>(shape.size()) : axis;
    std::int64_t outer = 1, inner = 1;
    for (int i = 0; i < ax; ++i) outer *= shape[i];
    for (std::size_t i = ax + 1; i < shape.size(); ++i) inner *= shape[i];
    Tensor d(shape);
    const std::int64_t row = g.shape()[ax] * inner, full = shape[ax] * inner;
    for (std::int64_t o = 0; o < outer; ++o)
      std::copy_n(g.ptr() + o * row, row, d.ptr() + o * full + start * inner);
    return std::vector<Tensor>{std::move(d)};
  });
}

Var conv2d(const Var& input, const Var& kernel) {
  const int pad = ops::same_padding(kernel.value());
  return make_op(ops::conv2d(input.value(), kernel.value(), pad), {input, kernel}, [input, kernel, pad](const Tensor& g) {
    return std::vector<Tensor>{
        if_needed(input, [&] { return ops::conv2d_grad_input(g, kernel.value(), pad, input.shape()); }),
        if_needed(kernel, [&] { return ops::conv2d_grad_kernel(g, input.value(), pad, kernel.shape()); })};
  });
}

Var add_channel_bias(const Var& x, const Var& bias) {
  return make_op(ops::add_channel_bias(x.value(), bias.value()), {x, bias}, [bias](const Tensor& g) {
    Tensor gb(bias.shape());
    const std::int64_t n = g.dim(0), c = g.dim(1), hw = g.dim(2) * g.dim(3);
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t j = 0; j < c; ++j) {
        const double* p = g.ptr() + (i * c + j) * hw;
        double s = 0.0;
        for (std::int64_t k = 0; k < hw; ++k) s += p[k];
        gb[j] += s;
      }
    return std::vector<Tensor>{g, if_needed(bias, [&] { return gb; })};
  });
}

Var linear(const Var& x, const Var& weight, const Var& bias) {
  Tensor out = ops::linear(x.value(), weight.value(), bias.value());
  return make_op(std::move(out), {x, weight, bias}, [x, weight, bias](const Tensor& g) {
    using simd::Trans;
    const std::int64_t p = x.value().dim(0), in = x.value().dim(1), outw = weight.value().dim(0);
    Tensor gx, gw, gb;
    if (x.requires_grad()) {
      gx = Tensor(x.shape());
      simd::gemm(Trans::No, Trans::No, p, in, outw, 1.0, g.ptr(), outw, weight.value().ptr(), in, 0.0, gx.ptr(), in);
    }
    if (weight.requires_grad()) {
      gw = Tensor(weight.shape());
      simd::gemm(Trans::Yes, Trans::No, outw, in, p, 1.0, g.ptr(), outw, x.value().ptr(), in, 0.0, gw.ptr(), in);
    }
    if (bias.requires_grad()) {
      gb = Tensor(bias.shape());
      for (std::int64_t i = 0; i < p; ++i)
        for (std::int64_t o = 0; o < outw; ++o) gb[o] += g[i * outw + o];
    }
    return std::vector<Tensor>{std::move(gx), std::move(gw), std::move(gb)};
  });
}

Var depth_to_space(const Var& input, int r) {
  return make_op(ops::depth_to_space(input.value(), r), {input},
                 [r](const Tensor& g) { return std::vector<Tensor>{ops::space_to_depth(g, r)}; });
}

Var grid_sample_bilinear(const Var& image, const Var& coords) {
  return make_op(ops::grid_sample_bilinear(image.value(), coords.value()), {image, coords},
                 [image, coords](const Tensor& g) {
                   auto grads = ops::grid_sample_bilinear_grad(g, image.value(), coords.value());
                   return std::vector<Tensor>{std::move(grads.image), std::move(grads.coords)};
                 });
}

Var dft2_stacked(const Var& input) {
  ops::Complex x = ops::dft2(input.value());
  Tensor out = ops::concat({x.real, x.imag}, 0);
  const std::int64_t n = input.shape()[0];
  return make_op(std::move(out), {input}, [n](const Tensor& g) {
    // The adjoint of the forward transform is the conjugate transform; only
    // its real part maps back onto the real input.
    ops::Complex back = ops::dft2(ops::slice(g, 0, 0, n), ops::slice(g, 0, n, n), true);
    return std::vector<Tensor>{std::move(back.real)};
  });
}

}  // namespace igkit::fn
