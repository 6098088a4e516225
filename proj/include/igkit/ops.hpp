#pragma once

// Pure tensor-core operations. All functions take tensors by const reference
// and return new tensors; none keep state between calls.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "igkit/tensor.hpp"

namespace igkit::ops {

// ---- convolution -----------------------------------------------------------

/// Zero-padded cross-correlation, stride 1:
///   out(n,o,h,w) = sum_{c,i,j} in(n,c,h+i-p,w+j-p) * ker(o,c,i,j)
/// Kernel is [C_out, C_in, k, k] with k odd and padding = (k-1)/2.
Tensor conv2d(const Tensor& input, const Tensor& kernel, int padding);
int same_padding(const Tensor& kernel);

/// d(loss)/d(input) given d(loss)/d(output).
Tensor conv2d_grad_input(const Tensor& grad_out, const Tensor& kernel, int padding, const Shape& input_shape);
/// d(loss)/d(kernel) given d(loss)/d(output).
Tensor conv2d_grad_kernel(const Tensor& grad_out, const Tensor& input, int padding, const Shape& kernel_shape);

/// Float variant used by the benchmark harness: same contract on raw NCHW
/// buffers with N = 1. `out` must hold c_out * h * w values.
void conv2d_f32(std::span<const float> input, int c_in, int h, int w, std::span<const float> kernel, int c_out,
                int k, std::span<float> out);
/// Scratch floats conv2d_f32 allocates for the given shape.
std::size_t conv2d_f32_workspace(int c_in, int h, int w, int k);

// ---- sub-pixel rearrangement ----------------------------------------------

/// [N, C*r*r, H, W] -> [N, C, rH, rW];
/// out(n,c,h*r+dy,w*r+dx) = in(n, c*r*r + dy*r + dx, h, w).
Tensor depth_to_space(const Tensor& input, int r);
/// Exact inverse of depth_to_space.
Tensor space_to_depth(const Tensor& input, int r);

// ---- resampling ------------------------------------------------------------

/// Bilinear sampling per channel. coords is [N, 2C, H_out, W_out] holding
/// (x, y) source positions in input pixel units, interleaved per channel:
/// channel 2c is x (column) and 2c+1 is y (row) for image channel c.
/// Positions are clamped to the image border.
Tensor grid_sample_bilinear(const Tensor& image, const Tensor& coords);

struct GridSampleGrads {
  Tensor image;
  Tensor coords;
};
GridSampleGrads grid_sample_bilinear_grad(const Tensor& grad_out, const Tensor& image, const Tensor& coords);

/// Base sampling grid for an r-times upsampling of an H x W image, repeated
/// for `channels` image channels: HR pixel (h, w) maps to LR position
/// ((w + 0.5)/r - 0.5, (h + 0.5)/r - 0.5). Shape [1, 2*channels, rH, rW].
Tensor upsample_grid(std::int64_t h, std::int64_t w, int r, int channels);

// ---- Fourier ---------------------------------------------------------------

struct Complex {
  Tensor real;
  Tensor imag;
};

/// Unnormalized forward 2-D DFT of every (n,c) plane of a real tensor:
///   X(u,v) = sum_{h,w} x(h,w) exp(-2 pi i (u h / H + v w / W)).
Complex dft2(const Tensor& input);
/// Unnormalized 2-D DFT of a complex tensor; `inverse` flips the exponent
/// sign (no 1/(HW) factor).
Complex dft2(const Tensor& real, const Tensor& imag, bool inverse);

// ---- dihedral group on the two trailing axes ------------------------------

/// Element of D4: `id` in [0, 8), rotation = id % 4 quarter turns
/// counter-clockwise applied after an optional horizontal flip (id >= 4).
struct Dihedral {
  int id = 0;
  int rotation() const { return id % 4; }
  bool flipped() const { return id >= 4; }
  Dihedral inverse() const;
  /// (a * b)(x) = a(b(x)).
  friend Dihedral compose(Dihedral a, Dihedral b);
  friend bool operator==(Dihedral a, Dihedral b) { return a.id == b.id; }
};
std::vector<Dihedral> dihedral_group();

/// Applies the transform to the trailing two (spatial) axes; leading axes are
/// untouched. Quarter turns on non-square planes swap the extents.
Tensor apply_transform(Dihedral t, const Tensor& x);

// ---- elementwise and structural helpers ------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor sin(const Tensor& a);
Tensor cos(const Tensor& a);
Tensor abs(const Tensor& a);
double sum(const Tensor& a);
double mean(const Tensor& a);

/// In-place y += alpha * x.
void axpy(double alpha, const Tensor& x, Tensor& y);

/// Generalized transpose: out.shape[i] = in.shape[axes[i]].
Tensor permute(const Tensor& a, const std::vector<int>& axes);
Tensor concat(const std::vector<Tensor>& parts, int axis);
/// Elements [start, start+length) along `axis`.
Tensor slice(const Tensor& a, int axis, std::int64_t start, std::int64_t length);

/// Adds bias[c] to every element of channel c of an NCHW tensor.
Tensor add_channel_bias(const Tensor& x, const Tensor& bias);

/// y = x * W^T + b for x [P, in], W [out, in], b [out] (b may be empty).
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

}  // namespace igkit::ops
