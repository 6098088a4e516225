#pragma once

// Differentiable counterparts of the tensor-core operations.

#include <cstdint>
#include <vector>

#include "igkit/autograd.hpp"

namespace igkit::fn {

using ag::Var;

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var sigmoid(const Var& a);
Var relu(const Var& a);
Var sin(const Var& a);
Var cos(const Var& a);
/// Subgradient at 0 is 0.
Var abs(const Var& a);
/// Scalar results have shape [1].
Var sum(const Var& a);
Var mean(const Var& a);

Var reshape(const Var& a, Shape shape);
Var permute(const Var& a, const std::vector<int>& axes);
Var concat(const std::vector<Var>& parts, int axis);
Var slice(const Var& a, int axis, std::int64_t start, std::int64_t length);

/// Same-size zero-padded convolution (padding (k-1)/2).
Var conv2d(const Var& input, const Var& kernel);
Var add_channel_bias(const Var& x, const Var& bias);
/// x [P, in], weight [out, in], bias [out].
Var linear(const Var& x, const Var& weight, const Var& bias);
Var depth_to_space(const Var& input, int r);
Var grid_sample_bilinear(const Var& image, const Var& coords);
/// Forward 2-D DFT with real and imaginary parts stacked on the batch axis:
/// [N,C,H,W] -> [2N,C,H,W], real parts first.
Var dft2_stacked(const Var& input);

}  // namespace igkit::fn
