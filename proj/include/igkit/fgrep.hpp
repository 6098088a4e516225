#pragma once

// Feature-level geometric re-parameterization over the dihedral group D4.
//
// Three equivalent forms for a feature map M and square kernel K:
//   ensemble:  (1/8) sum_t  t^-1( t(M) * K )
//   augmented: (1/8) sum_t  M * t(K)
//   reparam:   M * Kbar,  Kbar = (1/8) sum_t t(K)
// Transforms act on the two spatial axes only.

#include "igkit/autograd.hpp"
#include "igkit/tensor.hpp"

namespace igkit::fgrep {

Tensor ensemble_form(const Tensor& m, const Tensor& k);
Tensor augmented_kernel_form(const Tensor& m, const Tensor& k);
Tensor reparameterize(const Tensor& k);
/// Differentiable Kbar; the adjoint of group averaging is group averaging.
ag::Var reparameterize(const ag::Var& k);

/// Diagnostic variant for a sub-pixel kernel [C*r*r, C_e, k, k]: each
/// transform also permutes the r x r sub-pixel channels, which is what a
/// geometric ensemble in high-resolution space would induce. Not used in
/// training.
Tensor reparameterize_subpixel(const Tensor& k, int r);

}  // namespace igkit::fgrep
