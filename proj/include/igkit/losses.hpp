#pragma once

#include "igkit/autograd.hpp"

namespace igkit {

struct LossConfig {
  double lambda_freq = 0.05;
  bool freq_enabled = true;
};

struct LossTerms {
  ag::Var total;
  double l1 = 0.0;
  double freq = 0.0;  // unweighted frequency term
};

/// mean|SR - HR| + lambda * mean over stacked real/imaginary parts of
/// |DFT(SR) - DFT(HR)| (per-channel 2-D DFT, mean over 2*N*C*H*W values).
LossTerms total_loss(const ag::Var& sr, const Tensor& hr, const LossConfig& cfg);

}  // namespace igkit
