#include "igkit/losses.hpp"

#include "igkit/error.hpp"
#include "igkit/functional.hpp"

namespace igkit {

LossTerms total_loss(const ag::Var& sr, const Tensor& hr, const LossConfig& cfg) {
  if (sr.shape() != hr.shape())
    throw DimensionError("loss inputs differ: " + shape_str(sr.shape()) + " vs " + shape_str(hr.shape()));
  if (cfg.lambda_freq < 0) throw ConfigError("lambda_freq must be non-negative");
  const ag::Var diff = fn::sub(sr, ag::Var(hr));
  LossTerms t;
  t.total = fn::mean(fn::abs(diff));
  t.l1 = t.total.value()[0];
  if (cfg.freq_enabled && cfg.lambda_freq > 0) {
    // The transform is linear, so F(SR) - F(HR) = F(SR - HR).
    const ag::Var freq = fn::mean(fn::abs(fn::dft2_stacked(diff)));
    t.freq = freq.value()[0];
    t.total = fn::add(t.total, fn::scale(freq, cfg.lambda_freq));
  }
  return t;
}

}  // namespace igkit
