#pragma once

#include <string>
#include <utility>
#include <vector>

#include "igkit/autograd.hpp"
#include "igkit/rng.hpp"

namespace igkit {

struct EncoderConfig {
  int c_e = 32;
  int blocks = 4;
};

/// Small residual CNN producing features at the input resolution:
///   head: conv3x3 3 -> C_e
///   body: `blocks` x (conv3x3, ReLU, conv3x3, + skip)
///   tail: conv3x3 C_e -> C_e, plus the head output
/// All convolutions carry a bias. Copies share parameter storage.
class TinyEncoder {
 public:
  TinyEncoder(const EncoderConfig& cfg, Rng& rng);

  const EncoderConfig& config() const { return cfg_; }
  ag::ParameterSet& params() { return params_; }
  const ag::ParameterSet& params() const { return params_; }

  /// [N, 3, H, W] -> [N, C_e, H, W]
  ag::Var forward(const ag::Var& image) const;
  /// Activations after head, each block, and the tail (which equals the
  /// final output), named "head", "block1".."blockB", "tail".
  std::vector<std::pair<std::string, Tensor>> activations(const Tensor& image) const;

 private:
  struct Conv {
    ag::Var weight, bias;
  };
  Conv make_conv(const std::string& name, int c_in, int c_out, Rng& rng, double gain);
  ag::Var apply(const Conv& c, const ag::Var& x) const;
  ag::Var run(const ag::Var& image, std::vector<std::pair<std::string, Tensor>>* taps) const;

  EncoderConfig cfg_;
  ag::ParameterSet params_;
  Conv head_, tail_;
  std::vector<std::pair<Conv, Conv>> body_;
};

}  // namespace igkit
