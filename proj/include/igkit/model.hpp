#pragma once

#include "igkit/container.hpp"
#include "igkit/encoder.hpp"
#include "igkit/upsampler.hpp"

namespace igkit {

struct ModelConfig {
  EncoderConfig encoder;
  UpsamplerConfig upsampler;
};

/// Encoder followed by an upsampler; one parameter set serves every scale.
/// Parameter names are prefixed "encoder." and "upsampler.".
class SrModel {
 public:
  SrModel(const ModelConfig& cfg, Rng& rng);

  const ModelConfig& config() const { return cfg_; }
  ag::ParameterSet& params() { return params_; }
  const ag::ParameterSet& params() const { return params_; }
  const TinyEncoder& encoder() const { return encoder_; }
  const Upsampler& upsampler() const { return upsampler_; }

  /// [N,3,H,W] in [0,1] -> [N,3,rH,rW].
  ag::Var forward(const ag::Var& lr, int r) const;
  /// Gradient-free forward; non-integer r uses the arbitrary-scale path.
  Tensor infer(const Tensor& lr, double r) const;

 private:
  ModelConfig cfg_;
  TinyEncoder encoder_;
  Upsampler upsampler_;
  ag::ParameterSet params_;
};

void write_model_meta(io::Container& c, const ModelConfig& cfg);
ModelConfig read_model_meta(const io::Container& c);

/// Adds "encoder.*" tensors and their metadata so a bank file can run
/// inference on its own.
void append_encoder(io::Container& c, const TinyEncoder& enc, io::DType dtype = io::DType::F64);
TinyEncoder read_encoder(const io::Container& c);

/// Encoder + instantiated kernels for integer r.
Tensor infer_with_bank(const FilterBank& bank, const TinyEncoder& enc, const Tensor& lr, int r);

}  // namespace igkit
