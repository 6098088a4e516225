#include "igkit/model.hpp"

#include <cmath>
#include <string>

#include "igkit/error.hpp"

namespace igkit {

SrModel::SrModel(const ModelConfig& cfg, Rng& rng)
    : cfg_(cfg), encoder_(cfg.encoder, rng), upsampler_(cfg.upsampler, rng) {
  if (cfg.encoder.c_e != cfg.upsampler.c_e) throw ConfigError("encoder and upsampler channel counts differ");
  params_.extend("encoder.", encoder_.params());
  params_.extend("upsampler.", upsampler_.params());
}

ag::Var SrModel::forward(const ag::Var& lr, int r) const { return upsampler_.forward(encoder_.forward(lr), lr, r); }

Tensor SrModel::infer(const Tensor& lr, double r) const {
  ag::NoGradGuard guard;
  if (std::floor(r) == r) return forward(ag::Var(lr), static_cast<int>(r)).value();
  const Tensor m = encoder_.forward(ag::Var(lr)).value();
  return upsampler_.forward_arbitrary(m, lr, r);
}

void write_model_meta(io::Container& c, const ModelConfig& cfg) {
  c.meta["encoder.c_e"] = std::to_string(cfg.encoder.c_e);
  c.meta["encoder.blocks"] = std::to_string(cfg.encoder.blocks);
  write_upsampler_meta(c, cfg.upsampler, "upsampler.");
}

namespace {
EncoderConfig read_encoder_meta(const io::Container& c) {
  EncoderConfig e;
  try {
    e.c_e = std::stoi(c.meta_value("encoder.c_e"));
    e.blocks = std::stoi(c.meta_value("encoder.blocks"));
  } catch (const std::logic_error&) {
    throw DataError("malformed encoder metadata");
  }
  return e;
}
}  // namespace

ModelConfig read_model_meta(const io::Container& c) {
  return {read_encoder_meta(c), read_upsampler_meta(c, "upsampler.")};
}

void append_encoder(io::Container& c, const TinyEncoder& enc, io::DType dtype) {
  c.meta["encoder.c_e"] = std::to_string(enc.config().c_e);
  c.meta["encoder.blocks"] = std::to_string(enc.config().blocks);
  for (const auto& p : enc.params().items()) c.add("encoder." + p.name, p.var.value(), dtype);
}

TinyEncoder read_encoder(const io::Container& c) {
  Rng unused(0);
  TinyEncoder enc(read_encoder_meta(c), unused);
  std::map<std::string, Tensor> values;
  for (const auto& p : enc.params().items()) values[p.name] = c.get("encoder." + p.name);
  enc.params().assign(values);
  return enc;
}

Tensor infer_with_bank(const FilterBank& bank, const TinyEncoder& enc, const Tensor& lr, int r) {
  ag::NoGradGuard guard;
  const Tensor m = enc.forward(ag::Var(lr)).value();
  return bank_forward(bank, m, lr, r);
}

}  // namespace igkit
