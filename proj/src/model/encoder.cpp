#include "igkit/encoder.hpp"

#include <cmath>

#include "igkit/error.hpp"
#include "igkit/functional.hpp"

namespace igkit {

using ag::Var;

TinyEncoder::TinyEncoder(const EncoderConfig& cfg, Rng& rng) : cfg_(cfg) {
  if (cfg.c_e < 1 || cfg.blocks < 0) throw ConfigError("encoder needs c_e >= 1 and blocks >= 0");
  head_ = make_conv("head", 3, cfg.c_e, rng, 1.0);
  for (int b = 0; b < cfg.blocks; ++b) {
    const std::string name = "block" + std::to_string(b + 1);
    Conv first = make_conv(name + ".conv1", cfg.c_e, cfg.c_e, rng, std::sqrt(2.0));
    // Residual branches start small so the stack begins close to identity.
    Conv second = make_conv(name + ".conv2", cfg.c_e, cfg.c_e, rng, 0.1);
    body_.emplace_back(first, second);
  }
  tail_ = make_conv("tail", cfg.c_e, cfg.c_e, rng, 0.1);
}

TinyEncoder::Conv TinyEncoder::make_conv(const std::string& name, int c_in, int c_out, Rng& rng, double gain) {
  const double fan_in = 9.0 * c_in;
  const double bound = gain * std::sqrt(3.0 / fan_in);
  Conv c;
  c.weight = params_.add(name + ".weight", rng.uniform(Shape{c_out, c_in, 3, 3}, -bound, bound));
  c.bias = params_.add(name + ".bias", Tensor(Shape{c_out}));
  return c;
}

Var TinyEncoder::apply(const Conv& c, const Var& x) const {
  return fn::add_channel_bias(fn::conv2d(x, c.weight), c.bias);
}

Var TinyEncoder::run(const Var& image, std::vector<std::pair<std::string, Tensor>>* taps) const {
  if (image.shape().size() != 4 || image.shape()[1] != 3)
    throw DimensionError("encoder expects [N,3,H,W], got " + shape_str(image.shape()));
  const Var head = apply(head_, image);
  if (taps) taps->emplace_back("head", head.value());
  Var x = head;
  for (std::size_t b = 0; b < body_.size(); ++b) {
    const Var y = apply(body_[b].second, fn::relu(apply(body_[b].first, x)));
    x = fn::add(x, y);
    if (taps) taps->emplace_back("block" + std::to_string(b + 1), x.value());
  }
  Var out = fn::add(apply(tail_, x), head);
  if (taps) taps->emplace_back("tail", out.value());
  return out;
}

Var TinyEncoder::forward(const Var& image) const { return run(image, nullptr); }

std::vector<std::pair<std::string, Tensor>> TinyEncoder::activations(const Tensor& image) const {
  ag::NoGradGuard guard;
  std::vector<std::pair<std::string, Tensor>> taps;
  run(Var(image), &taps);
  return taps;
}

}  // namespace igkit
