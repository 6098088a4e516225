#include "igkit/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "igkit/error.hpp"

namespace igkit::optim {

Adam::Adam(AdamConfig cfg) : cfg_(cfg) {
  if (cfg.beta1 < 0 || cfg.beta1 >= 1 || cfg.beta2 < 0 || cfg.beta2 >= 1 || cfg.eps <= 0)
    throw ConfigError("Adam: betas must lie in [0, 1) and eps must be positive");
}

void Adam::step(ag::ParameterSet& params, const ag::GradMap& grads, double lr) {
  if (!(lr > 0)) throw ConfigError("Adam: learning rate must be positive");
  ++step_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (const auto& p : params.items()) {
    Tensor& w = params.get(p.name).mutable_value();
    auto [mit, fresh_m] = m_.try_emplace(p.name, w.shape());
    auto [vit, fresh_v] = v_.try_emplace(p.name, w.shape());
    (void)fresh_m;
    (void)fresh_v;
    Tensor& m = mit->second;
    Tensor& v = vit->second;
    auto git = grads.find(p.name);
    const Tensor* g = git == grads.end() ? nullptr : &git->second;
    if (g && g->shape() != w.shape()) throw DimensionError("Adam: gradient shape mismatch for " + p.name);
    for (std::size_t i = 0; i < w.numel(); ++i) {
      const double gi = g ? (*g)[i] : 0.0;
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gi;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gi * gi;
      const double mhat = m[i] / c1, vhat = v[i] / c2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

void Ema::update(const ag::ParameterSet& params) {
  for (const auto& p : params.items()) {
    auto [it, fresh] = shadow_.try_emplace(p.name, p.var.value());
    if (fresh) continue;
    Tensor& s = it->second;
    const Tensor& w = p.var.value();
    for (std::size_t i = 0; i < s.numel(); ++i) s[i] = decay_ * s[i] + (1.0 - decay_) * w[i];
  }
}

double cosine_lr(double peak, std::int64_t step, std::int64_t total, double floor_ratio) {
  if (total <= 0) return peak;
  const double t = std::clamp(static_cast<double>(step) / static_cast<double>(total), 0.0, 1.0);
  const double floor = peak * floor_ratio;
  return floor + (peak - floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

}  // namespace igkit::optim
