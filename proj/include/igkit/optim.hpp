#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "igkit/autograd.hpp"

namespace igkit::optim {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.99;
  double eps = 1e-8;
};

/// Adam with bias correction. Moments are keyed by parameter name.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {});

  /// One update of every parameter in `params` using `grads` (missing entries
  /// count as zero). Throws ConfigError when lr <= 0.
  void step(ag::ParameterSet& params, const ag::GradMap& grads, double lr);

  std::int64_t steps() const { return step_; }
  const AdamConfig& config() const { return cfg_; }

  // State access for checkpointing.
  std::map<std::string, Tensor>& first_moments() { return m_; }
  std::map<std::string, Tensor>& second_moments() { return v_; }
  const std::map<std::string, Tensor>& first_moments() const { return m_; }
  const std::map<std::string, Tensor>& second_moments() const { return v_; }
  void set_steps(std::int64_t s) { step_ = s; }

 private:
  AdamConfig cfg_;
  std::int64_t step_ = 0;
  std::map<std::string, Tensor> m_, v_;
};

/// Exponential moving average of parameter values.
class Ema {
 public:
  explicit Ema(double decay) : decay_(decay) {}
  /// First call copies the parameters; later calls blend toward them.
  void update(const ag::ParameterSet& params);
  bool empty() const { return shadow_.empty(); }
  double decay() const { return decay_; }
  std::map<std::string, Tensor>& shadow() { return shadow_; }
  const std::map<std::string, Tensor>& shadow() const { return shadow_; }

 private:
  double decay_;
  std::map<std::string, Tensor> shadow_;
};

/// Cosine decay from `peak` at step 0 to `floor_ratio * peak` at `total`.
double cosine_lr(double peak, std::int64_t step, std::int64_t total, double floor_ratio = 1e-2);

}  // namespace igkit::optim
