#pragma once

// Scale-conditioned filter generator.
//
// For an integer scale r the network evaluates Fourier features of the
// sub-pixel cell centres, passes them position-wise through an MLP f, and
// reorders the result into convolution kernels whose output channels follow
// the depth_to_space ordering c*r*r + dy*r + dx.

#include <utility>
#include <vector>

#include "igkit/autograd.hpp"
#include "igkit/rng.hpp"

namespace igkit {

struct HyperNetConfig {
  int c_e = 32;           // encoder channels
  int k = 3;              // kernel size
  int c_h = 256;          // feature width (even)
  int hidden_layers = 4;  // Linear+ReLU layers before the output layer
  int outputs = 3;        // 3 for filter nets, 12 for sampling nets

  static HyperNetConfig filters(int c_e) { return {c_e, 3, 256, 4, 3}; }
  static HyperNetConfig sampling(int c_e) { return {c_e, 3, 128, 2, 12}; }
};

/// Cell-centre coordinates (2i+1)/r - 1 for i in [0, r).
std::vector<double> coordinate_grid(int r);

/// Copies share parameter storage with the original.
class HyperNet {
 public:
  /// Random initialization (see README for the scheme).
  HyperNet(const HyperNetConfig& cfg, Rng& rng);
  /// All parameters zero.
  static HyperNet zeros(const HyperNetConfig& cfg);

  const HyperNetConfig& config() const { return cfg_; }
  ag::ParameterSet& params() { return params_; }
  const ag::ParameterSet& params() const { return params_; }

  /// Fourier coefficients F for coordinate scale r with size-head input
  /// `size_input` (2/r for integer scales). Shape [C_e*k*k*r*r, C_h]; row
  /// (p*r + dy)*r + dx with p = e*k*k + i*k + j.
  ag::Var fourier_features(int r, double size_input) const;
  /// f applied position-wise: [C_e*k*k*r*r, outputs].
  ag::Var mlp(const ag::Var& features) const;
  /// Reorders MLP output into [outputs*r*r, C_e, k, k].
  ag::Var reshape_filters(const ag::Var& y, int r) const;
  /// reshape_filters(mlp(fourier_features(r, size_input)), r).
  ag::Var generate(int r, double size_input) const;
  ag::Var generate(int r) const { return generate(r, 2.0 / r); }

  /// Zeros output-layer weights and biases for outputs [begin, end).
  void zero_outputs(int begin, int end);

 private:
  explicit HyperNet(const HyperNetConfig& cfg);
  void declare(Rng* rng);

  HyperNetConfig cfg_;
  ag::ParameterSet params_;
  ag::Var z_x_, z_y_, z_amp_, hs_w_, hs_b_;
  std::vector<std::pair<ag::Var, ag::Var>> layers_;
};

/// K for the filter network: [3r^2, C_e, k, k]. Throws ContractError if the
/// network does not emit 3 outputs per position.
ag::Var generate_filters(const HyperNet& net, int r);
/// (K_o, K_s) for the sampling network, each [6r^2, C_e, k, k]: the first six
/// outputs per position give the direction kernel, the last six the scope
/// kernel; within each, channel pairs are (R,x),(R,y),(G,x),(G,y),(B,x),(B,y).
std::pair<ag::Var, ag::Var> generate_sampling_filters(const HyperNet& net, int r, double size_input);
inline std::pair<ag::Var, ag::Var> generate_sampling_filters(const HyperNet& net, int r) {
  return generate_sampling_filters(net, r, 2.0 / r);
}

}  // namespace igkit
