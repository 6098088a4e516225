#pragma once

// Upsampler family: fixed-scale sub-pixel baselines and the hypernetwork
// driven multi-scale upsamplers, plus instantiation into filter banks.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "igkit/autograd.hpp"
#include "igkit/container.hpp"
#include "igkit/hypernet.hpp"
#include "igkit/rng.hpp"

namespace igkit {

enum class Variant { SPConv, SPConvPlus, IGConv, IGConvPlus };

std::string variant_name(Variant v);
/// Accepts spconv, spconv_plus, igconv, igconv_plus; throws ConfigError.
Variant parse_variant(const std::string& s);
inline bool is_implicit(Variant v) { return v == Variant::IGConv || v == Variant::IGConvPlus; }

struct UpsamplerConfig {
  Variant variant = Variant::IGConvPlus;
  int c_e = 32;
  int k = 3;
  int c_mid = 64;                  // SPConv+ high-resolution width
  std::vector<int> scales{2, 3, 4};  // fixed-scale variants keep one kernel set per entry
  bool fgrep = true;               // IGConv+ only
  bool igsample = true;            // IGConv+ only
};

// ---- building blocks -------------------------------------------------------

/// depth_to_space(conv(M, K), r); K is [3r^2, C_e, k, k].
ag::Var spconv_forward(const ag::Var& m, const ag::Var& k, int r);
/// conv(depth_to_space(conv(M, K1), r), K2); K1 [C_mid r^2, C_e, 3, 3], K2 [3, C_mid, 3, 3].
ag::Var spconv_plus_forward(const ag::Var& m, const ag::Var& k1, const ag::Var& k2, int r);
/// Offset-calibrated bilinear upsampling of `lr`:
///   offsets = depth_to_space(conv(M, K_o) * 0.5 * sigmoid(conv(M, K_s)), r)
///   out     = grid_sample(lr, base_grid + offsets)
ag::Var igsample_forward(const ag::Var& lr, const ag::Var& m, const ag::Var& k_o, const ag::Var& k_s, int r);

/// Concrete kernels for one scale. Unused members stay undefined.
struct ScaleKernels {
  ag::Var k;    // SPConv / IGConv kernel, or SPConv+ first conv
  ag::Var k2;   // SPConv+ high-resolution conv
  ag::Var k_o;  // IGSample direction
  ag::Var k_s;  // IGSample scope
};

/// Runs the variant's forward given kernels. Shared by the live and the
/// instantiated paths so both evaluate identical arithmetic.
ag::Var apply_kernels(const UpsamplerConfig& cfg, const ScaleKernels& kernels, const ag::Var& m, const ag::Var& lr,
                      int r);

// ---- trainable upsampler ---------------------------------------------------

class Upsampler {
 public:
  Upsampler(const UpsamplerConfig& cfg, Rng& rng);
  /// Every parameter zero.
  static Upsampler zeros(const UpsamplerConfig& cfg);

  const UpsamplerConfig& config() const { return cfg_; }
  ag::ParameterSet& params() { return params_; }
  const ag::ParameterSet& params() const { return params_; }
  const HyperNet* filter_net() const { return filter_net_ ? &*filter_net_ : nullptr; }
  const HyperNet* sampling_net() const { return sampling_net_ ? &*sampling_net_ : nullptr; }

  bool supports(int r) const;
  /// Kernels for scale r; `size_input` feeds the size head (2/r by default).
  ScaleKernels kernels(int r, std::optional<double> size_input = std::nullopt) const;
  /// [N,C_e,H,W] features and [N,3,H,W] image -> [N,3,rH,rW].
  ag::Var forward(const ag::Var& m, const ag::Var& lr, int r) const;
  /// Non-integer scale: evaluates ceil(r) with size input 2/r, then bicubic
  /// resizes to round(H r) x round(W r). Implicit variants only, r > 1.
  Tensor forward_arbitrary(const Tensor& m, const Tensor& lr, double r) const;

 private:
  Upsampler(const UpsamplerConfig& cfg, Rng* rng);

  UpsamplerConfig cfg_;
  ag::ParameterSet params_;
  std::optional<HyperNet> filter_net_, sampling_net_;
  std::map<int, ScaleKernels> fixed_;
};

// ---- instantiation ---------------------------------------------------------

struct FilterBank {
  UpsamplerConfig config;
  std::map<int, std::map<std::string, Tensor>> scales;  // r -> {"K", "K2", "K_o", "K_s"}

  ScaleKernels kernels(int r) const;
  /// Scalar count of the stored kernels for scale r.
  std::int64_t parameter_count(int r) const;
};

/// Materializes kernels (FGRep-averaged where enabled) for each scale.
FilterBank instantiate(const Upsampler& up, const std::vector<int>& scales);
/// Forward through stored kernels; throws ContractError if r is missing.
Tensor bank_forward(const FilterBank& bank, const Tensor& m, const Tensor& lr, int r);

/// Writes header metadata and per-scale tensors ("r<scale>.<name>").
void append_bank(io::Container& c, const FilterBank& bank, io::DType dtype = io::DType::F64);
FilterBank read_bank(const io::Container& c);

/// Upsampler configuration as metadata strings, and back.
void write_upsampler_meta(io::Container& c, const UpsamplerConfig& cfg, const std::string& prefix);
UpsamplerConfig read_upsampler_meta(const io::Container& c, const std::string& prefix);

}  // namespace igkit
