#pragma once

// Analysis instruments: cross-scale feature similarity, filter atlases, and
// the upsampler latency/FLOP harness.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "igkit/encoder.hpp"
#include "igkit/hypernet.hpp"
#include "igkit/image.hpp"
#include "igkit/upsampler.hpp"

namespace igkit::analysis {

// ---- CKA --------------------------------------------------------------------

/// Linear CKA of [n, p] and [n, q] activations, columns centered internally:
///   ||Y^T X||_F^2 / (||X^T X||_F ||Y^T Y||_F)
/// Throws ContractError for n < 2, mismatched rows, or a constant argument.
double linear_cka(const Tensor& x, const Tensor& y);

/// [N, C, H, W] -> [N*H*W, C].
Tensor flatten_activation(const Tensor& act);

struct CkaReport {
  std::vector<std::string> layers;                          // encoder order
  std::vector<std::pair<std::string, std::string>> pairs;   // compared models
  std::vector<std::vector<double>> values;                  // [layer][pair]

  double layer_mean(std::size_t layer) const;
  std::string csv() const;
  std::string pretty() const;
};

/// Runs every encoder on the same probes and compares each layer across all
/// model pairs. Activations of all probes are stacked along the sample axis.
CkaReport cka_across_scales(const std::vector<std::pair<std::string, TinyEncoder>>& encoders,
                            const std::vector<Tensor>& probes);

// ---- filter atlas -----------------------------------------------------------

struct AtlasOptions {
  int filters = 16;  // tiles per row
  int cell = 8;      // pixels per kernel tap
  int gap = 2;       // pixels between tiles
  bool fgrep = false;
};

/// One row per kernel tensor [O, C, k, k]: tiles K[o, 0] for o < filters,
/// each min-max normalized on its own (constant tiles render black).
ImageBuffer render_atlas(const std::vector<Tensor>& kernels, const AtlasOptions& opts = {});
/// Generates the filters of `net` for every scale and renders them.
ImageBuffer filter_atlas(const HyperNet& net, const std::vector<int>& scales, const AtlasOptions& opts = {});
void export_filter_atlas(const HyperNet& net, const std::vector<int>& scales, const std::filesystem::path& out,
                         const AtlasOptions& opts = {});

// ---- benchmark --------------------------------------------------------------

struct BenchConfig {
  Variant variant = Variant::IGConvPlus;
  int c_e = 64;
  int r = 2;
  int out_h = 720;  // the LR input is ceil(out / r) on each side
  int out_w = 1280;
  int k = 3;
  int c_mid = 64;
  int warmups = 5;
  int trials = 30;
  std::uint64_t seed = 0;
};

struct BenchResult {
  std::string variant;
  int r = 0, c_e = 0;
  int in_h = 0, in_w = 0;
  int warmups = 0, trials = 0;
  double median_ms = 0, p10_ms = 0, p90_ms = 0;
  std::int64_t params = 0;
  std::int64_t flops = 0;
  std::int64_t workspace_bytes = 0;  // peak transient f32 allocation
};

/// Deployed parameter count: the per-scale kernels of an instantiated bank.
std::int64_t deployed_params(Variant v, int c_e, int r, int k = 3, int c_mid = 64);
/// Closed-form FLOPs of the deployed upsampler on an h x w LR feature map
/// (2 per multiply-add; sigmoid 4, bilinear sample 8 per output value).
std::int64_t deployed_flops(Variant v, int c_e, int r, std::int64_t h, std::int64_t w, int k = 3, int c_mid = 64);

/// f32 upsampler-only forward with random kernels, one worker. Enforces at
/// least 5 warmups and 30 trials.
BenchResult bench(const BenchConfig& cfg);

std::string bench_csv(const std::vector<BenchResult>& rows);
std::string bench_pretty(const std::vector<BenchResult>& rows);

}  // namespace igkit::analysis
