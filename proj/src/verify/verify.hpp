#pragma once

// Independent reference implementations and the check suites built on them.
// Used by `igkit selftest` and the acceptance tests; the library proper never
// calls into this module.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "igkit/analysis.hpp"
#include "igkit/autograd.hpp"
#include "igkit/config.hpp"
#include "igkit/hypernet.hpp"
#include "igkit/image.hpp"
#include "igkit/rng.hpp"
#include "igkit/trainer.hpp"

namespace igkit::verify {

struct CheckResult {
  std::string name;
  bool passed = false;
  double metric = 0.0;  // worst error, margin, or timing, depending on the check
  std::string detail;
  double seconds = 0.0;
};

/// Times `fn` and stores the elapsed wall time in the result.
CheckResult timed(const std::function<CheckResult()>& fn);
std::string format_results(const std::vector<CheckResult>& results);

// ---- brute-force oracles ------------------------------------------------------

namespace oracle {

/// Direct-loop cross-correlation with zero "same" padding.
Tensor conv2d(const Tensor& x, const Tensor& k);
/// Index-formula pixel shuffle.
Tensor depth_to_space(const Tensor& x, int r);
/// O(H^2 W^2) DFT per plane; returns real and imaginary parts.
std::pair<Tensor, Tensor> dft2(const Tensor& x);
/// Per-sample clamped bilinear interpolation.
Tensor grid_sample(const Tensor& img, const Tensor& coords);
/// D4 element id = flip*4 + rot on the trailing axes via explicit formulas.
Tensor dihedral(const Tensor& x, int id);
int dihedral_inverse(int id);
/// (1/8) sum_t t^-1(conv(t(M), K)).
Tensor fgrep_ensemble(const Tensor& m, const Tensor& k);
/// Filters of a HyperNet built position by position from its parameters.
Tensor hypernet_filters(const HyperNet& net, int r, double size_input);
/// Bilinear r-times upsampling with cell-centre alignment, edges clamped.
Tensor bilinear_upsample(const Tensor& img, int r);
/// Non-separable bicubic resize evaluated per output pixel.
Tensor bicubic_resize(const Tensor& img, std::int64_t out_h, std::int64_t out_w, double scale);
double psnr_y(const ImageBuffer& a, const ImageBuffer& b, int border);
/// SSIM with a full 2-D Gaussian window per position.
double ssim_y(const ImageBuffer& a, const ImageBuffer& b, int border);
/// HSIC-based CKA from n x n Gram matrices.
double hsic_cka(const Tensor& x, const Tensor& y);
/// n x n orthogonal matrix by modified Gram-Schmidt on a Gaussian matrix.
Tensor orthogonal(int n, Rng& rng);

}  // namespace oracle

// ---- gradient checking --------------------------------------------------------

/// Compares autograd gradients of sum(f(inputs) * W) for random W against
/// central differences on up to `samples` entries per input.
/// metric = worst per-input relative error ||g - n|| / max(||g||, ||n||).
CheckResult gradcheck(const std::string& name, const std::function<ag::Var(const std::vector<ag::Var>&)>& f,
                      const std::vector<Tensor>& inputs, std::uint64_t seed = 1, int samples = 64, double eps = 1e-6,
                      double tol = 1e-4);

// ---- criterion checks -----------------------------------------------------------

CheckResult check_fgrep_equivalence(int instances = 100, std::uint64_t seed = 7);
CheckResult check_instantiation(int inputs = 20, std::uint64_t seed = 11);
std::vector<CheckResult> gradient_checks();
/// Every differentiable op and the whole IGConv+ / loss composite in one result.
CheckResult check_gradients();
CheckResult check_param_counts();
/// FLOP ordering always; latency ordering when `measure` is set.
CheckResult check_efficiency(bool measure, std::vector<analysis::BenchResult>* rows = nullptr);
CheckResult check_zero_degeneracy();
CheckResult check_metric_fidelity(std::uint64_t seed = 5);
CheckResult check_cka_instrument(std::uint64_t seed = 3);

/// Kernel-level equivalences: SIMD vs scalar, fast ops vs oracles.
std::vector<CheckResult> oracle_suite();
/// oracle_suite plus the quick criterion checks (no training).
std::vector<CheckResult> selftest_suite();

// ---- training experiments ---------------------------------------------------------

struct Corpus {
  std::filesystem::path train, val;
};

/// The desk-scale configuration: TinyEncoder C_e=32, B=4, patch 48,
/// scales {2,3,4}, 5000 iterations, lambda 0.05.
TrainConfig desk_config(Variant v);

struct TrainingOutcome {
  EvalTable table;
  double seconds = 0.0;
  std::string hash;
  std::filesystem::path checkpoint;
};

TrainingOutcome run_experiment(const TrainConfig& cfg, const Corpus& corpus, const std::filesystem::path& out,
                               std::ostream& progress);

/// >= 1.0 dB over bicubic at x2, >= 0.5 dB at x4, within two hours.
CheckResult judge_multiscale(const TrainingOutcome& run);
/// Full IGConv+ not worse than plain IGConv at x2 by more than 0.05 dB.
CheckResult judge_ablation(const TrainingOutcome& plus, const TrainingOutcome& plain);

/// Scale-specific SPConv models (one per scale, own seeds), compared on
/// `probes` held-out crops.
analysis::CkaReport scale_specific_cka(const Corpus& corpus, const std::filesystem::path& out,
                                       std::int64_t iterations, std::ostream& progress, int probes = 8);
/// Mean similarity of the later half of the layers >= the earlier half.
CheckResult judge_cka_trend(const analysis::CkaReport& report);

/// Two identical short trainings hash equal; repeated inference is byte-equal.
CheckResult check_determinism(const Corpus& corpus, const std::filesystem::path& out, std::int64_t iterations = 20);

}  // namespace igkit::verify
