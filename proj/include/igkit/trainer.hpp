#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "igkit/config.hpp"
#include "igkit/container.hpp"
#include "igkit/image.hpp"
#include "igkit/model.hpp"
#include "igkit/optim.hpp"
#include "igkit/rng.hpp"

namespace igkit {

struct Dataset {
  std::vector<std::string> names;
  std::vector<ImageBuffer> images;

  /// Every PNG/PPM in `dir`, in name order; RGB only. Empty directories and
  /// unreadable files raise DataError.
  static Dataset load(const std::filesystem::path& dir);
};

/// One sub-batch: `count` HR crops of side patch*r and their bicubic LR.
struct Task {
  Tensor lr;  // [count, 3, patch, patch]
  Tensor hr;  // [count, 3, patch*r, patch*r]
  int r = 1;
};

/// Draws r uniformly from `scales`, then for each item a uniform image and
/// crop position, an optional random dihedral transform, and LR synthesis by
/// antialiased bicubic downsampling. Images smaller than the crop are
/// redrawn up to 100 times before DataError.
Task sample_task(Rng& rng, const Dataset& data, const std::vector<int>& scales, int patch, int count, bool augment);

struct SubBatchMetrics {
  int r = 0;
  double l1 = 0, freq = 0, total = 0;
};

struct StepMetrics {
  std::int64_t step = 0;
  double lr = 0;
  std::vector<SubBatchMetrics> parts;
};

/// Gradients averaged over the tasks: summed in task order, then divided by
/// the task count. Non-finite losses raise NumericalError.
ag::GradMap averaged_gradients(const SrModel& model, const std::vector<Task>& tasks, const LossConfig& loss,
                               std::vector<SubBatchMetrics>* metrics, std::int64_t step = 0);

/// averaged_gradients, one Adam update, then an EMA update when given.
StepMetrics train_step(SrModel& model, const std::vector<Task>& tasks, optim::Adam& adam, optim::Ema* ema, double lr,
                       const LossConfig& loss, std::int64_t step);

// ---- evaluation -------------------------------------------------------------

struct ScaleResult {
  int r = 0;
  int images = 0;
  double psnr = 0, ssim = 0;
  double bicubic_psnr = 0, bicubic_ssim = 0;
};

struct EvalTable {
  std::vector<ScaleResult> rows;
  std::string csv() const;
  std::string pretty() const;
};

struct EvalOptions {
  /// Debug mode: the model is bypassed and the LR image itself is scored
  /// (only meaningful at r = 1).
  bool passthrough = false;
};

/// For every scale: modulo-crop HR, bicubic LR, forward, quantize, and score
/// Y-PSNR/SSIM with an r-pixel border crop; also scores plain bicubic
/// upsampling of the same LR. Means over images.
EvalTable evaluate(const SrModel& model, const std::vector<ImageBuffer>& images, const std::vector<int>& scales,
                   const EvalOptions& opts = {});
/// The same protocol through an instantiated bank.
EvalTable evaluate_bank(const FilterBank& bank, const TinyEncoder& encoder, const std::vector<ImageBuffer>& images,
                        const std::vector<int>& scales);
/// Bicubic LR synthesis shared by training and evaluation.
Tensor synthesize_lr(const Tensor& hr, int r);

// ---- training driver --------------------------------------------------------

class Trainer {
 public:
  Trainer(const TrainConfig& cfg, Dataset data);

  const TrainConfig& config() const { return cfg_; }
  SrModel& model() { return model_; }
  const SrModel& model() const { return model_; }
  std::int64_t step() const { return step_; }

  /// Samples sub-batches and performs one optimization step.
  StepMetrics step_once();
  /// Model carrying the EMA weights when EMA is enabled (and eval_ema is
  /// set), otherwise a model sharing the live weights.
  SrModel eval_model() const;

  io::Container checkpoint() const;

 private:
  TrainConfig cfg_;
  Dataset data_;
  Rng data_rng_;
  SrModel model_;
  optim::Adam adam_;
  std::optional<optim::Ema> ema_;
  std::int64_t step_ = 0;
};

/// Rebuilds a model from a checkpoint, optionally with its EMA weights.
SrModel load_model(const io::Container& ckpt, bool prefer_ema = true);

struct TrainResult {
  std::filesystem::path checkpoint;
  std::string checkpoint_hash;
  std::optional<EvalTable> eval;
};

/// Full run: writes log.csv, checkpoints (step_<n>.ckpt, final.ckpt), and
/// eval.csv when evaluation images are given. Progress goes to `progress`.
TrainResult run_training(const TrainConfig& cfg, const Dataset& train, const std::optional<Dataset>& val,
                         const std::filesystem::path& out_dir, std::ostream& progress);

}  // namespace igkit
