#include "igkit/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "igkit/error.hpp"
#include "igkit/functional.hpp"
#include "igkit/ops.hpp"

namespace igkit {

namespace fs = std::filesystem;

Dataset Dataset::load(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("data directory not found: " + dir.string());
  Dataset d;
  for (const auto& p : list_images(dir)) {
    ImageBuffer img = read_image(p);
    if (img.channels != 3) throw DataError("expected an RGB image: " + p.string());
    d.names.push_back(p.filename().string());
    d.images.push_back(std::move(img));
  }
  if (d.images.empty()) throw DataError("no images in " + dir.string());
  return d;
}

Tensor synthesize_lr(const Tensor& hr, int r) {
  if (r == 1) return hr;
  return bicubic_resize(hr, 1.0 / r);
}

Task sample_task(Rng& rng, const Dataset& data, const std::vector<int>& scales, int patch, int count, bool augment) {
  if (data.images.empty()) throw DataError("empty dataset");
  if (scales.empty() || count < 1 || patch < 1) throw ConfigError("invalid task request");
  Task t;
  t.r = scales[rng.below(scales.size())];
  const int side = patch * t.r;
  std::vector<Tensor> hrs;
  for (int i = 0; i < count; ++i) {
    const ImageBuffer* img = nullptr;
    for (int attempt = 0; attempt < 100 && !img; ++attempt) {
      const ImageBuffer& cand = data.images[rng.below(data.images.size())];
      if (cand.width >= side && cand.height >= side) img = &cand;
    }
    if (!img) throw DataError("no training image holds a " + std::to_string(side) + "px crop");
    const int y = static_cast<int>(rng.below(img->height - side + 1));
    const int x = static_cast<int>(rng.below(img->width - side + 1));
    Tensor hr = to_tensor(crop(*img, y, x, side, side));
    if (augment) hr = ops::apply_transform(ops::Dihedral{static_cast<int>(rng.below(8))}, hr);
    hrs.push_back(std::move(hr));
  }
  t.hr = count == 1 ? std::move(hrs[0]) : ops::concat(hrs, 0);
  t.lr = synthesize_lr(t.hr, t.r);
  return t;
}

ag::GradMap averaged_gradients(const SrModel& model, const std::vector<Task>& tasks, const LossConfig& loss,
                               std::vector<SubBatchMetrics>* metrics, std::int64_t step) {
  if (tasks.empty()) throw ContractError("no sub-batches");
  ag::GradMap sum;
  for (const Task& task : tasks) {
    const ag::Var sr = model.forward(ag::Var(task.lr), task.r);
    const LossTerms terms = total_loss(sr, task.hr, loss);
    const double total = terms.total.value()[0];
    if (!std::isfinite(total)) {
      std::ostringstream os;
      os << "non-finite loss at step " << step << ", scale " << task.r << ": l1=" << terms.l1
         << " freq=" << terms.freq << " total=" << total;
      throw NumericalError(os.str());
    }
    if (metrics) metrics->push_back({task.r, terms.l1, terms.freq, total});
    ag::GradMap g = ag::gradients(terms.total, model.params());
    if (sum.empty()) {
      sum = std::move(g);
    } else {
      for (auto& [name, t] : sum) ops::axpy(1.0, g.at(name), t);
    }
  }
  if (tasks.size() > 1) {
    const double inv = 1.0 / static_cast<double>(tasks.size());
    for (auto& [name, t] : sum)
      for (auto& v : t.data()) v *= inv;
  }
  return sum;
}

StepMetrics train_step(SrModel& model, const std::vector<Task>& tasks, optim::Adam& adam, optim::Ema* ema, double lr,
                       const LossConfig& loss, std::int64_t step) {
  StepMetrics m;
  m.step = step;
  m.lr = lr;
  const ag::GradMap grads = averaged_gradients(model, tasks, loss, &m.parts, step);
  adam.step(model.params(), grads, lr);
  if (ema) ema->update(model.params());
  return m;
}

// ---- evaluation -------------------------------------------------------------

namespace {

template <typename Upscale>
EvalTable evaluate_with(const std::vector<ImageBuffer>& images, const std::vector<int>& scales, Upscale&& upscale) {
  if (images.empty()) throw DataError("evaluation set is empty");
  EvalTable table;
  for (int r : scales) {
    if (r < 1) throw ConfigError("evaluation scales must be positive integers");
    ScaleResult row;
    row.r = r;
    for (const ImageBuffer& full : images) {
      const ImageBuffer hr = modulo_crop(full, r);
      const Tensor lr = synthesize_lr(to_tensor(hr), r);
      const ImageBuffer sr = from_tensor(upscale(lr, r));
      const ImageBuffer bic = from_tensor(r == 1 ? lr : bicubic_resize(lr, static_cast<double>(r)));
      row.psnr += psnr_y(sr, hr, r);
      row.ssim += ssim_y(sr, hr, r);
      row.bicubic_psnr += psnr_y(bic, hr, r);
      row.bicubic_ssim += ssim_y(bic, hr, r);
      ++row.images;
    }
    const double n = row.images;
    row.psnr /= n;
    row.ssim /= n;
    row.bicubic_psnr /= n;
    row.bicubic_ssim /= n;
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace

EvalTable evaluate(const SrModel& model, const std::vector<ImageBuffer>& images, const std::vector<int>& scales,
                   const EvalOptions& opts) {
  if (opts.passthrough) {
    for (int r : scales)
      if (r != 1) throw ContractError("passthrough evaluation only applies at r = 1");
    return evaluate_with(images, scales, [](const Tensor& lr, int) { return lr; });
  }
  for (int r : scales)
    if (r < 1) throw ConfigError("evaluation scales must be positive integers");
  return evaluate_bank(instantiate(model.upsampler(), scales), model.encoder(), images, scales);
}

EvalTable evaluate_bank(const FilterBank& bank, const TinyEncoder& encoder, const std::vector<ImageBuffer>& images,
                        const std::vector<int>& scales) {
  return evaluate_with(images, scales,
                       [&](const Tensor& lr, int r) { return infer_with_bank(bank, encoder, lr, r); });
}

std::string EvalTable::csv() const {
  std::ostringstream os;
  os << "scale,images,psnr_y,ssim_y,bicubic_psnr_y,bicubic_ssim_y\n" << std::setprecision(10);
  for (const auto& r : rows)
    os << r.r << "," << r.images << "," << r.psnr << "," << r.ssim << "," << r.bicubic_psnr << "," << r.bicubic_ssim
       << "\n";
  return os.str();
}

std::string EvalTable::pretty() const {
  std::ostringstream os;
  os << " scale  images   PSNR-Y   SSIM-Y  | bicubic PSNR-Y  SSIM-Y |  gain dB\n";
  os << std::fixed;
  for (const auto& r : rows)
    os << "   x" << std::setw(2) << std::left << r.r << std::right << std::setw(7) << r.images << std::setw(9)
       << std::setprecision(3) << r.psnr << std::setw(9) << std::setprecision(4) << r.ssim << "  |" << std::setw(15)
       << std::setprecision(3) << r.bicubic_psnr << std::setw(8) << std::setprecision(4) << r.bicubic_ssim << " |"
       << std::setw(9) << std::setprecision(3) << (r.psnr - r.bicubic_psnr) << "\n";
  return os.str();
}

// ---- driver -----------------------------------------------------------------

namespace {
constexpr std::uint64_t kDataStream = 0x9e3779b97f4a7c15ULL;

SrModel init_model(const TrainConfig& cfg) {
  Rng rng(cfg.seed);
  return SrModel(cfg.model, rng);
}
}  // namespace

Trainer::Trainer(const TrainConfig& cfg, Dataset data)
    : cfg_(cfg), data_(std::move(data)), data_rng_(cfg.seed ^ kDataStream), model_(init_model(cfg)) {
  cfg_.validate();
  if (cfg_.ema_decay > 0) ema_.emplace(cfg_.ema_decay);
  if (ema_) ema_->update(model_.params());
}

StepMetrics Trainer::step_once() {
  std::vector<Task> tasks;
  for (int s = 0; s < cfg_.sub_batches; ++s)
    tasks.push_back(sample_task(data_rng_, data_, cfg_.scales, cfg_.patch_size, cfg_.images_per_sub_batch(),
                                cfg_.augment));
  const double lr = cfg_.lr_at(step_);
  StepMetrics m = train_step(model_, tasks, adam_, ema_ ? &*ema_ : nullptr, lr, cfg_.loss, step_);
  ++step_;
  return m;
}

SrModel Trainer::eval_model() const {
  if (!ema_ || !cfg_.eval_ema) return model_;
  SrModel copy = init_model(cfg_);
  copy.params().assign(ema_->shadow());
  return copy;
}

io::Container Trainer::checkpoint() const {
  io::Container c;
  c.meta["kind"] = "checkpoint";
  c.meta["step"] = std::to_string(step_);
  c.meta["adam.step"] = std::to_string(adam_.steps());
  write_model_meta(c, cfg_.model);
  for (const auto& [k, v] : config_entries(cfg_)) c.meta["train." + k] = v;
  for (const auto& p : model_.params().items()) c.add(p.name, p.var.value());
  if (ema_)
    for (const auto& [name, t] : ema_->shadow()) c.add("ema/" + name, t);
  for (const auto& [name, t] : adam_.first_moments()) c.add("adam.m/" + name, t);
  for (const auto& [name, t] : adam_.second_moments()) c.add("adam.v/" + name, t);
  return c;
}

SrModel load_model(const io::Container& ckpt, bool prefer_ema) {
  if (!ckpt.meta.count("kind") || ckpt.meta.at("kind") != "checkpoint") throw DataError("file is not a checkpoint");
  Rng rng(0);
  SrModel model(read_model_meta(ckpt), rng);
  std::map<std::string, Tensor> values;
  for (const auto& p : model.params().items()) {
    const std::string ema_name = "ema/" + p.name;
    values[p.name] = prefer_ema && ckpt.has(ema_name) ? ckpt.get(ema_name) : ckpt.get(p.name);
  }
  model.params().assign(values);
  return model;
}

TrainResult run_training(const TrainConfig& cfg, const Dataset& train, const std::optional<Dataset>& val,
                         const fs::path& out_dir, std::ostream& progress) {
  fs::create_directories(out_dir);
  Trainer trainer(cfg, train);
  std::ofstream log(out_dir / "log.csv");
  if (!log) throw DataError("cannot write " + (out_dir / "log.csv").string());
  log << "step,scale,l1,freq,total,lr\n" << std::setprecision(10);

  const auto start = std::chrono::steady_clock::now();
  double running = 0.0;
  std::int64_t running_n = 0;
  for (std::int64_t it = 0; it < cfg.iterations; ++it) {
    const StepMetrics m = trainer.step_once();
    for (const auto& p : m.parts) {
      if (m.step % cfg.log_every == 0)
        log << m.step << "," << p.r << "," << p.l1 << "," << p.freq << "," << p.total << "," << m.lr << "\n";
      running += p.total;
      ++running_n;
    }
    if (cfg.checkpoint_every > 0 && (it + 1) % cfg.checkpoint_every == 0 && it + 1 < cfg.iterations)
      io::save(out_dir / ("step_" + std::to_string(it + 1) + ".ckpt"), trainer.checkpoint());
    if ((it + 1) % 100 == 0 || it + 1 == cfg.iterations) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      progress << "step " << (it + 1) << "/" << cfg.iterations << "  loss " << std::setprecision(5)
               << running / std::max<std::int64_t>(1, running_n) << "  lr " << m.lr << "  " << std::setprecision(4)
               << secs << "s" << std::endl;
      running = 0.0;
      running_n = 0;
    }
  }
  log.flush();

  TrainResult result;
  result.checkpoint = out_dir / "final.ckpt";
  io::save(result.checkpoint, trainer.checkpoint());
  result.checkpoint_hash = io::file_hash(result.checkpoint);
  if (val) {
    result.eval = evaluate(trainer.eval_model(), val->images, cfg.scales);
    std::ofstream(out_dir / "eval.csv") << result.eval->csv();
  }
  return result;
}

}  // namespace igkit
