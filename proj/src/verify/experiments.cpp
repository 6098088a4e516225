#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "igkit/container.hpp"
#include "igkit/error.hpp"
#include "verify.hpp"

namespace igkit::verify {

namespace fs = std::filesystem;

TrainConfig desk_config(Variant v) {
  TrainConfig cfg;
  cfg.model.encoder.c_e = 32;
  cfg.model.upsampler.variant = v;
  cfg.model.upsampler.c_e = 32;
  cfg.scales = {2, 3, 4};
  cfg.model.upsampler.scales = cfg.scales;
  cfg.patch_size = 48;
  cfg.batch = 4;
  cfg.iterations = 5000;
  cfg.loss.lambda_freq = 0.05;
  cfg.log_every = 10;
  cfg.seed = 1;
  return cfg;
}

TrainingOutcome run_experiment(const TrainConfig& cfg, const Corpus& corpus, const fs::path& out,
                               std::ostream& progress) {
  const Dataset train = Dataset::load(corpus.train);
  const Dataset val = Dataset::load(corpus.val);
  const auto t0 = std::chrono::steady_clock::now();
  const TrainResult res = run_training(cfg, train, val, out, progress);
  TrainingOutcome o;
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.table = *res.eval;
  o.hash = res.checkpoint_hash;
  o.checkpoint = res.checkpoint;
  return o;
}

namespace {

const ScaleResult* row(const EvalTable& t, int r) {
  for (const auto& s : t.rows)
    if (s.r == r) return &s;
  return nullptr;
}

}  // namespace

CheckResult judge_multiscale(const TrainingOutcome& run) {
  CheckResult res;
  res.name = "desk-scale multi-scale training";
  const ScaleResult* x2 = row(run.table, 2);
  const ScaleResult* x3 = row(run.table, 3);
  const ScaleResult* x4 = row(run.table, 4);
  if (!x2 || !x3 || !x4) {
    res.detail = "evaluation is missing a scale";
    return res;
  }
  const double g2 = x2->psnr - x2->bicubic_psnr, g3 = x3->psnr - x3->bicubic_psnr, g4 = x4->psnr - x4->bicubic_psnr;
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << "gain over bicubic x2 " << g2 << " dB (need 1.0), x3 " << g3
     << " dB, x4 " << g4 << " dB (need 0.5); " << std::setprecision(1) << run.seconds / 60.0 << " min";
  res.metric = std::min(g2 - 1.0, g4 - 0.5);
  res.passed = g2 >= 1.0 && g4 >= 0.5 && run.seconds <= 7200.0;
  res.detail = os.str();
  return res;
}

CheckResult judge_ablation(const TrainingOutcome& plus, const TrainingOutcome& plain) {
  CheckResult res;
  res.name = "ablation direction (x2)";
  const ScaleResult* a = row(plus.table, 2);
  const ScaleResult* b = row(plain.table, 2);
  if (!a || !b) {
    res.detail = "evaluation is missing x2";
    return res;
  }
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << "IGConv+ " << a->psnr << " dB vs IGConv " << b->psnr << " dB, margin "
     << a->psnr - b->psnr << " dB";
  for (int r : {3, 4}) {
    const ScaleResult* pa = row(plus.table, r);
    const ScaleResult* pb = row(plain.table, r);
    if (pa && pb) os << "; x" << r << " margin " << pa->psnr - pb->psnr;
  }
  res.metric = a->psnr - b->psnr;
  res.passed = res.metric >= -0.05;
  res.detail = os.str();
  return res;
}

analysis::CkaReport scale_specific_cka(const Corpus& corpus, const fs::path& out, std::int64_t iterations,
                                       std::ostream& progress, int probes) {
  const Dataset train = Dataset::load(corpus.train);
  const Dataset val = Dataset::load(corpus.val);
  std::vector<std::pair<std::string, TinyEncoder>> encoders;
  for (int r : {2, 3, 4}) {
    TrainConfig cfg = desk_config(Variant::SPConv);
    cfg.scales = {r};
    cfg.model.upsampler.scales = {r};
    cfg.iterations = iterations;
    cfg.seed = 100 + static_cast<std::uint64_t>(r);
    progress << "scale-specific SPConv x" << r << "\n";
    const TrainResult res = run_training(cfg, train, std::nullopt, out / ("x" + std::to_string(r)), progress);
    const SrModel model = load_model(io::load(res.checkpoint));
    encoders.emplace_back("x" + std::to_string(r), model.encoder());
  }
  // Held-out crops taken with their own generator.
  Rng rng(2718);
  std::vector<Tensor> crops;
  const int size = 48;
  while (static_cast<int>(crops.size()) < probes) {
    const ImageBuffer& img = val.images[rng.below(val.images.size())];
    if (img.width < size || img.height < size) continue;
    const int y = static_cast<int>(rng.below(static_cast<std::size_t>(img.height - size + 1)));
    const int x = static_cast<int>(rng.below(static_cast<std::size_t>(img.width - size + 1)));
    crops.push_back(to_tensor(crop(img, y, x, size, size)));
  }
  return analysis::cka_across_scales(encoders, crops);
}

CheckResult judge_cka_trend(const analysis::CkaReport& report) {
  CheckResult res;
  res.name = "cka layer trend";
  const std::size_t n = report.layers.size();
  if (n < 2) {
    res.detail = "fewer than two layers";
    return res;
  }
  const std::size_t half = n / 2;
  double early = 0, late = 0;
  for (std::size_t i = 0; i < half; ++i) early += report.layer_mean(i);
  for (std::size_t i = half; i < n; ++i) late += report.layer_mean(i);
  early /= static_cast<double>(half);
  late /= static_cast<double>(n - half);
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << "later-layer mean " << late << " vs earlier " << early << " (";
  for (std::size_t i = 0; i < n; ++i) os << (i ? ", " : "") << report.layers[i] << " " << report.layer_mean(i);
  os << ")";
  res.metric = late - early;
  res.passed = late >= early;
  res.detail = os.str();
  return res;
}

namespace {

std::vector<char> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

CheckResult check_determinism(const Corpus& corpus, const fs::path& out, std::int64_t iterations) {
  CheckResult res;
  res.name = "determinism";
  const Dataset train = Dataset::load(corpus.train);
  const Dataset val = Dataset::load(corpus.val);
  TrainConfig cfg = desk_config(Variant::IGConvPlus);
  cfg.iterations = iterations;
  cfg.seed = 42;
  std::ostringstream sink;
  const TrainResult a = run_training(cfg, train, std::nullopt, out / "run_a", sink);
  const TrainResult b = run_training(cfg, train, std::nullopt, out / "run_b", sink);
  const bool same_hash = a.checkpoint_hash == b.checkpoint_hash;

  const SrModel model = load_model(io::load(a.checkpoint));
  const FilterBank bank = instantiate(model.upsampler(), {2});
  const ImageBuffer input = crop(val.images.front(), 0, 0, 64, 64);
  const Tensor lr = to_tensor(input);
  bool same_infer = true;
  for (int rep = 0; rep < 2; ++rep) {
    write_png(out / ("ckpt_" + std::to_string(rep) + ".png"), from_tensor(model.infer(lr, 4.0)));
    write_png(out / ("bank_" + std::to_string(rep) + ".png"), from_tensor(infer_with_bank(bank, model.encoder(), lr, 2)));
  }
  same_infer = read_bytes(out / "ckpt_0.png") == read_bytes(out / "ckpt_1.png") &&
               read_bytes(out / "bank_0.png") == read_bytes(out / "bank_1.png");
  std::ostringstream os;
  os << "checkpoint hashes " << (same_hash ? "equal" : "differ") << " (" << a.checkpoint_hash.substr(0, 16)
     << "), repeated infer " << (same_infer ? "byte-equal" : "differs");
  res.passed = same_hash && same_infer;
  res.metric = res.passed ? 0.0 : 1.0;
  res.detail = os.str();
  return res;
}

}  // namespace igkit::verify
