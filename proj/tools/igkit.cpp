// igkit: train, evaluate, instantiate and analyse multi-scale upsamplers.
//
// Exit codes: 0 success, 1 failed self-test, 2 usage or configuration error,
// 3 data or contract error, 4 numerical failure.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "igkit/analysis.hpp"
#include "igkit/error.hpp"
#include "igkit/model.hpp"
#include "igkit/trainer.hpp"
#include "verify.hpp"

namespace fs = std::filesystem;
using namespace igkit;

namespace {

// Thrown for bad command-line input detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<int> parse_scales(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw UsageError("invalid scale '" + item + "'");
    }
    if (used != item.size() && item.find_first_not_of(" ", used) != std::string::npos)
      throw UsageError("invalid scale '" + item + "'");
    if (v < 1 || std::floor(v) != v) throw UsageError("scales must be integers >= 1, got '" + item + "'");
    out.push_back(static_cast<int>(v));
  }
  if (out.empty()) throw UsageError("no scales given");
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text)) throw DataError("cannot write " + path.string());
}

Dataset load_dataset(const std::string& dir) {
  if (!fs::is_directory(dir)) throw UsageError("data directory not found: " + dir);
  return Dataset::load(dir);
}

ImageBuffer read_input_image(const std::string& path) {
  try {
    return read_image(path);
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
}

// ---- train ---------------------------------------------------------------------

struct TrainArgs {
  std::string config, data, val, out;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> iterations;
  std::vector<std::string> set;
};

int cmd_train(const TrainArgs& a) {
  TrainConfig cfg = a.config.empty() ? TrainConfig{} : load_train_config(a.config);
  for (const std::string& kv : a.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.seed) cfg.seed = *a.seed;
  if (a.iterations) cfg.iterations = *a.iterations;
  cfg.validate();
  const Dataset train = load_dataset(a.data);
  std::optional<Dataset> val;
  if (!a.val.empty()) val = load_dataset(a.val);
  fs::create_directories(a.out);
  write_text(fs::path(a.out) / "config.txt", format_train_config(cfg));
  std::cerr << "training " << variant_name(cfg.model.upsampler.variant) << " on " << train.images.size()
            << " images for " << cfg.iterations << " iterations\n";
  const TrainResult res = run_training(cfg, train, val, a.out, std::cerr);
  std::cout << "checkpoint " << res.checkpoint.string() << "  hash " << res.checkpoint_hash << "\n";
  if (res.eval) std::cout << res.eval->pretty();
  return 0;
}

// ---- eval ----------------------------------------------------------------------

int cmd_eval(const std::string& ckpt, const std::string& bank, const std::string& data, const std::string& scales,
             bool live, bool passthrough, const std::string& csv) {
  const Dataset ds = load_dataset(data);
  const std::vector<int> rs = parse_scales(scales);
  EvalTable table;
  if (!bank.empty()) {
    const io::Container c = io::load(bank);
    table = evaluate_bank(read_bank(c), read_encoder(c), ds.images, rs);
  } else {
    if (ckpt.empty()) throw UsageError("eval needs --ckpt or --bank");
    const SrModel model = load_model(io::load(ckpt), !live);
    EvalOptions opts;
    opts.passthrough = passthrough;
    table = evaluate(model, ds.images, rs, opts);
  }
  std::cout << table.pretty();
  if (!csv.empty()) write_text(csv, table.csv());
  return 0;
}

// ---- instantiate ------------------------------------------------------------------

int cmd_instantiate(const std::string& ckpt, const std::string& scales, const std::string& out, bool f32,
                    bool live) {
  const std::vector<int> rs = parse_scales(scales);
  const SrModel model = load_model(io::load(ckpt), !live);
  const FilterBank bank = instantiate(model.upsampler(), rs);
  io::Container c;
  const io::DType dtype = f32 ? io::DType::F32 : io::DType::F64;
  append_bank(c, bank, dtype);
  append_encoder(c, model.encoder(), dtype);
  io::save(out, c);
  for (int r : rs) std::cout << "x" << r << "  " << bank.parameter_count(r) << " parameters\n";
  std::cout << "wrote " << out << "  hash " << io::file_hash(out) << "\n";
  return 0;
}

// ---- infer ----------------------------------------------------------------------

int cmd_infer(const std::string& ckpt, const std::string& bank, const std::string& in, double scale,
              const std::string& out, bool live) {
  if (ckpt.empty() == bank.empty()) throw UsageError("infer needs exactly one of --ckpt or --bank");
  if (!(scale >= 1)) throw UsageError("--scale must be >= 1");
  const ImageBuffer img = read_input_image(in);
  if (img.channels != 3) throw UsageError("infer expects an RGB image");
  const Tensor lr = to_tensor(img);
  const bool integer = std::floor(scale) == scale;
  Tensor sr;
  if (!bank.empty()) {
    if (!integer) throw UsageError("a filter bank holds integer scales only; use --ckpt for --scale " +
                                   std::to_string(scale));
    const io::Container c = io::load(bank);
    sr = infer_with_bank(read_bank(c), read_encoder(c), lr, static_cast<int>(scale));
  } else {
    const SrModel model = load_model(io::load(ckpt), !live);
    if (!integer)
      std::cerr << "note: non-integer scale " << scale << " runs x" << std::ceil(scale)
                << " and resizes the result down with bicubic\n";
    sr = model.infer(lr, scale);
  }
  write_image(out, from_tensor(sr));
  std::cout << img.width << "x" << img.height << " -> " << sr.dim(3) << "x" << sr.dim(2) << "  " << out << "\n";
  return 0;
}

// ---- bench / cka / atlas -------------------------------------------------------------

int cmd_bench(const std::string& variants, const std::string& scales, int c_e, int warmups, int trials, int out_h,
              int out_w, const std::string& csv) {
  std::vector<analysis::BenchResult> rows;
  std::stringstream ss(variants);
  std::string v;
  while (std::getline(ss, v, ',')) {
    for (int r : parse_scales(scales)) {
      analysis::BenchConfig cfg;
      cfg.variant = parse_variant(v);
      cfg.c_e = c_e;
      cfg.r = r;
      cfg.warmups = warmups;
      cfg.trials = trials;
      cfg.out_h = out_h;
      cfg.out_w = out_w;
      rows.push_back(analysis::bench(cfg));
    }
  }
  std::cout << analysis::bench_pretty(rows);
  if (!csv.empty()) write_text(csv, analysis::bench_csv(rows));
  return 0;
}

int cmd_cka(const std::vector<std::string>& ckpts, const std::string& probes, int count, int size,
            const std::string& csv) {
  if (ckpts.size() < 2) throw UsageError("cka needs at least two --ckpt files");
  std::vector<std::pair<std::string, TinyEncoder>> encoders;
  for (const auto& p : ckpts) encoders.emplace_back(fs::path(p).stem().string(), load_model(io::load(p)).encoder());
  const Dataset ds = load_dataset(probes);
  std::vector<Tensor> crops;
  for (std::size_t i = 0; i < ds.images.size() && static_cast<int>(crops.size()) < count; ++i) {
    const ImageBuffer& img = ds.images[i];
    if (img.width < size || img.height < size) continue;
    crops.push_back(to_tensor(crop(img, (img.height - size) / 2, (img.width - size) / 2, size, size)));
  }
  if (crops.empty()) throw DataError("no probe image holds a " + std::to_string(size) + "px crop");
  const analysis::CkaReport report = analysis::cka_across_scales(encoders, crops);
  std::cout << report.pretty();
  if (!csv.empty()) write_text(csv, report.csv());
  return 0;
}

int cmd_atlas(const std::string& ckpt, int c_e, std::uint64_t seed, const std::string& scales, int filters, bool fgrep,
              bool sampling, const std::string& out) {
  std::optional<HyperNet> net;
  std::optional<SrModel> model;
  if (!ckpt.empty()) {
    model.emplace(load_model(io::load(ckpt)));
    const HyperNet* n = sampling ? model->upsampler().sampling_net() : model->upsampler().filter_net();
    if (!n) throw UsageError("checkpoint has no " + std::string(sampling ? "sampling" : "filter") + " hypernetwork");
    net.emplace(*n);
  } else {
    Rng rng(seed);
    net.emplace(sampling ? HyperNetConfig::sampling(c_e) : HyperNetConfig::filters(c_e), rng);
  }
  analysis::AtlasOptions opts;
  opts.filters = filters;
  opts.fgrep = fgrep;
  analysis::export_filter_atlas(*net, parse_scales(scales), out, opts);
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_selftest() {
  const auto results = verify::selftest_suite();
  std::cout << verify::format_results(results);
  for (const auto& r : results)
    if (!r.passed) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"igkit: multi-scale super-resolution upsamplers"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "train a model");
  train->add_option("--config", ta.config, "flat key = value config file")->check(CLI::ExistingFile);
  train->add_option("--data", ta.data, "training image directory")->required();
  train->add_option("--val", ta.val, "held-out images for the final evaluation");
  train->add_option("--out", ta.out, "output directory")->required();
  train->add_option("--seed", ta.seed, "random seed");
  train->add_option("--iterations", ta.iterations, "override the iteration count");
  train->add_option("--set", ta.set, "override a config key (key=value), repeatable");

  std::string ckpt, bank, data, scales = "2,3,4", out, csv, in;
  bool live = false, passthrough = false, f32 = false;
  auto* eval = app.add_subcommand("eval", "evaluate on an image directory");
  eval->add_option("--ckpt", ckpt, "checkpoint");
  eval->add_option("--bank", bank, "instantiated filter bank");
  eval->add_option("--data", data, "image directory")->required();
  eval->add_option("--scales", scales, "comma separated integer scales");
  eval->add_flag("--live", live, "use the live weights instead of the EMA weights");
  eval->add_flag("--passthrough", passthrough, "score the LR input itself (r = 1 only)");
  eval->add_option("--csv", csv, "write the table as CSV");

  auto* inst = app.add_subcommand("instantiate", "precompute per-scale kernels");
  inst->add_option("--ckpt", ckpt, "checkpoint")->required();
  inst->add_option("--scales", scales, "comma separated integer scales")->required();
  inst->add_option("--out", out, "bank file")->required();
  inst->add_flag("--f32", f32, "store 32-bit floats");
  inst->add_flag("--live", live, "use the live weights instead of the EMA weights");

  double scale = 2;
  auto* infer = app.add_subcommand("infer", "upscale one image");
  infer->add_option("--ckpt", ckpt, "checkpoint");
  infer->add_option("--bank", bank, "instantiated filter bank");
  infer->add_option("--in", in, "input image")->required();
  infer->add_option("--scale", scale, "scale factor (non-integer needs --ckpt)")->required();
  infer->add_option("--out", out, "output image")->required();
  infer->add_flag("--live", live, "use the live weights instead of the EMA weights");

  std::string variants = "spconv,spconv_plus,igconv,igconv_plus";
  int c_e = 64, warmups = 5, trials = 30, out_h = 720, out_w = 1280;
  auto* bench = app.add_subcommand("bench", "time deployed upsamplers");
  bench->add_option("--variants", variants, "comma separated variants");
  bench->add_option("--scales", scales, "comma separated integer scales");
  bench->add_option("--c-e", c_e, "feature channels");
  bench->add_option("--warmups", warmups, "warmup runs (>= 5)");
  bench->add_option("--trials", trials, "timed runs (>= 30)");
  bench->add_option("--out-h", out_h, "output height");
  bench->add_option("--out-w", out_w, "output width");
  bench->add_option("--csv", csv, "write results as CSV");

  std::vector<std::string> ckpts;
  int probe_count = 8, probe_size = 48;
  auto* cka = app.add_subcommand("cka", "cross-model feature similarity per encoder layer");
  cka->add_option("--ckpt", ckpts, "checkpoints to compare (repeat)")->required();
  cka->add_option("--probes", data, "probe image directory")->required();
  cka->add_option("--count", probe_count, "number of probe crops");
  cka->add_option("--size", probe_size, "probe crop side");
  cka->add_option("--csv", csv, "write the report as CSV");

  std::uint64_t seed = 0;
  int filters = 16;
  bool fgrep = false, sampling = false;
  std::string atlas_scales = "2,3,4,32";
  auto* atlas = app.add_subcommand("atlas", "render generated filters as an image grid");
  atlas->add_option("--ckpt", ckpt, "checkpoint (random network when omitted)");
  atlas->add_option("--c-e", c_e, "feature channels for a random network");
  atlas->add_option("--seed", seed, "seed for a random network");
  atlas->add_option("--scales", atlas_scales, "comma separated integer scales");
  atlas->add_option("--filters", filters, "filters per row");
  atlas->add_flag("--fgrep", fgrep, "apply dihedral averaging");
  atlas->add_flag("--sampling", sampling, "render the sampling network");
  atlas->add_option("--out", out, "PNG path")->required();

  auto* self = app.add_subcommand("selftest", "run oracle and invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train) return cmd_train(ta);
    if (*eval) return cmd_eval(ckpt, bank, data, scales, live, passthrough, csv);
    if (*inst) return cmd_instantiate(ckpt, scales, out, f32, live);
    if (*infer) return cmd_infer(ckpt, bank, in, scale, out, live);
    if (*bench) return cmd_bench(variants, scales, c_e, warmups, trials, out_h, out_w, csv);
    if (*cka) return cmd_cka(ckpts, data, probe_count, probe_size, csv);
    if (*atlas) return cmd_atlas(ckpt, c_e, seed, atlas_scales, filters, fgrep, sampling, out);
    if (*self) return cmd_selftest();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
