#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "igkit/config.hpp"
#include "igkit/container.hpp"
#include "igkit/error.hpp"
#include "igkit/rng.hpp"
#include "igkit/trainer.hpp"

namespace igkit {
namespace {

namespace fs = std::filesystem;

Dataset synthetic_dataset(std::uint64_t seed, int count, int side) {
  Rng rng(seed);
  Dataset d;
  for (int i = 0; i < count; ++i) {
    ImageBuffer img(side, side, 3);
    // Smooth gradients plus noise so crops are not flat.
    for (int y = 0; y < side; ++y)
      for (int x = 0; x < side; ++x)
        for (int c = 0; c < 3; ++c)
          img.at(y, x, c) = static_cast<std::uint8_t>((x * (c + 1) * 7 + y * 5 + rng.below(20)) % 256);
    d.names.push_back("img" + std::to_string(i));
    d.images.push_back(std::move(img));
  }
  return d;
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.model.encoder = {8, 1};
  cfg.model.upsampler.c_e = 8;
  cfg.patch_size = 8;
  cfg.batch = 2;
  cfg.sub_batches = 2;
  cfg.iterations = 3;
  cfg.seed = 5;
  return cfg;
}

TEST(SampleTask, ShapesFollowPatchAndScale) {
  const Dataset d = synthetic_dataset(1, 2, 160);
  Rng rng(1);
  const Task t = sample_task(rng, d, {3}, 48, 2, true);
  EXPECT_EQ(t.r, 3);
  EXPECT_EQ(t.hr.shape(), (Shape{2, 3, 144, 144}));
  EXPECT_EQ(t.lr.shape(), (Shape{2, 3, 48, 48}));
}

TEST(SampleTask, SeededSequenceIsReproducible) {
  const Dataset d = synthetic_dataset(2, 3, 40);
  Rng a(9), b(9);
  for (int i = 0; i < 5; ++i) {
    const Task ta = sample_task(a, d, {2, 3, 4}, 6, 2, true);
    const Task tb = sample_task(b, d, {2, 3, 4}, 6, 2, true);
    EXPECT_EQ(ta.r, tb.r);
    EXPECT_EQ(ta.hr, tb.hr);
    EXPECT_EQ(ta.lr, tb.lr);
  }
}

TEST(SampleTask, ScaleFrequenciesAreUniform) {
  const Dataset d = synthetic_dataset(3, 1, 16);
  Rng rng(10);
  std::map<int, int> counts;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++counts[sample_task(rng, d, {2, 3, 4}, 1, 1, false).r];
  const double p = 1.0 / 3, sigma = std::sqrt(draws * p * (1 - p));
  for (int r : {2, 3, 4}) EXPECT_LE(std::abs(counts[r] - draws * p), 3 * sigma) << r;
}

TEST(SampleTask, TooSmallImagesRaiseDataError) {
  const Dataset d = synthetic_dataset(4, 1, 10);
  Rng rng(1);
  EXPECT_THROW(sample_task(rng, d, {4}, 8, 1, false), DataError);
}

TEST(TrainStep, IdenticalSubBatchesEqualOne) {
  TrainConfig cfg = small_config();
  const Dataset d = synthetic_dataset(5, 2, 40);
  Rng rng(3);
  const Task task = sample_task(rng, d, {2}, 8, 1, false);
  Rng ra(7), rb(7);
  SrModel a(cfg.model, ra), b(cfg.model, rb);
  optim::Adam oa, ob;
  train_step(a, {task}, oa, nullptr, 1e-3, cfg.loss, 0);
  train_step(b, {task, task}, ob, nullptr, 1e-3, cfg.loss, 0);
  for (const auto& p : a.params().items()) EXPECT_EQ(p.var.value(), b.params().get(p.name).value()) << p.name;
}

TEST(TrainStep, LossFallsOnFixedSet) {
  TrainConfig cfg = small_config();
  cfg.model.encoder = {32, 4};
  cfg.model.upsampler.c_e = 32;
  const Dataset d = synthetic_dataset(6, 2, 64);
  Rng rng(3);
  const std::vector<Task> tasks{sample_task(rng, d, {2}, 12, 2, false), sample_task(rng, d, {3}, 12, 2, false)};
  Rng mr(1);
  SrModel model(cfg.model, mr);
  optim::Adam adam;
  std::vector<double> losses;
  for (int s = 0; s < 50; ++s) {
    const StepMetrics m = train_step(model, tasks, adam, nullptr, 1e-3, cfg.loss, s);
    losses.push_back(0.5 * (m.parts[0].total + m.parts[1].total));
  }
  double first = 0, last = 0;
  for (int i = 0; i < 5; ++i) {
    first += losses[i];
    last += losses[45 + i];
  }
  EXPECT_LT(last, first);
  EXPECT_LT(losses.back(), losses.front());
}

TEST(Evaluate, PassthroughIdentityIsInfinite) {
  const Dataset d = synthetic_dataset(7, 2, 24);
  Rng rng(1);
  const SrModel model(small_config().model, rng);
  const EvalTable t = evaluate(model, d.images, {1}, EvalOptions{true});
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_TRUE(std::isinf(t.rows[0].psnr));
  EXPECT_THROW(evaluate(model, d.images, {2}, EvalOptions{true}), ContractError);
}

TEST(Evaluate, RepeatedEvaluationIsIdentical) {
  const Dataset d = synthetic_dataset(8, 2, 30);
  Rng rng(1);
  const SrModel model(small_config().model, rng);
  EXPECT_EQ(evaluate(model, d.images, {2, 3}).csv(), evaluate(model, d.images, {2, 3}).csv());
}

TEST(Trainer, CheckpointRestoresModel) {
  const TrainConfig cfg = small_config();
  Trainer tr(cfg, synthetic_dataset(9, 2, 40));
  tr.step_once();
  const io::Container ckpt = io::deserialize(io::serialize(tr.checkpoint()));
  const SrModel live = load_model(ckpt, false);
  for (const auto& p : tr.model().params().items()) EXPECT_EQ(live.params().get(p.name).value(), p.var.value());
  EXPECT_EQ(ckpt.meta_value("step"), "1");
}

TEST(Trainer, NonFiniteLossRaisesNumericalError) {
  TrainConfig cfg = small_config();
  Trainer tr(cfg, synthetic_dataset(10, 2, 40));
  ag::Var w = tr.model().params().items().front().var;
  w.mutable_value()[0] = std::nan("");
  EXPECT_THROW(tr.step_once(), NumericalError);
}

TEST(Trainer, RunWritesLogAndCheckpoints) {
  TrainConfig cfg = small_config();
  cfg.iterations = 6;
  cfg.checkpoint_every = 3;
  const fs::path out = fs::temp_directory_path() / "igkit_unit_run";
  fs::remove_all(out);
  std::ostringstream progress;
  const Dataset d = synthetic_dataset(11, 3, 40);
  const TrainResult res = run_training(cfg, d, d, out, progress);
  EXPECT_TRUE(fs::exists(out / "log.csv"));
  EXPECT_TRUE(fs::exists(out / "step_3.ckpt"));
  EXPECT_TRUE(fs::exists(out / "final.ckpt"));
  EXPECT_TRUE(fs::exists(out / "eval.csv"));
  EXPECT_EQ(res.checkpoint_hash, io::file_hash(out / "final.ckpt"));
  ASSERT_TRUE(res.eval.has_value());
  EXPECT_EQ(res.eval->rows.size(), 3u);
}

TEST(Config, ParsesAndRoundTrips) {
  const TrainConfig cfg = parse_train_config(
      "# desk run\nscales = [2, 3, 4]\npatch_size = 48\nbatch = 4\nsub_batches = 2\nlambda_freq = 0.05\n");
  EXPECT_EQ(cfg.scales, (std::vector<int>{2, 3, 4}));
  EXPECT_EQ(cfg.patch_size, 48);
  const TrainConfig again = parse_train_config(format_train_config(cfg));
  EXPECT_EQ(format_train_config(again), format_train_config(cfg));
}

TEST(Config, RejectsBadValues) {
  EXPECT_THROW(parse_train_config("batch = 5\nsub_batches = 2\n"), ConfigError);
  EXPECT_THROW(parse_train_config("unknown_key = 1\n"), ConfigError);
  EXPECT_THROW(parse_train_config("scales = []\n"), ConfigError);
  EXPECT_THROW(parse_train_config("patch_size = abc\n"), ConfigError);
}

TEST(Config, ErrorNamesTheKey) {
  try {
    parse_train_config("patch_size = -3\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("patch_size"), std::string::npos);
  }
}

TEST(Dataset, MissingOrEmptyDirectoryRaisesDataError) {
  const fs::path empty = fs::temp_directory_path() / "igkit_unit_empty";
  fs::remove_all(empty);
  fs::create_directories(empty);
  EXPECT_THROW(Dataset::load(empty), DataError);
  EXPECT_THROW(Dataset::load(empty / "nope"), DataError);
}

}  // namespace
}  // namespace igkit
