#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "igkit/losses.hpp"
#include "igkit/model.hpp"

namespace igkit {

enum class LrSchedule { Cosine, Step, Constant };

struct TrainConfig {
  ModelConfig model;
  LossConfig loss;
  std::vector<int> scales{2, 3, 4};
  int patch_size = 48;      // LR patch side
  int batch = 4;            // images per step, split evenly over sub-batches
  int sub_batches = 2;      // one scale each
  std::int64_t iterations = 5000;
  double lr = 1e-3;
  LrSchedule schedule = LrSchedule::Cosine;
  double lr_floor = 1e-2;   // cosine: final lr / peak
  std::int64_t step_every = 2000;  // step schedule: halve every n iterations
  double ema_decay = 0.999; // 0 disables EMA
  bool augment = true;      // random flips and quarter turns
  bool eval_ema = true;     // evaluate EMA weights when available
  std::int64_t log_every = 1;
  std::int64_t checkpoint_every = 0;  // 0: only the final checkpoint
  std::uint64_t seed = 0;

  int images_per_sub_batch() const { return batch / sub_batches; }
  /// Throws ConfigError naming the offending field.
  void validate() const;
  double lr_at(std::int64_t step) const;
};

/// Flat `key = value` text; `#` starts a comment; lists are comma separated
/// and may be wrapped in brackets. Unknown keys and malformed values raise
/// ConfigError naming the key.
TrainConfig parse_train_config(const std::string& text);
TrainConfig load_train_config(const std::filesystem::path& path);
/// Applies one key/value pair (also used for command-line overrides).
void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value);
/// Canonical key/value listing (round-trips through parse_train_config).
std::map<std::string, std::string> config_entries(const TrainConfig& cfg);
std::string format_train_config(const TrainConfig& cfg);

std::vector<int> parse_int_list(const std::string& text, const std::string& key);

}  // namespace igkit
