#include "igkit/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "igkit/error.hpp"
#include "igkit/optim.hpp"

namespace igkit {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& why) {
  throw ConfigError("config key '" + key + "': " + why + " (got '" + value + "')");
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used != v.size()) bad(key, v, "expected an integer");
    return x;
  } catch (const std::logic_error&) {
    bad(key, v, "expected an integer");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(x)) bad(key, v, "expected a finite number");
    return x;
  } catch (const std::logic_error&) {
    bad(key, v, "expected a number");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad(key, v, "expected a boolean");
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string join(const std::vector<int>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

const char* schedule_name(LrSchedule s) {
  switch (s) {
    case LrSchedule::Cosine: return "cosine";
    case LrSchedule::Step: return "step";
    case LrSchedule::Constant: return "constant";
  }
  return "cosine";
}

}  // namespace

std::vector<int> parse_int_list(const std::string& text, const std::string& key) {
  std::string s = trim(text);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') bad(key, text, "unbalanced brackets");
    s = s.substr(1, s.size() - 2);
  }
  std::vector<int> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (item.empty()) bad(key, text, "empty list item");
    out.push_back(static_cast<int>(to_int(key, item)));
  }
  if (out.empty()) bad(key, text, "expected a non-empty list");
  return out;
}

void set_config_value(TrainConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  using Setter = std::function<void()>;
  const std::map<std::string, Setter> setters = {
      {"variant", [&] { c.model.upsampler.variant = parse_variant(v); }},
      {"c_e",
       [&] {
         c.model.encoder.c_e = static_cast<int>(to_int(key, v));
         c.model.upsampler.c_e = c.model.encoder.c_e;
       }},
      {"blocks", [&] { c.model.encoder.blocks = static_cast<int>(to_int(key, v)); }},
      {"c_mid", [&] { c.model.upsampler.c_mid = static_cast<int>(to_int(key, v)); }},
      {"fgrep", [&] { c.model.upsampler.fgrep = to_bool(key, v); }},
      {"igsample", [&] { c.model.upsampler.igsample = to_bool(key, v); }},
      {"scales",
       [&] {
         c.scales = parse_int_list(v, key);
         c.model.upsampler.scales = c.scales;
       }},
      {"patch_size", [&] { c.patch_size = static_cast<int>(to_int(key, v)); }},
      {"batch", [&] { c.batch = static_cast<int>(to_int(key, v)); }},
      {"sub_batches", [&] { c.sub_batches = static_cast<int>(to_int(key, v)); }},
      {"iterations", [&] { c.iterations = to_int(key, v); }},
      {"lr", [&] { c.lr = to_double(key, v); }},
      {"lr_schedule",
       [&] {
         if (v == "cosine") c.schedule = LrSchedule::Cosine;
         else if (v == "step") c.schedule = LrSchedule::Step;
         else if (v == "constant") c.schedule = LrSchedule::Constant;
         else bad(key, v, "expected cosine, step or constant");
       }},
      {"lr_floor", [&] { c.lr_floor = to_double(key, v); }},
      {"step_every", [&] { c.step_every = to_int(key, v); }},
      {"lambda_freq", [&] { c.loss.lambda_freq = to_double(key, v); }},
      {"freq_loss", [&] { c.loss.freq_enabled = to_bool(key, v); }},
      {"ema_decay", [&] { c.ema_decay = to_double(key, v); }},
      {"eval_ema", [&] { c.eval_ema = to_bool(key, v); }},
      {"augment", [&] { c.augment = to_bool(key, v); }},
      {"log_every", [&] { c.log_every = to_int(key, v); }},
      {"checkpoint_every", [&] { c.checkpoint_every = to_int(key, v); }},
      {"seed",
       [&] {
         const std::int64_t s = to_int(key, v);
         if (s < 0) bad(key, v, "seed must be non-negative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
  };
  auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second();
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw ConfigError("config key '" + key + "': " + why);
  };
  if (scales.empty()) fail("scales", "must not be empty");
  for (int r : scales)
    if (r < 1) fail("scales", "entries must be positive integers");
  if (patch_size < 4) fail("patch_size", "must be at least 4");
  if (batch < 1) fail("batch", "must be positive");
  if (sub_batches < 1) fail("sub_batches", "must be positive");
  if (batch % sub_batches != 0) fail("batch", "must be divisible by sub_batches");
  if (iterations < 0) fail("iterations", "must be non-negative");
  if (!(lr > 0)) fail("lr", "must be positive");
  if (lr_floor < 0 || lr_floor > 1) fail("lr_floor", "must lie in [0, 1]");
  if (step_every < 1) fail("step_every", "must be positive");
  if (loss.lambda_freq < 0) fail("lambda_freq", "must be non-negative");
  if (ema_decay < 0 || ema_decay >= 1) fail("ema_decay", "must lie in [0, 1)");
  if (log_every < 1) fail("log_every", "must be positive");
  if (checkpoint_every < 0) fail("checkpoint_every", "must be non-negative");
  if (model.encoder.c_e < 1) fail("c_e", "must be positive");
  if (model.encoder.blocks < 0) fail("blocks", "must be non-negative");
  if (model.upsampler.c_mid < 1) fail("c_mid", "must be positive");
}

double TrainConfig::lr_at(std::int64_t step) const {
  switch (schedule) {
    case LrSchedule::Cosine: return optim::cosine_lr(lr, step, iterations, lr_floor);
    case LrSchedule::Step: return lr * std::pow(0.5, static_cast<double>(step / step_every));
    case LrSchedule::Constant: return lr;
  }
  return lr;
}

TrainConfig parse_train_config(const std::string& text) {
  TrainConfig cfg;
  std::stringstream ss(text);
  int line_no = 0;
  for (std::string line; std::getline(ss, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    set_config_value(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_train_config(ss.str());
}

std::map<std::string, std::string> config_entries(const TrainConfig& c) {
  return {
      {"variant", variant_name(c.model.upsampler.variant)},
      {"c_e", std::to_string(c.model.encoder.c_e)},
      {"blocks", std::to_string(c.model.encoder.blocks)},
      {"c_mid", std::to_string(c.model.upsampler.c_mid)},
      {"fgrep", c.model.upsampler.fgrep ? "true" : "false"},
      {"igsample", c.model.upsampler.igsample ? "true" : "false"},
      {"scales", join(c.scales)},
      {"patch_size", std::to_string(c.patch_size)},
      {"batch", std::to_string(c.batch)},
      {"sub_batches", std::to_string(c.sub_batches)},
      {"iterations", std::to_string(c.iterations)},
      {"lr", fmt(c.lr)},
      {"lr_schedule", schedule_name(c.schedule)},
      {"lr_floor", fmt(c.lr_floor)},
      {"step_every", std::to_string(c.step_every)},
      {"lambda_freq", fmt(c.loss.lambda_freq)},
      {"freq_loss", c.loss.freq_enabled ? "true" : "false"},
      {"ema_decay", fmt(c.ema_decay)},
      {"eval_ema", c.eval_ema ? "true" : "false"},
      {"augment", c.augment ? "true" : "false"},
      {"log_every", std::to_string(c.log_every)},
      {"checkpoint_every", std::to_string(c.checkpoint_every)},
      {"seed", std::to_string(c.seed)},
  };
}

std::string format_train_config(const TrainConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : config_entries(cfg)) out += k + " = " + v + "\n";
  return out;
}

}  // namespace igkit
