#include "igkit/upsampler.hpp"

#include <cmath>
#include <sstream>

#include "igkit/error.hpp"
#include "igkit/fgrep.hpp"
#include "igkit/functional.hpp"
#include "igkit/image.hpp"
#include "igkit/ops.hpp"

namespace igkit {

using ag::Var;

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::SPConv: return "spconv";
    case Variant::SPConvPlus: return "spconv_plus";
    case Variant::IGConv: return "igconv";
    case Variant::IGConvPlus: return "igconv_plus";
  }
  return "unknown";
}

Variant parse_variant(const std::string& s) {
  for (Variant v : {Variant::SPConv, Variant::SPConvPlus, Variant::IGConv, Variant::IGConvPlus})
    if (variant_name(v) == s) return v;
  throw ConfigError("unknown upsampler variant: " + s);
}

Var spconv_forward(const Var& m, const Var& k, int r) {
  if (k.shape()[0] != 3LL * r * r) throw DimensionError("SPConv kernel must have 3r^2 output channels");
  return fn::depth_to_space(fn::conv2d(m, k), r);
}

Var spconv_plus_forward(const Var& m, const Var& k1, const Var& k2, int r) {
  return fn::conv2d(fn::depth_to_space(fn::conv2d(m, k1), r), k2);
}

Var igsample_forward(const Var& lr, const Var& m, const Var& k_o, const Var& k_s, int r) {
  const Shape& s = lr.shape();
  if (s.size() != 4 || s[1] != 3) throw DimensionError("IGSample expects an RGB image, got " + shape_str(s));
  if (m.shape()[0] != s[0] || m.shape()[2] != s[2] || m.shape()[3] != s[3])
    throw DimensionError("IGSample: features " + shape_str(m.shape()) + " do not match image " + shape_str(s));
  const Var direction = fn::conv2d(m, k_o);
  const Var scope = fn::scale(fn::sigmoid(fn::conv2d(m, k_s)), 0.5);
  const Var offsets = fn::depth_to_space(fn::mul(direction, scope), r);
  Tensor base = ops::upsample_grid(s[2], s[3], r, 3);
  if (s[0] > 1) base = ops::concat(std::vector<Tensor>(static_cast<std::size_t>(s[0]), base), 0);
  return fn::grid_sample_bilinear(lr, fn::add(Var(std::move(base)), offsets));
}

Var apply_kernels(const UpsamplerConfig& cfg, const ScaleKernels& kernels, const Var& m, const Var& lr, int r) {
  switch (cfg.variant) {
    case Variant::SPConv:
    case Variant::IGConv: return spconv_forward(m, kernels.k, r);
    case Variant::SPConvPlus: return spconv_plus_forward(m, kernels.k, kernels.k2, r);
    case Variant::IGConvPlus: {
      const Var main = spconv_forward(m, kernels.k, r);
      if (!cfg.igsample) return main;
      return fn::add(main, igsample_forward(lr, m, kernels.k_o, kernels.k_s, r));
    }
  }
  throw ContractError("unhandled variant");
}

Upsampler::Upsampler(const UpsamplerConfig& cfg, Rng& rng) : Upsampler(cfg, &rng) {}

Upsampler Upsampler::zeros(const UpsamplerConfig& cfg) { return Upsampler(cfg, nullptr); }

Upsampler::Upsampler(const UpsamplerConfig& cfg, Rng* rng) : cfg_(cfg) {
  if (cfg.c_e < 1 || cfg.k < 1 || cfg.k % 2 == 0 || cfg.c_mid < 1) throw ConfigError("invalid upsampler shape");
  if (is_implicit(cfg.variant)) {
    HyperNetConfig fc = HyperNetConfig::filters(cfg.c_e);
    fc.k = cfg.k;
    filter_net_ = rng ? HyperNet(fc, *rng) : HyperNet::zeros(fc);
    params_.extend("hypernet.", filter_net_->params());
    if (cfg.variant == Variant::IGConvPlus && cfg.igsample) {
      HyperNetConfig sc = HyperNetConfig::sampling(cfg.c_e);
      sc.k = cfg.k;
      sampling_net_ = rng ? HyperNet(sc, *rng) : HyperNet::zeros(sc);
      // Zero direction outputs: sampling starts as plain bilinear upsampling.
      sampling_net_->zero_outputs(0, 6);
      params_.extend("hypernet_s.", sampling_net_->params());
    }
    return;
  }
  if (cfg.scales.empty()) throw ConfigError("fixed-scale upsampler needs at least one scale");
  auto init = [&](Shape shape) {
    const double bound = std::sqrt(3.0 / static_cast<double>(shape[1] * shape[2] * shape[3]));
    return rng ? rng->uniform(std::move(shape), -bound, bound) : Tensor(std::move(shape));
  };
  const std::int64_t ce = cfg.c_e, k = cfg.k;
  for (int r : cfg.scales) {
    if (r < 1) throw ConfigError("scales must be positive integers");
    const std::string base = variant_name(cfg.variant) + ".r" + std::to_string(r);
    ScaleKernels sk;
    if (cfg.variant == Variant::SPConv) {
      sk.k = params_.add(base + ".weight", init({3LL * r * r, ce, k, k}));
    } else {
      sk.k = params_.add(base + ".k1", init({static_cast<std::int64_t>(cfg.c_mid) * r * r, ce, k, k}));
      sk.k2 = params_.add(base + ".k2", init({3, cfg.c_mid, 3, 3}));
    }
    fixed_[r] = sk;
  }
}

bool Upsampler::supports(int r) const { return r >= 1 && (is_implicit(cfg_.variant) || fixed_.count(r) != 0); }

ScaleKernels Upsampler::kernels(int r, std::optional<double> size_input) const {
  if (!supports(r)) throw ContractError("upsampler does not support scale " + std::to_string(r));
  if (!is_implicit(cfg_.variant)) return fixed_.at(r);
  const double s = size_input.value_or(2.0 / r);
  const bool sym = cfg_.variant == Variant::IGConvPlus && cfg_.fgrep;
  ScaleKernels sk;
  sk.k = filter_net_->generate(r, s);
  if (sym) sk.k = fgrep::reparameterize(sk.k);
  if (sampling_net_) {
    auto [k_o, k_s] = generate_sampling_filters(*sampling_net_, r, s);
    sk.k_o = sym ? fgrep::reparameterize(k_o) : k_o;
    sk.k_s = sym ? fgrep::reparameterize(k_s) : k_s;
  }
  return sk;
}

Var Upsampler::forward(const Var& m, const Var& lr, int r) const { return apply_kernels(cfg_, kernels(r), m, lr, r); }

Tensor Upsampler::forward_arbitrary(const Tensor& m, const Tensor& lr, double r) const {
  if (!(r > 1.0)) throw ContractError("arbitrary-scale upsampling needs r > 1");
  if (!is_implicit(cfg_.variant)) throw ContractError("arbitrary scales need an implicit (igconv) upsampler");
  ag::NoGradGuard guard;
  const int whole = static_cast<int>(std::ceil(r));
  if (static_cast<double>(whole) == r) return forward(Var(m), Var(lr), whole).value();
  const Tensor big = apply_kernels(cfg_, kernels(whole, 2.0 / r), Var(m), Var(lr), whole).value();
  const double factor = r / whole;
  const auto oh = static_cast<std::int64_t>(std::llround(static_cast<double>(m.dim(2)) * r));
  const auto ow = static_cast<std::int64_t>(std::llround(static_cast<double>(m.dim(3)) * r));
  return bicubic_resize(big, oh, ow, factor, factor);
}

// ---- filter banks -----------------------------------------------------------

ScaleKernels FilterBank::kernels(int r) const {
  auto it = scales.find(r);
  if (it == scales.end()) throw ContractError("filter bank has no kernels for scale " + std::to_string(r));
  ScaleKernels sk;
  auto pick = [&](const char* name) { return it->second.count(name) ? Var(it->second.at(name)) : Var(); };
  sk.k = pick("K");
  sk.k2 = pick("K2");
  sk.k_o = pick("K_o");
  sk.k_s = pick("K_s");
  return sk;
}

std::int64_t FilterBank::parameter_count(int r) const {
  auto it = scales.find(r);
  if (it == scales.end()) throw ContractError("filter bank has no kernels for scale " + std::to_string(r));
  std::int64_t n = 0;
  for (const auto& [name, t] : it->second) n += static_cast<std::int64_t>(t.numel());
  return n;
}

FilterBank instantiate(const Upsampler& up, const std::vector<int>& scales) {
  if (scales.empty()) throw ContractError("instantiate needs at least one scale");
  ag::NoGradGuard guard;
  FilterBank bank;
  bank.config = up.config();
  for (int r : scales) {
    const ScaleKernels sk = up.kernels(r);
    auto& entry = bank.scales[r];
    entry["K"] = sk.k.value();
    if (sk.k2.defined()) entry["K2"] = sk.k2.value();
    if (sk.k_o.defined()) entry["K_o"] = sk.k_o.value();
    if (sk.k_s.defined()) entry["K_s"] = sk.k_s.value();
  }
  return bank;
}

Tensor bank_forward(const FilterBank& bank, const Tensor& m, const Tensor& lr, int r) {
  ag::NoGradGuard guard;
  return apply_kernels(bank.config, bank.kernels(r), Var(m), Var(lr), r).value();
}

void write_upsampler_meta(io::Container& c, const UpsamplerConfig& cfg, const std::string& prefix) {
  std::string scales;
  for (std::size_t i = 0; i < cfg.scales.size(); ++i) scales += (i ? "," : "") + std::to_string(cfg.scales[i]);
  c.meta[prefix + "variant"] = variant_name(cfg.variant);
  c.meta[prefix + "c_e"] = std::to_string(cfg.c_e);
  c.meta[prefix + "k"] = std::to_string(cfg.k);
  c.meta[prefix + "c_mid"] = std::to_string(cfg.c_mid);
  c.meta[prefix + "scales"] = scales;
  c.meta[prefix + "fgrep"] = cfg.fgrep ? "1" : "0";
  c.meta[prefix + "igsample"] = cfg.igsample ? "1" : "0";
}

UpsamplerConfig read_upsampler_meta(const io::Container& c, const std::string& prefix) {
  UpsamplerConfig cfg;
  try {
    cfg.variant = parse_variant(c.meta_value(prefix + "variant"));
    cfg.c_e = std::stoi(c.meta_value(prefix + "c_e"));
    cfg.k = std::stoi(c.meta_value(prefix + "k"));
    cfg.c_mid = std::stoi(c.meta_value(prefix + "c_mid"));
    cfg.fgrep = c.meta_value(prefix + "fgrep") == "1";
    cfg.igsample = c.meta_value(prefix + "igsample") == "1";
    cfg.scales.clear();
    std::stringstream ss(c.meta_value(prefix + "scales"));
    for (std::string item; std::getline(ss, item, ',');)
      if (!item.empty()) cfg.scales.push_back(std::stoi(item));
  } catch (const std::logic_error&) {
    throw DataError("malformed upsampler metadata");
  }
  return cfg;
}

void append_bank(io::Container& c, const FilterBank& bank, io::DType dtype) {
  c.meta["kind"] = "filterbank";
  write_upsampler_meta(c, bank.config, "bank.");
  std::string list;
  for (const auto& [r, entry] : bank.scales) list += (list.empty() ? "" : ",") + std::to_string(r);
  c.meta["bank.instantiated"] = list;
  for (const auto& [r, entry] : bank.scales)
    for (const auto& [name, t] : entry) c.add("r" + std::to_string(r) + "." + name, t, dtype);
}

FilterBank read_bank(const io::Container& c) {
  if (!c.meta.count("kind") || c.meta.at("kind") != "filterbank") throw DataError("file is not a filter bank");
  FilterBank bank;
  bank.config = read_upsampler_meta(c, "bank.");
  for (const auto& rec : c.tensors) {
    if (rec.name.empty() || rec.name[0] != 'r') continue;
    const auto dot = rec.name.find('.');
    if (dot == std::string::npos) continue;
    int r = 0;
    try {
      r = std::stoi(rec.name.substr(1, dot - 1));
    } catch (const std::logic_error&) {
      continue;
    }
    bank.scales[r][rec.name.substr(dot + 1)] = rec.tensor;
  }
  if (bank.scales.empty()) throw DataError("filter bank holds no kernels");
  return bank;
}

}  // namespace igkit
