#include "igkit/hypernet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "igkit/error.hpp"
#include "igkit/functional.hpp"

namespace igkit {

using ag::Var;

std::vector<double> coordinate_grid(int r) {
  if (r < 1) throw ContractError("coordinate_grid needs r >= 1");
  std::vector<double> d(r);
  for (int i = 0; i < r; ++i) d[i] = (2.0 * i + 1.0) / r - 1.0;
  return d;
}

HyperNet::HyperNet(const HyperNetConfig& cfg) : cfg_(cfg) {
  if (cfg.c_h < 2 || cfg.c_h % 2 != 0) throw ConfigError("hypernetwork width must be even");
  if (cfg.k < 1 || cfg.k % 2 == 0) throw ConfigError("kernel size must be odd");
  if (cfg.c_e < 1 || cfg.hidden_layers < 0 || cfg.outputs < 1) throw ConfigError("invalid hypernetwork shape");
}

HyperNet::HyperNet(const HyperNetConfig& cfg, Rng& rng) : HyperNet(cfg) { declare(&rng); }

HyperNet HyperNet::zeros(const HyperNetConfig& cfg) {
  HyperNet net(cfg);
  net.declare(nullptr);
  return net;
}

void HyperNet::declare(Rng* rng) {
  const std::int64_t p = static_cast<std::int64_t>(cfg_.c_e) * cfg_.k * cfg_.k;
  const std::int64_t half = cfg_.c_h / 2;
  auto normal = [&](Shape s) { return rng ? rng->normal(std::move(s)) : Tensor(std::move(s)); };
  auto uniform = [&](Shape s, double bound) { return rng ? rng->uniform(std::move(s), -bound, bound) : Tensor(std::move(s)); };

  z_x_ = params_.add("z_x", normal({p, 1, 1, half}));
  z_y_ = params_.add("z_y", normal({p, 1, 1, half}));
  z_amp_ = params_.add("z_amp", normal({cfg_.c_h}));
  hs_w_ = params_.add("h_s.weight", Tensor(Shape{half, 1}));
  hs_b_ = params_.add("h_s.bias", Tensor(Shape{half}));

  int in = cfg_.c_h;
  for (int l = 0; l <= cfg_.hidden_layers; ++l) {
    const bool last = l == cfg_.hidden_layers;
    const int out = last ? cfg_.outputs : cfg_.c_h;
    // Hidden: Kaiming-uniform for ReLU. Output: unit-gain uniform scaled so
    // that generated kernels start with magnitude ~ 1/(k*sqrt(C_e)).
    const double bound = last ? std::sqrt(3.0 / in) / (cfg_.k * std::sqrt(static_cast<double>(cfg_.c_e)))
                              : std::sqrt(6.0 / in);
    const std::string name = "f.layer" + std::to_string(l);
    Var w = params_.add(name + ".weight", uniform({out, in}, bound));
    Var b = params_.add(name + ".bias", Tensor(Shape{out}));
    layers_.emplace_back(w, b);
    in = out;
  }
}

Var HyperNet::fourier_features(int r, double size_input) const {
  const std::vector<double> delta = coordinate_grid(r);
  const std::int64_t p_count = static_cast<std::int64_t>(cfg_.c_e) * cfg_.k * cfg_.k;
  const std::int64_t half = cfg_.c_h / 2, ch = cfg_.c_h;
  const std::int64_t rows = p_count * r * r;
  const Tensor& zx = z_x_.value();
  const Tensor& zy = z_y_.value();
  const Tensor& amp = z_amp_.value();
  std::vector<double> s(half);
  for (std::int64_t m = 0; m < half; ++m) s[m] = hs_w_.value()[m] * size_input + hs_b_.value()[m];

  // phase(row, m) = pi * (dx*Zx[p,m] + dy*Zy[p,m] + s[m])
  Tensor phase(Shape{rows, half});
  Tensor out(Shape{rows, ch});
  for (std::int64_t p = 0; p < p_count; ++p)
    for (int dy = 0; dy < r; ++dy)
      for (int dx = 0; dx < r; ++dx) {
        const std::int64_t row = (p * r + dy) * r + dx;
        double* ph = phase.ptr() + row * half;
        double* o = out.ptr() + row * ch;
        for (std::int64_t m = 0; m < half; ++m) {
          const double c = delta[dx] * zx[p * half + m] + delta[dy] * zy[p * half + m];
          ph[m] = std::numbers::pi * (c + s[m]);
          o[m] = amp[m] * std::cos(ph[m]);
          o[half + m] = amp[half + m] * std::sin(ph[m]);
        }
      }

  const Shape zshape = z_x_.shape(), hshape = hs_w_.shape();
  return ag::make_op(std::move(out), {z_x_, z_y_, z_amp_, hs_w_, hs_b_},
                     [=, amp_var = z_amp_, phase = std::move(phase)](const Tensor& g) {
                       Tensor gzx(zshape), gzy(zshape), gamp(amp_var.shape());
                       Tensor ghw(hshape), ghb(Shape{half});
                       const Tensor& a = amp_var.value();
                       for (std::int64_t p = 0; p < p_count; ++p)
                         for (int dy = 0; dy < r; ++dy)
                           for (int dx = 0; dx < r; ++dx) {
                             const std::int64_t row = (p * r + dy) * r + dx;
                             const double* ph = phase.ptr() + row * half;
                             const double* gr = g.ptr() + row * ch;
                             for (std::int64_t m = 0; m < half; ++m) {
                               const double cs = std::cos(ph[m]), sn = std::sin(ph[m]);
                               gamp[m] += gr[m] * cs;
                               gamp[half + m] += gr[half + m] * sn;
                               // d/d(inner) where phase = pi * inner
                               const double gi =
                                   std::numbers::pi * (-gr[m] * a[m] * sn + gr[half + m] * a[half + m] * cs);
                               gzx[p * half + m] += gi * delta[dx];
                               gzy[p * half + m] += gi * delta[dy];
                               ghb[m] += gi;
                             }
                           }
                       for (std::int64_t m = 0; m < half; ++m) ghw[m] = ghb[m] * size_input;
                       return std::vector<Tensor>{std::move(gzx), std::move(gzy), std::move(gamp), std::move(ghw),
                                                  std::move(ghb)};
                     });
}

Var HyperNet::mlp(const Var& features) const {
  Var h = features;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    h = fn::linear(h, layers_[l].first, layers_[l].second);
    if (l + 1 < layers_.size()) h = fn::relu(h);
  }
  return h;
}

Var HyperNet::reshape_filters(const Var& y, int r) const {
  const std::int64_t c_e = cfg_.c_e, k = cfg_.k, out = cfg_.outputs;
  // rows (e, i, j, dy, dx) x outputs  ->  (output, dy, dx) x (e, i, j)
  Var v = fn::reshape(y, {c_e, k, k, r, r, out});
  v = fn::permute(v, {5, 3, 4, 0, 1, 2});
  return fn::reshape(v, {out * r * r, c_e, k, k});
}

Var HyperNet::generate(int r, double size_input) const {
  if (r < 1) throw ContractError("scale must be >= 1");
  return reshape_filters(mlp(fourier_features(r, size_input)), r);
}

void HyperNet::zero_outputs(int begin, int end) {
  if (begin < 0 || end > cfg_.outputs || begin > end) throw ContractError("zero_outputs: range out of bounds");
  Tensor& w = layers_.back().first.mutable_value();
  Tensor& b = layers_.back().second.mutable_value();
  const std::int64_t in = w.dim(1);
  for (int o = begin; o < end; ++o) {
    std::fill_n(w.ptr() + o * in, in, 0.0);
    b[o] = 0.0;
  }
}

Var generate_filters(const HyperNet& net, int r) {
  if (net.config().outputs != 3) throw ContractError("generate_filters needs a network with 3 outputs");
  return net.generate(r);
}

std::pair<Var, Var> generate_sampling_filters(const HyperNet& net, int r, double size_input) {
  if (net.config().outputs != 12) throw ContractError("generate_sampling_filters needs a network with 12 outputs");
  const Var all = net.generate(r, size_input);
  const std::int64_t n = 6 * static_cast<std::int64_t>(r) * r;
  return {fn::slice(all, 0, 0, n), fn::slice(all, 0, n, n)};
}

}  // namespace igkit
