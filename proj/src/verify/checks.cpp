#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "igkit/error.hpp"
#include "igkit/fgrep.hpp"
#include "igkit/functional.hpp"
#include "igkit/losses.hpp"
#include "igkit/model.hpp"
#include "igkit/ops.hpp"
#include "igkit/simd/kernels.hpp"
#include "verify.hpp"

namespace igkit::verify {

using ag::Var;

CheckResult timed(const std::function<CheckResult()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r;
  try {
    r = fn();
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string format_results(const std::vector<CheckResult>& results) {
  std::ostringstream os;
  std::size_t width = 10;
  for (const auto& r : results) width = std::max(width, r.name.size());
  int failed = 0;
  for (const auto& r : results) {
    os << (r.passed ? "PASS  " : "FAIL  ") << std::left << std::setw(static_cast<int>(width) + 2) << r.name
       << std::right << std::setw(12) << std::setprecision(3) << std::scientific << r.metric << std::fixed
       << std::setw(9) << std::setprecision(2) << r.seconds << "s  " << r.detail << "\n";
    failed += r.passed ? 0 : 1;
  }
  os << results.size() - failed << "/" << results.size() << " passed\n";
  return os.str();
}

namespace {

// max |a - b| / max |b|
double rel_diff(const Tensor& a, const Tensor& b) {
  const double scale = max_abs(b);
  return max_abs_diff(a, b) / (scale > 0 ? scale : 1.0);
}

CheckResult result(std::string name, double metric, double tol, std::string detail = {}) {
  CheckResult r;
  r.name = std::move(name);
  r.metric = metric;
  r.passed = metric <= tol;
  std::ostringstream os;
  os << "tol " << std::setprecision(2) << std::scientific << tol;
  if (!detail.empty()) os << "; " << detail;
  r.detail = os.str();
  return r;
}

// Adds N(0, sigma) noise to every parameter so no path starts exactly at zero.
void jitter(ag::ParameterSet& params, Rng& rng, double sigma) {
  for (const auto& p : params.items()) {
    Var v = p.var;
    Tensor& t = v.mutable_value();
    for (auto& x : t.data()) x += rng.normal() * sigma;
  }
}

UpsamplerConfig small_upsampler(Variant v, int c_e) {
  UpsamplerConfig u;
  u.variant = v;
  u.c_e = c_e;
  return u;
}

// Relative error of autograd vs central differences over parameters of a
// scalar loss, sampling `samples` entries per tensor.
double param_gradcheck(const std::function<Var()>& loss_fn, ag::ParameterSet& params, Rng& rng, int samples,
                       double eps, std::string* worst_name) {
  const Var loss = loss_fn();
  const ag::GradMap grads = ag::gradients(loss, params);
  ag::NoGradGuard guard;
  double worst = 0.0;
  for (const auto& p : params.items()) {
    Var v = p.var;
    Tensor& t = v.mutable_value();
    const Tensor& g = grads.at(p.name);
    const std::size_t n = t.numel();
    std::vector<std::size_t> idx;
    if (n <= static_cast<std::size_t>(samples)) {
      for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
    } else {
      for (int i = 0; i < samples; ++i) idx.push_back(rng.below(n));
    }
    double dd = 0, aa = 0, nn = 0;
    for (std::size_t i : idx) {
      const double orig = t[i];
      t[i] = orig + eps;
      const double fp = loss_fn().value()[0];
      t[i] = orig - eps;
      const double fm = loss_fn().value()[0];
      t[i] = orig;
      const double num = (fp - fm) / (2 * eps);
      dd += (num - g[i]) * (num - g[i]);
      aa += g[i] * g[i];
      nn += num * num;
    }
    const double denom = std::max(std::sqrt(std::max(aa, nn)), 1e-10);
    const double rel = std::sqrt(dd) / denom;
    if (rel > worst) {
      worst = rel;
      if (worst_name) *worst_name = p.name;
    }
  }
  return worst;
}

}  // namespace

// ---- gradient checking -------------------------------------------------------------

CheckResult gradcheck(const std::string& name, const std::function<Var(const std::vector<Var>&)>& f,
                      const std::vector<Tensor>& inputs, std::uint64_t seed, int samples, double eps, double tol) {
  Rng rng(seed);
  std::vector<Var> vars;
  for (const Tensor& t : inputs) vars.emplace_back(t, true);
  const Var out = f(vars);
  const Tensor w = rng.normal(out.shape());
  const Var loss = fn::sum(fn::mul(out, Var(w)));
  ag::backward(loss);

  auto eval = [&](const std::vector<Tensor>& xs) {
    ag::NoGradGuard guard;
    std::vector<Var> vs;
    for (const Tensor& t : xs) vs.emplace_back(t);
    const Tensor y = f(vs).value();
    double s = 0.0;
    for (std::size_t i = 0; i < y.numel(); ++i) s += y[i] * w[i];
    return s;
  };

  double worst = 0.0;
  std::vector<Tensor> xs = inputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor g = vars[k].grad().numel() ? vars[k].grad() : Tensor(inputs[k].shape());
    const std::size_t n = inputs[k].numel();
    std::vector<std::size_t> idx;
    if (n <= static_cast<std::size_t>(samples)) {
      for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
    } else {
      for (int i = 0; i < samples; ++i) idx.push_back(rng.below(n));
    }
    double dd = 0, aa = 0, nn = 0;
    for (std::size_t i : idx) {
      const double orig = xs[k][i];
      xs[k][i] = orig + eps;
      const double fp = eval(xs);
      xs[k][i] = orig - eps;
      const double fm = eval(xs);
      xs[k][i] = orig;
      const double num = (fp - fm) / (2 * eps);
      dd += (num - g[i]) * (num - g[i]);
      aa += g[i] * g[i];
      nn += num * num;
    }
    worst = std::max(worst, std::sqrt(dd) / std::max(std::sqrt(std::max(aa, nn)), 1e-10));
  }
  return result("grad " + name, worst, tol);
}

std::vector<CheckResult> gradient_checks() {
  std::vector<CheckResult> out;
  Rng rng(2024);
  auto t = [&](Shape s) { return rng.normal(std::move(s)); };
  // Values bounded away from zero so kinks stay out of the difference stencil.
  auto away = [&](Shape s) {
    Tensor x = rng.normal(std::move(s));
    for (auto& v : x.data()) v = v >= 0 ? v + 0.1 : v - 0.1;
    return x;
  };

  out.push_back(gradcheck("add", [](auto& v) { return fn::add(v[0], v[1]); }, {t({2, 3}), t({2, 3})}));
  out.push_back(gradcheck("sub", [](auto& v) { return fn::sub(v[0], v[1]); }, {t({2, 3}), t({2, 3})}));
  out.push_back(gradcheck("mul", [](auto& v) { return fn::mul(v[0], v[1]); }, {t({2, 3}), t({2, 3})}));
  out.push_back(gradcheck("scale", [](auto& v) { return fn::scale(v[0], -1.7); }, {t({5})}));
  out.push_back(gradcheck("add_scalar", [](auto& v) { return fn::add_scalar(v[0], 0.3); }, {t({5})}));
  out.push_back(gradcheck("sigmoid", [](auto& v) { return fn::sigmoid(v[0]); }, {t({3, 4})}));
  out.push_back(gradcheck("relu", [](auto& v) { return fn::relu(v[0]); }, {away({3, 4})}));
  out.push_back(gradcheck("sin", [](auto& v) { return fn::sin(v[0]); }, {t({6})}));
  out.push_back(gradcheck("cos", [](auto& v) { return fn::cos(v[0]); }, {t({6})}));
  out.push_back(gradcheck("abs", [](auto& v) { return fn::abs(v[0]); }, {away({6})}));
  out.push_back(gradcheck("sum", [](auto& v) { return fn::sum(v[0]); }, {t({2, 5})}));
  out.push_back(gradcheck("mean", [](auto& v) { return fn::mean(v[0]); }, {t({2, 5})}));
  out.push_back(gradcheck("reshape", [](auto& v) { return fn::reshape(v[0], {3, 4}); }, {t({2, 6})}));
  out.push_back(gradcheck("permute", [](auto& v) { return fn::permute(v[0], {2, 0, 1}); }, {t({2, 3, 4})}));
  out.push_back(gradcheck("concat", [](auto& v) { return fn::concat({v[0], v[1]}, 1); }, {t({2, 3}), t({2, 2})}));
  out.push_back(gradcheck("slice", [](auto& v) { return fn::slice(v[0], 1, 1, 2); }, {t({2, 4, 3})}));
  for (int k : {1, 3, 5})
    out.push_back(gradcheck("conv2d k" + std::to_string(k), [](auto& v) { return fn::conv2d(v[0], v[1]); },
                            {t({2, 3, 5, 6}), t({4, 3, k, k})}));
  out.push_back(gradcheck("add_channel_bias", [](auto& v) { return fn::add_channel_bias(v[0], v[1]); },
                          {t({2, 3, 2, 2}), t({3})}));
  out.push_back(gradcheck("linear", [](auto& v) { return fn::linear(v[0], v[1], v[2]); },
                          {t({5, 4}), t({3, 4}), t({3})}));
  out.push_back(gradcheck("depth_to_space", [](auto& v) { return fn::depth_to_space(v[0], 2); }, {t({2, 8, 3, 3})}));
  {
    // Coordinates inside the image and away from integer grid lines.
    Tensor coords(Shape{1, 4, 3, 5});
    for (std::size_t i = 0; i < coords.numel(); ++i) coords[i] = 0.25 + 0.5 * rng.below(6) + 0.1 * rng.uniform();
    out.push_back(gradcheck("grid_sample (image, coords)",
                            [](auto& v) { return fn::grid_sample_bilinear(v[0], v[1]); }, {t({1, 2, 4, 4}), coords}));
  }
  out.push_back(gradcheck("dft2_stacked", [](auto& v) { return fn::dft2_stacked(v[0]); }, {t({2, 2, 4, 5})}));
  out.push_back(gradcheck("fgrep reparameterize", [](auto& v) { return fgrep::reparameterize(v[0]); },
                          {t({3, 2, 3, 3})}));
  {
    const Tensor hr = rng.uniform(Shape{1, 3, 4, 4}, 0.0, 1.0);
    LossConfig lc;
    out.push_back(gradcheck("total_loss", [hr, lc](auto& v) { return total_loss(v[0], hr, lc).total; },
                            {rng.uniform(Shape{1, 3, 4, 4}, 0.0, 1.0)}));
  }
  {
    HyperNetConfig hc{2, 3, 16, 2, 12};
    Rng hr(9);
    HyperNet net(hc, hr);
    jitter(net.params(), hr, 0.05);
    std::string worst;
    const double e = param_gradcheck([&] { return fn::sum(fn::mul(net.generate(3, 0.7), Var(Tensor(Shape{108, 2, 3, 3}, 0.5)))); },
                                     net.params(), hr, 32, 1e-6, &worst);
    out.push_back(result("grad hypernet (Z^x, Z^y, Z^amp, h^s, f)", e, 1e-4, "worst " + worst));
  }
  {
    // The whole model and loss on a 4x4 input; every parameter tensor is
    // sampled, covering the encoder, both hyper-networks and IGSample.
    ModelConfig mc;
    mc.encoder = {4, 1};
    mc.upsampler = small_upsampler(Variant::IGConvPlus, 4);
    Rng mr(17);
    SrModel model(mc, mr);
    jitter(model.params(), mr, 0.02);
    const Tensor lr = mr.uniform(Shape{1, 3, 4, 4}, 0.0, 1.0);
    const Tensor hr = mr.uniform(Shape{1, 3, 8, 8}, 0.0, 1.0);
    LossConfig lc;
    std::string worst;
    const double e = param_gradcheck([&] { return total_loss(model.forward(Var(lr), 2), hr, lc).total; },
                                     model.params(), mr, 6, 1e-6, &worst);
    out.push_back(result("grad IGConv+ composite", e, 1e-4, "worst " + worst));
  }
  return out;
}

CheckResult check_gradients() {
  const auto all = gradient_checks();
  CheckResult r;
  r.name = "gradient checks";
  r.passed = true;
  int failed = 0;
  for (const auto& c : all) {
    r.metric = std::max(r.metric, c.metric);
    if (!c.passed) {
      r.passed = false;
      ++failed;
      r.detail += c.name + " ";
    }
  }
  std::ostringstream os;
  os << all.size() << " checks, " << failed << " failed";
  r.detail = r.detail.empty() ? os.str() : os.str() + ": " + r.detail;
  return r;
}

// ---- criterion checks ------------------------------------------------------------

CheckResult check_fgrep_equivalence(int instances, std::uint64_t seed) {
  Rng rng(seed);
  const int ks[] = {1, 3, 5}, cins[] = {1, 2, 8}, couts[] = {3, 12};
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    const int k = ks[rng.below(3)], cin = cins[rng.below(3)], cout = couts[rng.below(2)];
    const int h = 4 + static_cast<int>(rng.below(7)), w = 4 + static_cast<int>(rng.below(7));
    const Tensor m = rng.normal(Shape{1, cin, h, w}), kernel = rng.normal(Shape{cout, cin, k, k});
    const Tensor ens = fgrep::ensemble_form(m, kernel);
    const Tensor aug = fgrep::augmented_kernel_form(m, kernel);
    const Tensor rep = ops::conv2d(m, fgrep::reparameterize(kernel), (k - 1) / 2);
    worst = std::max({worst, rel_diff(ens, rep), rel_diff(aug, rep), rel_diff(ens, aug)});
    if (i < 10) worst = std::max(worst, rel_diff(rep, oracle::fgrep_ensemble(m, kernel)));
  }
  return result("fgrep three-form equivalence", worst, 1e-12, std::to_string(instances) + " instances");
}

CheckResult check_instantiation(int inputs, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  bool bytes_equal = true;
  for (Variant v : {Variant::IGConv, Variant::IGConvPlus}) {
    const int c_e = 6;
    Upsampler up(small_upsampler(v, c_e), rng);
    jitter(up.params(), rng, 0.02);
    for (int r : {2, 3, 4, 8}) {
      const FilterBank bank = instantiate(up, {r});
      for (int i = 0; i < inputs; ++i) {
        const int h = 3 + static_cast<int>(rng.below(4)), w = 3 + static_cast<int>(rng.below(4));
        const Tensor m = rng.normal(Shape{1, c_e, h, w}), lr = rng.uniform(Shape{1, 3, h, w}, 0.0, 1.0);
        Tensor live;
        {
          ag::NoGradGuard guard;
          live = up.forward(Var(m), Var(lr), r).value();
        }
        worst = std::max(worst, rel_diff(bank_forward(bank, m, lr, r), live));
      }
      io::Container c;
      append_bank(c, bank);
      const std::vector<std::uint8_t> bytes = io::serialize(c);
      const io::Container back = io::deserialize(bytes);
      const FilterBank again = read_bank(back);
      bytes_equal = bytes_equal && io::serialize(back) == bytes;
      for (const auto& [name, t] : bank.scales.at(r)) bytes_equal = bytes_equal && again.scales.at(r).at(name) == t;
    }
  }
  CheckResult res = result("instantiation equivalence", worst, 1e-12,
                           bytes_equal ? "bank round trip bit-exact" : "bank round trip differs");
  res.passed = res.passed && bytes_equal;
  return res;
}

CheckResult check_param_counts() {
  const std::map<int, std::int64_t> expected{{2, 6912}, {3, 15552}, {4, 27648}};
  UpsamplerConfig sp = small_upsampler(Variant::SPConv, 64);
  sp.scales = {2, 3, 4};
  Rng rng(1);
  const Upsampler spconv(sp, rng);
  const Upsampler igconv(small_upsampler(Variant::IGConv, 64), rng);
  const FilterBank sp_bank = instantiate(spconv, {2, 3, 4});
  const FilterBank ig_bank = instantiate(igconv, {2, 3, 4});
  io::Container c;
  append_bank(c, ig_bank);
  const io::Container walked = io::deserialize(io::serialize(c));

  std::ostringstream os;
  bool ok = true;
  for (const auto& [r, want] : expected) {
    const std::int64_t live = spconv.params().get("spconv.r" + std::to_string(r) + ".weight").value().numel();
    const std::int64_t walk = walked.count("r" + std::to_string(r) + ".");
    const std::int64_t counts[] = {live, sp_bank.parameter_count(r), ig_bank.parameter_count(r), walk,
                                   analysis::deployed_params(Variant::SPConv, 64, r),
                                   analysis::deployed_params(Variant::IGConv, 64, r)};
    for (std::int64_t n : counts) ok = ok && n == want;
    os << "x" << r << " " << live << "/" << ig_bank.parameter_count(r) << " ";
  }
  CheckResult res;
  res.name = "parameter counts";
  res.passed = ok;
  res.metric = ok ? 0.0 : 1.0;
  res.detail = os.str() + "(SPConv/IGConv_inst, want 6912/15552/27648)";
  return res;
}

CheckResult check_efficiency(bool measure, std::vector<analysis::BenchResult>* rows) {
  const int c_e = 64;
  std::ostringstream os;
  bool ok = true;
  double ratio2 = 0.0;
  for (int r : {2, 3, 4}) {
    const std::int64_t h = (720 + r - 1) / r, w = (1280 + r - 1) / r;
    const double plus = static_cast<double>(analysis::deployed_flops(Variant::IGConvPlus, c_e, r, h, w));
    const double sp = static_cast<double>(analysis::deployed_flops(Variant::SPConvPlus, c_e, r, h, w));
    ok = ok && plus < sp;
    if (r == 2) ratio2 = plus / sp;
    os << "x" << r << " flop ratio " << std::setprecision(3) << plus / sp;
    if (measure) {
      analysis::BenchConfig a, b;
      a.variant = Variant::IGConvPlus;
      b.variant = Variant::SPConvPlus;
      a.c_e = b.c_e = c_e;
      a.r = b.r = r;
      const analysis::BenchResult ra = analysis::bench(a), rb = analysis::bench(b);
      ok = ok && ra.median_ms < rb.median_ms;
      os << ", " << ra.median_ms << " vs " << rb.median_ms << " ms";
      if (rows) {
        rows->push_back(ra);
        rows->push_back(rb);
      }
    }
    os << "; ";
  }
  ok = ok && ratio2 < 0.75;
  CheckResult res;
  res.name = measure ? "efficiency direction (flops + latency)" : "efficiency direction (flops)";
  res.passed = ok;
  res.metric = ratio2;
  res.detail = os.str();
  return res;
}

CheckResult check_zero_degeneracy() {
  Rng rng(4);
  double worst = 0.0;
  const int c_e = 5;
  for (int r : {2, 3, 4}) {
    const Tensor m = rng.normal(Shape{2, c_e, 5, 4}), lr = rng.uniform(Shape{2, 3, 5, 4}, 0.0, 1.0);
    const Tensor bilinear = oracle::bilinear_upsample(lr, r);
    ag::NoGradGuard guard;
    // Default initialization zeroes the direction head only.
    Upsampler up(small_upsampler(Variant::IGConvPlus, c_e), rng);
    const ScaleKernels k = up.kernels(r);
    const Tensor sampled = igsample_forward(Var(lr), Var(m), k.k_o, k.k_s, r).value();
    worst = std::max(worst, max_abs_diff(sampled, bilinear));
    // Every network zero: the whole upsampler reduces to bilinear upsampling.
    const Upsampler zero = Upsampler::zeros(small_upsampler(Variant::IGConvPlus, c_e));
    worst = std::max(worst, max_abs_diff(zero.forward(Var(m), Var(lr), r).value(), bilinear));
  }
  return result("zero-network degeneracies", worst, 0.0, "max |diff| vs bilinear oracle");
}

CheckResult check_metric_fidelity(std::uint64_t seed) {
  Rng rng(seed);
  double dpsnr = 0.0, dssim = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int w = 24 + static_cast<int>(rng.below(24)), h = 24 + static_cast<int>(rng.below(24));
    const int border = static_cast<int>(rng.below(5));
    ImageBuffer a(w, h, 3), b(w, h, 3);
    const int noise = 1 + static_cast<int>(rng.below(40));
    for (std::size_t k = 0; k < a.data.size(); ++k) {
      a.data[k] = static_cast<std::uint8_t>(rng.below(256));
      const int v = a.data[k] + static_cast<int>(rng.below(2 * noise + 1)) - noise;
      b.data[k] = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
    }
    dpsnr = std::max(dpsnr, std::abs(psnr_y(a, b, border) - oracle::psnr_y(a, b, border)));
    dssim = std::max(dssim, std::abs(ssim_y(a, b, border) - oracle::ssim_y(a, b, border)));
  }
  const Tensor y100(Shape{1, 1, 8, 8}, 100.0), y101(Shape{1, 1, 8, 8}, 101.0);
  const double closed = psnr(y101, y100);
  const bool exact = closed == 10.0 * std::log10(255.0 * 255.0);
  const bool inf = std::isinf(psnr_y(ImageBuffer(16, 16, 3), ImageBuffer(16, 16, 3), 2));
  std::ostringstream os;
  os << "psnr " << std::scientific << std::setprecision(2) << dpsnr << " dB, ssim " << dssim << ", MSE=1 case "
     << std::fixed << std::setprecision(4) << closed << " dB";
  CheckResult res;
  res.name = "metric fidelity";
  res.metric = std::max(dpsnr / 1e-6, dssim / 1e-9);
  res.passed = dpsnr <= 1e-6 && dssim <= 1e-9 && exact && inf;
  res.detail = os.str();
  return res;
}

CheckResult check_cka_instrument(std::uint64_t seed) {
  Rng rng(seed);
  const Tensor x = rng.normal(Shape{60, 10});
  const Tensor rot = oracle::orthogonal(10, rng);
  Tensor xr(Shape{60, 10});
  simd::gemm(simd::Trans::No, simd::Trans::No, 60, 10, 10, 1.0, x.ptr(), 10, rot.ptr(), 10, 0.0, xr.ptr(), 10);
  const Tensor y = rng.normal(Shape{60, 7});
  const double self = std::abs(analysis::linear_cka(x, x) - 1.0);
  const double orth = std::abs(analysis::linear_cka(x, xr) - 1.0);
  const double hsic = std::abs(analysis::linear_cka(x, y) - oracle::hsic_cka(x, y));
  const double sym = std::abs(analysis::linear_cka(x, y) - analysis::linear_cka(y, x));
  const double scaled = std::abs(analysis::linear_cka(ops::scale(x, 3.5), y) - analysis::linear_cka(x, y));
  bool constant_rejected = false;
  try {
    analysis::linear_cka(Tensor(Shape{10, 3}, 2.0), y.reshaped(Shape{60, 7}));
  } catch (const ContractError&) {
    constant_rejected = true;
  }
  try {
    analysis::linear_cka(Tensor(Shape{60, 3}, 2.0), y);
  } catch (const ContractError&) {
    constant_rejected = true;
  }
  std::ostringstream os;
  os << std::scientific << std::setprecision(2) << "self " << self << ", orthogonal " << orth << ", hsic " << hsic
     << ", symmetry " << sym << ", scaling " << scaled;
  CheckResult res;
  res.name = "cka instrument";
  res.metric = std::max({self, orth, hsic});
  res.passed = self <= 1e-12 && orth <= 1e-9 && hsic <= 1e-9 && sym <= 1e-12 && scaled <= 1e-12 && constant_rejected;
  res.detail = os.str();
  return res;
}

// ---- kernel-level suite -----------------------------------------------------------

namespace {

CheckResult simd_equivalence() {
  Rng rng(31);
  double worst_gemm = 0.0;
  bool elementwise_exact = true;
  std::string isas;
  const simd::KernelTable& ref = simd::kernels(simd::Isa::Scalar);
  for (simd::Isa isa : {simd::Isa::Avx2, simd::Isa::Avx512, simd::Isa::Neon}) {
    if (!simd::isa_supported(isa)) continue;
    isas += std::string(simd::isa_name(isa)) + " ";
    const simd::KernelTable& kt = simd::kernels(isa);
    for (int trial = 0; trial < 24; ++trial) {
      const std::size_t m = 1 + rng.below(70), n = 1 + rng.below(70), k = 1 + rng.below(90);
      const auto ta = rng.below(2) ? simd::Trans::Yes : simd::Trans::No;
      const auto tb = rng.below(2) ? simd::Trans::Yes : simd::Trans::No;
      const Tensor a = rng.normal(Shape{static_cast<std::int64_t>(m * k)});
      const Tensor b = rng.normal(Shape{static_cast<std::int64_t>(k * n)});
      Tensor c0 = rng.normal(Shape{static_cast<std::int64_t>(m * n)}), c1 = c0;
      const double beta = trial % 3 == 0 ? 0.0 : 0.5;
      const std::size_t lda = ta == simd::Trans::No ? k : m, ldb = tb == simd::Trans::No ? n : k;
      ref.gemm_f64(ta, tb, m, n, k, 1.3, a.ptr(), lda, b.ptr(), ldb, beta, c0.ptr(), n);
      kt.gemm_f64(ta, tb, m, n, k, 1.3, a.ptr(), lda, b.ptr(), ldb, beta, c1.ptr(), n);
      worst_gemm = std::max(worst_gemm, rel_diff(c1, c0));
      std::vector<float> af(a.data().begin(), a.data().end()), bf(b.data().begin(), b.data().end());
      std::vector<float> f0(m * n), f1(m * n);
      ref.gemm_f32(ta, tb, m, n, k, 1.0f, af.data(), lda, bf.data(), ldb, 0.0f, f0.data(), n);
      kt.gemm_f32(ta, tb, m, n, k, 1.0f, af.data(), lda, bf.data(), ldb, 0.0f, f1.data(), n);
      double fm = 0, fd = 0;
      for (std::size_t i = 0; i < f0.size(); ++i) {
        fm = std::max(fm, static_cast<double>(std::abs(f0[i])));
        fd = std::max(fd, static_cast<double>(std::abs(f0[i] - f1[i])));
      }
      if (fd / std::max(fm, 1e-30) > 1e-5) worst_gemm = std::max(worst_gemm, 1.0);
    }
    for (std::size_t n : {1u, 7u, 16u, 33u, 1000u}) {
      const Tensor x = rng.normal(Shape{static_cast<std::int64_t>(n)}), y = rng.normal(Shape{static_cast<std::int64_t>(n)});
      Tensor a0 = y, a1 = y, m0(x.shape()), m1(x.shape()), r0(x.shape()), r1(x.shape());
      ref.axpy_f64(n, 0.7, x.ptr(), a0.ptr());
      kt.axpy_f64(n, 0.7, x.ptr(), a1.ptr());
      ref.mul_f64(n, x.ptr(), y.ptr(), m0.ptr());
      kt.mul_f64(n, x.ptr(), y.ptr(), m1.ptr());
      ref.relu_f64(n, x.ptr(), r0.ptr());
      kt.relu_f64(n, x.ptr(), r1.ptr());
      elementwise_exact = elementwise_exact && a0 == a1 && m0 == m1 && r0 == r1;
    }
  }
  CheckResult res = result("simd vs scalar kernels", worst_gemm, 1e-12,
                           (isas.empty() ? std::string("no SIMD variant on this CPU") : "variants " + isas) +
                               (elementwise_exact ? "; elementwise bit-exact" : "; elementwise differs"));
  res.passed = res.passed && elementwise_exact;
  return res;
}

CheckResult conv_vs_oracle() {
  Rng rng(32);
  double worst = 0.0;
  for (int k : {1, 3, 5}) {
    const Tensor x = rng.normal(Shape{2, 3, 7, 9}), w = rng.normal(Shape{5, 3, k, k});
    worst = std::max(worst, rel_diff(ops::conv2d(x, w, (k - 1) / 2), oracle::conv2d(x, w)));
    const Tensor f64 = oracle::conv2d(x.reshaped(Shape{2, 3, 7, 9}), w);
    std::vector<float> xf(x.data().begin(), x.data().begin() + 3 * 7 * 9), wf(w.data().begin(), w.data().end());
    std::vector<float> of(5 * 7 * 9);
    ops::conv2d_f32(xf, 3, 7, 9, wf, 5, k, of);
    double fd = 0;
    for (std::size_t i = 0; i < of.size(); ++i) fd = std::max(fd, std::abs(of[i] - f64[i]));
    if (fd / max_abs(f64) > 1e-5) worst = std::max(worst, 1.0);
  }
  return result("conv2d vs direct loops (f64, f32)", worst, 1e-12);
}

CheckResult shuffle_vs_oracle() {
  Rng rng(33);
  double worst = 0.0;
  for (int r : {1, 2, 3, 4}) {
    const Tensor x = rng.normal(Shape{2, 3 * r * r, 3, 4});
    const Tensor y = ops::depth_to_space(x, r);
    worst = std::max(worst, max_abs_diff(y, oracle::depth_to_space(x, r)));
    worst = std::max(worst, max_abs_diff(ops::space_to_depth(y, r), x));
  }
  return result("depth_to_space vs index formula", worst, 0.0);
}

CheckResult dft_vs_oracle() {
  Rng rng(34);
  double worst = 0.0;
  for (auto [h, w] : {std::pair{4, 4}, {5, 7}, {8, 6}, {1, 9}}) {
    const Tensor x = rng.normal(Shape{2, 3, h, w});
    const auto [re, im] = oracle::dft2(x);
    const Tensor stacked = fn::dft2_stacked(Var(x)).value();
    const Tensor got_re = ops::slice(stacked, 0, 0, 2), got_im = ops::slice(stacked, 0, 2, 2);
    const double scale = std::max(max_abs(re), max_abs(im));
    worst = std::max({worst, max_abs_diff(got_re, re) / scale, max_abs_diff(got_im, im) / scale});
  }
  return result("dft2 vs direct sum", worst, 1e-12);
}

CheckResult grid_sample_vs_oracle() {
  Rng rng(35);
  const Tensor img = rng.normal(Shape{2, 3, 5, 6});
  const Tensor coords = rng.uniform(Shape{2, 6, 7, 8}, -1.5, 7.0);
  return result("grid_sample vs per-sample loop", rel_diff(ops::grid_sample_bilinear(img, coords), oracle::grid_sample(img, coords)),
                1e-15);
}

CheckResult dihedral_vs_oracle() {
  Rng rng(36);
  const Tensor x = rng.normal(Shape{2, 3, 4, 5});
  double worst = 0.0;
  for (int t = 0; t < 8; ++t) {
    worst = std::max(worst, max_abs_diff(ops::apply_transform(ops::Dihedral{t}, x), oracle::dihedral(x, t)));
    if (ops::Dihedral{t}.inverse().id != oracle::dihedral_inverse(t)) worst = 1.0;
  }
  return result("dihedral transforms vs formulas", worst, 0.0);
}

CheckResult hypernet_vs_oracle() {
  Rng rng(37);
  double worst = 0.0;
  for (int outputs : {3, 12}) {
    HyperNet net(HyperNetConfig{2, 3, 32, 2, outputs}, rng);
    jitter(net.params(), rng, 0.05);
    for (int r : {1, 2, 3}) {
      ag::NoGradGuard guard;
      const double s = 2.0 / (r + 0.5);
      worst = std::max(worst, rel_diff(net.generate(r, s).value(), oracle::hypernet_filters(net, r, s)));
    }
  }
  return result("hypernet filters vs per-position loop", worst, 1e-12);
}

CheckResult bicubic_vs_oracle() {
  Rng rng(38);
  const Tensor img = rng.uniform(Shape{1, 3, 24, 18}, 0.0, 1.0);
  double worst = 0.0;
  for (double s : {0.5, 1.0 / 3.0, 0.25, 2.0, 3.0, 0.8}) {
    const Tensor got = bicubic_resize(img, s);
    worst = std::max(worst, max_abs_diff(got, oracle::bicubic_resize(img, got.dim(2), got.dim(3), s)));
  }
  return result("bicubic resize vs dense weights", worst, 1e-12);
}

}  // namespace

std::vector<CheckResult> oracle_suite() {
  return {timed(simd_equivalence),      timed(conv_vs_oracle),      timed(shuffle_vs_oracle),
          timed(dft_vs_oracle),         timed(grid_sample_vs_oracle), timed(dihedral_vs_oracle),
          timed(hypernet_vs_oracle),    timed(bicubic_vs_oracle)};
}

std::vector<CheckResult> selftest_suite() {
  std::vector<CheckResult> all = oracle_suite();
  all.push_back(timed([] { return check_fgrep_equivalence(); }));
  all.push_back(timed([] { return check_instantiation(); }));
  for (auto& g : gradient_checks()) all.push_back(std::move(g));
  all.push_back(timed(check_param_counts));
  all.push_back(timed([] { return check_efficiency(false); }));
  all.push_back(timed(check_zero_degeneracy));
  all.push_back(timed([] { return check_metric_fidelity(); }));
  all.push_back(timed([] { return check_cka_instrument(); }));
  return all;
}

}  // namespace igkit::verify
