#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "igkit/analysis.hpp"
#include "igkit/error.hpp"
#include "igkit/ops.hpp"
#include "igkit/parallel.hpp"
#include "igkit/rng.hpp"

namespace igkit::analysis {

namespace {

using Buffer = std::vector<float>;

// Live/peak byte accounting for the transient buffers of one forward.
struct Workspace {
  std::int64_t live = 0, peak = 0;
  Buffer take(std::size_t n) {
    live += static_cast<std::int64_t>(n * sizeof(float));
    peak = std::max(peak, live);
    return Buffer(n);
  }
  void give(Buffer& b) {
    live -= static_cast<std::int64_t>(b.size() * sizeof(float));
    Buffer().swap(b);
  }
  void conv(const Buffer& in, int c_in, int h, int w, const Buffer& kernel, int c_out, int k, Buffer& out) {
    const auto scratch = static_cast<std::int64_t>(ops::conv2d_f32_workspace(c_in, h, w, k) * sizeof(float));
    peak = std::max(peak, live + scratch);
    ops::conv2d_f32(in, c_in, h, w, kernel, c_out, k, out);
  }
};

Buffer random_buffer(Rng& rng, std::size_t n, double bound) {
  Buffer b(n);
  for (auto& v : b) v = static_cast<float>(rng.uniform() * 2.0 * bound - bound);
  return b;
}

// [C r^2, h, w] -> [C, rh, rw]
void depth_to_space(const Buffer& in, int c, int h, int w, int r, Buffer& out) {
  const int rw = w * r;
  for (int ch = 0; ch < c; ++ch)
    for (int dy = 0; dy < r; ++dy)
      for (int dx = 0; dx < r; ++dx) {
        const float* src = in.data() + static_cast<std::size_t>((ch * r + dy) * r + dx) * h * w;
        float* dst = out.data() + static_cast<std::size_t>(ch) * h * r * rw;
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x) dst[static_cast<std::size_t>(y * r + dy) * rw + x * r + dx] = src[y * w + x];
      }
}

float sample(const float* img, int h, int w, float x, float y) {
  x = std::clamp(x, 0.0f, static_cast<float>(w - 1));
  y = std::clamp(y, 0.0f, static_cast<float>(h - 1));
  const int x0 = std::min(static_cast<int>(x), w - 1), y0 = std::min(static_cast<int>(y), h - 1);
  const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
  const float fx = x - static_cast<float>(x0), fy = y - static_cast<float>(y0);
  const float top = (1 - fx) * img[y0 * w + x0] + fx * img[y0 * w + x1];
  const float bot = (1 - fx) * img[y1 * w + x0] + fx * img[y1 * w + x1];
  return (1 - fy) * top + fy * bot;
}

struct Kernels {
  Buffer k, k2, k_o, k_s;
};

// One deployed forward; returns the output so the work is observable.
Buffer forward(const BenchConfig& cfg, const Kernels& ks, const Buffer& m, const Buffer& lr, int h, int w,
               Workspace& ws) {
  const int r = cfg.r, r2 = r * r, c_e = cfg.c_e, k = cfg.k;
  const std::size_t hw = static_cast<std::size_t>(h) * w, hr_hw = hw * r2;
  Buffer out = ws.take(3 * hr_hw);
  switch (cfg.variant) {
    case Variant::SPConv:
    case Variant::IGConv:
    case Variant::IGConvPlus: {
      Buffer t = ws.take(3 * r2 * hw);
      ws.conv(m, c_e, h, w, ks.k, 3 * r2, k, t);
      depth_to_space(t, 3, h, w, r, out);
      ws.give(t);
      if (cfg.variant != Variant::IGConvPlus) break;
      Buffer d = ws.take(6 * r2 * hw), s = ws.take(6 * r2 * hw);
      ws.conv(m, c_e, h, w, ks.k_o, 6 * r2, k, d);
      ws.conv(m, c_e, h, w, ks.k_s, 6 * r2, k, s);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] *= 0.5f / (1.0f + std::exp(-s[i]));
      ws.give(s);
      const int rw = w * r;
      for (int c = 0; c < 3; ++c) {
        const float* img = lr.data() + c * hw;
        float* o = out.data() + c * hr_hw;
        for (int dy = 0; dy < r; ++dy)
          for (int dx = 0; dx < r; ++dx) {
            const float* ox = d.data() + static_cast<std::size_t>((2 * c) * r2 + dy * r + dx) * hw;
            const float* oy = d.data() + static_cast<std::size_t>((2 * c + 1) * r2 + dy * r + dx) * hw;
            for (int y = 0; y < h; ++y)
              for (int x = 0; x < w; ++x) {
                const int Y = y * r + dy, X = x * r + dx;
                const float bx = (static_cast<float>(X) + 0.5f) / static_cast<float>(r) - 0.5f;
                const float by = (static_cast<float>(Y) + 0.5f) / static_cast<float>(r) - 0.5f;
                o[static_cast<std::size_t>(Y) * rw + X] += sample(img, h, w, bx + ox[y * w + x], by + oy[y * w + x]);
              }
          }
      }
      ws.give(d);
      break;
    }
    case Variant::SPConvPlus: {
      Buffer t = ws.take(static_cast<std::size_t>(cfg.c_mid) * r2 * hw);
      ws.conv(m, c_e, h, w, ks.k, cfg.c_mid * r2, 3, t);
      Buffer hr = ws.take(static_cast<std::size_t>(cfg.c_mid) * hr_hw);
      depth_to_space(t, cfg.c_mid, h, w, r, hr);
      ws.give(t);
      ws.conv(hr, cfg.c_mid, h * r, w * r, ks.k2, 3, 3, out);
      ws.give(hr);
      break;
    }
  }
  ws.live -= static_cast<std::int64_t>(out.size() * sizeof(float));
  return out;
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(std::llround(q * static_cast<double>(v.size() - 1)));
  return v[idx];
}

}  // namespace

std::int64_t deployed_params(Variant v, int c_e, int r, int k, int c_mid) {
  const std::int64_t r2 = static_cast<std::int64_t>(r) * r, taps = static_cast<std::int64_t>(k) * k;
  switch (v) {
    case Variant::SPConv:
    case Variant::IGConv: return 3 * r2 * c_e * taps;
    case Variant::SPConvPlus: return c_mid * r2 * c_e * 9 + 3LL * c_mid * 9;
    case Variant::IGConvPlus: return (3 + 6 + 6) * r2 * c_e * taps;
  }
  throw ContractError("unhandled variant");
}

std::int64_t deployed_flops(Variant v, int c_e, int r, std::int64_t h, std::int64_t w, int k, int c_mid) {
  const std::int64_t r2 = static_cast<std::int64_t>(r) * r, taps = static_cast<std::int64_t>(k) * k;
  const std::int64_t hw = h * w, hr_hw = hw * r2;
  switch (v) {
    case Variant::SPConv:
    case Variant::IGConv: return 2 * hw * 3 * r2 * c_e * taps;
    case Variant::SPConvPlus: return 2 * hw * c_mid * r2 * c_e * 9 + 2 * hr_hw * 3 * c_mid * 9;
    case Variant::IGConvPlus: {
      const std::int64_t convs = 2 * hw * 15 * r2 * c_e * taps;
      const std::int64_t scope = 6 * hr_hw * (4 + 2);  // sigmoid, then 0.5 * sigma * direction
      const std::int64_t sampling = 3 * hr_hw * (2 + 8 + 1);  // base + offset, bilinear, residual add
      return convs + scope + sampling;
    }
  }
  throw ContractError("unhandled variant");
}

BenchResult bench(const BenchConfig& cfg) {
  if (cfg.r < 1 || cfg.c_e < 1 || cfg.out_h < 1 || cfg.out_w < 1 || cfg.k < 1 || cfg.k % 2 == 0)
    throw ConfigError("bench: invalid shape");
  if (cfg.warmups < 5 || cfg.trials < 30) throw ConfigError("bench: need at least 5 warmups and 30 trials");
  ScopedWorkerLimit single(1);

  const int h = (cfg.out_h + cfg.r - 1) / cfg.r, w = (cfg.out_w + cfg.r - 1) / cfg.r;
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  const int r2 = cfg.r * cfg.r, taps = cfg.k * cfg.k;
  Rng rng(cfg.seed);
  const Buffer m = random_buffer(rng, static_cast<std::size_t>(cfg.c_e) * hw, 1.0);
  Buffer lr = random_buffer(rng, 3 * hw, 0.5);
  for (auto& v : lr) v += 0.5f;
  Kernels ks;
  const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.c_e * taps));
  if (cfg.variant == Variant::SPConvPlus) {
    ks.k = random_buffer(rng, static_cast<std::size_t>(cfg.c_mid) * r2 * cfg.c_e * 9, bound);
    ks.k2 = random_buffer(rng, 3 * static_cast<std::size_t>(cfg.c_mid) * 9, 1.0 / std::sqrt(cfg.c_mid * 9.0));
  } else {
    ks.k = random_buffer(rng, 3 * static_cast<std::size_t>(r2) * cfg.c_e * taps, bound);
    if (cfg.variant == Variant::IGConvPlus) {
      ks.k_o = random_buffer(rng, 6 * static_cast<std::size_t>(r2) * cfg.c_e * taps, bound);
      ks.k_s = random_buffer(rng, 6 * static_cast<std::size_t>(r2) * cfg.c_e * taps, bound);
    }
  }

  Workspace ws;
  for (int i = 0; i < cfg.warmups; ++i) forward(cfg, ks, m, lr, h, w, ws);
  std::vector<double> ms;
  for (int i = 0; i < cfg.trials; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const Buffer out = forward(cfg, ks, m, lr, h, w, ws);
    const auto t1 = std::chrono::steady_clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }

  BenchResult res;
  res.variant = variant_name(cfg.variant);
  res.r = cfg.r;
  res.c_e = cfg.c_e;
  res.in_h = h;
  res.in_w = w;
  res.warmups = cfg.warmups;
  res.trials = cfg.trials;
  res.median_ms = percentile(ms, 0.5);
  res.p10_ms = percentile(ms, 0.1);
  res.p90_ms = percentile(ms, 0.9);
  res.params = deployed_params(cfg.variant, cfg.c_e, cfg.r, cfg.k, cfg.c_mid);
  res.flops = deployed_flops(cfg.variant, cfg.c_e, cfg.r, h, w, cfg.k, cfg.c_mid);
  res.workspace_bytes = ws.peak;
  return res;
}

std::string bench_csv(const std::vector<BenchResult>& rows) {
  std::ostringstream os;
  os << "variant,scale,c_e,in_h,in_w,warmups,trials,median_ms,p10_ms,p90_ms,params,flops,workspace_bytes\n"
     << std::setprecision(8);
  for (const auto& b : rows)
    os << b.variant << "," << b.r << "," << b.c_e << "," << b.in_h << "," << b.in_w << "," << b.warmups << ","
       << b.trials << "," << b.median_ms << "," << b.p10_ms << "," << b.p90_ms << "," << b.params << "," << b.flops
       << "," << b.workspace_bytes << "\n";
  return os.str();
}

std::string bench_pretty(const std::vector<BenchResult>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(13) << "variant" << std::right << std::setw(6) << "scale" << std::setw(12) << "median ms"
     << std::setw(10) << "p10" << std::setw(10) << "p90" << std::setw(11) << "params" << std::setw(10) << "GFLOP"
     << std::setw(12) << "workspace MB" << "\n"
     << std::fixed;
  for (const auto& b : rows)
    os << std::left << std::setw(13) << b.variant << std::right << std::setw(6) << b.r << std::setw(12)
       << std::setprecision(2) << b.median_ms << std::setw(10) << b.p10_ms << std::setw(10) << b.p90_ms
       << std::setw(11) << b.params << std::setw(10) << std::setprecision(3) << b.flops * 1e-9 << std::setw(12)
       << std::setprecision(1) << b.workspace_bytes / 1048576.0 << "\n";
  return os.str();
}

}  // namespace igkit::analysis
