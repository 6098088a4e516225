#include <algorithm>
#include <cmath>

#include "igkit/error.hpp"
#include "igkit/image.hpp"

namespace igkit {

namespace {

double cubic(double x) {
  constexpr double a = -0.5;
  const double ax = std::abs(x), ax2 = ax * ax, ax3 = ax2 * ax;
  if (ax <= 1.0) return (a + 2.0) * ax3 - (a + 3.0) * ax2 + 1.0;
  if (ax < 2.0) return a * ax3 - 5.0 * a * ax2 + 8.0 * a * ax - 4.0 * a;
  return 0.0;
}

}  // namespace

ResampleWeights bicubic_weights(std::int64_t in_size, std::int64_t out_size, double scale) {
  if (in_size < 1 || out_size < 1 || !(scale > 0)) throw DimensionError("bicubic resize needs positive sizes and scale");
  const bool shrink = scale < 1.0;
  const double stretch = shrink ? scale : 1.0;  // kernel is h(x) = s * cubic(s * x)
  const double width = 4.0 / stretch;
  const std::int64_t taps = static_cast<std::int64_t>(std::ceil(width)) + 2;
  ResampleWeights rw;
  rw.index.resize(out_size);
  rw.weight.resize(out_size);
  for (std::int64_t i = 0; i < out_size; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / scale - 0.5;  // source position in pixel centers
    const auto left = static_cast<std::int64_t>(std::floor(u - width / 2.0));
    double total = 0.0;
    for (std::int64_t t = 0; t < taps; ++t) {
      const std::int64_t j = left + t;
      const double w = stretch * cubic(stretch * (u - static_cast<double>(j)));
      if (w == 0.0) continue;
      rw.index[i].push_back(std::clamp<std::int64_t>(j, 0, in_size - 1));
      rw.weight[i].push_back(w);
      total += w;
    }
    for (double& w : rw.weight[i]) w /= total;
  }
  return rw;
}

Tensor bicubic_resize(const Tensor& img, std::int64_t out_h, std::int64_t out_w, double scale_h, double scale_w) {
  if (img.rank() != 4) throw DimensionError("bicubic_resize expects NCHW, got " + shape_str(img.shape()));
  if (out_h < 1 || out_w < 1) throw DimensionError("bicubic_resize: non-positive target size");
  const std::int64_t planes = img.dim(0) * img.dim(1), h = img.dim(2), w = img.dim(3);
  const ResampleWeights wh = bicubic_weights(h, out_h, scale_h);
  const ResampleWeights ww = bicubic_weights(w, out_w, scale_w);
  Tensor mid(Shape{img.dim(0), img.dim(1), out_h, w});
  for (std::int64_t p = 0; p < planes; ++p) {
    const double* src = img.ptr() + p * h * w;
    double* dst = mid.ptr() + p * out_h * w;
    for (std::int64_t i = 0; i < out_h; ++i) {
      double* row = dst + i * w;
      for (std::size_t t = 0; t < wh.index[i].size(); ++t) {
        const double* s = src + wh.index[i][t] * w;
        const double c = wh.weight[i][t];
        for (std::int64_t x = 0; x < w; ++x) row[x] += c * s[x];
      }
    }
  }
  Tensor out(Shape{img.dim(0), img.dim(1), out_h, out_w});
  for (std::int64_t p = 0; p < planes; ++p)
    for (std::int64_t y = 0; y < out_h; ++y) {
      const double* s = mid.ptr() + (p * out_h + y) * w;
      double* d = out.ptr() + (p * out_h + y) * out_w;
      for (std::int64_t j = 0; j < out_w; ++j) {
        double acc = 0.0;
        for (std::size_t t = 0; t < ww.index[j].size(); ++t) acc += ww.weight[j][t] * s[ww.index[j][t]];
        d[j] = acc;
      }
    }
  return out;
}

Tensor bicubic_resize(const Tensor& img, double scale) {
  if (img.rank() != 4) throw DimensionError("bicubic_resize expects NCHW, got " + shape_str(img.shape()));
  if (!(scale > 0)) throw DimensionError("bicubic_resize: scale must be positive");
  const auto oh = static_cast<std::int64_t>(std::llround(static_cast<double>(img.dim(2)) * scale));
  const auto ow = static_cast<std::int64_t>(std::llround(static_cast<double>(img.dim(3)) * scale));
  return bicubic_resize(img, oh, ow, scale, scale);
}

}  // namespace igkit
