#include <cmath>
#include <limits>
#include <vector>

#include "igkit/error.hpp"
#include "igkit/image.hpp"

namespace igkit {

Tensor rgb_to_y(const Tensor& rgb255) {
  if (rgb255.rank() != 4 || rgb255.dim(1) != 3)
    throw DimensionError("rgb_to_y expects [N,3,H,W], got " + shape_str(rgb255.shape()));
  const std::int64_t n = rgb255.dim(0), hw = rgb255.dim(2) * rgb255.dim(3);
  Tensor y(Shape{n, 1, rgb255.dim(2), rgb255.dim(3)});
  for (std::int64_t b = 0; b < n; ++b) {
    const double* r = rgb255.ptr() + b * 3 * hw;
    const double* g = r + hw;
    const double* bl = g + hw;
    double* out = y.ptr() + b * hw;
    for (std::int64_t i = 0; i < hw; ++i) out[i] = 16.0 + (65.481 * r[i] + 128.553 * g[i] + 24.966 * bl[i]) / 255.0;
  }
  return y;
}

namespace {

// Cropped luma plane in [16, 235] scale as H x W doubles.
Tensor luma(const ImageBuffer& img, int border) {
  if (img.channels != 3) throw DimensionError("Y-channel metrics need RGB images");
  const ImageBuffer c = crop_border(img, border);
  Tensor rgb(Shape{1, 3, c.height, c.width});
  for (int y = 0; y < c.height; ++y)
    for (int x = 0; x < c.width; ++x)
      for (int k = 0; k < 3; ++k) rgb.at(0, k, y, x) = c.at(y, x, k);
  return rgb_to_y(rgb);
}

void check_pair(const ImageBuffer& a, const ImageBuffer& b, int border) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels)
    throw DimensionError("metric inputs differ in size");
  if (border < 0 || a.width <= 2 * border || a.height <= 2 * border)
    throw DimensionError("crop border leaves no pixels");
}

}  // namespace

double psnr(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) throw DimensionError("psnr: shapes differ");
  if (a.numel() == 0) throw DimensionError("psnr: empty input");
  double se = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) se += (a[i] - b[i]) * (a[i] - b[i]);
  const double mse = se / static_cast<double>(a.numel());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double psnr_y(const ImageBuffer& sr, const ImageBuffer& hr, int border) {
  check_pair(sr, hr, border);
  return psnr(luma(sr, border), luma(hr, border));
}

double ssim_y(const ImageBuffer& sr, const ImageBuffer& hr, int border) {
  check_pair(sr, hr, border);
  const Tensor a = luma(sr, border), b = luma(hr, border);
  constexpr int win = 11;
  const std::int64_t h = a.dim(2), w = a.dim(3);
  if (h < win || w < win) throw DimensionError("image smaller than the SSIM window after cropping");

  std::vector<double> g(win);
  double gs = 0.0;
  for (int i = 0; i < win; ++i) {
    const double d = i - win / 2;
    g[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    gs += g[i];
  }
  for (double& v : g) v /= gs;

  // Separable valid-mode filtering of the five moment images.
  const std::int64_t oh = h - win + 1, ow = w - win + 1;
  auto filter = [&](auto&& pixel) {
    std::vector<double> rows(static_cast<std::size_t>(oh * w));
    for (std::int64_t y = 0; y < oh; ++y)
      for (std::int64_t x = 0; x < w; ++x) {
        double s = 0.0;
        for (int i = 0; i < win; ++i) s += g[i] * pixel((y + i) * w + x);
        rows[y * w + x] = s;
      }
    std::vector<double> out(static_cast<std::size_t>(oh * ow));
    for (std::int64_t y = 0; y < oh; ++y)
      for (std::int64_t x = 0; x < ow; ++x) {
        double s = 0.0;
        for (int j = 0; j < win; ++j) s += g[j] * rows[y * w + x + j];
        out[y * ow + x] = s;
      }
    return out;
  };
  const auto mu_a = filter([&](std::int64_t i) { return a[i]; });
  const auto mu_b = filter([&](std::int64_t i) { return b[i]; });
  const auto aa = filter([&](std::int64_t i) { return a[i] * a[i]; });
  const auto bb = filter([&](std::int64_t i) { return b[i] * b[i]; });
  const auto ab = filter([&](std::int64_t i) { return a[i] * b[i]; });

  const double c1 = (0.01 * 255.0) * (0.01 * 255.0), c2 = (0.03 * 255.0) * (0.03 * 255.0);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double va = aa[i] - ma * ma, vb = bb[i] - mb * mb, cov = ab[i] - ma * mb;
    total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return total / static_cast<double>(mu_a.size());
}

}  // namespace igkit
