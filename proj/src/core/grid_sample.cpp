#include <algorithm>
#include <cmath>

#include "igkit/error.hpp"
#include "igkit/ops.hpp"

namespace igkit::ops {

namespace {

void check(const Tensor& image, const Tensor& coords) {
  if (image.rank() != 4 || coords.rank() != 4 || coords.dim(0) != image.dim(0) || coords.dim(1) != 2 * image.dim(1))
    throw DimensionError("grid_sample_bilinear: image " + shape_str(image.shape()) + " coords " +
                         shape_str(coords.shape()) + " (need 2*C coordinate channels)");
}

// Clamped bilinear cell for one coordinate axis of extent n.
struct Axis {
  std::int64_t i0, i1;
  double f;
  bool interior;  // derivative wrt the coordinate is nonzero
};

Axis locate(double v, std::int64_t n) {
  const double hi = static_cast<double>(n - 1);
  const bool interior = v > 0.0 && v < hi;
  v = std::clamp(v, 0.0, hi);
  const auto i0 = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(v)), n - 1);
  return {i0, std::min(i0 + 1, n - 1), v - static_cast<double>(i0), interior};
}

}  // namespace

Tensor grid_sample_bilinear(const Tensor& image, const Tensor& coords) {
  check(image, coords);
  const std::int64_t n = image.dim(0), c = image.dim(1), h = image.dim(2), w = image.dim(3);
  const std::int64_t ho = coords.dim(2), wo = coords.dim(3);
  Tensor out(Shape{n, c, ho, wo});
  for (std::int64_t b = 0; b < n; ++b)
    for (std::int64_t ch = 0; ch < c; ++ch) {
      const double* img = image.ptr() + (b * c + ch) * h * w;
      const double* cx = coords.ptr() + (b * 2 * c + 2 * ch) * ho * wo;
      const double* cy = cx + ho * wo;
      double* o = out.ptr() + (b * c + ch) * ho * wo;
      for (std::int64_t p = 0; p < ho * wo; ++p) {
        const Axis ax = locate(cx[p], w), ay = locate(cy[p], h);
        const double top = (1 - ax.f) * img[ay.i0 * w + ax.i0] + ax.f * img[ay.i0 * w + ax.i1];
        const double bot = (1 - ax.f) * img[ay.i1 * w + ax.i0] + ax.f * img[ay.i1 * w + ax.i1];
        o[p] = (1 - ay.f) * top + ay.f * bot;
      }
    }
  return out;
}

GridSampleGrads grid_sample_bilinear_grad(const Tensor& grad_out, const Tensor& image, const Tensor& coords) {
  check(image, coords);
  const std::int64_t n = image.dim(0), c = image.dim(1), h = image.dim(2), w = image.dim(3);
  const std::int64_t ho = coords.dim(2), wo = coords.dim(3);
  if (grad_out.shape() != Shape{n, c, ho, wo})
    throw DimensionError("grid_sample_bilinear_grad: gradient shape " + shape_str(grad_out.shape()));
  GridSampleGrads g{Tensor(image.shape()), Tensor(coords.shape())};
  for (std::int64_t b = 0; b < n; ++b)
    for (std::int64_t ch = 0; ch < c; ++ch) {
      const double* img = image.ptr() + (b * c + ch) * h * w;
      double* gi = g.image.ptr() + (b * c + ch) * h * w;
      const std::int64_t coff = (b * 2 * c + 2 * ch) * ho * wo;
      const double* cx = coords.ptr() + coff;
      const double* cy = cx + ho * wo;
      double* gx = g.coords.ptr() + coff;
      double* gy = gx + ho * wo;
      const double* go = grad_out.ptr() + (b * c + ch) * ho * wo;
      for (std::int64_t p = 0; p < ho * wo; ++p) {
        const Axis ax = locate(cx[p], w), ay = locate(cy[p], h);
        const double v00 = img[ay.i0 * w + ax.i0], v01 = img[ay.i0 * w + ax.i1];
        const double v10 = img[ay.i1 * w + ax.i0], v11 = img[ay.i1 * w + ax.i1];
        const double gp = go[p];
        gi[ay.i0 * w + ax.i0] += gp * (1 - ay.f) * (1 - ax.f);
        gi[ay.i0 * w + ax.i1] += gp * (1 - ay.f) * ax.f;
        gi[ay.i1 * w + ax.i0] += gp * ay.f * (1 - ax.f);
        gi[ay.i1 * w + ax.i1] += gp * ay.f * ax.f;
        if (ax.interior) gx[p] = gp * ((1 - ay.f) * (v01 - v00) + ay.f * (v11 - v10));
        if (ay.interior) gy[p] = gp * ((1 - ax.f) * (v10 - v00) + ax.f * (v11 - v01));
      }
    }
  return g;
}

Tensor upsample_grid(std::int64_t h, std::int64_t w, int r, int channels) {
  if (h < 1 || w < 1 || r < 1 || channels < 1) throw DimensionError("upsample_grid: invalid extents");
  const std::int64_t ho = h * r, wo = w * r;
  Tensor grid(Shape{1, 2 * static_cast<std::int64_t>(channels), ho, wo});
  for (int c = 0; c < channels; ++c) {
    double* gx = grid.ptr() + 2 * c * ho * wo;
    double* gy = gx + ho * wo;
    for (std::int64_t y = 0; y < ho; ++y)
      for (std::int64_t x = 0; x < wo; ++x) {
        gx[y * wo + x] = (static_cast<double>(x) + 0.5) / r - 0.5;
        gy[y * wo + x] = (static_cast<double>(y) + 0.5) / r - 0.5;
      }
  }
  return grid;
}

}  // namespace igkit::ops
