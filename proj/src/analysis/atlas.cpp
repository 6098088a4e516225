#include <algorithm>
#include <cmath>

#include "igkit/analysis.hpp"
#include "igkit/autograd.hpp"
#include "igkit/error.hpp"
#include "igkit/fgrep.hpp"

namespace igkit::analysis {

ImageBuffer render_atlas(const std::vector<Tensor>& kernels, const AtlasOptions& opts) {
  if (kernels.empty()) throw ContractError("render_atlas: no kernels");
  if (opts.filters < 1 || opts.cell < 1 || opts.gap < 0) throw ConfigError("render_atlas: invalid layout");
  const std::int64_t k = kernels[0].rank() == 4 ? kernels[0].dim(2) : 0;
  for (const Tensor& t : kernels)
    if (t.rank() != 4 || t.dim(2) != k || t.dim(3) != k)
      throw DimensionError("render_atlas: kernels must be [O, C, k, k] with a common k");

  const int tile = static_cast<int>(k) * opts.cell;
  ImageBuffer img;
  img.channels = 1;
  img.width = opts.filters * tile + (opts.filters + 1) * opts.gap;
  img.height = static_cast<int>(kernels.size()) * tile + static_cast<int>(kernels.size() + 1) * opts.gap;
  img.data.assign(static_cast<std::size_t>(img.width) * img.height, 0);

  for (std::size_t row = 0; row < kernels.size(); ++row) {
    const Tensor& t = kernels[row];
    const std::int64_t count = std::min<std::int64_t>(opts.filters, t.dim(0));
    const std::int64_t stride = t.dim(1) * k * k;
    for (std::int64_t o = 0; o < count; ++o) {
      const double* f = t.ptr() + o * stride;
      const auto [lo, hi] = std::minmax_element(f, f + k * k);
      const double range = *hi - *lo;
      const int y0 = opts.gap + static_cast<int>(row) * (tile + opts.gap);
      const int x0 = opts.gap + static_cast<int>(o) * (tile + opts.gap);
      for (std::int64_t i = 0; i < k; ++i)
        for (std::int64_t j = 0; j < k; ++j) {
          const double v = range > 0.0 ? (f[i * k + j] - *lo) / range : 0.0;
          const auto px = static_cast<std::uint8_t>(std::clamp(std::round(v * 255.0), 0.0, 255.0));
          for (int dy = 0; dy < opts.cell; ++dy)
            for (int dx = 0; dx < opts.cell; ++dx)
              img.data[static_cast<std::size_t>(y0 + i * opts.cell + dy) * img.width + x0 + j * opts.cell + dx] = px;
        }
    }
  }
  return img;
}

ImageBuffer filter_atlas(const HyperNet& net, const std::vector<int>& scales, const AtlasOptions& opts) {
  if (scales.empty()) throw ConfigError("filter_atlas: no scales");
  ag::NoGradGuard guard;
  std::vector<Tensor> kernels;
  for (int r : scales) {
    if (r < 1) throw ConfigError("filter_atlas: scales must be positive integers");
    Tensor k = net.generate(r).value();
    if (opts.fgrep) k = fgrep::reparameterize(k);
    kernels.push_back(std::move(k));
  }
  return render_atlas(kernels, opts);
}

void export_filter_atlas(const HyperNet& net, const std::vector<int>& scales, const std::filesystem::path& out,
                         const AtlasOptions& opts) {
  write_image(out, filter_atlas(net, scales, opts));
}

}  // namespace igkit::analysis
