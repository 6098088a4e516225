// Deliberately plain loop implementations. They share no code with the
// optimized library paths beyond the Tensor container.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "igkit/error.hpp"
#include "verify.hpp"

namespace igkit::verify::oracle {

Tensor conv2d(const Tensor& x, const Tensor& k) {
  const std::int64_t n = x.dim(0), ci = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::int64_t co = k.dim(0), ks = k.dim(2), pad = (ks - 1) / 2;
  if (k.dim(1) != ci) throw DimensionError("oracle conv2d: channel mismatch");
  Tensor out(Shape{n, co, h, w});
  for (std::int64_t b = 0; b < n; ++b)
    for (std::int64_t o = 0; o < co; ++o)
      for (std::int64_t y = 0; y < h; ++y)
        for (std::int64_t x0 = 0; x0 < w; ++x0) {
          double s = 0.0;
          for (std::int64_t c = 0; c < ci; ++c)
            for (std::int64_t i = 0; i < ks; ++i)
              for (std::int64_t j = 0; j < ks; ++j) {
                const std::int64_t yy = y + i - pad, xx = x0 + j - pad;
                if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
                s += x.at(b, c, yy, xx) * k.at(o, c, i, j);
              }
          out.at(b, o, y, x0) = s;
        }
  return out;
}

Tensor depth_to_space(const Tensor& x, int r) {
  const std::int64_t n = x.dim(0), c = x.dim(1) / (r * r), h = x.dim(2), w = x.dim(3);
  Tensor out(Shape{n, c, h * r, w * r});
  for (std::int64_t b = 0; b < n; ++b)
    for (std::int64_t ch = 0; ch < c; ++ch)
      for (std::int64_t Y = 0; Y < h * r; ++Y)
        for (std::int64_t X = 0; X < w * r; ++X)
          out.at(b, ch, Y, X) = x.at(b, ch * r * r + (Y % r) * r + (X % r), Y / r, X / r);
  return out;
}

std::pair<Tensor, Tensor> dft2(const Tensor& x) {
  Tensor re(x.shape()), im(x.shape());
  const std::size_t rank = x.rank();
  const std::int64_t h = x.dim(rank - 2), w = x.dim(rank - 1);
  const std::int64_t planes = static_cast<std::int64_t>(x.numel()) / (h * w);
  for (std::int64_t p = 0; p < planes; ++p) {
    const double* src = x.ptr() + p * h * w;
    for (std::int64_t u = 0; u < h; ++u)
      for (std::int64_t v = 0; v < w; ++v) {
        long double sr = 0, si = 0;
        for (std::int64_t a = 0; a < h; ++a)
          for (std::int64_t b = 0; b < w; ++b) {
            const long double ang = -2.0L * std::numbers::pi_v<long double> *
                                    (static_cast<long double>((u * a) % h) / h + static_cast<long double>((v * b) % w) / w);
            sr += src[a * w + b] * std::cos(ang);
            si += src[a * w + b] * std::sin(ang);
          }
        re.ptr()[p * h * w + u * w + v] = static_cast<double>(sr);
        im.ptr()[p * h * w + u * w + v] = static_cast<double>(si);
      }
  }
  return {re, im};
}

Tensor grid_sample(const Tensor& img, const Tensor& coords) {
  const std::int64_t n = img.dim(0), c = img.dim(1), h = img.dim(2), w = img.dim(3);
  const std::int64_t ho = coords.dim(2), wo = coords.dim(3);
  Tensor out(Shape{n, c, ho, wo});
  auto pixel = [&](std::int64_t b, std::int64_t ch, std::int64_t y, std::int64_t x) {
    return img.at(b, ch, std::clamp<std::int64_t>(y, 0, h - 1), std::clamp<std::int64_t>(x, 0, w - 1));
  };
  for (std::int64_t b = 0; b < n; ++b)
    for (std::int64_t ch = 0; ch < c; ++ch)
      for (std::int64_t y = 0; y < ho; ++y)
        for (std::int64_t x = 0; x < wo; ++x) {
          const double px = std::min(std::max(coords.at(b, 2 * ch, y, x), 0.0), static_cast<double>(w - 1));
          const double py = std::min(std::max(coords.at(b, 2 * ch + 1, y, x), 0.0), static_cast<double>(h - 1));
          const auto x0 = static_cast<std::int64_t>(std::floor(px)), y0 = static_cast<std::int64_t>(std::floor(py));
          const double fx = px - x0, fy = py - y0;
          out.at(b, ch, y, x) = (1 - fy) * ((1 - fx) * pixel(b, ch, y0, x0) + fx * pixel(b, ch, y0, x0 + 1)) +
                                fy * ((1 - fx) * pixel(b, ch, y0 + 1, x0) + fx * pixel(b, ch, y0 + 1, x0 + 1));
        }
  return out;
}

namespace {

// Horizontal mirror of the trailing two axes.
Tensor hflip(const Tensor& x) {
  const std::size_t r = x.rank();
  const std::int64_t h = x.dim(r - 2), w = x.dim(r - 1), planes = static_cast<std::int64_t>(x.numel()) / (h * w);
  Tensor out(x.shape());
  for (std::int64_t p = 0; p < planes; ++p)
    for (std::int64_t i = 0; i < h; ++i)
      for (std::int64_t j = 0; j < w; ++j) out.ptr()[p * h * w + i * w + j] = x.ptr()[p * h * w + i * w + (w - 1 - j)];
  return out;
}

// Quarter turn counter-clockwise: the top row becomes the left column.
Tensor rot90(const Tensor& x) {
  const std::size_t r = x.rank();
  const std::int64_t h = x.dim(r - 2), w = x.dim(r - 1), planes = static_cast<std::int64_t>(x.numel()) / (h * w);
  Shape s = x.shape();
  std::swap(s[r - 2], s[r - 1]);
  Tensor out(s);
  for (std::int64_t p = 0; p < planes; ++p)
    for (std::int64_t i = 0; i < w; ++i)
      for (std::int64_t j = 0; j < h; ++j) out.ptr()[p * h * w + i * h + j] = x.ptr()[p * h * w + j * w + (w - 1 - i)];
  return out;
}

}  // namespace

Tensor dihedral(const Tensor& x, int id) {
  Tensor y = id >= 4 ? hflip(x) : x;
  for (int i = 0; i < id % 4; ++i) y = rot90(y);
  return y;
}

int dihedral_inverse(int id) {
  Tensor probe(Shape{3, 3});
  for (std::size_t i = 0; i < 9; ++i) probe[i] = static_cast<double>(i * i + 1);
  const Tensor moved = dihedral(probe, id);
  for (int t = 0; t < 8; ++t)
    if (dihedral(moved, t) == probe) return t;
  throw ContractError("no inverse found");
}

Tensor fgrep_ensemble(const Tensor& m, const Tensor& k) {
  Tensor acc;
  for (int t = 0; t < 8; ++t) {
    const Tensor y = dihedral(conv2d(dihedral(m, t), k), dihedral_inverse(t));
    if (acc.numel() == 0) {
      acc = y;
    } else {
      for (std::size_t i = 0; i < acc.numel(); ++i) acc[i] += y[i];
    }
  }
  for (std::size_t i = 0; i < acc.numel(); ++i) acc[i] /= 8.0;
  return acc;
}

Tensor hypernet_filters(const HyperNet& net, int r, double size_input) {
  const HyperNetConfig& cfg = net.config();
  const auto& ps = net.params();
  const Tensor& zx = ps.get("z_x").value();
  const Tensor& zy = ps.get("z_y").value();
  const Tensor& amp = ps.get("z_amp").value();
  const Tensor& hw = ps.get("h_s.weight").value();
  const Tensor& hb = ps.get("h_s.bias").value();
  const int half = cfg.c_h / 2, k = cfg.k;
  std::vector<const Tensor*> weights, biases;
  for (int l = 0; l <= cfg.hidden_layers; ++l) {
    weights.push_back(&ps.get("f.layer" + std::to_string(l) + ".weight").value());
    biases.push_back(&ps.get("f.layer" + std::to_string(l) + ".bias").value());
  }
  Tensor out(Shape{static_cast<std::int64_t>(cfg.outputs) * r * r, cfg.c_e, k, k});
  for (int e = 0; e < cfg.c_e; ++e)
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        for (int dy = 0; dy < r; ++dy)
          for (int dx = 0; dx < r; ++dx) {
            const int p = (e * k + i) * k + j;
            const double cx = (2.0 * dx + 1.0) / r - 1.0, cy = (2.0 * dy + 1.0) / r - 1.0;
            std::vector<double> h(cfg.c_h);
            for (int m = 0; m < half; ++m) {
              const double s = hw[m] * size_input + hb[m];
              const double ang = std::numbers::pi * (cx * zx[p * half + m] + cy * zy[p * half + m] + s);
              h[m] = amp[m] * std::cos(ang);
              h[half + m] = amp[half + m] * std::sin(ang);
            }
            for (std::size_t l = 0; l < weights.size(); ++l) {
              const Tensor& W = *weights[l];
              std::vector<double> next(W.dim(0));
              for (std::int64_t o = 0; o < W.dim(0); ++o) {
                double s = (*biases[l])[o];
                for (std::int64_t q = 0; q < W.dim(1); ++q) s += W[o * W.dim(1) + q] * h[q];
                next[o] = l + 1 < weights.size() ? std::max(s, 0.0) : s;
              }
              h = std::move(next);
            }
            for (int o = 0; o < cfg.outputs; ++o) out.at((o * r + dy) * r + dx, e, i, j) = h[o];
          }
  return out;
}

Tensor bilinear_upsample(const Tensor& img, int r) {
  const std::int64_t n = img.dim(0), c = img.dim(1), h = img.dim(2), w = img.dim(3);
  Tensor out(Shape{n, c, h * r, w * r});
  for (std::int64_t b = 0; b < n; ++b)
    for (std::int64_t ch = 0; ch < c; ++ch)
      for (std::int64_t Y = 0; Y < h * r; ++Y)
        for (std::int64_t X = 0; X < w * r; ++X) {
          const double sx = std::clamp((X + 0.5) / r - 0.5, 0.0, static_cast<double>(w - 1));
          const double sy = std::clamp((Y + 0.5) / r - 0.5, 0.0, static_cast<double>(h - 1));
          const auto x0 = static_cast<std::int64_t>(sx), y0 = static_cast<std::int64_t>(sy);
          const std::int64_t x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
          const double fx = sx - x0, fy = sy - y0;
          out.at(b, ch, Y, X) = (1 - fy) * ((1 - fx) * img.at(b, ch, y0, x0) + fx * img.at(b, ch, y0, x1)) +
                                fy * ((1 - fx) * img.at(b, ch, y1, x0) + fx * img.at(b, ch, y1, x1));
        }
  return out;
}

namespace {

double keys_cubic(double x) {
  const double a = -0.5, t = std::abs(x);
  if (t <= 1) return (a + 2) * t * t * t - (a + 3) * t * t + 1;
  if (t < 2) return a * t * t * t - 5 * a * t * t + 8 * a * t - 4 * a;
  return 0.0;
}

// Dense [out, in] weight matrix: antialiased kernel, replicated edges.
std::vector<std::vector<double>> resize_matrix(std::int64_t in, std::int64_t out, double scale) {
  const double kscale = std::min(scale, 1.0);
  std::vector<std::vector<double>> m(out, std::vector<double>(in, 0.0));
  for (std::int64_t i = 0; i < out; ++i) {
    const double u = (i + 0.5) / scale - 0.5;
    const double support = 2.0 / kscale;
    double total = 0.0;
    for (auto j = static_cast<std::int64_t>(std::floor(u - support)) - 1; j <= static_cast<std::int64_t>(std::ceil(u + support)) + 1; ++j) {
      const double wgt = keys_cubic((u - j) * kscale);
      if (wgt == 0.0) continue;
      m[i][std::clamp<std::int64_t>(j, 0, in - 1)] += wgt;
      total += wgt;
    }
    for (double& v : m[i]) v /= total;
  }
  return m;
}

}  // namespace

Tensor bicubic_resize(const Tensor& img, std::int64_t out_h, std::int64_t out_w, double scale) {
  const std::int64_t n = img.dim(0), c = img.dim(1), h = img.dim(2), w = img.dim(3);
  const auto my = resize_matrix(h, out_h, scale), mx = resize_matrix(w, out_w, scale);
  Tensor out(Shape{n, c, out_h, out_w});
  for (std::int64_t b = 0; b < n; ++b)
    for (std::int64_t ch = 0; ch < c; ++ch)
      for (std::int64_t y = 0; y < out_h; ++y)
        for (std::int64_t x = 0; x < out_w; ++x) {
          long double s = 0;
          for (std::int64_t i = 0; i < h; ++i) {
            if (my[y][i] == 0.0) continue;
            for (std::int64_t j = 0; j < w; ++j) s += static_cast<long double>(my[y][i]) * mx[x][j] * img.at(b, ch, i, j);
          }
          out.at(b, ch, y, x) = static_cast<double>(s);
        }
  return out;
}

namespace {

std::vector<double> luma_plane(const ImageBuffer& img, int border, int& h, int& w) {
  h = img.height - 2 * border;
  w = img.width - 2 * border;
  std::vector<double> y(static_cast<std::size_t>(h) * w);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      const double r = img.at(i + border, j + border, 0), g = img.at(i + border, j + border, 1),
                   b = img.at(i + border, j + border, 2);
      y[static_cast<std::size_t>(i) * w + j] = 16.0 + (65.481 * r + 128.553 * g + 24.966 * b) / 255.0;
    }
  return y;
}

}  // namespace

double psnr_y(const ImageBuffer& a, const ImageBuffer& b, int border) {
  int h = 0, w = 0;
  const auto ya = luma_plane(a, border, h, w), yb = luma_plane(b, border, h, w);
  long double se = 0;
  for (std::size_t i = 0; i < ya.size(); ++i) se += static_cast<long double>(ya[i] - yb[i]) * (ya[i] - yb[i]);
  const double mse = static_cast<double>(se / ya.size());
  return mse == 0.0 ? INFINITY : 10.0 * std::log10(255.0 * 255.0 / mse);
}

double ssim_y(const ImageBuffer& a, const ImageBuffer& b, int border) {
  int h = 0, w = 0;
  const auto ya = luma_plane(a, border, h, w), yb = luma_plane(b, border, h, w);
  constexpr int win = 11;
  double g[win][win], gs = 0;
  for (int i = 0; i < win; ++i)
    for (int j = 0; j < win; ++j) {
      g[i][j] = std::exp(-((i - 5.0) * (i - 5.0) + (j - 5.0) * (j - 5.0)) / (2 * 1.5 * 1.5));
      gs += g[i][j];
    }
  const double c1 = (0.01 * 255) * (0.01 * 255), c2 = (0.03 * 255) * (0.03 * 255);
  long double total = 0;
  for (int y = 0; y + win <= h; ++y)
    for (int x = 0; x + win <= w; ++x) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          const double wt = g[i][j] / gs, pa = ya[(y + i) * w + x + j], pb = yb[(y + i) * w + x + j];
          ma += wt * pa;
          mb += wt * pb;
          saa += wt * pa * pa;
          sbb += wt * pb * pb;
          sab += wt * pa * pb;
        }
      const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
  return static_cast<double>(total / ((h - win + 1) * (w - win + 1)));
}

double hsic_cka(const Tensor& x, const Tensor& y) {
  const std::int64_t n = x.dim(0);
  auto gram = [n](const Tensor& a) {
    std::vector<double> k(static_cast<std::size_t>(n * n));
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t j = 0; j < n; ++j) {
        double s = 0;
        for (std::int64_t f = 0; f < a.dim(1); ++f) s += a[i * a.dim(1) + f] * a[j * a.dim(1) + f];
        k[i * n + j] = s;
      }
    return k;
  };
  // H K H with H = I - 11^T / n
  auto center = [n](std::vector<double> k) {
    std::vector<double> row(n, 0.0), col(n, 0.0);
    double all = 0;
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t j = 0; j < n; ++j) {
        row[i] += k[i * n + j] / n;
        col[j] += k[i * n + j] / n;
        all += k[i * n + j] / (n * n);
      }
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t j = 0; j < n; ++j) k[i * n + j] += all - row[i] - col[j];
    return k;
  };
  const auto kc = center(gram(x)), lc = center(gram(y));
  auto hsic = [n](const std::vector<double>& a, const std::vector<double>& b) {
    long double s = 0;
    for (std::int64_t i = 0; i < n * n; ++i) s += static_cast<long double>(a[i]) * b[i];
    return static_cast<double>(s) / ((n - 1.0) * (n - 1.0));
  };
  return hsic(kc, lc) / std::sqrt(hsic(kc, kc) * hsic(lc, lc));
}

Tensor orthogonal(int n, Rng& rng) {
  Tensor q = rng.normal(Shape{n, n});
  for (int c = 0; c < n; ++c) {
    for (int p = 0; p < c; ++p) {
      double d = 0;
      for (int i = 0; i < n; ++i) d += q[i * n + c] * q[i * n + p];
      for (int i = 0; i < n; ++i) q[i * n + c] -= d * q[i * n + p];
    }
    double norm = 0;
    for (int i = 0; i < n; ++i) norm += q[i * n + c] * q[i * n + c];
    norm = std::sqrt(norm);
    for (int i = 0; i < n; ++i) q[i * n + c] /= norm;
  }
  return q;
}

}  // namespace igkit::verify::oracle
