#include <cmath>
#include <iomanip>
#include <sstream>

#include "igkit/analysis.hpp"
#include "igkit/error.hpp"
#include "igkit/ops.hpp"
#include "igkit/simd/kernels.hpp"

namespace igkit::analysis {

namespace {

Tensor centered(const Tensor& x) {
  const std::int64_t n = x.dim(0), p = x.dim(1);
  Tensor c = x;
  for (std::int64_t j = 0; j < p; ++j) {
    double mean = 0.0;
    for (std::int64_t i = 0; i < n; ++i) mean += x.ptr()[i * p + j];
    mean /= static_cast<double>(n);
    for (std::int64_t i = 0; i < n; ++i) c.ptr()[i * p + j] -= mean;
  }
  return c;
}

// ||A^T B||_F^2 for row-major [n, p] and [n, q].
double cross_norm2(const Tensor& a, const Tensor& b) {
  const std::int64_t n = a.dim(0), p = a.dim(1), q = b.dim(1);
  std::vector<double> g(static_cast<std::size_t>(p * q));
  simd::gemm(simd::Trans::Yes, simd::Trans::No, p, q, n, 1.0, a.ptr(), p, b.ptr(), q, 0.0, g.data(), q);
  double s = 0.0;
  for (double v : g) s += v * v;
  return s;
}

}  // namespace

double linear_cka(const Tensor& x, const Tensor& y) {
  if (x.rank() != 2 || y.rank() != 2 || x.dim(0) != y.dim(0))
    throw ContractError("linear_cka: need [n, p] and [n, q], got " + shape_str(x.shape()) + " and " +
                        shape_str(y.shape()));
  if (x.dim(0) < 2) throw ContractError("linear_cka: need at least two samples");
  const Tensor xc = centered(x), yc = centered(y);
  const double xx = std::sqrt(cross_norm2(xc, xc)), yy = std::sqrt(cross_norm2(yc, yc));
  if (xx == 0.0 || yy == 0.0) throw ContractError("linear_cka: undefined for a constant argument");
  return cross_norm2(yc, xc) / (xx * yy);
}

Tensor flatten_activation(const Tensor& act) {
  if (act.rank() != 4) throw DimensionError("flatten_activation: expected NCHW, got " + shape_str(act.shape()));
  const std::int64_t n = act.dim(0), c = act.dim(1), hw = act.dim(2) * act.dim(3);
  Tensor out(Shape{n * hw, c});
  for (std::int64_t b = 0; b < n; ++b)
    for (std::int64_t ch = 0; ch < c; ++ch)
      for (std::int64_t p = 0; p < hw; ++p) out.ptr()[(b * hw + p) * c + ch] = act.ptr()[(b * c + ch) * hw + p];
  return out;
}

double CkaReport::layer_mean(std::size_t layer) const {
  const auto& v = values.at(layer);
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

std::string CkaReport::csv() const {
  std::ostringstream os;
  os << "layer";
  for (const auto& [a, b] : pairs) os << "," << a << "~" << b;
  os << ",mean\n" << std::setprecision(12);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    os << layers[l];
    for (double v : values[l]) os << "," << v;
    os << "," << layer_mean(l) << "\n";
  }
  return os.str();
}

std::string CkaReport::pretty() const {
  std::ostringstream os;
  os << std::left << std::setw(10) << "layer";
  for (const auto& [a, b] : pairs) os << std::setw(14) << (a + "~" + b);
  os << "mean\n" << std::fixed << std::setprecision(4);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    os << std::setw(10) << layers[l];
    for (double v : values[l]) os << std::setw(14) << v;
    os << layer_mean(l) << "\n";
  }
  return os.str();
}

CkaReport cka_across_scales(const std::vector<std::pair<std::string, TinyEncoder>>& encoders,
                            const std::vector<Tensor>& probes) {
  if (encoders.size() < 2) throw ContractError("cka_across_scales: need at least two encoders");
  if (probes.empty()) throw ContractError("cka_across_scales: no probe images");

  // acts[model][layer] = stacked [samples, C]
  std::vector<std::vector<Tensor>> acts(encoders.size());
  CkaReport report;
  for (std::size_t m = 0; m < encoders.size(); ++m) {
    std::vector<std::vector<Tensor>> per_layer;
    std::vector<std::string> names;
    for (const Tensor& probe : probes) {
      const auto taps = encoders[m].second.activations(probe);
      if (per_layer.empty()) per_layer.resize(taps.size());
      if (taps.size() != per_layer.size()) throw ContractError("cka_across_scales: encoder depths differ");
      for (std::size_t l = 0; l < taps.size(); ++l) per_layer[l].push_back(flatten_activation(taps[l].second));
      if (names.empty())
        for (const auto& t : taps) names.push_back(t.first);
    }
    if (m == 0) {
      report.layers = names;
    } else if (names != report.layers) {
      throw ContractError("cka_across_scales: encoders expose different layers");
    }
    for (auto& parts : per_layer) acts[m].push_back(parts.size() == 1 ? parts[0] : ops::concat(parts, 0));
  }

  for (std::size_t a = 0; a < encoders.size(); ++a)
    for (std::size_t b = a + 1; b < encoders.size(); ++b) report.pairs.emplace_back(encoders[a].first, encoders[b].first);
  report.values.assign(report.layers.size(), {});
  for (std::size_t l = 0; l < report.layers.size(); ++l)
    for (std::size_t a = 0; a < encoders.size(); ++a)
      for (std::size_t b = a + 1; b < encoders.size(); ++b)
        report.values[l].push_back(linear_cka(acts[a][l], acts[b][l]));
  return report;
}

}  // namespace igkit::analysis
