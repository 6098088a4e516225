#include <gtest/gtest.h>

#include "igkit/autograd.hpp"
#include "igkit/error.hpp"
#include "igkit/hypernet.hpp"
#include "igkit/ops.hpp"
#include "igkit/rng.hpp"
#include "verify.hpp"

namespace igkit {
namespace {

using ag::Var;

void fill(ag::ParameterSet& ps, const std::string& name, double v) {
  Var p = ps.get(name);
  for (auto& x : p.mutable_value().data()) x = v;
}

TEST(CoordinateGrid, CellCentres) {
  EXPECT_EQ(coordinate_grid(1), (std::vector<double>{0.0}));
  EXPECT_EQ(coordinate_grid(2), (std::vector<double>{-0.5, 0.5}));
  EXPECT_EQ(coordinate_grid(4), (std::vector<double>{-0.75, -0.25, 0.25, 0.75}));
}

TEST(FourierFeatures, ZeroLatentsGiveUnitCosine) {
  HyperNet net = HyperNet::zeros(HyperNetConfig{2, 3, 8, 1, 3});
  fill(net.params(), "z_amp", 1.0);
  for (int r : {1, 2, 3}) {
    ag::NoGradGuard guard;
    const Tensor f = net.fourier_features(r, 2.0 / r).value();
    ASSERT_EQ(f.shape(), (Shape{2 * 9 * r * r, 8}));
    for (std::int64_t row = 0; row < f.dim(0); ++row)
      for (int m = 0; m < 4; ++m) {
        EXPECT_EQ(f[row * 8 + m], 1.0);
        EXPECT_EQ(f[row * 8 + 4 + m], 0.0);
      }
  }
}

TEST(FourierFeatures, SizeInputIsTwoOverScale) {
  Rng rng(1);
  HyperNet net(HyperNetConfig{2, 3, 8, 1, 3}, rng);
  fill(net.params(), "h_s.weight", 0.3);
  ag::NoGradGuard guard;
  EXPECT_EQ(net.generate(2).value(), net.generate(2, 1.0).value());
  EXPECT_EQ(net.generate(4).value(), net.generate(4, 0.5).value());
  EXPECT_NE(net.generate(4).value(), net.generate(4, 1.0).value());
}

TEST(Filters, ShapesFollowScale) {
  Rng rng(2);
  const HyperNet f(HyperNetConfig::filters(8), rng);
  EXPECT_EQ(generate_filters(f, 2).shape(), (Shape{12, 8, 3, 3}));
  EXPECT_EQ(generate_filters(f, 1).shape(), (Shape{3, 8, 3, 3}));
  const HyperNet s(HyperNetConfig::sampling(8), rng);
  const auto [ko, ks] = generate_sampling_filters(s, 2);
  EXPECT_EQ(ko.shape(), (Shape{24, 8, 3, 3}));
  EXPECT_EQ(ks.shape(), (Shape{24, 8, 3, 3}));
  EXPECT_THROW(generate_filters(s, 2), ContractError);
}

TEST(Filters, ReshapeIsTheIndexBijection) {
  Rng rng(3);
  const HyperNetConfig cfg{3, 3, 16, 2, 3};
  const HyperNet net(cfg, rng);
  ag::NoGradGuard guard;
  for (int r : {1, 2, 3}) {
    const Tensor y = net.mlp(net.fourier_features(r, 2.0 / r)).value();
    const Tensor k = net.reshape_filters(Var(y), r).value();
    for (int c = 0; c < 3; ++c)
      for (int dy = 0; dy < r; ++dy)
        for (int dx = 0; dx < r; ++dx)
          for (int e = 0; e < 3; ++e)
            for (int i = 0; i < 3; ++i)
              for (int j = 0; j < 3; ++j) {
                const std::int64_t row = (((e * 3 + i) * 3 + j) * r + dy) * r + dx;
                EXPECT_EQ(k.at(c * r * r + dy * r + dx, e, i, j), y[row * 3 + c]);
              }
  }
}

TEST(Filters, SamplingSplitRecombinesToRawOutput) {
  Rng rng(4);
  const HyperNetConfig cfg{2, 3, 16, 2, 12};
  const HyperNet net(cfg, rng);
  ag::NoGradGuard guard;
  const int r = 2;
  const Tensor raw = net.generate(r).value();
  const auto [ko, ks] = generate_sampling_filters(net, r);
  EXPECT_EQ(ops::concat({ko.value(), ks.value()}, 0), raw);
}

TEST(Filters, ZeroNetworkGivesZeroKernels) {
  const HyperNet net = HyperNet::zeros(HyperNetConfig::sampling(4));
  const auto [ko, ks] = generate_sampling_filters(net, 3);
  EXPECT_EQ(max_abs(ko.value()), 0.0);
  EXPECT_EQ(max_abs(ks.value()), 0.0);
}

TEST(Filters, MatchScalarOracle) {
  Rng rng(5);
  const HyperNet net(HyperNetConfig{2, 3, 32, 3, 3}, rng);
  ag::NoGradGuard guard;
  const Tensor k = net.generate(3).value();
  EXPECT_LE(max_rel_diff(k, verify::oracle::hypernet_filters(net, 3, 2.0 / 3)), 1e-12);
}

TEST(HyperNet, CopiesShareStorage) {
  Rng rng(6);
  HyperNet a(HyperNetConfig{1, 1, 4, 1, 3}, rng);
  const HyperNet b = a;
  fill(a.params(), "z_amp", 2.0);
  EXPECT_EQ(b.params().get("z_amp").value()[0], 2.0);
}

}  // namespace
}  // namespace igkit
