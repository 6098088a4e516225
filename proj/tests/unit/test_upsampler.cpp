#include <gtest/gtest.h>

#include <cmath>

#include "igkit/container.hpp"
#include "igkit/error.hpp"
#include "igkit/fgrep.hpp"
#include "igkit/functional.hpp"
#include "igkit/ops.hpp"
#include "igkit/rng.hpp"
#include "igkit/upsampler.hpp"
#include "verify.hpp"

namespace igkit {
namespace {

using ag::Var;
namespace oracle = verify::oracle;

UpsamplerConfig config(Variant v, int c_e) {
  UpsamplerConfig c;
  c.variant = v;
  c.c_e = c_e;
  return c;
}

void jitter(ag::ParameterSet& ps, Rng& rng, double sigma) {
  for (const auto& p : ps.items()) {
    Var v = p.var;
    for (auto& x : v.mutable_value().data()) x += sigma * rng.normal();
  }
}

Tensor live(const Upsampler& up, const Tensor& m, const Tensor& lr, int r) {
  ag::NoGradGuard guard;
  return up.forward(Var(m), Var(lr), r).value();
}

TEST(SpConv, ScaleOneIsPlainProjection) {
  Rng rng(1);
  const Tensor m = rng.normal(Shape{1, 4, 5, 5}), k = rng.normal(Shape{3, 4, 3, 3});
  EXPECT_EQ(spconv_forward(Var(m), Var(k), 1).value(), ops::conv2d(m, k, 1));
}

TEST(SpConv, ZeroFeaturesGiveZeroOutput) {
  Rng rng(2);
  const Tensor k = rng.normal(Shape{12, 4, 3, 3});
  EXPECT_EQ(max_abs(spconv_forward(Var(Tensor(Shape{1, 4, 3, 3})), Var(k), 2).value()), 0.0);
}

TEST(SpConv, MatchesOracleComposition) {
  Rng rng(3);
  const Tensor m = rng.normal(Shape{2, 4, 3, 5}), k = rng.normal(Shape{27, 4, 3, 3});
  const Tensor want = oracle::depth_to_space(oracle::conv2d(m, k), 3);
  EXPECT_LE(max_rel_diff(spconv_forward(Var(m), Var(k), 3).value(), want), 1e-14);
}

TEST(SpConvPlus, DeltaSecondConvReducesToSpConv) {
  Rng rng(4);
  const Tensor m = rng.normal(Shape{1, 4, 3, 3}), k1 = rng.normal(Shape{12, 4, 3, 3});
  Tensor k2(Shape{3, 3, 3, 3});
  for (int c = 0; c < 3; ++c) k2.at(c, c, 1, 1) = 1.0;
  EXPECT_EQ(spconv_plus_forward(Var(m), Var(k1), Var(k2), 2).value(), spconv_forward(Var(m), Var(k1), 2).value());
  EXPECT_EQ(max_abs(spconv_plus_forward(Var(Tensor(Shape{1, 4, 3, 3})), Var(k1), Var(k2), 2).value()), 0.0);
}

TEST(IgConv, EqualsSpConvWithGeneratedKernel) {
  Rng rng(5);
  const Upsampler up(config(Variant::IGConv, 4), rng);
  const Tensor m = rng.normal(Shape{1, 4, 5, 5}), lr = rng.uniform(Shape{1, 3, 5, 5}, 0, 1);
  ag::NoGradGuard guard;
  const Tensor k = generate_filters(*up.filter_net(), 3).value();
  const Tensor out = live(up, m, lr, 3);
  EXPECT_EQ(out.shape(), (Shape{1, 3, 15, 15}));
  EXPECT_EQ(out, spconv_forward(Var(m), Var(k), 3).value());
}

TEST(IgSample, ZeroDirectionIsBilinear) {
  Rng rng(6);
  const Tensor m = rng.normal(Shape{1, 4, 4, 3}), lr = rng.uniform(Shape{1, 3, 4, 3}, 0, 1);
  const Tensor ks = rng.normal(Shape{24, 4, 3, 3});
  const Tensor out = igsample_forward(Var(lr), Var(m), Var(Tensor(Shape{24, 4, 3, 3})), Var(ks), 2).value();
  EXPECT_EQ(out, oracle::bilinear_upsample(lr, 2));
}

TEST(IgSample, OffsetsBoundedByHalfDirection) {
  Rng rng(7);
  const Tensor m = rng.normal(Shape{1, 4, 4, 4});
  const Tensor ko = rng.normal(Shape{24, 4, 3, 3}), ks = rng.normal(Shape{24, 4, 3, 3});
  const Tensor dir = ops::depth_to_space(ops::conv2d(m, ko, 1), 2);
  const Tensor off =
      ops::depth_to_space(ops::mul(ops::conv2d(m, ko, 1), ops::scale(ops::sigmoid(ops::conv2d(m, ks, 1)), 0.5)), 2);
  for (std::size_t i = 0; i < off.numel(); ++i) EXPECT_LE(std::abs(off[i]), 0.5 * std::abs(dir[i]));
}

TEST(IgSample, MatchesScalarComposition) {
  Rng rng(8);
  const int r = 3;
  const Tensor m = rng.normal(Shape{2, 4, 3, 4}), lr = rng.uniform(Shape{2, 3, 3, 4}, 0, 1);
  const Tensor ko = rng.normal(Shape{54, 4, 3, 3}, 0.3), ks = rng.normal(Shape{54, 4, 3, 3});
  const Tensor o = oracle::conv2d(m, ko), s = oracle::conv2d(m, ks);
  Tensor prod(o.shape());
  for (std::size_t i = 0; i < o.numel(); ++i) prod[i] = o[i] * 0.5 / (1.0 + std::exp(-s[i]));
  Tensor coords = oracle::depth_to_space(prod, r);
  const Tensor base = ops::upsample_grid(3, 4, r, 3);
  const std::size_t per = base.numel();
  for (std::size_t i = 0; i < coords.numel(); ++i) coords[i] += base[i % per];
  const Tensor want = oracle::grid_sample(lr, coords);
  EXPECT_LE(max_abs_diff(igsample_forward(Var(lr), Var(m), Var(ko), Var(ks), r).value(), want), 1e-10);
}

TEST(IgConvPlus, ZeroNetworksGiveBilinear) {
  Rng rng(9);
  const Upsampler up = Upsampler::zeros(config(Variant::IGConvPlus, 4));
  for (int r : {2, 3, 4, 8}) {
    const Tensor m = rng.normal(Shape{1, 4, 3, 3}), lr = rng.uniform(Shape{1, 3, 3, 3}, 0, 1);
    const Tensor out = live(up, m, lr, r);
    EXPECT_EQ(out.shape(), (Shape{1, 3, 3 * r, 3 * r}));
    EXPECT_EQ(out, oracle::bilinear_upsample(lr, r));
  }
}

TEST(IgConvPlus, EqualsSumOfBranches) {
  Rng rng(10);
  Upsampler up(config(Variant::IGConvPlus, 4), rng);
  jitter(up.params(), rng, 0.02);
  const int r = 2;
  const Tensor m = rng.normal(Shape{1, 4, 4, 4}), lr = rng.uniform(Shape{1, 3, 4, 4}, 0, 1);
  ag::NoGradGuard guard;
  const Tensor k = fgrep::reparameterize(generate_filters(*up.filter_net(), r).value());
  const auto [ko, ks] = generate_sampling_filters(*up.sampling_net(), r);
  // Dihedral averaging applies to the sampling kernels as well.
  const Var ko_bar(fgrep::reparameterize(ko.value())), ks_bar(fgrep::reparameterize(ks.value()));
  const Tensor want = ops::add(oracle::depth_to_space(oracle::conv2d(m, k), r),
                               igsample_forward(Var(lr), Var(m), ko_bar, ks_bar, r).value());
  EXPECT_LE(max_abs_diff(live(up, m, lr, r), want), 1e-12);
}

TEST(Instantiate, BankHoldsGeneratedKernels) {
  Rng rng(11);
  const Upsampler up(config(Variant::IGConv, 4), rng);
  const FilterBank bank = instantiate(up, {2, 3, 4});
  EXPECT_EQ(bank.scales.size(), 3u);
  ag::NoGradGuard guard;
  for (int r : {2, 3, 4}) EXPECT_EQ(bank.scales.at(r).at("K"), generate_filters(*up.filter_net(), r).value());
}

TEST(Instantiate, BankForwardMatchesLiveAndSurvivesSerialization) {
  Rng rng(12);
  Upsampler up(config(Variant::IGConvPlus, 4), rng);
  jitter(up.params(), rng, 0.02);
  const FilterBank bank = instantiate(up, {2, 3, 4, 8});
  io::Container c;
  append_bank(c, bank);
  const FilterBank back = read_bank(io::deserialize(io::serialize(c)));
  for (int r : {2, 3, 4, 8}) {
    const Tensor m = rng.normal(Shape{1, 4, 3, 4}), lr = rng.uniform(Shape{1, 3, 3, 4}, 0, 1);
    const Tensor out = bank_forward(bank, m, lr, r);
    EXPECT_LE(max_rel_diff(out, live(up, m, lr, r)), 1e-12);
    EXPECT_EQ(bank_forward(back, m, lr, r), out);
  }
  EXPECT_THROW(bank_forward(bank, Tensor(Shape{1, 4, 2, 2}), Tensor(Shape{1, 3, 2, 2}), 5), ContractError);
}

TEST(Arbitrary, IntegerScaleMatchesForward) {
  Rng rng(13);
  const Upsampler up(config(Variant::IGConvPlus, 4), rng);
  const Tensor m = rng.normal(Shape{1, 4, 5, 5}), lr = rng.uniform(Shape{1, 3, 5, 5}, 0, 1);
  EXPECT_EQ(up.forward_arbitrary(m, lr, 3.0), live(up, m, lr, 3));
}

TEST(Arbitrary, FractionalScaleShape) {
  Rng rng(14);
  const Upsampler up(config(Variant::IGConvPlus, 4), rng);
  const Tensor m = rng.normal(Shape{1, 4, 10, 10}), lr = rng.uniform(Shape{1, 3, 10, 10}, 0, 1);
  EXPECT_EQ(up.forward_arbitrary(m, lr, 2.5).shape(), (Shape{1, 3, 25, 25}));
  const Upsampler sp(config(Variant::SPConv, 4), rng);
  EXPECT_THROW(sp.forward_arbitrary(m, lr, 2.5), ContractError);
}

TEST(FixedScale, UnsupportedScaleThrows) {
  Rng rng(15);
  UpsamplerConfig c = config(Variant::SPConv, 4);
  c.scales = {2};
  const Upsampler up(c, rng);
  EXPECT_FALSE(up.supports(3));
  EXPECT_THROW(live(up, Tensor(Shape{1, 4, 2, 2}), Tensor(Shape{1, 3, 2, 2}), 3), ContractError);
}

TEST(Variant, ParseRoundTrip) {
  for (Variant v : {Variant::SPConv, Variant::SPConvPlus, Variant::IGConv, Variant::IGConvPlus})
    EXPECT_EQ(parse_variant(variant_name(v)), v);
  EXPECT_THROW(parse_variant("lanczos"), ConfigError);
}

}  // namespace
}  // namespace igkit
