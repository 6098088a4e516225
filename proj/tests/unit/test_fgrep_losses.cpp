#include <gtest/gtest.h>

#include <cmath>

#include "igkit/fgrep.hpp"
#include "igkit/functional.hpp"
#include "igkit/losses.hpp"
#include "igkit/ops.hpp"
#include "igkit/rng.hpp"
#include "verify.hpp"

namespace igkit {
namespace {

using ag::Var;

// Kernel invariant under every D4 element.
Tensor symmetric_kernel(Rng& rng) {
  Tensor k(Shape{2, 2, 3, 3});
  for (int o = 0; o < 2; ++o)
    for (int c = 0; c < 2; ++c) {
      const double corner = rng.normal(), edge = rng.normal(), centre = rng.normal();
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          const int d = (i != 1) + (j != 1);
          k.at(o, c, i, j) = d == 0 ? centre : d == 1 ? edge : corner;
        }
    }
  return k;
}

TEST(Fgrep, SymmetricKernelIsFixedPoint) {
  Rng rng(1);
  const Tensor k = symmetric_kernel(rng);
  const Tensor m = rng.normal(Shape{1, 2, 5, 5});
  EXPECT_LE(max_abs_diff(fgrep::reparameterize(k), k), 1e-15);
  EXPECT_LE(max_abs_diff(fgrep::ensemble_form(m, k), ops::conv2d(m, k, 1)), 1e-13);
}

TEST(Fgrep, ZeroFeaturesGiveZero) {
  Rng rng(2);
  EXPECT_EQ(max_abs(fgrep::ensemble_form(Tensor(Shape{1, 2, 4, 4}), rng.normal(Shape{3, 2, 3, 3}))), 0.0);
}

TEST(Fgrep, AveragedKernelIsSymmetric) {
  Rng rng(3);
  const Tensor kbar = fgrep::reparameterize(rng.normal(Shape{3, 2, 5, 5}));
  for (const ops::Dihedral t : ops::dihedral_group()) EXPECT_LE(max_abs_diff(ops::apply_transform(t, kbar), kbar), 1e-15);
}

TEST(Fgrep, ThreeFormsAgree) {
  Rng rng(4);
  const Tensor m = rng.normal(Shape{1, 2, 6, 6}), k = rng.normal(Shape{4, 2, 3, 3});
  const Tensor ens = fgrep::ensemble_form(m, k);
  EXPECT_LE(max_rel_diff(ens, fgrep::augmented_kernel_form(m, k)), 1e-12);
  EXPECT_LE(max_rel_diff(ens, ops::conv2d(m, fgrep::reparameterize(k), 1)), 1e-12);
  EXPECT_LE(max_rel_diff(ens, verify::oracle::fgrep_ensemble(m, k)), 1e-12);
}

TEST(Fgrep, CriterionCheckPasses) {
  const auto r = verify::check_fgrep_equivalence();
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(Loss, IdenticalImagesGiveZero) {
  Rng rng(5);
  const Tensor x = rng.uniform(Shape{2, 3, 6, 6}, 0, 1);
  EXPECT_EQ(total_loss(Var(x), x, LossConfig{}).total.value()[0], 0.0);
}

// Direct-sum spectral L1: mean over real and imaginary parts of all bins.
double spectral_l1(const Tensor& a, const Tensor& b) {
  const auto [ra, ia] = verify::oracle::dft2(a);
  const auto [rb, ib] = verify::oracle::dft2(b);
  double s = 0;
  for (std::size_t i = 0; i < ra.numel(); ++i) s += std::abs(ra[i] - rb[i]) + std::abs(ia[i] - ib[i]);
  return s / (2.0 * static_cast<double>(a.numel()));
}

TEST(Loss, ConstantShiftMatchesScalarOracle) {
  Rng rng(6);
  const Tensor sr = rng.uniform(Shape{1, 3, 5, 4}, 0, 1);
  const Tensor hr = ops::add_scalar(sr, 0.2);
  const LossConfig cfg{0.05, true};
  const LossTerms t = total_loss(Var(sr), hr, cfg);
  EXPECT_NEAR(t.l1, 0.2, 1e-15);
  EXPECT_NEAR(t.freq, spectral_l1(sr, hr), 1e-14);
  EXPECT_NEAR(t.total.value()[0], 0.2 + 0.05 * spectral_l1(sr, hr), 1e-14);
}

TEST(Loss, ZeroWeightIsPlainL1) {
  Rng rng(7);
  const Tensor sr = rng.uniform(Shape{1, 3, 4, 4}, 0, 1), hr = rng.uniform(Shape{1, 3, 4, 4}, 0, 1);
  double l1 = 0;
  for (std::size_t i = 0; i < sr.numel(); ++i) l1 += std::abs(sr[i] - hr[i]);
  l1 /= static_cast<double>(sr.numel());
  EXPECT_NEAR(total_loss(Var(sr), hr, LossConfig{0.0, true}).total.value()[0], l1, 1e-12);
  EXPECT_NEAR(total_loss(Var(sr), hr, LossConfig{0.05, false}).total.value()[0], l1, 1e-12);
}

TEST(Loss, RandomPairMatchesOracle) {
  Rng rng(8);
  const Tensor sr = rng.uniform(Shape{2, 3, 6, 5}, 0, 1), hr = rng.uniform(Shape{2, 3, 6, 5}, 0, 1);
  EXPECT_NEAR(total_loss(Var(sr), hr, LossConfig{}).freq, spectral_l1(sr, hr), 1e-12);
}

}  // namespace
}  // namespace igkit
