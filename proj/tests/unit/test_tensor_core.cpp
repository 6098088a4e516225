#include <gtest/gtest.h>

#include <cmath>

#include "igkit/error.hpp"
#include "igkit/ops.hpp"
#include "igkit/rng.hpp"
#include "igkit/simd/kernels.hpp"
#include "verify.hpp"

namespace igkit {
namespace {

namespace oracle = verify::oracle;

TEST(Conv2d, DeltaKernelIsIdentity) {
  Tensor x(Shape{1, 1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  Tensor k(Shape{1, 1, 3, 3}, 0.0);
  k[4] = 1.0;
  EXPECT_EQ(ops::conv2d(x, k, 1), x);
}

TEST(Conv2d, ZeroPaddingContributesNothing) {
  const Tensor x(Shape{1, 1, 1, 1}, 2.0);
  const Tensor k(Shape{1, 1, 3, 3}, 1.0);
  EXPECT_EQ(ops::conv2d(x, k, 1)[0], 2.0);
}

TEST(Conv2d, MatchesLoopOracle) {
  Rng rng(1);
  const Tensor x = rng.normal(Shape{1, 2, 4, 4}), k = rng.normal(Shape{3, 2, 3, 3});
  EXPECT_LE(max_rel_diff(ops::conv2d(x, k, 1), oracle::conv2d(x, k)), 1e-15);
}

TEST(Conv2d, ShapeMismatchThrows) {
  EXPECT_THROW(ops::conv2d(Tensor(Shape{1, 2, 4, 4}), Tensor(Shape{3, 3, 3, 3}), 1), DimensionError);
}

TEST(Conv2d, GradientsMatchAdjointIdentity) {
  // <conv(x, k), g> == <x, grad_input(g)> == <k, grad_kernel(g)>
  Rng rng(2);
  const Tensor x = rng.normal(Shape{2, 3, 5, 4}), k = rng.normal(Shape{4, 3, 3, 3}), g = rng.normal(Shape{2, 4, 5, 4});
  const double lhs = ops::sum(ops::mul(ops::conv2d(x, k, 1), g));
  const double gi = ops::sum(ops::mul(x, ops::conv2d_grad_input(g, k, 1, x.shape())));
  const double gk = ops::sum(ops::mul(k, ops::conv2d_grad_kernel(g, x, 1, k.shape())));
  EXPECT_NEAR(gi, lhs, 1e-10 * std::abs(lhs));
  EXPECT_NEAR(gk, lhs, 1e-10 * std::abs(lhs));
}

TEST(Conv2dF32, AgreesWithDouble) {
  Rng rng(3);
  const Tensor x = rng.normal(Shape{1, 5, 9, 7}), k = rng.normal(Shape{6, 5, 3, 3});
  std::vector<float> xf(x.data().begin(), x.data().end()), kf(k.data().begin(), k.data().end()), out(6 * 9 * 7);
  ops::conv2d_f32(xf, 5, 9, 7, kf, 6, 3, out);
  const Tensor ref = ops::conv2d(x, k, 1);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out[i], ref[i], 1e-4);
}

TEST(DepthToSpace, ChosenOrdering) {
  const Tensor x(Shape{1, 4, 1, 1}, {0, 1, 2, 3});
  const Tensor y = ops::depth_to_space(x, 2);
  EXPECT_EQ(y.shape(), (Shape{1, 1, 2, 2}));
  EXPECT_EQ(y, Tensor(Shape{1, 1, 2, 2}, {0, 1, 2, 3}));
}

TEST(DepthToSpace, ScaleOneIsIdentity) {
  Rng rng(4);
  const Tensor x = rng.normal(Shape{2, 3, 4, 5});
  EXPECT_EQ(ops::depth_to_space(x, 1), x);
}

TEST(DepthToSpace, RoundTripAndOracle) {
  Rng rng(5);
  for (int r : {2, 3, 4}) {
    const Tensor x = rng.normal(Shape{2, 3 * r * r, 3, 2});
    const Tensor y = ops::depth_to_space(x, r);
    EXPECT_EQ(y, oracle::depth_to_space(x, r));
    EXPECT_EQ(ops::space_to_depth(y, r), x);
  }
  EXPECT_THROW(ops::depth_to_space(Tensor(Shape{1, 5, 2, 2}), 2), DimensionError);
}

TEST(GridSample, PixelCentreReturnsPixel) {
  Rng rng(6);
  const Tensor img = rng.normal(Shape{1, 1, 3, 4});
  Tensor coords(Shape{1, 2, 1, 1});
  coords[0] = 2.0;  // x
  coords[1] = 1.0;  // y
  EXPECT_EQ(ops::grid_sample_bilinear(img, coords)[0], img.at(0, 0, 1, 2));
}

TEST(GridSample, MidpointAverages) {
  const Tensor img(Shape{1, 1, 1, 2}, {3.0, 8.0});
  Tensor coords(Shape{1, 2, 1, 1});
  coords[0] = 0.5;
  EXPECT_DOUBLE_EQ(ops::grid_sample_bilinear(img, coords)[0], 5.5);
}

TEST(GridSample, IdentityGridAtScaleOne) {
  Rng rng(7);
  const Tensor img = rng.normal(Shape{2, 3, 4, 5});
  Tensor grid = ops::upsample_grid(4, 5, 1, 3);
  grid = ops::concat({grid, grid}, 0);
  EXPECT_EQ(ops::grid_sample_bilinear(img, grid), img);
}

TEST(GridSample, MatchesOracleWithClamping) {
  Rng rng(8);
  const Tensor img = rng.normal(Shape{1, 3, 4, 4});
  const Tensor coords = rng.uniform(Shape{1, 6, 5, 5}, -2.0, 6.0);
  EXPECT_LE(max_abs_diff(ops::grid_sample_bilinear(img, coords), oracle::grid_sample(img, coords)), 1e-15);
}

TEST(Dft2, ConstantPlaneIsDcOnly) {
  const Tensor x(Shape{1, 1, 4, 6}, 2.5);
  const ops::Complex f = ops::dft2(x);
  EXPECT_NEAR(f.real[0], 2.5 * 24, 1e-12);
  for (std::size_t i = 1; i < f.real.numel(); ++i) {
    EXPECT_NEAR(f.real[i], 0.0, 1e-12);
    EXPECT_NEAR(f.imag[i], 0.0, 1e-12);
  }
}

TEST(Dft2, ImpulseIsFlat) {
  Tensor x(Shape{1, 1, 5, 3});
  x[0] = 1.0;
  const ops::Complex f = ops::dft2(x);
  for (std::size_t i = 0; i < f.real.numel(); ++i) {
    EXPECT_NEAR(f.real[i], 1.0, 1e-15);
    EXPECT_NEAR(f.imag[i], 0.0, 1e-15);
  }
}

TEST(Dft2, Parseval) {
  Rng rng(9);
  const Tensor x = rng.normal(Shape{1, 1, 8, 8});
  const ops::Complex f = ops::dft2(x);
  const double spectrum = ops::sum(ops::mul(f.real, f.real)) + ops::sum(ops::mul(f.imag, f.imag));
  const double energy = 64.0 * ops::sum(ops::mul(x, x));
  EXPECT_NEAR(spectrum / energy, 1.0, 1e-9);
}

TEST(Dft2, MatchesDirectSumAndInverts) {
  Rng rng(10);
  const Tensor x = rng.normal(Shape{2, 2, 6, 5});
  const ops::Complex f = ops::dft2(x);
  const auto [re, im] = oracle::dft2(x);
  EXPECT_LE(max_abs_diff(f.real, re), 1e-12);
  EXPECT_LE(max_abs_diff(f.imag, im), 1e-12);
  const ops::Complex back = ops::dft2(f.real, f.imag, true);
  EXPECT_LE(max_abs_diff(ops::scale(back.real, 1.0 / 30), x), 1e-13);
  EXPECT_LE(max_abs(back.imag), 1e-12);
}

TEST(Dihedral, GroupStructure) {
  Rng rng(11);
  const Tensor x = rng.normal(Shape{2, 3, 4, 5});
  EXPECT_EQ(ops::apply_transform(ops::Dihedral{0}, x), x);
  for (const ops::Dihedral t : ops::dihedral_group()) {
    EXPECT_EQ(ops::apply_transform(t.inverse(), ops::apply_transform(t, x)), x);
    EXPECT_EQ(ops::apply_transform(t, x), oracle::dihedral(x, t.id));
  }
  const Tensor rot90 = ops::apply_transform(ops::Dihedral{1}, x);
  EXPECT_EQ(ops::apply_transform(ops::Dihedral{1}, rot90), ops::apply_transform(ops::Dihedral{2}, x));
  EXPECT_EQ(rot90.shape(), (Shape{2, 3, 5, 4}));
}

TEST(Dihedral, ComposeMatchesSequentialApplication) {
  Rng rng(12);
  const Tensor x = rng.normal(Shape{1, 1, 3, 3});
  for (const ops::Dihedral a : ops::dihedral_group())
    for (const ops::Dihedral b : ops::dihedral_group())
      EXPECT_EQ(ops::apply_transform(compose(a, b), x), ops::apply_transform(a, ops::apply_transform(b, x)));
}

TEST(Elementwise, ShapeMismatchThrows) {
  EXPECT_THROW(ops::add(Tensor(Shape{2, 3}), Tensor(Shape{3, 2})), DimensionError);
}

TEST(Linear, MatchesManualProduct) {
  const Tensor x(Shape{1, 2}, {1, 2}), w(Shape{2, 2}, {3, 4, 5, 6}), b(Shape{2}, {0.5, -1});
  EXPECT_EQ(ops::linear(x, w, b), Tensor(Shape{1, 2}, {11.5, 16}));
}

TEST(Simd, DispatchReportsScalarFallback) {
  EXPECT_TRUE(simd::isa_supported(simd::Isa::Scalar));
  EXPECT_TRUE(simd::isa_supported(simd::active_isa()));
}

TEST(Simd, VariantsAgreeWithScalar) {
  Rng rng(13);
  const simd::KernelTable& ref = simd::kernels(simd::Isa::Scalar);
  for (simd::Isa isa : {simd::Isa::Avx2, simd::Isa::Avx512, simd::Isa::Neon}) {
    if (!simd::isa_supported(isa)) continue;
    const simd::KernelTable& kt = simd::kernels(isa);
    for (std::size_t m : {1u, 5u, 13u, 64u}) {
      const std::size_t n = m + 3, k = 2 * m + 1;
      const Tensor a = rng.normal(Shape{static_cast<std::int64_t>(m * k)});
      const Tensor b = rng.normal(Shape{static_cast<std::int64_t>(k * n)});
      Tensor c0(Shape{static_cast<std::int64_t>(m * n)}), c1 = c0;
      ref.gemm_f64(simd::Trans::No, simd::Trans::No, m, n, k, 1.0, a.ptr(), k, b.ptr(), n, 0.0, c0.ptr(), n);
      kt.gemm_f64(simd::Trans::No, simd::Trans::No, m, n, k, 1.0, a.ptr(), k, b.ptr(), n, 0.0, c1.ptr(), n);
      EXPECT_LE(max_rel_diff(c1, c0), 1e-13) << simd::isa_name(isa) << " m=" << m;
      Tensor r0(a.shape()), r1(a.shape());
      ref.relu_f64(a.numel(), a.ptr(), r0.ptr());
      kt.relu_f64(a.numel(), a.ptr(), r1.ptr());
      EXPECT_EQ(r0, r1);
    }
  }
}

}  // namespace
}  // namespace igkit
