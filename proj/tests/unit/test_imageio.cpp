#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "igkit/error.hpp"
#include "igkit/image.hpp"
#include "igkit/ops.hpp"
#include "igkit/rng.hpp"
#include "verify.hpp"

namespace igkit {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("igkit_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ImageBuffer random_image(Rng& rng, int w, int h, int c = 3) {
  ImageBuffer img(w, h, c);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

TEST(Png, RoundTripIsLossless) {
  Rng rng(1);
  const fs::path dir = temp_dir("png");
  for (int c : {1, 3}) {
    const ImageBuffer img = random_image(rng, 17, 9, c);
    write_png(dir / "a.png", img);
    EXPECT_EQ(read_png(dir / "a.png"), img);
  }
}

TEST(Ppm, RoundTripIsLossless) {
  Rng rng(2);
  const fs::path dir = temp_dir("ppm");
  const ImageBuffer img = random_image(rng, 5, 6);
  write_image(dir / "a.ppm", img);
  EXPECT_EQ(read_image(dir / "a.ppm"), img);
}

TEST(ImageIo, CorruptFileRaisesDataError) {
  const fs::path dir = temp_dir("corrupt");
  std::ofstream(dir / "bad.png") << "not a png";
  EXPECT_THROW(read_image(dir / "bad.png"), DataError);
  EXPECT_THROW(read_image(dir / "missing.png"), DataError);
}

TEST(ImageIo, TensorConversionRoundTrips) {
  Rng rng(3);
  const ImageBuffer img = random_image(rng, 8, 7);
  const Tensor t = to_tensor(img);
  EXPECT_EQ(t.shape(), (Shape{1, 3, 7, 8}));
  EXPECT_EQ(from_tensor(t), img);
}

TEST(ImageIo, QuantizationRoundsHalfAwayAndClamps) {
  const Tensor t(Shape{1, 1, 1, 4}, {0.5 / 255, 1.49 / 255, -0.2, 1.3});
  const ImageBuffer img = from_tensor(t);
  EXPECT_EQ(img.data, (std::vector<std::uint8_t>{1, 1, 0, 255}));
}

TEST(ImageIo, ModuloCrop) {
  const ImageBuffer img(10, 7, 3);
  const ImageBuffer c = modulo_crop(img, 3);
  EXPECT_EQ(c.width, 9);
  EXPECT_EQ(c.height, 6);
}

TEST(Bicubic, UnitScaleIsIdentity) {
  Rng rng(4);
  const Tensor img = rng.uniform(Shape{1, 3, 9, 11}, 0, 1);
  EXPECT_LE(max_abs_diff(bicubic_resize(img, 1.0), img), 1e-12);
}

TEST(Bicubic, ConstantStaysConstant) {
  const Tensor img(Shape{1, 1, 12, 12}, 0.37);
  for (double s : {0.25, 1.0 / 3, 0.5, 2.0, 3.0}) {
    const Tensor out = bicubic_resize(img, s);
    EXPECT_LE(max_abs_diff(out, Tensor(out.shape(), 0.37)), 1e-14) << s;
  }
}

TEST(Bicubic, RampDownsampleMatchesDenseMatrix) {
  Tensor ramp(Shape{1, 1, 1, 16});
  for (int i = 0; i < 16; ++i) ramp[i] = i;
  const Tensor out = bicubic_resize(ramp, 1, 8, 1.0, 0.5);
  // Dense one-dimensional resampling matrix built here from the kernel.
  auto cubic = [](double x) {
    x = std::abs(x);
    if (x <= 1) return 1.5 * x * x * x - 2.5 * x * x + 1;
    if (x < 2) return -0.5 * x * x * x + 2.5 * x * x - 4 * x + 2;
    return 0.0;
  };
  for (int o = 0; o < 8; ++o) {
    const double centre = (o + 0.5) / 0.5 - 0.5;
    double acc = 0, norm = 0;
    for (int j = -10; j < 26; ++j) {
      const double w = 0.5 * cubic(0.5 * (centre - j));
      acc += w * std::clamp(j, 0, 15);
      norm += w;
    }
    EXPECT_NEAR(out[o], acc / norm, 1e-12) << o;
  }
}

TEST(Bicubic, MatchesDenseOracle) {
  Rng rng(5);
  const Tensor img = rng.uniform(Shape{2, 3, 14, 10}, 0, 1);
  for (double s : {0.5, 0.25, 2.0}) {
    const Tensor out = bicubic_resize(img, s);
    EXPECT_LE(max_abs_diff(out, verify::oracle::bicubic_resize(img, out.dim(2), out.dim(3), s)), 1e-12);
  }
}

TEST(Luma, ClosedFormValues) {
  auto y_of = [](double v) { return rgb_to_y(Tensor(Shape{1, 3, 1, 1}, v))[0]; };
  EXPECT_NEAR(y_of(255), 235.0, 1e-3);
  EXPECT_NEAR(y_of(0), 16.0, 1e-12);
  EXPECT_NEAR(y_of(128), 16 + 219.0 * 128 / 255, 1e-3);
}

TEST(Psnr, IdenticalImagesGiveInfinity) {
  Rng rng(6);
  const ImageBuffer a = random_image(rng, 20, 20);
  EXPECT_TRUE(std::isinf(psnr_y(a, a, 2)));
}

TEST(Psnr, UnitMseClosedForm) {
  const Tensor a(Shape{1, 1, 6, 6}, 100.0), b(Shape{1, 1, 6, 6}, 101.0);
  EXPECT_EQ(psnr(b, a), 10 * std::log10(255.0 * 255.0));
  EXPECT_NEAR(psnr(b, a), 48.1308, 1e-4);
}

TEST(Psnr, MatchesLoopOracle) {
  Rng rng(7);
  for (int i = 0; i < 5; ++i) {
    const ImageBuffer a = random_image(rng, 31, 27), b = random_image(rng, 31, 27);
    EXPECT_NEAR(psnr_y(a, b, 3), verify::oracle::psnr_y(a, b, 3), 1e-9);
  }
}

TEST(Psnr, SizeMismatchThrows) {
  EXPECT_THROW(psnr_y(ImageBuffer(8, 8, 3), ImageBuffer(8, 9, 3), 0), DimensionError);
}

TEST(Ssim, IdenticalIsOne) {
  Rng rng(8);
  const ImageBuffer a = random_image(rng, 24, 24);
  EXPECT_EQ(ssim_y(a, a, 1), 1.0);
}

TEST(Ssim, ConstantVersusHeavyNoise) {
  Rng rng(9);
  ImageBuffer hr(32, 32, 3), sr(32, 32, 3);
  for (std::size_t i = 0; i < hr.data.size(); ++i) {
    hr.data[i] = 128;
    sr.data[i] = static_cast<std::uint8_t>(rng.below(256));
  }
  const double s = ssim_y(sr, hr, 0);
  EXPECT_LT(s, 0.2);
  EXPECT_NEAR(s, verify::oracle::ssim_y(sr, hr, 0), 1e-9);
}

TEST(Ssim, Symmetric) {
  Rng rng(10);
  const ImageBuffer a = random_image(rng, 25, 30), b = random_image(rng, 25, 30);
  EXPECT_NEAR(ssim_y(a, b, 2), ssim_y(b, a, 2), 1e-15);
}

}  // namespace
}  // namespace igkit
