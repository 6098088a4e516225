#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "igkit/tensor.hpp"

namespace igkit {

/// 8-bit raster, interleaved rows (y-major), 1 or 3 channels.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<std::uint8_t> data;

  ImageBuffer() = default;
  ImageBuffer(int width, int height, int channels);

  std::uint8_t& at(int y, int x, int c) { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  std::uint8_t at(int y, int x, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;
};

/// PNG via libpng. Reading accepts gray, gray+alpha, RGB, RGBA and palette
/// images at any bit depth and converts to 8-bit gray or RGB (alpha dropped).
ImageBuffer read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const ImageBuffer& img);
/// Binary PPM (P6) / PGM (P5), maxval 255.
ImageBuffer read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const ImageBuffer& img);
/// Dispatches on file extension (.png, .ppm, .pgm). Errors raise DataError.
ImageBuffer read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const ImageBuffer& img);
/// Sorted list of readable image files in a directory.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

/// [1, C, H, W] with values in [0, 1].
Tensor to_tensor(const ImageBuffer& img);
/// Quantizes item `n` of an NCHW tensor in [0, 1]: round half away from zero
/// after scaling to 255, then clamp to [0, 255].
ImageBuffer from_tensor(const Tensor& t, std::int64_t n = 0);

/// Removes `border` pixels from every side.
ImageBuffer crop_border(const ImageBuffer& img, int border);
/// Crops the bottom/right so both sides are divisible by `r`.
ImageBuffer modulo_crop(const ImageBuffer& img, int r);
ImageBuffer crop(const ImageBuffer& img, int y, int x, int height, int width);

// ---- resampling ------------------------------------------------------------

/// Sparse 1-D resampling weights: output i reads in[index[i][t]] * weight[i][t].
struct ResampleWeights {
  std::vector<std::vector<std::int64_t>> index;
  std::vector<std::vector<double>> weight;
};

/// Cubic convolution (a = -0.5) from `in_size` to `out_size` samples at the
/// given scale. When downsampling the kernel is stretched by 1/scale
/// (antialiasing). Indices are clamped to the border and each row of
/// weights is normalized to sum to one.
ResampleWeights bicubic_weights(std::int64_t in_size, std::int64_t out_size, double scale);

/// Separable bicubic resize of an NCHW tensor, rows first then columns.
Tensor bicubic_resize(const Tensor& img, std::int64_t out_h, std::int64_t out_w, double scale_h, double scale_w);
/// Output size round(H * scale) x round(W * scale).
Tensor bicubic_resize(const Tensor& img, double scale);

// ---- metrics ---------------------------------------------------------------

/// BT.601 studio-swing luma of an [N,3,H,W] tensor in [0, 255].
Tensor rgb_to_y(const Tensor& rgb255);

/// PSNR in dB of two equally sized planes on a 0..255 scale; +infinity
/// when they are identical.
double psnr(const Tensor& a, const Tensor& b);
/// Y-channel PSNR in dB after removing `border` pixels; +infinity when the
/// cropped images are identical.
double psnr_y(const ImageBuffer& sr, const ImageBuffer& hr, int border);
/// Y-channel SSIM (11x11 Gaussian window, sigma 1.5) over valid positions.
double ssim_y(const ImageBuffer& sr, const ImageBuffer& hr, int border);

}  // namespace igkit
