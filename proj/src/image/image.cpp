#include "igkit/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "igkit/error.hpp"

namespace igkit {

namespace fs = std::filesystem;

ImageBuffer::ImageBuffer(int w, int h, int c) : width(w), height(h), channels(c) {
  if (w < 1 || h < 1 || (c != 1 && c != 3)) throw DimensionError("image needs positive size and 1 or 3 channels");
  data.assign(static_cast<std::size_t>(w) * h * c, 0);
}

ImageBuffer read_png(const fs::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str()))
    throw DataError("cannot read PNG " + path.string() + ": " + png.message);
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  ImageBuffer img(static_cast<int>(png.width), static_cast<int>(png.height), color ? 3 : 1);
  if (!png_image_finish_read(&png, nullptr, img.data.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw DataError("cannot decode PNG " + path.string() + ": " + msg);
  }
  return img;
}

void write_png(const fs::path& path, const ImageBuffer& img) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width);
  png.height = static_cast<png_uint_32>(img.height);
  png.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, img.data.data(), 0, nullptr))
    throw DataError("cannot write PNG " + path.string() + ": " + png.message);
}

namespace {

std::string next_token(std::istream& in) {
  std::string tok;
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) break;
      continue;
    }
    tok += ch;
  }
  return tok;
}

}  // namespace

ImageBuffer read_ppm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const std::string magic = next_token(in);
  if (magic != "P6" && magic != "P5") throw DataError(path.string() + " is not a binary PPM/PGM");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token(in));
    h = std::stoi(next_token(in));
    maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw DataError("malformed header in " + path.string());
  }
  if (maxval != 255) throw DataError(path.string() + ": only maxval 255 is supported");
  ImageBuffer img(w, h, magic == "P6" ? 3 : 1);
  in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.data.size())) throw DataError("truncated " + path.string());
  return img;
}

void write_ppm(const fs::path& path, const ImageBuffer& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << (img.channels == 3 ? "P6" : "P5") << "\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (!out) throw DataError("cannot write " + path.string());
}

namespace {
std::string lower_ext(const fs::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e;
}
}  // namespace

ImageBuffer read_image(const fs::path& path) {
  const std::string e = lower_ext(path);
  if (e == ".png") return read_png(path);
  if (e == ".ppm" || e == ".pgm") return read_ppm(path);
  throw DataError("unsupported image format: " + path.string());
}

void write_image(const fs::path& path, const ImageBuffer& img) {
  const std::string e = lower_ext(path);
  if (e == ".ppm" || e == ".pgm") return write_ppm(path, img);
  write_png(path, img);
}

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string e = lower_ext(entry.path());
    if (entry.is_regular_file() && (e == ".png" || e == ".ppm" || e == ".pgm")) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Tensor to_tensor(const ImageBuffer& img) {
  const std::int64_t c = img.channels, h = img.height, w = img.width;
  Tensor t(Shape{1, c, h, w});
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x)
      for (std::int64_t k = 0; k < c; ++k) t.at(0, k, y, x) = img.data[(y * w + x) * c + k] / 255.0;
  return t;
}

ImageBuffer from_tensor(const Tensor& t, std::int64_t n) {
  if (t.rank() != 4 || (t.dim(1) != 1 && t.dim(1) != 3))
    throw DimensionError("from_tensor expects [N,1|3,H,W], got " + shape_str(t.shape()));
  ImageBuffer img(static_cast<int>(t.dim(3)), static_cast<int>(t.dim(2)), static_cast<int>(t.dim(1)));
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int k = 0; k < img.channels; ++k) {
        const double v = std::round(t.at(n, k, y, x) * 255.0);
        img.at(y, x, k) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
      }
  return img;
}

ImageBuffer crop(const ImageBuffer& img, int y, int x, int height, int width) {
  if (y < 0 || x < 0 || height < 1 || width < 1 || y + height > img.height || x + width > img.width)
    throw DimensionError("crop window outside the image");
  ImageBuffer out(width, height, img.channels);
  const std::size_t row = static_cast<std::size_t>(width) * img.channels;
  for (int r = 0; r < height; ++r)
    std::memcpy(&out.data[r * row], &img.data[((static_cast<std::size_t>(y) + r) * img.width + x) * img.channels], row);
  return out;
}

ImageBuffer crop_border(const ImageBuffer& img, int border) {
  if (border < 0) throw DimensionError("negative crop border");
  if (border == 0) return img;
  return crop(img, border, border, img.height - 2 * border, img.width - 2 * border);
}

ImageBuffer modulo_crop(const ImageBuffer& img, int r) {
  if (r < 1) throw DimensionError("modulo_crop needs r >= 1");
  return crop(img, 0, 0, img.height - img.height % r, img.width - img.width % r);
}

}  // namespace igkit
