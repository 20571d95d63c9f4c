#include "topodesc/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <string>

namespace topodesc::io {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) throw std::runtime_error("cannot open file: " + path.string());
  return f;
}

[[noreturn]] void png_fail(png_structp, png_const_charp msg) {
  throw std::runtime_error(std::string("png: ") + msg);
}

void png_warn(png_structp, png_const_charp) {}

void write_png(const std::filesystem::path& path, std::size_t width, std::size_t height,
               int bit_depth, int color_type, const std::vector<png_bytep>& rows) {
  auto file = open_file(path, "wb");
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  if (!png) throw std::runtime_error("png: cannot create write struct");
  png_infop info = png_create_info_struct(png);
  try {
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                 bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (bit_depth == 16) png_set_swap(png);
    png_write_image(png, const_cast<png_bytepp>(rows.data()));
    png_write_end(png, nullptr);
  } catch (...) {
    png_destroy_write_struct(&png, &info);
    throw;
  }
  png_destroy_write_struct(&png, &info);
}

}  // namespace

GrayImage read_gray_png(const std::filesystem::path& path) {
  auto file = open_file(path, "rb");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw std::runtime_error("not a PNG file: " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  if (!png) throw std::runtime_error("png: cannot create read struct");
  png_infop info = png_create_info_struct(png);
  GrayImage image;
  try {
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    const int color = png_get_color_type(png, info);
    if (color != PNG_COLOR_TYPE_GRAY)
      throw std::runtime_error("PNG is not single-channel grayscale: " + path.string());
    int depth = png_get_bit_depth(png, info);
    if (depth < 8) {
      png_set_expand_gray_1_2_4_to_8(png);
      depth = 8;
    }
    if (depth == 16) png_set_swap(png);
    png_read_update_info(png, info);

    image.width = png_get_image_width(png, info);
    image.height = png_get_image_height(png, info);
    image.bit_depth = depth;
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    std::vector<png_byte> buffer(rowbytes * image.height);
    std::vector<png_bytep> rows(image.height);
    for (std::size_t y = 0; y < image.height; ++y) rows[y] = buffer.data() + y * rowbytes;
    png_read_image(png, rows.data());

    image.pixels.resize(image.width * image.height);
    for (std::size_t y = 0; y < image.height; ++y) {
      for (std::size_t x = 0; x < image.width; ++x) {
        if (depth == 16) {
          std::uint16_t v;
          std::memcpy(&v, rows[y] + 2 * x, 2);
          image.pixels[y * image.width + x] = v;
        } else {
          image.pixels[y * image.width + x] = rows[y][x];
        }
      }
    }
  } catch (...) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw;
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return image;
}

void write_gray_png(const GrayImage& image, const std::filesystem::path& path) {
  if (image.bit_depth != 8 && image.bit_depth != 16)
    throw std::invalid_argument("gray PNG bit depth must be 8 or 16");
  const std::size_t bpp = image.bit_depth / 8;
  std::vector<png_byte> buffer(image.width * image.height * bpp);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    if (bpp == 2) {
      std::memcpy(&buffer[2 * i], &image.pixels[i], 2);
    } else {
      buffer[i] = static_cast<png_byte>(image.pixels[i] > 255 ? 255 : image.pixels[i]);
    }
  }
  std::vector<png_bytep> rows(image.height);
  for (std::size_t y = 0; y < image.height; ++y) rows[y] = &buffer[y * image.width * bpp];
  write_png(path, image.width, image.height, image.bit_depth, PNG_COLOR_TYPE_GRAY, rows);
}

void write_rgb_png(const RgbImage& image, const std::filesystem::path& path) {
  std::vector<png_bytep> rows(image.height);
  auto* base = const_cast<png_bytep>(image.pixels.data());
  for (std::size_t y = 0; y < image.height; ++y) rows[y] = base + y * image.width * 3;
  write_png(path, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, rows);
}

}  // namespace topodesc::io
