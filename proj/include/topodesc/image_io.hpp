#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace topodesc::io {

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  int bit_depth = 8;
  std::vector<std::uint16_t> pixels;
};

struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // interleaved RGB

  RgbImage() = default;
  RgbImage(std::size_t w, std::size_t h, std::uint8_t fill = 255)
      : width(w), height(h), pixels(w * h * 3, fill) {}

  void set(std::size_t x, std::size_t y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    if (x >= width || y >= height) return;
    auto* p = &pixels[(y * width + x) * 3];
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }
};

/// Reads a grayscale PNG (8 or 16 bit). Throws on color or unreadable files.
GrayImage read_gray_png(const std::filesystem::path& path);
void write_gray_png(const GrayImage& image, const std::filesystem::path& path);
void write_rgb_png(const RgbImage& image, const std::filesystem::path& path);

}  // namespace topodesc::io
