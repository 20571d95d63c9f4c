#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace topodesc {

/// Row-major 2D scalar height field.
struct DepthMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;
  std::optional<double> pitch_mm;

  DepthMap() = default;
  DepthMap(std::size_t w, std::size_t h, double fill = 0.0)
      : width(w), height(h), values(w * h, fill) {}

  double& at(std::size_t row, std::size_t col) { return values[row * width + col]; }
  double at(std::size_t row, std::size_t col) const { return values[row * width + col]; }
};

/// Per-pixel ground truth: 1 = engraved (class 1), 0 = natural surface (class 2).
struct LabelMask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> labels;

  LabelMask() = default;
  LabelMask(std::size_t w, std::size_t h) : width(w), height(h), labels(w * h, 0) {}

  std::uint8_t& at(std::size_t row, std::size_t col) { return labels[row * width + col]; }
  std::uint8_t at(std::size_t row, std::size_t col) const { return labels[row * width + col]; }

  double positive_fraction() const;
};

/// Square window copied out of a DepthMap.
struct Patch {
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t size = 0;
  std::vector<double> values;
  std::optional<int> label;
  std::string source_id;

  double at(std::size_t r, std::size_t c) const { return values[r * size + c]; }
};

enum class DepthFormat { png16, text_matrix };

DepthFormat depth_format_from_path(const std::filesystem::path& path);

DepthMap load_depth_map(const std::filesystem::path& path, DepthFormat format);
DepthMap load_depth_map(const std::filesystem::path& path);
/// Parses the whitespace-separated text matrix format from a string.
DepthMap parse_text_matrix(const std::string& text);

void save_depth_map_text(const DepthMap& map, const std::filesystem::path& path);
/// Writes values clamped to [0,1] and scaled by 65535.
void save_depth_map_png16(const DepthMap& map, const std::filesystem::path& path);

LabelMask load_label_mask(const std::filesystem::path& path);
void save_label_mask(const LabelMask& mask, const std::filesystem::path& path);

/// Number of window origins along one axis of length `extent`.
std::size_t patch_positions(std::size_t extent, std::size_t size, std::size_t step);

std::vector<Patch> extract_patches(const DepthMap& map, const LabelMask* mask,
                                   std::size_t size, std::size_t step,
                                   double label_threshold = 0.5,
                                   const std::string& source_id = {});

struct Normalization {
  enum class Mode { none, minmax, global } mode = Mode::none;
  double lo = 0.0;
  double hi = 1.0;

  static Normalization identity() { return {}; }
  static Normalization per_patch() { return {Mode::minmax, 0.0, 1.0}; }
  static Normalization global_bounds(double lo, double hi) { return {Mode::global, lo, hi}; }
};

struct NormalizedPatch {
  Patch patch;
  bool degenerate = false;
};

NormalizedPatch normalize_patch(const Patch& patch, const Normalization& norm);

/// Min and max over a set of maps, used for global normalization.
std::pair<double, double> value_bounds(const std::vector<const DepthMap*>& maps);

}  // namespace topodesc
