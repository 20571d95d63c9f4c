#include "topodesc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "topodesc/image_io.hpp"

namespace topodesc {

double LabelMask::positive_fraction() const {
  if (labels.empty()) return 0.0;
  const auto positives = std::count_if(labels.begin(), labels.end(), [](auto v) { return v != 0; });
  return static_cast<double>(positives) / static_cast<double>(labels.size());
}

DepthFormat depth_format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" ? DepthFormat::png16 : DepthFormat::text_matrix;
}

DepthMap parse_text_matrix(const std::string& text) {
  DepthMap map;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream row(line);
    std::vector<double> values;
    std::string token;
    while (row >> token) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size())
        throw std::runtime_error("text matrix: bad number '" + token + "' on line " +
                                 std::to_string(line_no));
      if (!std::isfinite(v))
        throw std::runtime_error("text matrix: non-finite value on line " + std::to_string(line_no));
      values.push_back(v);
    }
    if (values.empty()) continue;
    if (map.width == 0) {
      map.width = values.size();
    } else if (values.size() != map.width) {
      throw std::runtime_error("text matrix: ragged row " + std::to_string(line_no) + " (" +
                               std::to_string(values.size()) + " values, expected " +
                               std::to_string(map.width) + ")");
    }
    map.values.insert(map.values.end(), values.begin(), values.end());
    ++map.height;
  }
  if (map.width == 0 || map.height == 0) throw std::runtime_error("text matrix: empty input");
  return map;
}

DepthMap load_depth_map(const std::filesystem::path& path, DepthFormat format) {
  if (!std::filesystem::exists(path)) throw std::runtime_error("no such file: " + path.string());
  if (format == DepthFormat::text_matrix) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_text_matrix(buffer.str());
  }
  const auto image = io::read_gray_png(path);
  const double scale = image.bit_depth == 16 ? 65535.0 : 255.0;
  DepthMap map(image.width, image.height);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) map.values[i] = image.pixels[i] / scale;
  return map;
}

DepthMap load_depth_map(const std::filesystem::path& path) {
  return load_depth_map(path, depth_format_from_path(path));
}

void save_depth_map_text(const DepthMap& map, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path.string());
  out << std::setprecision(17);
  for (std::size_t r = 0; r < map.height; ++r) {
    for (std::size_t c = 0; c < map.width; ++c) {
      if (c) out << ' ';
      out << map.at(r, c);
    }
    out << '\n';
  }
}

void save_depth_map_png16(const DepthMap& map, const std::filesystem::path& path) {
  io::GrayImage image{map.width, map.height, 16, {}};
  image.pixels.resize(map.values.size());
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    const double v = std::clamp(map.values[i], 0.0, 1.0);
    image.pixels[i] = static_cast<std::uint16_t>(std::lround(v * 65535.0));
  }
  io::write_gray_png(image, path);
}

LabelMask load_label_mask(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw std::runtime_error("no such file: " + path.string());
  const auto image = io::read_gray_png(path);
  LabelMask mask(image.width, image.height);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) mask.labels[i] = image.pixels[i] != 0;
  return mask;
}

void save_label_mask(const LabelMask& mask, const std::filesystem::path& path) {
  io::GrayImage image{mask.width, mask.height, 8, {}};
  image.pixels.resize(mask.labels.size());
  for (std::size_t i = 0; i < mask.labels.size(); ++i) image.pixels[i] = mask.labels[i] ? 255 : 0;
  io::write_gray_png(image, path);
}

std::size_t patch_positions(std::size_t extent, std::size_t size, std::size_t step) {
  if (size > extent) return 0;
  return (extent - size) / step + 1;
}

std::vector<Patch> extract_patches(const DepthMap& map, const LabelMask* mask, std::size_t size,
                                   std::size_t step, double label_threshold,
                                   const std::string& source_id) {
  if (size == 0) throw std::invalid_argument("patch size must be positive");
  if (step == 0) throw std::invalid_argument("patch step must be positive");
  if (size > std::min(map.width, map.height))
    throw std::invalid_argument("patch size " + std::to_string(size) + " exceeds map " +
                                std::to_string(map.height) + "x" + std::to_string(map.width));
  if (!(label_threshold > 0.0 && label_threshold <= 1.0))
    throw std::invalid_argument("label threshold must lie in (0, 1]");
  if (mask && (mask->width != map.width || mask->height != map.height))
    throw std::invalid_argument("mask dimensions do not match depth map");

  // Summed-area table of class-1 pixels for O(1) window counts.
  std::vector<std::size_t> integral;
  if (mask) {
    integral.assign((map.height + 1) * (map.width + 1), 0);
    const std::size_t stride = map.width + 1;
    for (std::size_t r = 0; r < map.height; ++r)
      for (std::size_t c = 0; c < map.width; ++c)
        integral[(r + 1) * stride + c + 1] = (mask->at(r, c) ? 1 : 0) + integral[r * stride + c + 1] +
                                             integral[(r + 1) * stride + c] - integral[r * stride + c];
  }

  const std::size_t rows = patch_positions(map.height, size, step);
  const std::size_t cols = patch_positions(map.width, size, step);
  std::vector<Patch> patches;
  patches.reserve(rows * cols);
  const double area = static_cast<double>(size * size);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      Patch p;
      p.row = i * step;
      p.col = j * step;
      p.size = size;
      p.source_id = source_id;
      p.values.resize(size * size);
      for (std::size_t r = 0; r < size; ++r) {
        const double* src = &map.values[(p.row + r) * map.width + p.col];
        std::copy(src, src + size, p.values.begin() + static_cast<std::ptrdiff_t>(r * size));
      }
      if (mask) {
        const std::size_t stride = map.width + 1;
        const std::size_t r0 = p.row, c0 = p.col, r1 = p.row + size, c1 = p.col + size;
        const std::size_t positives = integral[r1 * stride + c1] - integral[r0 * stride + c1] -
                                      integral[r1 * stride + c0] + integral[r0 * stride + c0];
        p.label = static_cast<double>(positives) / area >= label_threshold ? 1 : 0;
      }
      patches.push_back(std::move(p));
    }
  }
  return patches;
}

NormalizedPatch normalize_patch(const Patch& patch, const Normalization& norm) {
  NormalizedPatch out{patch, false};
  switch (norm.mode) {
    case Normalization::Mode::none:
      break;
    case Normalization::Mode::minmax: {
      const auto [lo_it, hi_it] = std::minmax_element(patch.values.begin(), patch.values.end());
      const double lo = *lo_it, span = *hi_it - *lo_it;
      if (span <= 0.0) {
        std::fill(out.patch.values.begin(), out.patch.values.end(), 0.0);
        out.degenerate = true;
      } else {
        for (auto& v : out.patch.values) v = (v - lo) / span;
      }
      break;
    }
    case Normalization::Mode::global: {
      const double span = norm.hi - norm.lo;
      if (!(span > 0.0)) throw std::invalid_argument("global normalization needs lo < hi");
      for (auto& v : out.patch.values) v = (v - norm.lo) / span;
      break;
    }
  }
  return out;
}

std::pair<double, double> value_bounds(const std::vector<const DepthMap*>& maps) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto* m : maps) {
    for (double v : m->values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(lo <= hi)) throw std::invalid_argument("value_bounds: no values");
  return {lo, hi};
}

}  // namespace topodesc
