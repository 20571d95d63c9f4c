#include "topodesc/clbp.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace topodesc {

void ClbpConfig::validate() const {
  if (radius < 1) throw std::invalid_argument("CLBP radius must be >= 1");
  if (samples < 4 || samples > 24) throw std::invalid_argument("CLBP samples must lie in [4, 24]");
}

std::uint32_t code_count(ClbpEncoding encoding, int samples) {
  return encoding == ClbpEncoding::riu2 ? static_cast<std::uint32_t>(samples + 2)
                                        : (1u << samples);
}

std::uint32_t encode_pattern(std::uint32_t pattern, int n, ClbpEncoding encoding) {
  const std::uint32_t mask = (1u << n) - 1u;
  pattern &= mask;
  auto rotate = [&](std::uint32_t v) { return ((v >> 1) | (v << (n - 1))) & mask; };
  if (encoding == ClbpEncoding::ri) {
    std::uint32_t best = pattern, v = pattern;
    for (int k = 1; k < n; ++k) {
      v = rotate(v);
      best = std::min(best, v);
    }
    return best;
  }
  const int transitions = std::popcount(pattern ^ rotate(pattern));
  return transitions <= 2 ? static_cast<std::uint32_t>(std::popcount(pattern))
                          : static_cast<std::uint32_t>(n + 1);
}

namespace {

struct Offset {
  double dy;
  double dx;
};

std::vector<Offset> circle_offsets(const ClbpConfig& config) {
  std::vector<Offset> out;
  for (int k = 0; k < config.samples; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / config.samples;
    double dx = config.radius * std::cos(theta);
    double dy = -config.radius * std::sin(theta);
    // Snap lattice-aligned samples so they read pixels without interpolation.
    if (std::abs(dx - std::round(dx)) < 1e-9) dx = std::round(dx);
    if (std::abs(dy - std::round(dy)) < 1e-9) dy = std::round(dy);
    out.push_back({dy, dx});
  }
  return out;
}

// Interpolates corner differences from the centre value, so a uniform gray
// shift leaves every d_k bit-identical whenever the shift itself is exact.
double bilinear_diff(const DepthMap& map, double y, double x, double centre) {
  const double fy = std::floor(y), fx = std::floor(x);
  const double ty = y - fy, tx = x - fx;
  const auto r = static_cast<std::size_t>(fy), c = static_cast<std::size_t>(fx);
  const double a = map.at(r, c) - centre;
  if (ty == 0.0 && tx == 0.0) return a;
  const std::size_t r1 = ty == 0.0 ? r : r + 1, c1 = tx == 0.0 ? c : c + 1;
  // a + t * (b - a) returns a exactly when a == b, so flat regions give d = 0.
  const double top = a + tx * ((map.at(r, c1) - centre) - a);
  const double b = map.at(r1, c) - centre;
  const double bottom = b + tx * ((map.at(r1, c1) - centre) - b);
  return top + ty * (bottom - top);
}

}  // namespace

std::vector<double> clbp_differences(const DepthMap& map, const ClbpConfig& config) {
  config.validate();
  const auto r = static_cast<std::size_t>(config.radius);
  if (map.width <= 2 * r || map.height <= 2 * r)
    throw std::invalid_argument("CLBP: map must be larger than 2*radius in both dimensions");
  const auto offsets = circle_offsets(config);
  const std::size_t h = map.height - 2 * r, w = map.width - 2 * r, n = offsets.size();
  std::vector<double> diffs(h * w * n);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      const double cy = static_cast<double>(i + r), cx = static_cast<double>(j + r);
      const double centre = map.at(i + r, j + r);
      double* d = &diffs[(i * w + j) * n];
      for (std::size_t k = 0; k < n; ++k)
        d[k] = bilinear_diff(map, cy + offsets[k].dy, cx + offsets[k].dx, centre);
    }
  }
  return diffs;
}

ClbpMaps clbp_maps(const DepthMap& map, const ClbpConfig& config) {
  const auto diffs = clbp_differences(map, config);
  const auto r = static_cast<std::size_t>(config.radius);
  const auto n = static_cast<std::size_t>(config.samples);
  ClbpMaps out;
  out.offset = r;
  out.height = map.height - 2 * r;
  out.width = map.width - 2 * r;
  const std::size_t pixels = out.width * out.height;

  if (config.magnitude_threshold) {
    out.magnitude_threshold = *config.magnitude_threshold;
  } else {
    double total = 0.0;
    for (double d : diffs) total += std::abs(d);
    out.magnitude_threshold = total / static_cast<double>(diffs.size());
  }

  out.s_map.resize(pixels);
  out.m_map.resize(pixels);
  for (std::size_t p = 0; p < pixels; ++p) {
    std::uint32_t s = 0, m = 0;
    const double* d = &diffs[p * n];
    for (std::size_t k = 0; k < n; ++k) {
      if (d[k] >= 0.0) s |= 1u << k;
      if (std::abs(d[k]) >= out.magnitude_threshold) m |= 1u << k;
    }
    out.s_map[p] = encode_pattern(s, config.samples, config.encoding);
    out.m_map[p] = encode_pattern(m, config.samples, config.encoding);
  }
  return out;
}

DepthMap clbp_to_patch(const ClbpMaps& maps, ClbpComponent which) {
  DepthMap out(maps.width, maps.height);
  const auto& codes = which == ClbpComponent::s ? maps.s_map : maps.m_map;
  for (std::size_t i = 0; i < codes.size(); ++i) out.values[i] = static_cast<double>(codes[i]);
  return out;
}

std::vector<std::uint32_t> clbp_m_window(const std::vector<double>& diffs, const ClbpMaps& maps,
                                         const ClbpConfig& config, std::size_t row,
                                         std::size_t col, std::size_t size) {
  if (row + size > maps.height || col + size > maps.width)
    throw std::invalid_argument("clbp_m_window: window outside the valid region");
  const auto n = static_cast<std::size_t>(config.samples);
  double total = 0.0;
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t j = 0; j < size; ++j) {
      const double* d = &diffs[((row + i) * maps.width + col + j) * n];
      for (std::size_t k = 0; k < n; ++k) total += std::abs(d[k]);
    }
  const double mu = total / static_cast<double>(size * size * n);
  std::vector<std::uint32_t> codes(size * size);
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t j = 0; j < size; ++j) {
      const double* d = &diffs[((row + i) * maps.width + col + j) * n];
      std::uint32_t m = 0;
      for (std::size_t k = 0; k < n; ++k)
        if (std::abs(d[k]) >= mu) m |= 1u << k;
      codes[i * size + j] = encode_pattern(m, config.samples, config.encoding);
    }
  return codes;
}

}  // namespace topodesc
