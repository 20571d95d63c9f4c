#include "topodesc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace topodesc {

void SyntheticSpec::validate() const {
  if (width < 1 || height < 1) throw std::invalid_argument("synthetic map must be nonempty");
  if (!(groove_depth > 0.0)) throw std::invalid_argument("groove_depth must be > 0");
  if (!(base_min_wavelength > 0.0) || base_max_wavelength < base_min_wavelength)
    throw std::invalid_argument("base wavelength band must satisfy 0 < min <= max");
  if (!(groove_width > 0.0)) throw std::invalid_argument("groove_width must be > 0");
  if (noise_amplitude < 0.0 || base_amplitude < 0.0 || peck_depth < 0.0 || peck_density < 0.0)
    throw std::invalid_argument("amplitudes and densities must be >= 0");
  if (peck_density > 0.0 && !(peck_radius > 0.0)) throw std::invalid_argument("peck_radius must be > 0");
  for (const auto& s : engraved_shapes) {
    if (s.empty()) throw std::invalid_argument("empty stroke");
    for (const auto& p : s)
      if (p.x < 0.0 || p.y < 0.0 || p.x > static_cast<double>(width - 1) || p.y > static_cast<double>(height - 1))
        throw std::invalid_argument("stroke point outside the map");
  }
}

namespace {

double segment_distance(double px, double py, const StrokePoint& a, const StrokePoint& b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((px - a.x) * vx + (py - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = px - (a.x + t * vx), dy = py - (a.y + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

// Distance to the nearest stroke, evaluated only inside each segment's bounding box grown by `reach`.
std::vector<double> distance_field(std::size_t width, std::size_t height, const std::vector<Stroke>& strokes,
                                   double reach) {
  std::vector<double> dist(width * height, std::numeric_limits<double>::infinity());
  for (const auto& s : strokes) {
    for (std::size_t k = 0; k < s.size(); ++k) {
      const auto& a = s[k];
      const auto& b = s[std::min(k + 1, s.size() - 1)];
      const auto x0 = static_cast<long>(std::floor(std::min(a.x, b.x) - reach));
      const auto x1 = static_cast<long>(std::ceil(std::max(a.x, b.x) + reach));
      const auto y0 = static_cast<long>(std::floor(std::min(a.y, b.y) - reach));
      const auto y1 = static_cast<long>(std::ceil(std::max(a.y, b.y) + reach));
      for (long y = std::max(0L, y0); y <= std::min<long>(static_cast<long>(height) - 1, y1); ++y)
        for (long x = std::max(0L, x0); x <= std::min<long>(static_cast<long>(width) - 1, x1); ++x) {
          double& d = dist[static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)];
          d = std::min(d, segment_distance(static_cast<double>(x), static_cast<double>(y), a, b));
        }
      if (s.size() == 1) break;
    }
  }
  return dist;
}

}  // namespace

LabelMask stroke_support(std::size_t width, std::size_t height, const std::vector<Stroke>& strokes,
                         double groove_width) {
  const auto dist = distance_field(width, height, strokes, groove_width + 1.0);
  LabelMask mask(width, height);
  for (std::size_t i = 0; i < dist.size(); ++i) mask.labels[i] = dist[i] < groove_width ? 1 : 0;
  return mask;
}

std::pair<DepthMap, LabelMask> generate(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t w = spec.width, h = spec.height;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Base relief: random plane waves with a power-law amplitude spectrum.
  DepthMap depth(w, h);
  constexpr int kWaves = 48;
  const double min_wl = spec.base_min_wavelength, max_wl = spec.base_max_wavelength;
  struct Wave {
    double kx, ky, phase, amp;
  };
  std::vector<Wave> waves;
  double power = 0.0;
  for (int k = 0; k < kWaves; ++k) {
    const double wl = min_wl * std::pow(max_wl / min_wl, unit(rng));
    const double theta = 2.0 * std::numbers::pi * unit(rng);
    const double amp = std::pow(wl, spec.base_roughness);
    const double freq = 2.0 * std::numbers::pi / wl;
    waves.push_back({freq * std::cos(theta), freq * std::sin(theta), 2.0 * std::numbers::pi * unit(rng), amp});
    power += 0.5 * amp * amp;
  }
  const double scale = power > 0.0 ? spec.base_amplitude / std::sqrt(power) : 0.0;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      double v = 0.0;
      for (const auto& wv : waves)
        v += wv.amp * std::sin(wv.kx * static_cast<double>(x) + wv.ky * static_cast<double>(y) + wv.phase);
      depth.at(y, x) = scale * v;
    }

  // Engraved bands: cosine-profile depression plus pecking pits, both confined to the support.
  LabelMask mask(w, h);
  if (!spec.engraved_shapes.empty()) {
    const auto dist = distance_field(w, h, spec.engraved_shapes, spec.groove_width + 1.0);
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      if (dist[i] >= spec.groove_width) continue;
      mask.labels[i] = 1;
      support.push_back(i);
      depth.values[i] -= spec.groove_depth * 0.5 * (1.0 + std::cos(std::numbers::pi * dist[i] / spec.groove_width));
    }
    const auto pits = static_cast<std::size_t>(std::llround(spec.peck_density * static_cast<double>(support.size())));
    for (std::size_t k = 0; k < pits && !support.empty(); ++k) {
      const std::size_t centre = support[static_cast<std::size_t>(unit(rng) * static_cast<double>(support.size())) %
                                         support.size()];
      const double cy = static_cast<double>(centre / w), cx = static_cast<double>(centre % w);
      const double radius = spec.peck_radius * (0.7 + 0.6 * unit(rng));
      const double pit = spec.peck_depth * (0.5 + 0.5 * unit(rng));
      const auto r = static_cast<long>(std::ceil(radius));
      for (long dy = -r; dy <= r; ++dy)
        for (long dx = -r; dx <= r; ++dx) {
          const long y = static_cast<long>(cy) + dy, x = static_cast<long>(cx) + dx;
          if (y < 0 || x < 0 || y >= static_cast<long>(h) || x >= static_cast<long>(w)) continue;
          const std::size_t i = static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x);
          if (!mask.labels[i]) continue;
          const double rr = std::sqrt(static_cast<double>(dx * dx + dy * dy));
          if (rr < radius) depth.values[i] -= pit * 0.5 * (1.0 + std::cos(std::numbers::pi * rr / radius));
        }
    }
  }

  for (auto& v : depth.values) v += spec.noise_amplitude * gauss(rng);
  return {std::move(depth), std::move(mask)};
}

std::vector<Stroke> plan_strokes(std::size_t width, std::size_t height, double groove_width,
                                 double target_fraction, double tolerance, std::uint64_t seed) {
  if (!(target_fraction >= 0.0 && target_fraction < 1.0)) throw std::invalid_argument("target fraction must lie in [0, 1)");
  std::vector<Stroke> strokes;
  if (target_fraction == 0.0) return strokes;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double area = static_cast<double>(width * height);
  std::vector<std::uint8_t> covered(width * height, 0);
  std::size_t count = 0;
  const double margin = std::min(groove_width, 0.25 * static_cast<double>(std::min(width, height)));
  const double wmax = static_cast<double>(width - 1), hmax = static_cast<double>(height - 1);

  for (int attempt = 0; attempt < 2000; ++attempt) {
    const double fraction = static_cast<double>(count) / area;
    if (fraction >= target_fraction - tolerance) break;
    Stroke s;
    StrokePoint p{margin + unit(rng) * (wmax - 2 * margin), margin + unit(rng) * (hmax - 2 * margin)};
    s.push_back(p);
    double heading = 2.0 * std::numbers::pi * unit(rng);
    const int segments = 1 + static_cast<int>(unit(rng) * 3.0);
    for (int k = 0; k < segments; ++k) {
      heading += (unit(rng) - 0.5) * std::numbers::pi * 0.8;
      const double len = 0.15 * static_cast<double>(std::min(width, height)) * (1.0 + unit(rng));
      p.x = std::clamp(p.x + len * std::cos(heading), 0.0, wmax);
      p.y = std::clamp(p.y + len * std::sin(heading), 0.0, hmax);
      s.push_back(p);
    }
    const auto add = stroke_support(width, height, {s}, groove_width);
    std::size_t fresh = 0;
    for (std::size_t i = 0; i < add.labels.size(); ++i) fresh += add.labels[i] && !covered[i];
    if (static_cast<double>(count + fresh) / area > target_fraction + tolerance) continue;
    for (std::size_t i = 0; i < add.labels.size(); ++i) covered[i] |= add.labels[i];
    count += fresh;
    strokes.push_back(std::move(s));
  }
  return strokes;
}

std::vector<SyntheticSpec> benchmark_specs(std::size_t count, std::size_t width, std::size_t height,
                                           double target_fraction, std::uint64_t seed) {
  std::vector<SyntheticSpec> specs;
  for (std::size_t k = 0; k < count; ++k) {
    SyntheticSpec s;
    s.width = width;
    s.height = height;
    s.seed = seed + k;
    // Groove width follows the map size so small maps can still reach the target.
    s.groove_width = std::max(2.0, s.groove_width * static_cast<double>(std::min(width, height)) / 512.0);
    s.engraved_shapes = plan_strokes(width, height, s.groove_width, target_fraction, 0.01, s.seed * 7919 + 17);
    specs.push_back(std::move(s));
  }
  return specs;
}

}  // namespace topodesc
