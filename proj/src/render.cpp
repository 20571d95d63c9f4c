#include "topodesc/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace topodesc {
namespace {

// Coarse viridis control points.
constexpr std::array<std::array<double, 3>, 5> kViridis = {{{68, 1, 84},
                                                            {59, 82, 139},
                                                            {33, 145, 140},
                                                            {94, 201, 98},
                                                            {253, 231, 37}}};

std::array<std::uint8_t, 3> ramp(double t) {
  t = std::clamp(t, 0.0, 1.0) * (kViridis.size() - 1);
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(t), kViridis.size() - 2);
  const double f = t - static_cast<double>(k);
  std::array<std::uint8_t, 3> out{};
  for (int c = 0; c < 3; ++c)
    out[c] = static_cast<std::uint8_t>(std::lround(kViridis[k][c] * (1 - f) + kViridis[k + 1][c] * f));
  return out;
}

void line(io::RgbImage& img, long x0, long y0, long x1, long y1, std::uint8_t g) {
  const long dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const long sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  long err = dx + dy;
  while (true) {
    if (x0 >= 0 && y0 >= 0) img.set(static_cast<std::size_t>(x0), static_cast<std::size_t>(y0), g, g, g);
    if (x0 == x1 && y0 == y1) break;
    const long e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

}  // namespace

io::RgbImage render_diagram(const PersistenceDiagram& diagram, std::size_t size) {
  io::RgbImage img(size, size, 255);
  const long margin = static_cast<long>(size / 10);
  const long lo = margin, hi = static_cast<long>(size) - margin;
  line(img, lo, hi, hi, hi, 0);  // birth axis
  line(img, lo, hi, lo, lo, 0);  // death axis
  line(img, lo, hi, hi, lo, 160);  // diagonal

  double vmin = diagram.value_min, vmax = diagram.value_max;
  if (diagram.points.empty() || !(vmax > vmin)) {
    vmin = diagram.points.empty() ? 0.0 : vmin - 0.5;
    vmax = diagram.points.empty() ? 1.0 : vmax + 0.5;
  }
  const double span = static_cast<double>(hi - lo);
  auto px = [&](double v) { return lo + static_cast<long>(std::lround((v - vmin) / (vmax - vmin) * span)); };
  auto py = [&](double v) { return hi - static_cast<long>(std::lround((v - vmin) / (vmax - vmin) * span)); };
  for (const auto& p : diagram.points) {
    const long x = px(p.birth);
    const long y = p.essential() ? lo : py(p.death);
    const std::array<std::uint8_t, 3> colour = p.dim == 0 ? std::array<std::uint8_t, 3>{31, 119, 180}
                                                          : std::array<std::uint8_t, 3>{214, 39, 40};
    for (long dy = -2; dy <= 2; ++dy)
      for (long dx = -2; dx <= 2; ++dx)
        if (dx * dx + dy * dy <= 5 && x + dx >= 0 && y + dy >= 0)
          img.set(static_cast<std::size_t>(x + dx), static_cast<std::size_t>(y + dy), colour[0], colour[1], colour[2]);
  }
  return img;
}

io::RgbImage render_heatmap(const std::vector<double>& grid, std::size_t resolution, std::size_t size) {
  if (resolution == 0 || grid.size() != resolution * resolution)
    throw std::invalid_argument("heatmap: grid is not resolution x resolution");
  const auto [lo_it, hi_it] = std::minmax_element(grid.begin(), grid.end());
  const double lo = *lo_it, span = *hi_it - *lo_it;
  io::RgbImage img(size, size, 0);
  for (std::size_t y = 0; y < size; ++y) {
    const std::size_t i = resolution - 1 - y * resolution / size;
    for (std::size_t x = 0; x < size; ++x) {
      const std::size_t j = x * resolution / size;
      const double v = grid[i * resolution + j];
      const auto c = ramp(span > 0.0 ? (v - lo) / span : 0.0);
      img.set(x, y, c[0], c[1], c[2]);
    }
  }
  return img;
}

}  // namespace topodesc
