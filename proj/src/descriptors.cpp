#include "topodesc/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace topodesc {

const std::array<std::string, PdAggDescriptor::kSize>& PdAggDescriptor::names() {
  static const std::array<std::string, kSize> kNames = {
      "count", "min", "max", "mean", "std", "variance",
      "q1", "median", "q3", "sum_sqrt", "sum", "sum_sq"};
  return kNames;
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

PdAggDescriptor pd_agg_lengths(std::vector<double> d) {
  PdAggDescriptor out;
  if (d.empty()) return out;
  std::sort(d.begin(), d.end());
  const double n = static_cast<double>(d.size());
  double sum = 0.0, sum_sqrt = 0.0, sum_sq = 0.0;
  for (double v : d) {
    sum += v;
    sum_sqrt += std::sqrt(v);
    sum_sq += v * v;
  }
  const double mean = sum / n;
  double var = 0.0;
  for (double v : d) var += (v - mean) * (v - mean);
  var /= n;
  out.values = {n,
                d.front(),
                d.back(),
                mean,
                std::sqrt(var),
                var,
                quantile_sorted(d, 0.25),
                quantile_sorted(d, 0.5),
                quantile_sorted(d, 0.75),
                sum_sqrt,
                sum,
                sum_sq};
  return out;
}

PdAggDescriptor pd_agg(const PersistenceDiagram& diagram, bool drop_zero_length) {
  std::vector<double> lengths;
  lengths.reserve(diagram.points.size());
  for (const auto& p : diagram.points) {
    if (p.essential()) throw std::invalid_argument("pd_agg: diagram has essential points; finitize first");
    const double d = p.persistence();
    if (drop_zero_length && d == 0.0) continue;
    lengths.push_back(d);
  }
  return pd_agg_lengths(std::move(lengths));
}

void PiConfig::validate() const {
  if (resolution < 1) throw std::invalid_argument("PI resolution must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("PI sigma must be > 0");
  if (!(birth_lo < birth_hi) || !(death_lo < death_hi))
    throw std::invalid_argument("PI ranges need lo < hi");
  if (weighted && !(max_persistence > 0.0))
    throw std::invalid_argument("weighted PI needs max_persistence > 0");
}

double PersistenceImage::total() const { return std::accumulate(pixels.begin(), pixels.end(), 0.0); }

double pi_weight(const DiagramPoint& p, const PiConfig& config) {
  if (!config.weighted) return 1.0;
  return std::min(1.0, std::max(0.0, p.persistence()) / config.max_persistence);
}

namespace {

// Phi(b) - Phi(a) for a <= b, evaluated on the side that avoids cancellation.
double normal_mass(double a, double b) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  if (a >= 0.0) return 0.5 * (std::erfc(a * inv_sqrt2) - std::erfc(b * inv_sqrt2));
  if (b <= 0.0) return 0.5 * (std::erfc(-b * inv_sqrt2) - std::erfc(-a * inv_sqrt2));
  return 1.0 - 0.5 * (std::erfc(-a * inv_sqrt2) + std::erfc(b * inv_sqrt2));
}

// Beyond this many sigmas the Gaussian tail is below 1e-32 and bins are skipped.
constexpr double kTailSigmas = 12.0;

// Per-bin masses along one axis for a Gaussian centred at `mu`; returns the
// first bin index touched and fills `mass` for the contiguous touched range.
std::size_t axis_masses(double mu, double sigma, double lo, double hi, std::size_t bins,
                        std::vector<double>& mass) {
  mass.clear();
  const double width = (hi - lo) / static_cast<double>(bins);
  const double from = (mu - kTailSigmas * sigma - lo) / width;
  const double to = (mu + kTailSigmas * sigma - lo) / width;
  if (to < 0.0 || from >= static_cast<double>(bins)) return bins;
  const auto first = static_cast<std::size_t>(std::max(0.0, std::floor(from)));
  const auto last = static_cast<std::size_t>(std::min(static_cast<double>(bins - 1), std::floor(to)));
  for (std::size_t k = first; k <= last; ++k) {
    const double edge_lo = lo + width * static_cast<double>(k);
    const double edge_hi = k + 1 == bins ? hi : lo + width * static_cast<double>(k + 1);
    mass.push_back(normal_mass((edge_lo - mu) / sigma, (edge_hi - mu) / sigma));
  }
  return first;
}

double vertical_coordinate(const DiagramPoint& p, PiPlane plane) {
  return plane == PiPlane::birth_death ? p.death : p.death - p.birth;
}

}  // namespace

PersistenceImage persistence_image(const PersistenceDiagram& diagram, const PiConfig& config) {
  config.validate();
  const std::size_t res = config.resolution;
  PersistenceImage image{config, std::vector<double>(res * res, 0.0)};
  std::vector<double> mx, my;
  for (const auto& p : diagram.points) {
    if (p.essential()) throw std::invalid_argument("persistence_image: finitize the diagram first");
    const double g = pi_weight(p, config);
    if (g == 0.0) continue;
    const std::size_t jx = axis_masses(p.birth, config.sigma, config.birth_lo, config.birth_hi, res, mx);
    if (mx.empty()) continue;
    const std::size_t iy = axis_masses(vertical_coordinate(p, config.plane), config.sigma,
                                       config.death_lo, config.death_hi, res, my);
    if (my.empty()) continue;
    for (std::size_t a = 0; a < my.size(); ++a) {
      double* row = &image.pixels[(iy + a) * res + jx];
      const double wy = g * my[a];
      for (std::size_t b = 0; b < mx.size(); ++b) row[b] += wy * mx[b];
    }
  }
  return image;
}

PersistenceImage quadrature_oracle_pi(const PersistenceDiagram& diagram, const PiConfig& config,
                                      std::size_t subdivisions) {
  config.validate();
  if (subdivisions < 16) throw std::invalid_argument("quadrature oracle needs >= 16 subdivisions");
  const std::size_t res = config.resolution;
  PersistenceImage image{config, std::vector<double>(res * res, 0.0)};
  const double bx = (config.birth_hi - config.birth_lo) / static_cast<double>(res);
  const double by = (config.death_hi - config.death_lo) / static_cast<double>(res);
  const double hx = bx / static_cast<double>(subdivisions);
  const double hy = by / static_cast<double>(subdivisions);
  const double s = config.sigma;
  const double norm = 1.0 / (2.0 * std::numbers::pi * s * s);

  // The integrand is g * N(x) * N(y) per point, so the 2D midpoint sum over a
  // pixel factorizes into the product of two 1D midpoint sums.
  std::vector<double> sx(res), sy(res);
  for (const auto& p : diagram.points) {
    if (p.essential()) throw std::invalid_argument("quadrature_oracle_pi: finitize first");
    const double g = pi_weight(p, config);
    const double vy = vertical_coordinate(p, config.plane);
    for (std::size_t k = 0; k < res; ++k) {
      double ax = 0.0, ay = 0.0;
      for (std::size_t m = 0; m < subdivisions; ++m) {
        const double x = config.birth_lo + bx * static_cast<double>(k) + hx * (static_cast<double>(m) + 0.5);
        const double y = config.death_lo + by * static_cast<double>(k) + hy * (static_cast<double>(m) + 0.5);
        ax += std::exp(-0.5 * (x - p.birth) * (x - p.birth) / (s * s));
        ay += std::exp(-0.5 * (y - vy) * (y - vy) / (s * s));
      }
      sx[k] = ax * hx;
      sy[k] = ay * hy;
    }
    for (std::size_t i = 0; i < res; ++i)
      for (std::size_t j = 0; j < res; ++j) image.pixels[i * res + j] += g * norm * sy[i] * sx[j];
  }
  return image;
}

}  // namespace topodesc
