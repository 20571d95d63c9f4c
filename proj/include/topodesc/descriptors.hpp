#pragma once

#include <array>
#include <string>
#include <vector>

#include "topodesc/persistence.hpp"

namespace topodesc {

/// Aggregate statistics over interval lengths d = death - birth, in this order.
struct PdAggDescriptor {
  static constexpr std::size_t kSize = 12;
  static const std::array<std::string, kSize>& names();

  std::array<double, kSize> values{};

  double count() const { return values[0]; }
  double min() const { return values[1]; }
  double max() const { return values[2]; }
  double mean() const { return values[3]; }
  double std() const { return values[4]; }
  double variance() const { return values[5]; }
  double q1() const { return values[6]; }
  double median() const { return values[7]; }
  double q3() const { return values[8]; }
  double sum_sqrt() const { return values[9]; }
  double sum() const { return values[10]; }
  double sum_sq() const { return values[11]; }
};

/// Population statistics; quartiles interpolate linearly between order
/// statistics at position q * (n - 1). Empty input gives all zeros.
PdAggDescriptor pd_agg(const PersistenceDiagram& diagram, bool drop_zero_length = false);
PdAggDescriptor pd_agg_lengths(std::vector<double> lengths);

enum class PiPlane { birth_death, birth_persistence };

struct PiConfig {
  std::size_t resolution = 16;
  double sigma = 0.001;
  bool weighted = false;
  double birth_lo = 0.0;
  double birth_hi = 1.0;
  double death_lo = 0.0;
  double death_hi = 1.0;
  /// Persistence at which the weight ramp saturates.
  double max_persistence = 1.0;
  PiPlane plane = PiPlane::birth_death;

  void validate() const;
  friend bool operator==(const PiConfig&, const PiConfig&) = default;
};

/// resolution x resolution grid. pixels[i * resolution + j] covers birth bin j
/// and death bin i, both counted from the low end of their range.
struct PersistenceImage {
  PiConfig config;
  std::vector<double> pixels;

  double at(std::size_t i, std::size_t j) const { return pixels[i * config.resolution + j]; }
  const std::vector<double>& vector() const { return pixels; }
  double total() const;
};

/// g(b, e): 1 when unweighted, else min(1, (e - b) / max_persistence).
double pi_weight(const DiagramPoint& p, const PiConfig& config);

/// Exact box integrals of the weighted Gaussian sum via the normal CDF.
PersistenceImage persistence_image(const PersistenceDiagram& diagram, const PiConfig& config);

/// Midpoint-rule integration of each pixel on a subdivisions x subdivisions
/// subgrid. Verification only.
PersistenceImage quadrature_oracle_pi(const PersistenceDiagram& diagram, const PiConfig& config,
                                      std::size_t subdivisions);

}  // namespace topodesc
