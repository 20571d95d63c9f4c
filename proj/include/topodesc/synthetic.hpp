#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "topodesc/grid.hpp"

namespace topodesc {

struct StrokePoint {
  double x = 0.0;
  double y = 0.0;
};
using Stroke = std::vector<StrokePoint>;

/// Parameters of a synthetic rock surface with engraved (pecked) strokes.
struct SyntheticSpec {
  std::size_t width = 512;
  std::size_t height = 512;
  /// Spectral exponent of the base relief: component amplitude ~ wavelength^roughness.
  double base_roughness = 1.0;
  double base_amplitude = 0.3;
  /// Wavelength band of the base relief in pixels.
  double base_min_wavelength = 6.0;
  double base_max_wavelength = 64.0;
  double groove_depth = 0.6;
  /// Half-width of the engraved band around each stroke, in pixels.
  double groove_width = 48.0;
  std::vector<Stroke> engraved_shapes;
  double noise_amplitude = 0.02;
  /// Pits per pixel inside the engraved support.
  double peck_density = 0.012;
  double peck_depth = 0.25;
  double peck_radius = 3.0;
  std::uint64_t seed = 1;

  void validate() const;
};

std::pair<DepthMap, LabelMask> generate(const SyntheticSpec& spec);

/// Random strokes whose engraved support covers `target_fraction` of the map
/// to within `tolerance`.
std::vector<Stroke> plan_strokes(std::size_t width, std::size_t height, double groove_width,
                                 double target_fraction, double tolerance, std::uint64_t seed);

/// Pixels within `groove_width` of any stroke.
LabelMask stroke_support(std::size_t width, std::size_t height, const std::vector<Stroke>& strokes,
                         double groove_width);

/// `count` specs of size width x height with seeded strokes at the requested
/// class-1 fraction; map k uses seed + k. Groove width scales with min(width, height) / 512.
std::vector<SyntheticSpec> benchmark_specs(std::size_t count, std::size_t width, std::size_t height,
                                           double target_fraction, std::uint64_t seed);

}  // namespace topodesc
