#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "topodesc/grid.hpp"

namespace topodesc {

enum class ClbpEncoding { riu2, ri };

struct ClbpConfig {
  int radius = 5;
  int samples = 16;
  ClbpEncoding encoding = ClbpEncoding::ri;
  /// Magnitude threshold override; by default the mean |d_k| over the whole valid region.
  std::optional<double> magnitude_threshold;

  void validate() const;
};

/// Number of distinct codes an encoding can emit: n + 2 for riu2, 2^n for ri.
std::uint32_t code_count(ClbpEncoding encoding, int samples);

/// Canonical code of an n-bit pattern under the encoding.
std::uint32_t encode_pattern(std::uint32_t pattern, int samples, ClbpEncoding encoding);

struct ClbpMaps {
  std::size_t width = 0;   // valid region width
  std::size_t height = 0;  // valid region height
  std::size_t offset = 0;  // valid region starts at (offset, offset) in the source
  std::vector<std::uint32_t> s_map;
  std::vector<std::uint32_t> m_map;
  double magnitude_threshold = 0.0;
};

/// CLBP_S / CLBP_M code maps over the interior pixels at distance >= radius
/// from the border.
ClbpMaps clbp_maps(const DepthMap& map, const ClbpConfig& config);

/// Circular neighbour differences d_k = neighbour_k - centre for every valid
/// pixel, laid out as [pixel][k].
std::vector<double> clbp_differences(const DepthMap& map, const ClbpConfig& config);

enum class ClbpComponent { s, m };

DepthMap clbp_to_patch(const ClbpMaps& maps, ClbpComponent which);

/// CLBP_M codes for one square window of the valid region with the
/// threshold taken as the mean |d_k| inside that window.
std::vector<std::uint32_t> clbp_m_window(const std::vector<double>& differences, const ClbpMaps& maps,
                                         const ClbpConfig& config, std::size_t row,
                                         std::size_t col, std::size_t size);

}  // namespace topodesc
