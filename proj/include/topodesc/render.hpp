#pragma once

#include <filesystem>
#include <vector>

#include "topodesc/image_io.hpp"
#include "topodesc/persistence.hpp"

namespace topodesc {

/// Scatter plot of a diagram with the diagonal; H0 points blue, H1 red.
/// Essential points are drawn at the top edge.
io::RgbImage render_diagram(const PersistenceDiagram& diagram, std::size_t size = 512);

/// Square heatmap of a row-major res x res grid, row 0 drawn at the bottom.
io::RgbImage render_heatmap(const std::vector<double>& grid, std::size_t resolution, std::size_t size = 512);

}  // namespace topodesc
