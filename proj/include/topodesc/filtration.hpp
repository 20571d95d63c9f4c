#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "topodesc/grid.hpp"

namespace topodesc {

enum class Direction { sublevel, superlevel };

/// Cell of the 2D cubical complex in doubled ("Khalimsky") coordinates:
/// the dimension equals the number of odd coordinates, and pixel (i, j)
/// is the 2-cell at (2i+1, 2j+1).
struct Cell {
  std::uint32_t id = 0;
  int dim = 0;
  std::uint32_t y = 0;
  std::uint32_t x = 0;
};

/// Filtered closed cubical complex on an H x W pixel grid (T-construction).
///
/// Cell ids are dense row-major indices into the (2H+1) x (2W+1) doubled
/// grid. Each pixel's 2-cell carries the pixel value (negated for
/// superlevel filtrations); each edge and vertex carries the minimum over
/// its incident 2-cells, so every face enters no later than its cofaces.
/// `order` lists all ids sorted by (value, dim, id).
class CubicalFiltration {
 public:
  CubicalFiltration() = default;
  CubicalFiltration(std::size_t rows, std::size_t cols, std::span<const double> pixels,
                    Direction direction);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t grid_width() const { return 2 * cols_ + 1; }
  std::size_t grid_height() const { return 2 * rows_ + 1; }
  std::size_t size() const { return values_.size(); }
  Direction direction() const { return direction_; }

  Cell cell(std::uint32_t id) const;
  int dim(std::uint32_t id) const;
  double value(std::uint32_t id) const { return values_[id]; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<std::uint32_t>& order() const { return order_; }
  /// Position of each cell id within `order()`.
  const std::vector<std::uint32_t>& position() const { return position_; }
  /// Strictly increasing distinct filtration values.
  const std::vector<double>& thresholds() const { return thresholds_; }

  /// Codimension-one faces of a cell (0, 2 or 4 ids).
  std::vector<std::uint32_t> boundary(std::uint32_t id) const;
  std::size_t count(int dim) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Direction direction_ = Direction::sublevel;
  std::vector<double> values_;
  std::vector<std::uint32_t> order_;
  std::vector<std::uint32_t> position_;
  std::vector<double> thresholds_;
};

CubicalFiltration build_filtration(const Patch& patch, Direction direction = Direction::sublevel);
CubicalFiltration build_filtration(std::size_t rows, std::size_t cols,
                                   std::span<const double> pixels,
                                   Direction direction = Direction::sublevel);

struct BettiNumbers {
  int b0 = 0;
  int b1 = 0;
  friend bool operator==(const BettiNumbers&, const BettiNumbers&) = default;
};

/// Betti numbers of the sublevel complex X_r = { cells with value <= r }.
BettiNumbers betti_numbers(const CubicalFiltration& filtration, double r);

/// Euler characteristic #vertices - #edges + #squares of X_r.
long euler_characteristic(const CubicalFiltration& filtration, double r);

/// Debug dump: header `id,dim,y,x,value`, one row per cell in filtration order.
void write_cells_csv(const CubicalFiltration& filtration, std::ostream& out);

}  // namespace topodesc
