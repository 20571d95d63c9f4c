#include "topodesc/filtration.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace topodesc {

CubicalFiltration::CubicalFiltration(std::size_t rows, std::size_t cols,
                                     std::span<const double> pixels, Direction direction)
    : rows_(rows), cols_(cols), direction_(direction) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("filtration needs a nonempty patch");
  if (pixels.size() != rows * cols) throw std::invalid_argument("pixel count mismatch");

  const std::size_t gw = grid_width(), gh = grid_height();
  values_.assign(gw * gh, std::numeric_limits<double>::infinity());
  const double sign = direction == Direction::sublevel ? 1.0 : -1.0;

  // Every pixel pushes its value down onto the 3x3 block of cells it closes.
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = sign * pixels[i * cols + j];
      const std::size_t cy = 2 * i + 1, cx = 2 * j + 1;
      for (std::size_t y = cy - 1; y <= cy + 1; ++y)
        for (std::size_t x = cx - 1; x <= cx + 1; ++x) {
          double& slot = values_[y * gw + x];
          if (v < slot) slot = v;
        }
    }
  }
  // Normalize -0.0 so that values compare and print consistently.
  for (auto& v : values_)
    if (v == 0.0) v = 0.0;

  order_.resize(values_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  std::vector<std::uint8_t> dims(values_.size());
  for (std::uint32_t id = 0; id < dims.size(); ++id) dims[id] = static_cast<std::uint8_t>(dim(id));
  std::sort(order_.begin(), order_.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (values_[a] != values_[b]) return values_[a] < values_[b];
    if (dims[a] != dims[b]) return dims[a] < dims[b];
    return a < b;
  });
  position_.resize(order_.size());
  for (std::uint32_t p = 0; p < order_.size(); ++p) position_[order_[p]] = p;

  for (auto id : order_) {
    const double v = values_[id];
    if (thresholds_.empty() || thresholds_.back() != v) thresholds_.push_back(v);
  }
}

Cell CubicalFiltration::cell(std::uint32_t id) const {
  const auto gw = static_cast<std::uint32_t>(grid_width());
  Cell c;
  c.id = id;
  c.y = id / gw;
  c.x = id % gw;
  c.dim = static_cast<int>(c.y & 1u) + static_cast<int>(c.x & 1u);
  return c;
}

int CubicalFiltration::dim(std::uint32_t id) const {
  const auto gw = static_cast<std::uint32_t>(grid_width());
  return static_cast<int>((id / gw) & 1u) + static_cast<int>((id % gw) & 1u);
}

std::vector<std::uint32_t> CubicalFiltration::boundary(std::uint32_t id) const {
  const auto gw = static_cast<std::uint32_t>(grid_width());
  const std::uint32_t y = id / gw, x = id % gw;
  std::vector<std::uint32_t> faces;
  faces.reserve(4);
  if (y & 1u) {
    faces.push_back(id - gw);
    faces.push_back(id + gw);
  }
  if (x & 1u) {
    faces.push_back(id - 1);
    faces.push_back(id + 1);
  }
  std::sort(faces.begin(), faces.end());
  return faces;
}

std::size_t CubicalFiltration::count(int d) const {
  switch (d) {
    case 0: return (rows_ + 1) * (cols_ + 1);
    case 1: return rows_ * (cols_ + 1) + cols_ * (rows_ + 1);
    case 2: return rows_ * cols_;
    default: return 0;
  }
}

CubicalFiltration build_filtration(const Patch& patch, Direction direction) {
  if (patch.size == 0 || patch.values.empty())
    throw std::invalid_argument("build_filtration: empty patch");
  return CubicalFiltration(patch.size, patch.size, patch.values, direction);
}

CubicalFiltration build_filtration(std::size_t rows, std::size_t cols,
                                   std::span<const double> pixels, Direction direction) {
  return CubicalFiltration(rows, cols, pixels, direction);
}

namespace {

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  std::uint32_t find(std::uint32_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  bool unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

}  // namespace

long euler_characteristic(const CubicalFiltration& f, double r) {
  long chi = 0;
  for (std::uint32_t id = 0; id < f.size(); ++id) {
    if (f.value(id) > r) continue;
    chi += f.dim(id) == 1 ? -1 : 1;
  }
  return chi;
}

BettiNumbers betti_numbers(const CubicalFiltration& f, double r) {
  UnionFind uf(f.size());
  long vertices = 0, merges = 0;
  for (std::uint32_t id = 0; id < f.size(); ++id) {
    if (f.value(id) > r) continue;
    const int d = f.dim(id);
    if (d == 0) {
      ++vertices;
    } else if (d == 1) {
      const auto faces = f.boundary(id);
      if (uf.unite(faces[0], faces[1])) ++merges;
    }
  }
  BettiNumbers b;
  b.b0 = static_cast<int>(vertices - merges);
  b.b1 = static_cast<int>(b.b0 - euler_characteristic(f, r));
  return b;
}

void write_cells_csv(const CubicalFiltration& f, std::ostream& out) {
  out << "id,dim,y,x,value\n";
  const auto old_precision = out.precision(17);
  for (auto id : f.order()) {
    const auto c = f.cell(id);
    out << c.id << ',' << c.dim << ',' << c.y << ',' << c.x << ',' << f.value(id) << '\n';
  }
  out.precision(old_precision);
}

}  // namespace topodesc
