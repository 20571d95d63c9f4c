#include "topodesc/persistence.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace topodesc {

bool PersistenceDiagram::finite() const {
  return std::none_of(points.begin(), points.end(), [](const auto& p) { return p.essential(); });
}

std::size_t PersistenceDiagram::count(int dim) const {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [dim](const auto& p) { return p.dim == dim; }));
}

std::vector<DiagramPoint> PersistenceDiagram::sorted() const {
  auto out = points;
  std::sort(out.begin(), out.end());
  return out;
}

bool same_multiset(const PersistenceDiagram& a, const PersistenceDiagram& b) {
  return a.sorted() == b.sorted();
}

namespace {

using Column = std::vector<std::uint32_t>;

// scratch <- a xor b, both sorted ascending.
void add_columns(const Column& a, const Column& b, Column& scratch) {
  scratch.clear();
  auto ia = a.begin(), ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      scratch.push_back(*ia++);
    } else if (*ib < *ia) {
      scratch.push_back(*ib++);
    } else {
      ++ia;
      ++ib;
    }
  }
  scratch.insert(scratch.end(), ia, a.end());
  scratch.insert(scratch.end(), ib, b.end());
}

void check_face_monotone(const CubicalFiltration& f) {
  for (std::uint32_t id = 0; id < f.size(); ++id)
    for (auto face : f.boundary(id))
      if (f.value(face) > f.value(id))
        throw std::invalid_argument("filtration is not face-monotone at cell " + std::to_string(id));
}

}  // namespace

PersistenceDiagram compute_persistence(const CubicalFiltration& f) {
  check_face_monotone(f);
  const auto& order = f.order();
  const auto& pos = f.position();
  const std::size_t n = order.size();
  constexpr std::int32_t none = -1;

  // pivot_col[row] = index into `reduced` of the column whose lowest entry is row.
  std::vector<std::int32_t> pivot_col(n, none);
  std::vector<std::uint8_t> cleared(n, 0);
  std::vector<Column> reduced;
  std::vector<std::uint32_t> reduced_owner;
  reduced.reserve(n / 2);
  reduced_owner.reserve(n / 2);

  PersistenceDiagram diagram;
  diagram.value_min = f.value(order.front());
  diagram.value_max = f.value(order.back());

  Column column, scratch;
  for (int dim = 2; dim >= 1; --dim) {
    for (std::uint32_t p = 0; p < n; ++p) {
      const std::uint32_t id = order[p];
      if (f.dim(id) != dim || cleared[p]) continue;
      column.clear();
      const auto gw = static_cast<std::uint32_t>(f.grid_width());
      const std::uint32_t y = id / gw, x = id % gw;
      if (y & 1u) {
        column.push_back(pos[id - gw]);
        column.push_back(pos[id + gw]);
      }
      if (x & 1u) {
        column.push_back(pos[id - 1]);
        column.push_back(pos[id + 1]);
      }
      std::sort(column.begin(), column.end());
      while (!column.empty()) {
        const auto k = pivot_col[column.back()];
        if (k == none) break;
        add_columns(column, reduced[static_cast<std::size_t>(k)], scratch);
        std::swap(column, scratch);
      }
      if (column.empty()) {
        if (dim == 2) throw std::logic_error("unexpected 2-cycle in a planar cubical complex");
        continue;
      }
      const std::uint32_t low = column.back();
      pivot_col[low] = static_cast<std::int32_t>(reduced.size());
      reduced.push_back(column);
      reduced_owner.push_back(p);
      cleared[low] = 1;
      diagram.points.push_back({dim - 1, f.value(order[low]), f.value(id)});
    }
  }

  // Cells with a vanishing column that never became a pivot row are essential.
  std::vector<std::uint8_t> negative(n, 0);
  for (auto owner : reduced_owner) negative[owner] = 1;
  for (std::uint32_t p = 0; p < n; ++p) {
    const std::uint32_t id = order[p];
    if (negative[p] || pivot_col[p] != none) continue;
    diagram.points.push_back({f.dim(id), f.value(id), std::numeric_limits<double>::infinity()});
  }
  return diagram;
}

namespace {

// Reference implementation kept deliberately separate from the fast path.
struct OracleCell {
  std::uint32_t id;
  int dim;
  double value;
};

}  // namespace

PersistenceDiagram oracle_persistence(const CubicalFiltration& f, std::size_t max_cells) {
  const std::size_t n = f.size();
  if (n > max_cells)
    throw std::invalid_argument("oracle_persistence: complex has " + std::to_string(n) +
                                " cells, bound is " + std::to_string(max_cells));
  const std::size_t gw = 2 * f.cols() + 1;

  std::vector<OracleCell> cells;
  cells.reserve(n);
  for (std::uint32_t id = 0; id < n; ++id) {
    const std::size_t y = id / gw, x = id % gw;
    cells.push_back({id, static_cast<int>(y % 2 + x % 2), f.value(id)});
  }
  std::stable_sort(cells.begin(), cells.end(), [](const OracleCell& a, const OracleCell& b) {
    if (a.value != b.value) return a.value < b.value;
    if (a.dim != b.dim) return a.dim < b.dim;
    return a.id < b.id;
  });
  std::vector<std::size_t> index_of(n);
  for (std::size_t i = 0; i < n; ++i) index_of[cells[i].id] = i;

  // Dense boundary matrix over Z/2, one bitset per column.
  const std::size_t words = (n + 63) / 64;
  std::vector<std::vector<std::uint64_t>> matrix(n, std::vector<std::uint64_t>(words, 0));
  auto set_bit = [&](std::size_t col, std::size_t row) { matrix[col][row / 64] ^= 1ull << (row % 64); };
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t y = cells[j].id / gw, x = cells[j].id % gw;
    if (y % 2 == 1) {
      set_bit(j, index_of[(y - 1) * gw + x]);
      set_bit(j, index_of[(y + 1) * gw + x]);
    }
    if (x % 2 == 1) {
      set_bit(j, index_of[y * gw + x - 1]);
      set_bit(j, index_of[y * gw + x + 1]);
    }
  }
  auto low_of = [&](std::size_t col) -> long {
    for (std::size_t w = words; w-- > 0;)
      if (matrix[col][w]) return static_cast<long>(w * 64 + 63 - std::countl_zero(matrix[col][w]));
    return -1;
  };

  std::vector<long> lows(n, -1);
  for (std::size_t j = 0; j < n; ++j) {
    long low = low_of(j);
    bool changed = true;
    while (low >= 0 && changed) {
      changed = false;
      for (std::size_t k = 0; k < j; ++k) {
        if (lows[k] == low) {
          for (std::size_t w = 0; w < words; ++w) matrix[j][w] ^= matrix[k][w];
          low = low_of(j);
          changed = true;
          break;
        }
      }
    }
    lows[j] = low;
  }

  PersistenceDiagram diagram;
  diagram.value_min = cells.front().value;
  diagram.value_max = cells.back().value;
  std::vector<bool> paired(n, false);
  for (std::size_t j = 0; j < n; ++j) {
    if (lows[j] < 0) continue;
    const auto i = static_cast<std::size_t>(lows[j]);
    paired[i] = paired[j] = true;
    diagram.points.push_back({cells[i].dim, cells[i].value, cells[j].value});
  }
  for (std::size_t j = 0; j < n; ++j)
    if (!paired[j] && lows[j] < 0)
      diagram.points.push_back({cells[j].dim, cells[j].value, std::numeric_limits<double>::infinity()});
  return diagram;
}

PersistenceDiagram finitize(const PersistenceDiagram& diagram, EssentialPolicy policy) {
  PersistenceDiagram out;
  out.value_min = diagram.value_min;
  out.value_max = diagram.value_max;
  out.points.reserve(diagram.points.size());
  for (const auto& p : diagram.points) {
    if (!p.essential()) {
      out.points.push_back(p);
    } else if (policy == EssentialPolicy::cap_at_max) {
      out.points.push_back({p.dim, p.birth, diagram.value_max});
    }
  }
  return out;
}

PersistenceDiagram select_dimensions(const PersistenceDiagram& diagram, DimensionSelection which) {
  if (which == DimensionSelection::merged) return diagram;
  const int keep = which == DimensionSelection::h0 ? 0 : 1;
  PersistenceDiagram out;
  out.value_min = diagram.value_min;
  out.value_max = diagram.value_max;
  for (const auto& p : diagram.points)
    if (p.dim == keep) out.points.push_back(p);
  return out;
}

void write_diagram_csv(const PersistenceDiagram& diagram, std::ostream& out) {
  out << "dim,birth,death\n";
  const auto old_precision = out.precision(17);
  for (const auto& p : diagram.points) {
    out << p.dim << ',' << p.birth << ',';
    if (p.essential()) {
      out << "inf";
    } else {
      out << p.death;
    }
    out << '\n';
  }
  out.precision(old_precision);
}

PersistenceDiagram read_diagram_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("dim,birth,death", 0) != 0)
    throw std::runtime_error("diagram CSV: missing header dim,birth,death");
  PersistenceDiagram diagram;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string dim, birth, death;
    if (!std::getline(row, dim, ',') || !std::getline(row, birth, ',') || !std::getline(row, death))
      throw std::runtime_error("diagram CSV: malformed line " + std::to_string(line_no));
    DiagramPoint p;
    p.dim = std::stoi(dim);
    p.birth = std::stod(birth);
    p.death = death == "inf" ? std::numeric_limits<double>::infinity() : std::stod(death);
    lo = std::min(lo, p.birth);
    hi = std::max(hi, p.essential() ? p.birth : p.death);
    diagram.points.push_back(p);
  }
  if (!diagram.points.empty()) {
    diagram.value_min = lo;
    diagram.value_max = hi;
  }
  return diagram;
}

}  // namespace topodesc
