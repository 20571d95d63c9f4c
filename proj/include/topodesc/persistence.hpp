#pragma once

#include <iosfwd>
#include <limits>
#include <vector>

#include "topodesc/filtration.hpp"

namespace topodesc {

struct DiagramPoint {
  int dim = 0;
  double birth = 0.0;
  double death = std::numeric_limits<double>::infinity();

  bool essential() const { return death == std::numeric_limits<double>::infinity(); }
  double persistence() const { return death - birth; }

  friend bool operator==(const DiagramPoint&, const DiagramPoint&) = default;
  friend auto operator<=>(const DiagramPoint&, const DiagramPoint&) = default;
};

struct PersistenceDiagram {
  std::vector<DiagramPoint> points;
  double value_min = 0.0;
  double value_max = 0.0;

  bool finite() const;
  std::size_t count(int dim) const;
  /// Points sorted by (dim, birth, death); multiset equality is equality of this.
  std::vector<DiagramPoint> sorted() const;
};

bool same_multiset(const PersistenceDiagram& a, const PersistenceDiagram& b);

/// Z/2 persistence pairs by column reduction over the boundary matrix in
/// filtration order. Squares are reduced before edges and every edge that
/// becomes a pivot row of a square column is cleared (twist). Zero-length
/// pairs are kept.
PersistenceDiagram compute_persistence(const CubicalFiltration& filtration);

/// Dense textbook reduction, no optimizations. Independent of
/// compute_persistence: recomputes cell order and faces from coordinates.
/// Rejects complexes larger than `max_cells`.
PersistenceDiagram oracle_persistence(const CubicalFiltration& filtration,
                                      std::size_t max_cells = 2500);

enum class EssentialPolicy { cap_at_max, drop_essential };

PersistenceDiagram finitize(const PersistenceDiagram& diagram, EssentialPolicy policy);

enum class DimensionSelection { merged, h0, h1 };

PersistenceDiagram select_dimensions(const PersistenceDiagram& diagram, DimensionSelection which);

/// CSV with header `dim,birth,death`; essential deaths written as `inf`.
void write_diagram_csv(const PersistenceDiagram& diagram, std::ostream& out);
PersistenceDiagram read_diagram_csv(std::istream& in);

}  // namespace topodesc
