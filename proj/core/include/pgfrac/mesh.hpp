#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pgfrac {

enum class CellKind { line2, tri3, quad4 };

inline int cell_nodes(CellKind k) {
  switch (k) {
    case CellKind::line2: return 2;
    case CellKind::tri3: return 3;
    case CellKind::quad4: return 4;
  }
  return 0;
}

/// Unstructured 1D/2D mesh. Immutable after construction; geometric notches
/// are realized as slits (duplicated node rows), so crack faces are
/// coincident in space but topologically disconnected.
struct Mesh {
  int dim = 2;
  std::vector<std::array<double, 2>> nodes;  // y = 0 for 1D meshes

  struct Cell {
    CellKind kind;
    std::array<int, 4> v{-1, -1, -1, -1};
    int n = 0;
  };
  std::vector<Cell> cells;

  std::map<std::string, std::vector<int>> boundary_sets;  // sorted node indices
  std::vector<std::pair<int, int>> slit_pairs;            // (original, duplicate)

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  double bbox_diagonal() const;
  /// Sum of element measures (areas in 2D, lengths in 1D).
  double total_measure() const;
  double cell_measure(const Cell& c) const;
};

Mesh make_line_mesh(double length, int n_elems);

struct Box {
  double x0, y0, x1, y1;
};

/// Horizontal notch segment at height y, spanning [x0, x1].
struct NotchSegment {
  double x0, x1, y;
};

/// Structured quad mesh on [0,w] x [0,h], graded in a single step from
/// h_coarse outside the refine box to h_fine inside it (tensor grid, so the
/// grading is hanging-node free). Boundary sets: left/right/bottom/top.
Mesh make_rect_mesh(double width, double height, double h_coarse, const Box& refine_box,
                    double h_fine, const std::optional<NotchSegment>& notch = std::nullopt);

/// ASCII Gmsh MSH v2.2 subset: $Nodes/$Elements, element types 1/2/3,
/// physical tags on line elements become boundary node sets named by tag.
Mesh read_gmsh(std::istream& in);
Mesh read_gmsh_file(const std::string& path);
void write_gmsh(const Mesh& mesh, std::ostream& out);

/// Plain-text node/element listing for fixtures.
void write_mesh_dump(const Mesh& mesh, std::ostream& out);

/// Adds the named node set {i : |x_axis(i) - value| <= 1e-10 * bbox diagonal}.
Mesh select_boundary(Mesh mesh, int axis, double value, const std::string& name);
Mesh select_boundary(Mesh mesh, const std::function<bool(double, double)>& predicate,
                     const std::string& name);

}  // namespace pgfrac
