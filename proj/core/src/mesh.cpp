#include "pgfrac/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace pgfrac {

double Mesh::bbox_diagonal() const {
  if (nodes.empty()) return 0.0;
  double xmin = nodes[0][0], xmax = xmin, ymin = nodes[0][1], ymax = ymin;
  for (const auto& p : nodes) {
    xmin = std::min(xmin, p[0]);
    xmax = std::max(xmax, p[0]);
    ymin = std::min(ymin, p[1]);
    ymax = std::max(ymax, p[1]);
  }
  return std::hypot(xmax - xmin, ymax - ymin);
}

double Mesh::cell_measure(const Cell& c) const {
  const auto& p = nodes;
  switch (c.kind) {
    case CellKind::line2:
      return std::hypot(p[c.v[1]][0] - p[c.v[0]][0], p[c.v[1]][1] - p[c.v[0]][1]);
    case CellKind::tri3: {
      const double ax = p[c.v[1]][0] - p[c.v[0]][0], ay = p[c.v[1]][1] - p[c.v[0]][1];
      const double bx = p[c.v[2]][0] - p[c.v[0]][0], by = p[c.v[2]][1] - p[c.v[0]][1];
      return 0.5 * (ax * by - ay * bx);
    }
    case CellKind::quad4: {
      // shoelace; positive for counterclockwise connectivity
      double s = 0.0;
      for (int k = 0; k < 4; ++k) {
        const auto& a = p[c.v[k]];
        const auto& b = p[c.v[(k + 1) % 4]];
        s += a[0] * b[1] - b[0] * a[1];
      }
      return 0.5 * s;
    }
  }
  return 0.0;
}

double Mesh::total_measure() const {
  double s = 0.0;
  for (const auto& c : cells) s += cell_measure(c);
  return s;
}

Mesh make_line_mesh(double length, int n_elems) {
  if (length <= 0.0) throw std::invalid_argument("make_line_mesh: length must be positive");
  if (n_elems < 1) throw std::invalid_argument("make_line_mesh: n_elems must be >= 1");
  Mesh m;
  m.dim = 1;
  m.nodes.resize(n_elems + 1);
  for (int i = 0; i <= n_elems; ++i) m.nodes[i] = {length * i / n_elems, 0.0};
  m.cells.resize(n_elems);
  for (int e = 0; e < n_elems; ++e) m.cells[e] = {CellKind::line2, {e, e + 1, -1, -1}, 2};
  m.boundary_sets["left"] = {0};
  m.boundary_sets["right"] = {n_elems};
  return m;
}

namespace {

// Axis discretization: anchors split [0, L] into intervals, each filled
// uniformly at h_fine (inside [fine_lo, fine_hi]) or h_coarse.
std::vector<double> build_axis(double length, double h_coarse, double fine_lo, double fine_hi,
                               double h_fine, std::vector<double> anchors) {
  anchors.push_back(0.0);
  anchors.push_back(length);
  if (fine_lo > 0.0) anchors.push_back(fine_lo);
  if (fine_hi < length) anchors.push_back(fine_hi);
  std::sort(anchors.begin(), anchors.end());
  anchors.erase(std::unique(anchors.begin(), anchors.end(),
                            [&](double a, double b) { return std::abs(a - b) < 1e-12 * length; }),
                anchors.end());

  std::vector<double> lines{anchors.front()};
  for (std::size_t k = 0; k + 1 < anchors.size(); ++k) {
    const double a = anchors[k], b = anchors[k + 1];
    const double mid = 0.5 * (a + b);
    const double h = (mid >= fine_lo && mid <= fine_hi) ? h_fine : h_coarse;
    const int n = std::max(1, static_cast<int>(std::lround((b - a) / h)));
    for (int i = 1; i <= n; ++i) lines.push_back(a + (b - a) * i / n);
  }
  return lines;
}

int find_line(const std::vector<double>& lines, double value, double tol) {
  for (std::size_t i = 0; i < lines.size(); ++i)
    if (std::abs(lines[i] - value) <= tol) return static_cast<int>(i);
  return -1;
}

}  // namespace

Mesh make_rect_mesh(double width, double height, double h_coarse, const Box& refine_box,
                    double h_fine, const std::optional<NotchSegment>& notch) {
  if (width <= 0.0 || height <= 0.0 || h_coarse <= 0.0 || h_fine <= 0.0)
    throw std::invalid_argument("make_rect_mesh: non-positive dimensions");
  if (h_fine > h_coarse * (1.0 + 1e-12))
    throw std::invalid_argument("make_rect_mesh: h_fine must be <= h_coarse");
  if (refine_box.x0 < -1e-12 * width || refine_box.x1 > width * (1.0 + 1e-12) ||
      refine_box.y0 < -1e-12 * height || refine_box.y1 > height * (1.0 + 1e-12) ||
      refine_box.x0 > refine_box.x1 || refine_box.y0 > refine_box.y1)
    throw std::invalid_argument("make_rect_mesh: refine_box outside domain");

  std::vector<double> x_anchors, y_anchors;
  if (notch) {
    x_anchors = {notch->x0, notch->x1};
    y_anchors = {notch->y};
  }
  const auto xl = build_axis(width, h_coarse, refine_box.x0, refine_box.x1, h_fine, x_anchors);
  const auto yl = build_axis(height, h_coarse, refine_box.y0, refine_box.y1, h_fine, y_anchors);
  const int nx = static_cast<int>(xl.size());
  const int ny = static_cast<int>(yl.size());

  Mesh m;
  m.dim = 2;
  m.nodes.resize(static_cast<std::size_t>(nx) * ny);
  auto node_id = [&](int i, int j) { return j * nx + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) m.nodes[node_id(i, j)] = {xl[i], yl[j]};

  m.cells.reserve(static_cast<std::size_t>(nx - 1) * (ny - 1));
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i)
      m.cells.push_back({CellKind::quad4,
                         {node_id(i, j), node_id(i + 1, j), node_id(i + 1, j + 1), node_id(i, j + 1)},
                         4});

  auto collect = [&](auto&& pred) {
    std::vector<int> out;
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        if (pred(i, j)) out.push_back(node_id(i, j));
    return out;
  };
  m.boundary_sets["left"] = collect([&](int i, int) { return i == 0; });
  m.boundary_sets["right"] = collect([&](int i, int) { return i == nx - 1; });
  m.boundary_sets["bottom"] = collect([&](int, int j) { return j == 0; });
  m.boundary_sets["top"] = collect([&](int, int j) { return j == ny - 1; });

  if (notch) {
    const double tol = 1e-9 * std::max(width, height);
    const int jrow = find_line(yl, notch->y, tol);
    const int i0 = find_line(xl, notch->x0, tol);
    const int i1 = find_line(xl, notch->x1, tol);
    if (jrow < 0 || i0 < 0 || i1 < 0)
      throw std::invalid_argument("make_rect_mesh: notch not alignable with mesh lines");
    if (jrow == 0 || jrow == ny - 1)
      throw std::invalid_argument("make_rect_mesh: notch on domain boundary");

    // Duplicate slit nodes strictly before the tip (the tip node stays
    // shared so the crack faces merge there); cells below the slit line
    // switch to the duplicated row.
    std::vector<int> remap(m.nodes.size(), -1);
    for (int i = i0; i < i1; ++i) {
      const int orig = node_id(i, jrow);
      const int dup = m.n_nodes();
      m.nodes.push_back(m.nodes[orig]);
      remap[orig] = dup;
      m.slit_pairs.push_back({orig, dup});
      for (auto& [name, set] : m.boundary_sets)
        if (std::binary_search(set.begin(), set.end(), orig)) set.push_back(dup);
    }
    for (auto& c : m.cells) {
      double cy = 0.0;
      for (int k = 0; k < c.n; ++k) cy += m.nodes[c.v[k]][1];
      cy /= c.n;
      if (cy < notch->y)
        for (int k = 0; k < c.n; ++k)
          if (remap[c.v[k]] >= 0) c.v[k] = remap[c.v[k]];
    }
    for (auto& [name, set] : m.boundary_sets) std::sort(set.begin(), set.end());
  }
  return m;
}

Mesh select_boundary(Mesh mesh, int axis, double value, const std::string& name) {
  const double tol = 1e-10 * mesh.bbox_diagonal();
  return select_boundary(
      std::move(mesh),
      [axis, value, tol](double x, double y) { return std::abs((axis == 0 ? x : y) - value) <= tol; },
      name);
}

Mesh select_boundary(Mesh mesh, const std::function<bool(double, double)>& predicate,
                     const std::string& name) {
  if (mesh.boundary_sets.count(name))
    throw std::invalid_argument("select_boundary: duplicate set name '" + name + "'");
  std::vector<int> set;
  for (int i = 0; i < mesh.n_nodes(); ++i)
    if (predicate(mesh.nodes[i][0], mesh.nodes[i][1])) set.push_back(i);
  mesh.boundary_sets[name] = std::move(set);
  return mesh;
}

void write_mesh_dump(const Mesh& mesh, std::ostream& out) {
  out << "dim " << mesh.dim << "\n";
  out << "nodes " << mesh.n_nodes() << "\n";
  out.precision(17);
  for (const auto& p : mesh.nodes) out << p[0] << " " << p[1] << "\n";
  out << "cells " << mesh.cells.size() << "\n";
  for (const auto& c : mesh.cells) {
    out << (c.kind == CellKind::line2 ? "line2" : c.kind == CellKind::tri3 ? "tri3" : "quad4");
    for (int k = 0; k < c.n; ++k) out << " " << c.v[k];
    out << "\n";
  }
  out << "boundary_sets " << mesh.boundary_sets.size() << "\n";
  for (const auto& [name, set] : mesh.boundary_sets) {
    out << name << " " << set.size();
    for (int i : set) out << " " << i;
    out << "\n";
  }
  out << "slits " << mesh.slit_pairs.size() << "\n";
  for (const auto& [a, b] : mesh.slit_pairs) out << a << " " << b << "\n";
}

}  // namespace pgfrac
