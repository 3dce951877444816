#include "pgfrac/fem.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace pgfrac {

ElementBasis shape_eval(CellKind kind, double xi, double eta) {
  ElementBasis b;
  switch (kind) {
    case CellKind::line2:
      b.n = 2;
      b.N = {1.0 - xi, xi, 0.0, 0.0};
      b.dN = {{{-1.0, 0.0}, {1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}}};
      break;
    case CellKind::tri3:
      b.n = 3;
      b.N = {1.0 - xi - eta, xi, eta, 0.0};
      b.dN = {{{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}, {0.0, 0.0}}};
      break;
    case CellKind::quad4:
      b.n = 4;
      b.N = {(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta};
      b.dN = {{{-(1 - eta), -(1 - xi)}, {1 - eta, -xi}, {eta, xi}, {-eta, 1 - xi}}};
      break;
  }
  return b;
}

const QuadratureRule& gauss_rule(CellKind kind) {
  static const double g0 = 0.5 - 0.5 / std::sqrt(3.0);
  static const double g1 = 0.5 + 0.5 / std::sqrt(3.0);
  static const QuadratureRule line{{{g0, 0.0}, {g1, 0.0}}, {0.5, 0.5}};
  static const QuadratureRule tri{
      {{1.0 / 6.0, 1.0 / 6.0}, {2.0 / 3.0, 1.0 / 6.0}, {1.0 / 6.0, 2.0 / 3.0}},
      {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0}};
  static const QuadratureRule quad{{{g0, g0}, {g1, g0}, {g1, g1}, {g0, g1}},
                                   {0.25, 0.25, 0.25, 0.25}};
  switch (kind) {
    case CellKind::line2: return line;
    case CellKind::tri3: return tri;
    case CellKind::quad4: return quad;
  }
  return quad;
}

const QuadratureRule& nodal_rule(CellKind kind) {
  static const QuadratureRule line{{{0.0, 0.0}, {1.0, 0.0}}, {0.5, 0.5}};
  static const QuadratureRule tri{{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}},
                                  {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0}};
  static const QuadratureRule quad{{{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}},
                                   {0.25, 0.25, 0.25, 0.25}};
  switch (kind) {
    case CellKind::line2: return line;
    case CellKind::tri3: return tri;
    case CellKind::quad4: return quad;
  }
  return quad;
}

MappedBasis map_basis(const Mesh& mesh, const Mesh::Cell& cell, const ElementBasis& basis,
                      double weight) {
  MappedBasis out;
  out.n = basis.n;
  out.N = basis.N;

  if (mesh.dim == 1) {
    const double dx = mesh.nodes[cell.v[1]][0] - mesh.nodes[cell.v[0]][0];
    if (dx <= 0.0) throw std::runtime_error("map_basis: degenerate 1D element");
    for (int a = 0; a < basis.n; ++a) out.grad[a] = {basis.dN[a][0] / dx, 0.0};
    out.jxw = dx * weight;
    return out;
  }

  // J = d(x,y)/d(xi,eta)
  double j00 = 0, j01 = 0, j10 = 0, j11 = 0;
  for (int a = 0; a < basis.n; ++a) {
    const auto& p = mesh.nodes[cell.v[a]];
    j00 += basis.dN[a][0] * p[0];
    j01 += basis.dN[a][1] * p[0];
    j10 += basis.dN[a][0] * p[1];
    j11 += basis.dN[a][1] * p[1];
  }
  const double det = j00 * j11 - j01 * j10;
  if (det <= 0.0) throw std::runtime_error("map_basis: degenerate element (non-positive Jacobian)");
  const double inv = 1.0 / det;
  // dN/dx = J^{-T} dN/dxi
  for (int a = 0; a < basis.n; ++a) {
    out.grad[a][0] = inv * (j11 * basis.dN[a][0] - j10 * basis.dN[a][1]);
    out.grad[a][1] = inv * (-j01 * basis.dN[a][0] + j00 * basis.dN[a][1]);
  }
  out.jxw = det * weight;
  return out;
}

std::vector<CellQuadrature> precompute_quadrature(const Mesh& mesh, bool nodal) {
  std::vector<CellQuadrature> out(mesh.cells.size());
  for (std::size_t e = 0; e < mesh.cells.size(); ++e) {
    const auto& cell = mesh.cells[e];
    const QuadratureRule& rule = nodal ? nodal_rule(cell.kind) : gauss_rule(cell.kind);
    out[e].pts.reserve(rule.points.size());
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const ElementBasis b = shape_eval(cell.kind, rule.points[q].xi, rule.points[q].eta);
      out[e].pts.push_back(map_basis(mesh, cell, b, rule.weights[q]));
    }
  }
  return out;
}

std::vector<std::pair<int, double>> collect_constraints(const Mesh& mesh,
                                                        const std::vector<DirichletBC>& bcs,
                                                        int n_comp, double t) {
  std::vector<std::pair<int, double>> out;
  for (const auto& bc : bcs) {
    auto it = mesh.boundary_sets.find(bc.set);
    if (it == mesh.boundary_sets.end())
      throw std::invalid_argument("collect_constraints: unknown boundary set '" + bc.set + "'");
    const double g = bc.value ? bc.value(t) : 0.0;
    for (int node : it->second) out.push_back({node * n_comp + bc.component, g});
  }
  return out;
}

void apply_dirichlet(SparseMatrix& a, Vector& b,
                     std::vector<std::pair<int, double>> constraints) {
  std::sort(constraints.begin(), constraints.end());
  for (std::size_t k = 0; k + 1 < constraints.size(); ++k)
    if (constraints[k].first == constraints[k + 1].first &&
        constraints[k].second != constraints[k + 1].second)
      throw std::invalid_argument("apply_dirichlet: conflicting constraints on dof " +
                                  std::to_string(constraints[k].first));
  constraints.erase(std::unique(constraints.begin(), constraints.end()), constraints.end());

  std::vector<char> is_constrained(a.rows(), 0);
  Vector value(a.rows(), 0.0);
  for (const auto& [dof, g] : constraints) {
    is_constrained[dof] = 1;
    value[dof] = g;
  }

  for (int i = 0; i < a.rows(); ++i) {
    if (is_constrained[i]) {
      for (int k = a.row_ptr_[i]; k < a.row_ptr_[i + 1]; ++k)
        a.val_[k] = (a.col_idx_[k] == i) ? 1.0 : 0.0;
      b[i] = value[i];
    } else {
      for (int k = a.row_ptr_[i]; k < a.row_ptr_[i + 1]; ++k) {
        const int j = a.col_idx_[k];
        if (is_constrained[j]) {
          b[i] -= a.val_[k] * value[j];
          a.val_[k] = 0.0;
        }
      }
    }
  }
}

void zero_constrained(Vector& v, const std::vector<std::pair<int, double>>& constraints) {
  for (const auto& [dof, g] : constraints) v[dof] = 0.0;
}

}  // namespace pgfrac
