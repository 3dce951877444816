#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pgfrac/mesh.hpp"
#include "pgfrac/sparse.hpp"

namespace pgfrac {

/// Linear Lagrange basis evaluated at one reference point. Reference
/// elements: line2 on [0,1], tri3 on {(0,0),(1,0),(0,1)}, quad4 on [0,1]^2.
struct ElementBasis {
  int n = 0;
  std::array<double, 4> N{};
  std::array<std::array<double, 2>, 4> dN{};  // reference gradients
};

ElementBasis shape_eval(CellKind kind, double xi, double eta = 0.0);

struct QuadraturePoint {
  double xi, eta;
};

struct QuadratureRule {
  std::vector<QuadraturePoint> points;
  std::vector<double> weights;
};

/// Gauss rules exact for the bilinear forms assembled here: 2-point for
/// line2, 3-point for tri3, 2x2 for quad4.
const QuadratureRule& gauss_rule(CellKind kind);

/// Nodal (lumped) rule: points at the element nodes, weights equal to the
/// row sums of the consistent mass on the reference element.
const QuadratureRule& nodal_rule(CellKind kind);

/// Basis data mapped to one physical quadrature point of a cell.
struct MappedBasis {
  int n = 0;
  std::array<double, 4> N{};
  std::array<std::array<double, 2>, 4> grad{};  // physical gradients (d/dx, d/dy)
  double jxw = 0.0;                             // |J| * quadrature weight
};

MappedBasis map_basis(const Mesh& mesh, const Mesh::Cell& cell, const ElementBasis& basis,
                      double weight);

/// Precomputed per-cell quadrature data for assembly loops.
struct CellQuadrature {
  std::vector<MappedBasis> pts;
};
std::vector<CellQuadrature> precompute_quadrature(const Mesh& mesh, bool nodal);

struct DirichletBC {
  std::string set;
  int component = 0;                        // dof component (0 for scalar fields)
  std::function<double(double)> value;      // of time
};

/// Expands boundary-set constraints into (dof, value) pairs at time t for a
/// field with n_comp components per node.
std::vector<std::pair<int, double>> collect_constraints(const Mesh& mesh,
                                                        const std::vector<DirichletBC>& bcs,
                                                        int n_comp, double t);

/// Symmetric elimination: zero row and column, unit diagonal, rhs lifted so
/// the solution reproduces the prescribed values exactly. Requires a
/// structurally symmetric pattern. Throws on conflicting constraints.
void apply_dirichlet(SparseMatrix& a, Vector& b,
                     std::vector<std::pair<int, double>> constraints);

/// Zeroes constrained entries of a residual-style vector (homogeneous form).
void zero_constrained(Vector& v, const std::vector<std::pair<int, double>>& constraints);

}  // namespace pgfrac
