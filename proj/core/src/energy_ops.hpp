#pragma once

// Internal: Gauss-assembled operators of the phase-field energy
//   E(phi) = int( g(phi) psi + (Gc/c0)(alpha(phi)/l + l |grad phi|^2) )
// whose gradient is linear in phi for AT1/AT2:
//   grad E = a phi + b,
//   a = 2 M_psi + [AT2] (2 Gc/(c0 l)) M + (2 l Gc/c0) K,
//   b = -2 f_psi + [AT1] (Gc/(c0 l)) f_N.
// w holds the nodal-rule (lumped) weights, k_plain the plain Laplacian.

#include <vector>

#include "pgfrac/crack.hpp"
#include "pgfrac/fem.hpp"
#include "pgfrac/mesh.hpp"
#include "pgfrac/sparse.hpp"

namespace pgfrac::detail {

struct EnergyOps {
  SparseMatrix a;
  Vector b;
  Vector w;
  SparseMatrix k_plain;
};

inline EnergyOps build_energy_ops(const Mesh& mesh, const std::vector<std::vector<double>>& psi,
                                  const CrackModel& model) {
  EnergyOps ops;
  const int n = mesh.n_nodes();
  const double c0 = model.c0();
  const double at2_mass =
      model.kind == CrackModel::Kind::AT2 ? 2.0 * model.Gc / (c0 * model.l) : 0.0;
  const double at1_load = model.kind == CrackModel::Kind::AT1 ? model.Gc / (c0 * model.l) : 0.0;
  const double grad_coef = 2.0 * model.l * model.Gc / c0;

  std::vector<Triplet> ta, tk;
  ta.reserve(mesh.cells.size() * 16);
  tk.reserve(mesh.cells.size() * 16);
  ops.b.assign(n, 0.0);
  ops.w.assign(n, 0.0);

  for (std::size_t e = 0; e < mesh.cells.size(); ++e) {
    const auto& cell = mesh.cells[e];
    const QuadratureRule& rule = gauss_rule(cell.kind);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const ElementBasis basis = shape_eval(cell.kind, rule.points[q].xi, rule.points[q].eta);
      const MappedBasis mb = map_basis(mesh, cell, basis, rule.weights[q]);
      const double p = psi[e][q];
      for (int i = 0; i < mb.n; ++i) {
        const int gi = cell.v[i];
        ops.b[gi] += (-2.0 * p + at1_load) * mb.N[i] * mb.jxw;
        for (int j = 0; j < mb.n; ++j) {
          const double kij =
              (mb.grad[i][0] * mb.grad[j][0] + mb.grad[i][1] * mb.grad[j][1]) * mb.jxw;
          const double mij = mb.N[i] * mb.N[j] * mb.jxw;
          ta.push_back({gi, cell.v[j], (2.0 * p + at2_mass) * mij + grad_coef * kij});
          tk.push_back({gi, cell.v[j], kij});
        }
      }
    }
    const QuadratureRule& nrule = nodal_rule(cell.kind);
    for (std::size_t q = 0; q < nrule.points.size(); ++q) {
      const ElementBasis basis = shape_eval(cell.kind, nrule.points[q].xi, nrule.points[q].eta);
      const MappedBasis mb = map_basis(mesh, cell, basis, nrule.weights[q]);
      ops.w[cell.v[q]] += mb.jxw;
    }
  }
  ops.a = SparseMatrix::from_triplets(n, n, ta);
  ops.k_plain = SparseMatrix::from_triplets(n, n, tk);
  return ops;
}

}  // namespace pgfrac::detail
