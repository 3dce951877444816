#include "pgfrac/mechanics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace pgfrac {

MechState MechState::zero(const Mesh& mesh) {
  MechState s;
  const int n = mesh.n_nodes() * mesh.dim;
  s.u.assign(n, 0.0);
  s.v.assign(n, 0.0);
  s.a.assign(n, 0.0);
  return s;
}

GenAlphaParams genalpha_params(double rho_inf) {
  if (rho_inf < 0.0 || rho_inf > 1.0)
    throw std::invalid_argument("genalpha_params: rho_inf must lie in [0, 1]");
  GenAlphaParams p;
  p.alpha_f = 1.0 / (1.0 + rho_inf);
  p.alpha_m = (2.0 - rho_inf) / (1.0 + rho_inf);
  p.gamma = 0.5 + p.alpha_m - p.alpha_f;
  p.beta = 0.25 * (1.0 + p.alpha_m - p.alpha_f) * (1.0 + p.alpha_m - p.alpha_f);
  return p;
}

namespace {

// strain at a mapped quadrature point from nodal displacements
SymTensor2 strain_at(const Mesh& mesh, const Mesh::Cell& cell, const MappedBasis& mb,
                     const Vector& u) {
  SymTensor2 e;
  for (int a = 0; a < mb.n; ++a) {
    const double ux = u[cell.v[a] * 2];
    const double uy = u[cell.v[a] * 2 + 1];
    e.xx += mb.grad[a][0] * ux;
    e.yy += mb.grad[a][1] * uy;
    e.xy += 0.5 * (mb.grad[a][1] * ux + mb.grad[a][0] * uy);
  }
  return e;
}

}  // namespace

void assemble_elasticity(const Mesh& mesh, const ElasticParams& p, const Vector& phi,
                         const Vector& u, Vector* f_int, SparseMatrix* tangent,
                         bool isotropic_tangent) {
  const int dim = mesh.dim;
  const int n_dof = mesh.n_nodes() * dim;
  if (f_int) f_int->assign(n_dof, 0.0);
  std::vector<Triplet> trip;
  if (tangent) trip.reserve(mesh.cells.size() * 64);

  for (const auto& cell : mesh.cells) {
    const QuadratureRule& rule = gauss_rule(cell.kind);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const ElementBasis basis = shape_eval(cell.kind, rule.points[q].xi, rule.points[q].eta);
      const MappedBasis mb = map_basis(mesh, cell, basis, rule.weights[q]);
      double phi_q = 0.0;
      for (int a = 0; a < mb.n; ++a) phi_q += mb.N[a] * phi[cell.v[a]];
      const double g = degradation(phi_q);

      if (dim == 1) {
        double eps = 0.0;
        for (int a = 0; a < mb.n; ++a) eps += mb.grad[a][0] * u[cell.v[a]];
        const double sig = g * sigma_a_1d(eps, p.E) + sigma_b_1d(eps, p.E);
        const double dsig = eps > 0.0 ? g * p.E : p.E;
        for (int a = 0; a < mb.n; ++a) {
          if (f_int) (*f_int)[cell.v[a]] += mb.grad[a][0] * sig * mb.jxw;
          if (tangent)
            for (int b = 0; b < mb.n; ++b)
              trip.push_back({cell.v[a], cell.v[b], mb.grad[a][0] * mb.grad[b][0] * dsig * mb.jxw});
        }
        continue;
      }

      const SymTensor2 eps = strain_at(mesh, cell, mb, u);
      const StrainState ss = spectral_split(eps);

      if (f_int) {
        const auto [sa, sb] = sigma_split(ss, p);
        const SymTensor2 sig = sa * g + sb;
        for (int a = 0; a < mb.n; ++a) {
          (*f_int)[cell.v[a] * 2] += (mb.grad[a][0] * sig.xx + mb.grad[a][1] * sig.xy) * mb.jxw;
          (*f_int)[cell.v[a] * 2 + 1] += (mb.grad[a][1] * sig.yy + mb.grad[a][0] * sig.xy) * mb.jxw;
        }
      }
      if (tangent) {
        double D[3][3];
        if (isotropic_tangent) {
          const double l = p.lambda, m = p.mu;
          const double iso[3][3] = {{l + 2 * m, l, 0}, {l, l + 2 * m, 0}, {0, 0, m}};
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) D[i][j] = g * iso[i][j];
        } else {
          const SplitTangent st = split_tangent(ss, p);
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) D[i][j] = g * st.Da[i][j] + st.Db[i][j];
        }
        // K_ab = B_a^T D B_b with B_a = [dNx 0; 0 dNy; dNy dNx]
        for (int a = 0; a < mb.n; ++a) {
          const double ax = mb.grad[a][0], ay = mb.grad[a][1];
          const double Ba[2][3] = {{ax, 0.0, ay}, {0.0, ay, ax}};  // transposed
          for (int b = 0; b < mb.n; ++b) {
            const double bx = mb.grad[b][0], by = mb.grad[b][1];
            const double Bb[3][2] = {{bx, 0.0}, {0.0, by}, {by, bx}};
            for (int ca = 0; ca < 2; ++ca)
              for (int cb = 0; cb < 2; ++cb) {
                double v = 0.0;
                for (int i = 0; i < 3; ++i)
                  for (int j = 0; j < 3; ++j) v += Ba[ca][i] * D[i][j] * Bb[j][cb];
                trip.push_back({cell.v[a] * 2 + ca, cell.v[b] * 2 + cb, v * mb.jxw});
              }
          }
        }
      }
    }
  }
  if (tangent) *tangent = SparseMatrix::from_triplets(n_dof, n_dof, trip);
}

SparseMatrix assemble_mass(const Mesh& mesh, const ElasticParams& p, bool lumped) {
  const int dim = mesh.dim;
  const int n_dof = mesh.n_nodes() * dim;
  std::vector<Triplet> trip;
  for (const auto& cell : mesh.cells) {
    const QuadratureRule& rule = lumped ? nodal_rule(cell.kind) : gauss_rule(cell.kind);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const ElementBasis basis = shape_eval(cell.kind, rule.points[q].xi, rule.points[q].eta);
      const MappedBasis mb = map_basis(mesh, cell, basis, rule.weights[q]);
      for (int a = 0; a < mb.n; ++a)
        for (int b = 0; b < mb.n; ++b) {
          const double m = p.rho * mb.N[a] * mb.N[b] * mb.jxw;
          if (m == 0.0) continue;
          for (int c = 0; c < dim; ++c)
            trip.push_back({cell.v[a] * dim + c, cell.v[b] * dim + c, m});
        }
    }
  }
  return SparseMatrix::from_triplets(n_dof, n_dof, trip);
}

Vector assemble_traction(const Mesh& mesh, const std::vector<TractionBC>& tractions, double t) {
  const int dim = mesh.dim;
  Vector f(mesh.n_nodes() * dim, 0.0);
  if (tractions.empty()) return f;
  if (dim == 1) throw std::invalid_argument("assemble_traction: tractions need a 2D mesh");

  // boundary edges: element faces that occur exactly once
  std::map<std::pair<int, int>, std::pair<int, int>> edge_count;  // sorted -> (count, oriented a)
  for (const auto& cell : mesh.cells) {
    for (int k = 0; k < cell.n; ++k) {
      const int a = cell.v[k], b = cell.v[(k + 1) % cell.n];
      auto key = std::minmax(a, b);
      auto& e = edge_count[{key.first, key.second}];
      e.first++;
      e.second = a;
    }
  }

  for (const auto& tr : tractions) {
    auto it = mesh.boundary_sets.find(tr.set);
    if (it == mesh.boundary_sets.end())
      throw std::invalid_argument("assemble_traction: unknown boundary set '" + tr.set + "'");
    const auto& set = it->second;
    const double s = tr.scale ? tr.scale(t) : 1.0;
    const double tx = tr.traction[0] * s, ty = tr.traction[1] * s;
    for (const auto& [edge, info] : edge_count) {
      if (info.first != 1) continue;
      const auto [a, b] = edge;
      if (!std::binary_search(set.begin(), set.end(), a) ||
          !std::binary_search(set.begin(), set.end(), b))
        continue;
      const double len = std::hypot(mesh.nodes[b][0] - mesh.nodes[a][0],
                                    mesh.nodes[b][1] - mesh.nodes[a][1]);
      // linear shape functions on the edge: each endpoint takes half the load
      f[a * 2] += 0.5 * tx * len;
      f[a * 2 + 1] += 0.5 * ty * len;
      f[b * 2] += 0.5 * tx * len;
      f[b * 2 + 1] += 0.5 * ty * len;
    }
  }
  return f;
}

namespace {

struct NewtonWork {
  const Mesh& mesh;
  const ElasticParams& p;
  const Vector& phi;
  const MechConfig& cfg;
};

}  // namespace

MechStats static_solve(const Mesh& mesh, const ElasticParams& p, const Vector& phi,
                       const std::vector<DirichletBC>& bcs,
                       const std::vector<TractionBC>& tractions, double t, Vector& u,
                       const MechConfig& cfg) {
  MechStats stats;
  const int dim = mesh.dim;
  if (u.size() != static_cast<std::size_t>(mesh.n_nodes() * dim)) u.assign(mesh.n_nodes() * dim, 0.0);
  const auto constraints = collect_constraints(mesh, bcs, dim, t);
  for (const auto& [dof, g] : constraints) u[dof] = g;
  const Vector f_ext = assemble_traction(mesh, tractions, t);

  Vector f_int;
  SparseMatrix k;
  double r0 = -1.0;
  double prev_norm = -1.0;
  for (int it = 0; it <= cfg.newton_max; ++it) {
    assemble_elasticity(mesh, p, phi, u, &f_int, &k, stats.fallback_tangent);
    Vector r(f_ext.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = f_ext[i] - f_int[i];
    zero_constrained(r, constraints);
    const double rn = norm2(r);
    if (r0 < 0.0) r0 = rn;
    stats.residual = rn;
    if (rn <= std::max(cfg.newton_rtol * r0, cfg.newton_atol)) {
      stats.converged = true;
      return stats;
    }
    if (it == cfg.newton_max) break;
    // stalled split tangent: continue with the degraded isotropic one
    if (prev_norm > 0.0 && rn > 0.95 * prev_norm) stats.fallback_tangent = true;
    prev_norm = rn;

    std::vector<std::pair<int, double>> homog;
    homog.reserve(constraints.size());
    for (const auto& [dof, g] : constraints) homog.push_back({dof, 0.0});
    apply_dirichlet(k, r, homog);
    Vector du(r.size(), 0.0);
    const Vector pre = jacobi_precond(k);
    const SolveStats ls = cg_solve(k, r, pre, du, cfg.lin_rtol, cfg.lin_atol, cfg.lin_max_iter);
    stats.linear_iterations += ls.iterations;
    if (!ls.converged && !ls.breakdown)
      throw std::runtime_error("static_solve: linear solver did not converge");
    if (ls.breakdown) {
      // indefinite direction from the split tangent; retry with GMRES
      const SolveStats ls2 = gmres_solve(k, r, pre, du, cfg.lin_rtol, cfg.lin_atol, 30,
                                         cfg.lin_max_iter);
      stats.linear_iterations += ls2.iterations;
      if (!ls2.converged) throw std::runtime_error("static_solve: singular tangent");
      stats.fallback_tangent = true;
    }
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += du[i];
    stats.newton_iterations = it + 1;
  }
  return stats;
}

MechStats genalpha_step(const Mesh& mesh, const ElasticParams& p, const Vector& phi,
                        const std::vector<DirichletBC>& bcs,
                        const std::vector<TractionBC>& tractions, double dt,
                        const GenAlphaParams& ga, const SparseMatrix& mass, MechState& state,
                        const MechConfig& cfg) {
  MechStats stats;
  if (dt <= 0.0) throw std::invalid_argument("genalpha_step: dt must be positive");
  const int dim = mesh.dim;
  const int n = mesh.n_nodes() * dim;
  const double t_new = state.t + dt;
  const double t_af = state.t + ga.alpha_f * dt;

  const auto constraints = collect_constraints(mesh, bcs, dim, t_new);
  const Vector f_ext = assemble_traction(mesh, tractions, t_af);

  const Vector u_n = state.u, v_n = state.v, a_n = state.a;
  Vector u_new = u_n;
  // constant-acceleration predictor
  for (int i = 0; i < n; ++i) u_new[i] += dt * v_n[i] + 0.5 * dt * dt * a_n[i];
  for (const auto& [dof, g] : constraints) u_new[dof] = g;

  const double inv_bdt2 = 1.0 / (ga.beta * dt * dt);
  auto accel_new = [&](const Vector& u, Vector& a_out) {
    a_out.resize(n);
    for (int i = 0; i < n; ++i)
      a_out[i] = inv_bdt2 * (u[i] - u_n[i] - dt * v_n[i]) - (0.5 - ga.beta) / ga.beta * a_n[i];
  };

  Vector a_new(n), u_af(n), a_am(n), f_int, ma(n), r(n);
  SparseMatrix k;
  double r0 = -1.0;
  for (int it = 0; it <= cfg.newton_max; ++it) {
    accel_new(u_new, a_new);
    for (int i = 0; i < n; ++i) {
      u_af[i] = (1.0 - ga.alpha_f) * u_n[i] + ga.alpha_f * u_new[i];
      a_am[i] = (1.0 - ga.alpha_m) * a_n[i] + ga.alpha_m * a_new[i];
    }
    const bool need_tangent = true;
    assemble_elasticity(mesh, p, phi, u_af, &f_int, need_tangent ? &k : nullptr);
    mass.matvec(a_am, ma);
    for (int i = 0; i < n; ++i) r[i] = f_ext[i] - ma[i] - f_int[i];
    zero_constrained(r, constraints);
    const double rn = norm2(r);
    if (r0 < 0.0) r0 = rn;
    stats.residual = rn;
    if (rn <= std::max(cfg.newton_rtol * r0, cfg.newton_atol)) {
      stats.converged = true;
      break;
    }
    if (it == cfg.newton_max) break;

    // J = am/(beta dt^2) M + af K
    SparseMatrix j = k;
    for (auto& v : j.val_) v *= ga.alpha_f;
    const double mscale = ga.alpha_m * inv_bdt2;
    for (int i = 0; i < mass.n_rows_; ++i)
      for (int kk = mass.row_ptr_[i]; kk < mass.row_ptr_[i + 1]; ++kk)
        j.add_at(i, mass.col_idx_[kk], mscale * mass.val_[kk]);

    std::vector<std::pair<int, double>> homog;
    homog.reserve(constraints.size());
    for (const auto& [dof, g] : constraints) homog.push_back({dof, 0.0});
    apply_dirichlet(j, r, homog);
    Vector du(n, 0.0);
    const Vector pre = jacobi_precond(j);
    const SolveStats ls = cg_solve(j, r, pre, du, cfg.lin_rtol, cfg.lin_atol, cfg.lin_max_iter);
    stats.linear_iterations += ls.iterations;
    if (!ls.converged) {
      const SolveStats ls2 = gmres_solve(j, r, pre, du, cfg.lin_rtol, cfg.lin_atol, 30,
                                         cfg.lin_max_iter);
      stats.linear_iterations += ls2.iterations;
      if (!ls2.converged) throw std::runtime_error("genalpha_step: linear solver did not converge");
    }
    for (int i = 0; i < n; ++i) u_new[i] += du[i];
    stats.newton_iterations = it + 1;
  }

  accel_new(u_new, a_new);
  state.u = u_new;
  state.a = a_new;
  for (int i = 0; i < n; ++i)
    state.v[i] = v_n[i] + dt * ((1.0 - ga.gamma) * a_n[i] + ga.gamma * a_new[i]);
  state.t = t_new;
  return stats;
}

void solve_initial_acceleration(const Mesh& mesh, const ElasticParams& p, const Vector& phi,
                                const std::vector<DirichletBC>& bcs,
                                const std::vector<TractionBC>& tractions,
                                const SparseMatrix& mass, MechState& state,
                                const MechConfig& cfg) {
  const int dim = mesh.dim;
  Vector f_int;
  assemble_elasticity(mesh, p, phi, state.u, &f_int, nullptr);
  Vector rhs = assemble_traction(mesh, tractions, state.t);
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= f_int[i];

  // prescribed dofs: second difference of the boundary data
  std::vector<std::pair<int, double>> constraints;
  const double h = 1e-7;
  for (const auto& bc : bcs) {
    const auto& set = mesh.boundary_sets.at(bc.set);
    auto g = [&](double t) { return bc.value ? bc.value(t) : 0.0; };
    const double acc = (g(state.t + 2 * h) - 2 * g(state.t + h) + g(state.t)) / (h * h);
    for (int node : set) constraints.push_back({node * dim + bc.component, acc});
  }
  SparseMatrix m = mass;
  apply_dirichlet(m, rhs, constraints);
  Vector a0(rhs.size(), 0.0);
  const Vector pre = jacobi_precond(m);
  const SolveStats st = cg_solve(m, rhs, pre, a0, cfg.lin_rtol, cfg.lin_atol, cfg.lin_max_iter);
  if (!st.converged)
    throw std::runtime_error("solve_initial_acceleration: mass solve did not converge");
  state.a = a0;
}

DrivingField compute_psi_a(const Mesh& mesh, const ElasticParams& p, const Vector& u) {
  DrivingField f = DrivingField::zero(mesh);
  for (std::size_t e = 0; e < mesh.cells.size(); ++e) {
    const auto& cell = mesh.cells[e];
    const QuadratureRule& rule = gauss_rule(cell.kind);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const ElementBasis basis = shape_eval(cell.kind, rule.points[q].xi, rule.points[q].eta);
      const MappedBasis mb = map_basis(mesh, cell, basis, rule.weights[q]);
      if (mesh.dim == 1) {
        double eps = 0.0;
        for (int a = 0; a < mb.n; ++a) eps += mb.grad[a][0] * u[cell.v[a]];
        f.values[e][q] = psi_a_1d(eps, p.E);
      } else {
        const StrainState ss = spectral_split(strain_at(mesh, cell, mb, u));
        f.values[e][q] = psi_split(ss, p).first;
      }
    }
  }
  return f;
}

}  // namespace pgfrac
