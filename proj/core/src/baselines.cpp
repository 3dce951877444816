#include "pgfrac/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "energy_ops.hpp"
#include "pgfrac/fem.hpp"

namespace pgfrac {

HistoryField HistoryField::zero(const Mesh& mesh) {
  HistoryField h;
  h.H.resize(mesh.cells.size());
  for (std::size_t e = 0; e < mesh.cells.size(); ++e)
    h.H[e].assign(gauss_rule(mesh.cells[e].kind).points.size(), 0.0);
  return h;
}

void history_update(HistoryField& h, const DrivingField& psi_a) {
  if (h.H.size() != psi_a.values.size())
    throw std::invalid_argument("history_update: quadrature layout mismatch");
  for (std::size_t e = 0; e < h.H.size(); ++e) {
    if (h.H[e].size() != psi_a.values[e].size())
      throw std::invalid_argument("history_update: quadrature layout mismatch");
    for (std::size_t q = 0; q < h.H[e].size(); ++q)
      h.H[e][q] = std::max(h.H[e][q], psi_a.values[e][q]);
  }
}

namespace {

Vector solve_linear(const SparseMatrix& a_in, Vector rhs, const BaselineConfig& cfg,
                    const std::vector<std::pair<int, double>>& constraints) {
  SparseMatrix a = a_in;
  apply_dirichlet(a, rhs, constraints);
  Vector x(rhs.size(), 0.0);
  const Vector pre = jacobi_precond(a);
  const SolveStats st = cg_solve(a, rhs, pre, x, cfg.lin_rtol, cfg.lin_atol, cfg.lin_max_iter);
  if (!st.converged) {
    // fall back to GMRES before giving up; the operator can lose definiteness
    // only through pathological inputs
    const SolveStats st2 =
        gmres_solve(a, rhs, pre, x, cfg.lin_rtol, cfg.lin_atol, 30, cfg.lin_max_iter);
    if (!st2.converged) throw std::runtime_error("baseline solve: linear solver did not converge");
  }
  return x;
}

}  // namespace

Vector unconstrained_phi_solve(const Mesh& mesh, const DrivingField& drive,
                               const DamageState& dmg, const BaselineConfig& cfg,
                               const std::vector<std::pair<int, double>>& phi_constraints) {
  const detail::EnergyOps ops = detail::build_energy_ops(mesh, drive.values, dmg.model);
  Vector rhs(ops.b.size());
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -ops.b[i];
  return solve_linear(ops.a, std::move(rhs), cfg, phi_constraints);
}

Vector hf_phi_solve(const Mesh& mesh, const HistoryField& h, const DamageState& dmg,
                    const BaselineConfig& cfg,
                    const std::vector<std::pair<int, double>>& phi_constraints,
                    bool use_active_set) {
  const detail::EnergyOps ops = detail::build_energy_ops(mesh, h.H, dmg.model);
  const int n = mesh.n_nodes();
  Vector rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = -ops.b[i];

  if (dmg.model.kind == CrackModel::Kind::AT2 || !use_active_set)
    return solve_linear(ops.a, rhs, cfg, phi_constraints);

  // AT1: reduced-space active-set Newton on 0 <= phi <= 1. The active set is
  // re-identified from bound violations and multiplier signs each pass.
  std::vector<int> active(n, 0);  // -1 lower, +1 upper, 0 free
  Vector phi(n, 0.0);
  for (int pass = 0; pass < cfg.active_set_max; ++pass) {
    std::vector<std::pair<int, double>> cons = phi_constraints;
    for (int i = 0; i < n; ++i) {
      if (active[i] == -1) cons.push_back({i, 0.0});
      if (active[i] == +1) cons.push_back({i, 1.0});
    }
    phi = solve_linear(ops.a, rhs, cfg, cons);

    // gradient of the energy at the constrained solution
    Vector grad = ops.a * phi;
    for (int i = 0; i < n; ++i) grad[i] += ops.b[i];

    bool changed = false;
    for (int i = 0; i < n; ++i) {
      const bool pinned_by_bc =
          std::any_of(phi_constraints.begin(), phi_constraints.end(),
                      [i](const auto& c) { return c.first == i; });
      if (pinned_by_bc) continue;
      if (active[i] == 0) {
        if (phi[i] < -cfg.kkt_tol) { active[i] = -1; changed = true; }
        else if (phi[i] > 1.0 + cfg.kkt_tol) { active[i] = +1; changed = true; }
      } else if (active[i] == -1) {
        if (grad[i] < -cfg.kkt_tol) { active[i] = 0; changed = true; }
      } else {
        if (grad[i] > cfg.kkt_tol) { active[i] = 0; changed = true; }
      }
    }
    if (!changed) return phi;
  }
  throw std::runtime_error("hf_phi_solve: active-set iteration cap reached");
}

double default_gamma_pen(const CrackModel& model) { return 1e3 * model.Gc / model.l; }

Vector penalty_phi_solve(const Mesh& mesh, const DrivingField& drive, const DamageState& dmg,
                         double gamma_pen, const BaselineConfig& cfg,
                         const std::vector<std::pair<int, double>>& phi_constraints) {
  if (gamma_pen <= 0.0) throw std::invalid_argument("penalty_phi_solve: gamma_pen must be positive");
  const detail::EnergyOps ops = detail::build_energy_ops(mesh, drive.values, dmg.model);
  const int n = mesh.n_nodes();

  Vector phi = dmg.phi;
  auto residual = [&](const Vector& p, Vector& r, Vector* active_diag) {
    ops.a.matvec(p, r);
    if (active_diag) active_diag->assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
      r[i] += ops.b[i];
      const double lo_gap = dmg.phi_prev[i] - p[i];  // irreversibility
      const double hi_gap = p[i] - 1.0;
      const double neg_gap = -p[i];
      r[i] += gamma_pen * ops.w[i] *
              (-macaulay_pos(lo_gap) + macaulay_pos(hi_gap) - macaulay_pos(neg_gap));
      if (active_diag) {
        double d = 0.0;
        if (lo_gap > 0.0) d += 1.0;
        if (hi_gap > 0.0) d += 1.0;
        if (neg_gap > 0.0) d += 1.0;
        (*active_diag)[i] = gamma_pen * ops.w[i] * d;
      }
    }
  };

  Vector r(n), active_diag(n);
  residual(phi, r, &active_diag);
  zero_constrained(r, phi_constraints);
  const double r0 = norm2(r);
  const double target = std::max(cfg.newton_rtol * r0, cfg.newton_atol);

  for (int it = 0; it < cfg.newton_max; ++it) {
    if (norm2(r) <= target) return phi;
    SparseMatrix j = ops.a;
    for (int i = 0; i < n; ++i)
      if (active_diag[i] != 0.0) j.add_at(i, i, active_diag[i]);
    Vector rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = -r[i];
    std::vector<std::pair<int, double>> homog;
    for (const auto& [dof, val] : phi_constraints) {
      homog.push_back({dof, it == 0 ? val - phi[dof] : 0.0});
    }
    apply_dirichlet(j, rhs, homog);
    Vector dphi(n, 0.0);
    const Vector pre = jacobi_precond(j);
    const SolveStats st = cg_solve(j, rhs, pre, dphi, cfg.lin_rtol, cfg.lin_atol, cfg.lin_max_iter);
    if (!st.converged)
      throw std::runtime_error("penalty_phi_solve: linear solver did not converge");
    for (int i = 0; i < n; ++i) phi[i] += dphi[i];
    residual(phi, r, &active_diag);
    zero_constrained(r, phi_constraints);
  }
  throw std::runtime_error("penalty_phi_solve: semismooth Newton did not converge");
}

}  // namespace pgfrac
