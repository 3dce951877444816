#include "pgfrac/pg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include "energy_ops.hpp"
#include "pgfrac/material.hpp"

namespace pgfrac {

namespace {
constexpr double kXiClamp = 700.0;
constexpr double kEpsBoundary = 1e-8;
}  // namespace

double latent_from_phi(double phi, double lo, double hi, bool* clamped) {
  if (!(lo < hi)) throw std::invalid_argument("latent_from_phi: requires lo < hi");
  double num = phi - lo;
  double den = hi - phi;
  bool cl = false;
  if (num <= 0.0) {
    num = kEpsBoundary;
    den = (hi - lo) + kEpsBoundary;
    cl = true;
  } else if (den <= 0.0) {
    den = kEpsBoundary;
    num = (hi - lo) + kEpsBoundary;
    cl = true;
  }
  double xi = std::log(num / den);
  if (xi > kXiClamp) { xi = kXiClamp; cl = true; }
  if (xi < -kXiClamp) { xi = -kXiClamp; cl = true; }
  if (clamped) *clamped = cl;
  return xi;
}

double phi_from_latent(double xi, double lo, double hi) {
  if (xi >= 0.0) {
    const double e = std::exp(-std::min(xi, kXiClamp));
    return (lo * e + hi) / (1.0 + e);
  }
  const double e = std::exp(std::max(xi, -kXiClamp));
  return (lo + hi * e) / (1.0 + e);
}

double phi_from_latent_deriv(double xi, double lo, double hi) {
  const double e = std::exp(-std::min(std::abs(xi), kXiClamp));
  const double d = 1.0 + e;
  return (hi - lo) * e / (d * d);
}

double update_beta(double beta_hat, int n_newton, double r) {
  if (r <= 1.0) throw std::invalid_argument("update_beta: r must exceed 1");
  if (n_newton <= 4) return r * beta_hat;
  if (n_newton < 10) return beta_hat;
  return beta_hat / r;
}

Vector extrapolate_latent(const Vector& xi_prev, const Vector& xi_prev2, double q) {
  if (xi_prev.size() != xi_prev2.size())
    throw std::invalid_argument("extrapolate_latent: size mismatch");
  Vector out(xi_prev.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = (1.0 + q) * xi_prev[i] - q * xi_prev2[i];
  return out;
}

DrivingField DrivingField::zero(const Mesh& mesh) {
  DrivingField f;
  f.values.resize(mesh.cells.size());
  for (std::size_t e = 0; e < mesh.cells.size(); ++e)
    f.values[e].assign(gauss_rule(mesh.cells[e].kind).points.size(), 0.0);
  return f;
}

DamageState DamageState::zero(const Mesh& mesh, const CrackModel& model) {
  DamageState d;
  d.model = model;
  d.phi.assign(mesh.n_nodes(), 0.0);
  d.phi_prev.assign(mesh.n_nodes(), 0.0);
  // latent field starts at the midpoint of the feasible interval; the first
  // coupled solve walks it down through the well-conditioned range of the
  // inverse map (starting on the clamped boundary proxy instead makes every
  // cold start crawl out of the flat range)
  d.xi.assign(mesh.n_nodes(), 0.0);
  return d;
}

namespace {

// Mesh-level operators frozen during one PG loop; the Gauss part of the
// phase-field residual is linear in phi (a phi + b), see energy_ops.hpp.
using PgWork = detail::EnergyOps;

PgWork build_work(const Mesh& mesh, const DrivingField& drive, const CrackModel& model) {
  return detail::build_energy_ops(mesh, drive.values, model);
}

struct Residuals {
  Vector r_phi, r_xi;
  Vector s_deriv;  // d/dxi of the latent-consistency map at each node
};

Residuals compute_residuals(const PgWork& wk, const DamageState& dmg, const Vector& xi_old,
                            double beta) {
  const std::size_t n = dmg.phi.size();
  Residuals r;
  wk.a.matvec(dmg.phi, r.r_phi);
  r.r_xi.assign(n, 0.0);
  r.s_deriv.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    r.r_phi[i] = beta * (r.r_phi[i] + wk.b[i]) + wk.w[i] * (dmg.xi[i] - xi_old[i]);
    const double s = phi_from_latent(dmg.xi[i], dmg.phi_prev[i], 1.0);
    r.r_xi[i] = wk.w[i] * (dmg.phi[i] - s);
    r.s_deriv[i] = phi_from_latent_deriv(dmg.xi[i], dmg.phi_prev[i], 1.0);
  }
  return r;
}

// Nodes whose latent value sits at the storage clamp with the residual
// pushing further outward: the clamp is the numerical stand-in for
// xi -> -inf at an active bound (or +inf at a fully cracked node), so the
// phi-row there is the saturated-multiplier condition and counts as
// satisfied; the primal condition (consistency row) stays live.
std::vector<char> clamp_stuck(const Residuals& r, const Vector& xi) {
  std::vector<char> stuck(xi.size(), 0);
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (xi[i] <= -kXiClamp + 1e-6 && r.r_phi[i] > 0.0) stuck[i] = 1;
    if (xi[i] >= kXiClamp - 1e-6 && r.r_phi[i] < 0.0) stuck[i] = 1;
  }
  return stuck;
}

// Pinned phi nodes drop out of the system entirely: B is diagonal, so xi at
// such a node couples only to the pinned phi row (and would need to diverge
// to satisfy its own consistency row at the bound).
double residual_norm(const Residuals& r, const std::vector<std::pair<int, double>>& constraints,
                     const std::vector<char>& stuck) {
  Vector rp = r.r_phi;
  Vector rx = r.r_xi;
  for (std::size_t i = 0; i < stuck.size(); ++i)
    if (stuck[i]) rp[i] = 0.0;
  zero_constrained(rp, constraints);
  zero_constrained(rx, constraints);
  const double a = norm2(rp), b = norm2(rx);
  return std::sqrt(a * a + b * b);
}

// inexact > 0 relaxes the pass to "reduce its own starting residual by that
// factor": proximal passes are self-correcting, and cheap passes are what
// let the proximity-parameter feedback grow out of its hold window. The
// loop exit always re-checks with a tight (inexact = 0) polish pass.
NewtonResult newton_with_work(const PgWork& wk, DamageState& dmg, const Vector& xi_old,
                              double beta, const PgConfig& cfg,
                              const std::vector<std::pair<int, double>>& constraints,
                              double inexact = 0.0) {
  NewtonResult res;
  const int n = static_cast<int>(dmg.phi.size());

  for (const auto& [node, value] : constraints) dmg.phi[node] = value;

  Residuals r = compute_residuals(wk, dmg, xi_old, beta);
  std::vector<char> stuck = clamp_stuck(r, dmg.xi);
  const double r0 = residual_norm(r, constraints, stuck);
  res.initial_residual = r0;
  const double target = std::max({cfg.newton_rtol * r0, cfg.newton_atol, inexact * r0});
  res.residual = r0;
  // the inner solves must land below the Newton target, or the nonlinear
  // residual floors at the linear-solver error
  const double lin_atol = std::max(cfg.lin_atol, 0.05 * target);

  for (int it = 0; it < cfg.newton_max; ++it) {
    if (res.residual <= target) {
      res.converged = true;
      return res;
    }

    Vector dphi(n, 0.0), dxi(n, 0.0);
    if (cfg.linear == PgConfig::Linear::condensed_cg) {
      // exact elimination of dxi through the diagonal (2,2) block:
      // (A + B Cp^{-1} B) dphi = -R^phi - B Cp^{-1} R^xi
      SparseMatrix s = wk.a;
      for (auto& v : s.val_) v *= beta;
      Vector rhs(n);
      for (int i = 0; i < n; ++i) {
        const double cp = wk.w[i] * (r.s_deriv[i] + cfg.omega);
        if (wk.w[i] > 0.0) {
          s.add_at(i, i, wk.w[i] * wk.w[i] / cp);
          rhs[i] = -r.r_phi[i] - wk.w[i] * r.r_xi[i] / cp;
        } else {
          rhs[i] = -r.r_phi[i];
        }
      }
      std::vector<std::pair<int, double>> pinned;
      pinned.reserve(constraints.size());
      for (const auto& [node, value] : constraints) pinned.push_back({node, 0.0});
      // saturated-latent nodes: dxi frozen, phi snaps onto the consistency
      // value through a prescribed increment
      for (int i = 0; i < n; ++i)
        if (stuck[i] && wk.w[i] > 0.0) pinned.push_back({i, -r.r_xi[i] / wk.w[i]});
      apply_dirichlet(s, rhs, pinned);
      const Vector pre = jacobi_precond(s);
      const SolveStats st =
          cg_solve(s, rhs, pre, dphi, cfg.lin_rtol, lin_atol, cfg.lin_max_iter);
      if (!st.converged) return res;  // consumed by the beta controller
      for (int i = 0; i < n; ++i) {
        const double cp = wk.w[i] * (r.s_deriv[i] + cfg.omega);
        dxi[i] = (wk.w[i] > 0.0 && !stuck[i]) ? (wk.w[i] * dphi[i] + r.r_xi[i]) / cp : 0.0;
      }
      for (const auto& [node, value] : constraints) dxi[node] = 0.0;
    } else {
      BlockSaddleSystem sys;
      sys.A = wk.a;
      for (auto& v : sys.A.val_) v *= beta;
      sys.B = SparseMatrix::diagonal(wk.w);
      Vector cp(n);
      for (int i = 0; i < n; ++i) cp[i] = wk.w[i] * (r.s_deriv[i] + cfg.omega);
      sys.C_pert = SparseMatrix::diagonal(cp);
      sys.rhs_top.assign(n, 0.0);
      sys.rhs_bottom.assign(n, 0.0);
      for (int i = 0; i < n; ++i) {
        sys.rhs_top[i] = -r.r_phi[i];
        sys.rhs_bottom[i] = -r.r_xi[i];
      }
      // Dirichlet phi dofs: pin both the phi row and the xi row (dphi =
      // dxi = 0); dropping the diagonal B entry removes the coupling.
      auto pin_rows = [&](int node, double dphi_value) {
        for (int k = sys.A.row_ptr_[node]; k < sys.A.row_ptr_[node + 1]; ++k)
          sys.A.val_[k] = sys.A.col_idx_[k] == node ? 1.0 : 0.0;
        sys.rhs_top[node] = dphi_value;
        sys.rhs_bottom[node] = 0.0;
        if (double* bq = sys.B.find(node, node)) *bq = 0.0;
        if (double* cq = sys.C_pert.find(node, node)) *cq = 1.0;
      };
      for (const auto& [node, value] : constraints) pin_rows(node, 0.0);
      for (int i = 0; i < n; ++i)
        if (stuck[i] && wk.w[i] > 0.0) pin_rows(i, -r.r_xi[i] / wk.w[i]);
      Vector x(2 * n, 0.0);
      const SolveStats st = gmres_solve(sys, {}, x, cfg.lin_rtol, lin_atol,
                                        cfg.gmres_restart, cfg.lin_max_iter);
      if (!st.converged) return res;
      std::copy(x.begin(), x.begin() + n, dphi.begin());
      std::copy(x.begin() + n, x.end(), dxi.begin());
      for (const auto& [node, value] : constraints) {
        dphi[node] = 0.0;
        dxi[node] = 0.0;
      }
    }

    // the linearized latent equation is only meaningful within a bounded
    // latent step wherever the logistic has curvature; outward moves of an
    // already-saturated node are exactly linear (multiplier drift) and may
    // be arbitrarily large
    for (int i = 0; i < n; ++i) {
      const bool deep_out = (dmg.xi[i] < -30.0 && dxi[i] < 0.0) ||
                            (dmg.xi[i] > 30.0 && dxi[i] > 0.0);
      if (!deep_out) dxi[i] = std::clamp(dxi[i], -cfg.xi_step_max, cfg.xi_step_max);
    }

    // backtracking on the residual norm; when no damped step decreases the
    // residual the full (capped) step is taken and the outer controller
    // judges the pass by its iteration count
    const Vector phi_old = dmg.phi, xi_save = dmg.xi;
    const double rn_old = res.residual;
    double step = 1.0;
    bool decreased = false;
    for (int bt = 0; bt < 10; ++bt) {
      for (int i = 0; i < n; ++i) {
        dmg.phi[i] = phi_old[i] + step * dphi[i];
        dmg.xi[i] = std::clamp(xi_save[i] + step * dxi[i], -kXiClamp, kXiClamp);
      }
      r = compute_residuals(wk, dmg, xi_old, beta);
      stuck = clamp_stuck(r, dmg.xi);
      res.residual = residual_norm(r, constraints, stuck);
      if (res.residual < rn_old || res.residual <= target) {
        decreased = true;
        break;
      }
      step *= 0.5;
    }
    if (!decreased) {
      for (int i = 0; i < n; ++i) {
        dmg.phi[i] = phi_old[i] + dphi[i];
        dmg.xi[i] = std::clamp(xi_save[i] + dxi[i], -kXiClamp, kXiClamp);
      }
      r = compute_residuals(wk, dmg, xi_old, beta);
      stuck = clamp_stuck(r, dmg.xi);
      res.residual = residual_norm(r, constraints, stuck);
    }
    res.iterations = it + 1;
  }
  res.converged = res.residual <= target;
  return res;
}

}  // namespace

BlockSaddleSystem assemble_pg_system(const Mesh& mesh, const DrivingField& drive,
                                     const DamageState& dmg, const Vector& xi_old, double beta,
                                     double omega) {
  if (dmg.phi.size() != static_cast<std::size_t>(mesh.n_nodes()))
    throw std::invalid_argument("assemble_pg_system: field size does not match mesh");
  const PgWork wk = build_work(mesh, drive, dmg.model);
  const Residuals r = compute_residuals(wk, dmg, xi_old, beta);
  const int n = mesh.n_nodes();

  BlockSaddleSystem sys;
  sys.A = wk.a;
  for (auto& v : sys.A.val_) v *= beta;
  sys.B = SparseMatrix::diagonal(wk.w);
  Vector cp(n);
  for (int i = 0; i < n; ++i) cp[i] = wk.w[i] * (r.s_deriv[i] + omega);
  sys.C_pert = SparseMatrix::diagonal(cp);
  sys.rhs_top.resize(n);
  sys.rhs_bottom.resize(n);
  for (int i = 0; i < n; ++i) {
    sys.rhs_top[i] = -r.r_phi[i];
    sys.rhs_bottom[i] = -r.r_xi[i];
  }
  return sys;
}

NewtonResult newton_solve_phi_xi(const Mesh& mesh, const DrivingField& drive, DamageState& dmg,
                                 const Vector& xi_old, double beta, const PgConfig& cfg,
                                 const std::vector<std::pair<int, double>>& phi_constraints) {
  const PgWork wk = build_work(mesh, drive, dmg.model);
  return newton_with_work(wk, dmg, xi_old, beta, cfg, phi_constraints);
}

double field_norm(const Mesh& mesh, const Vector& diff, PgConfig::Norm norm) {
  double l2 = 0.0;
  for (std::size_t e = 0; e < mesh.cells.size(); ++e) {
    const auto& cell = mesh.cells[e];
    const QuadratureRule& rule = gauss_rule(cell.kind);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const ElementBasis b = shape_eval(cell.kind, rule.points[q].xi, rule.points[q].eta);
      const MappedBasis mb = map_basis(mesh, cell, b, rule.weights[q]);
      double v = 0.0, gx = 0.0, gy = 0.0;
      for (int a = 0; a < mb.n; ++a) {
        v += mb.N[a] * diff[cell.v[a]];
        gx += mb.grad[a][0] * diff[cell.v[a]];
        gy += mb.grad[a][1] * diff[cell.v[a]];
      }
      l2 += v * v * mb.jxw;
      if (norm == PgConfig::Norm::H1) l2 += (gx * gx + gy * gy) * mb.jxw;
    }
  }
  return std::sqrt(l2);
}

PgStats pg_loop(const Mesh& mesh, const DrivingField& drive, DamageState& dmg,
                const PgConfig& cfg, double& beta_hat,
                const std::vector<std::pair<int, double>>& phi_constraints, bool fresh_step) {
  PgStats stats;
  const PgWork wk = build_work(mesh, drive, dmg.model);
  const std::size_t n = dmg.phi.size();

  // At a fresh step the bounds have moved up to phi_prev and the stored
  // latent field simply carries over: xi holds the running multiplier
  // information (its continuity is what makes warm steps take ~1 proximal
  // pass), and the first coupled solve restores phi/xi consistency under
  // the new bounds. Only a latent field that was never initialized gets the
  // boundary-proxy values.
  if (fresh_step && dmg.xi.size() != n) {
    dmg.xi.resize(n);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      bool cl = false;
      dmg.xi[i] = latent_from_phi(dmg.phi[i], dmg.phi_prev[i], 1.0, &cl);
      any = any || cl;
    }
    stats.latent_init_clamped = any;
  }
  for (const auto& [node, value] : phi_constraints) {
    dmg.phi[node] = value;
    dmg.xi[node] = latent_from_phi(value, dmg.phi_prev[node], 1.0);
  }

  Vector phi_p = dmg.phi;
  Vector xi_prev = dmg.xi;
  Vector xi_prev2 = dmg.xi;
  double beta_hat_prev = beta_hat;
  int below_tol = 0;

  for (int k = 1; k <= cfg.k_max; ++k) {
    const double q = beta_hat / beta_hat_prev;
    dmg.phi = phi_p;
    dmg.xi = extrapolate_latent(xi_prev, xi_prev2, q);
    for (std::size_t i = 0; i < n; ++i)
      dmg.xi[i] = std::clamp(dmg.xi[i], xi_prev[i] - cfg.xi_guess_jump,
                             xi_prev[i] + cfg.xi_guess_jump);

    NewtonResult nr;
    int retries = 0;
    while (true) {
      const double beta = beta_hat * cfg.L_ref / dmg.model.Gc;
      nr = newton_with_work(wk, dmg, xi_prev, beta, cfg, phi_constraints);
      if (nr.converged) break;
      if (std::getenv("PGFRAC_TRACE_NODE"))
        std::fprintf(stderr, "[pg] k=%d retry=%d beta^=%.3g N=%d r0=%.3e res=%.3e\n", k, retries,
                     beta_hat, nr.iterations, nr.initial_residual, nr.residual);
      if (++retries > cfg.beta_retry_max)
        throw std::runtime_error("pg_loop: Newton failed to converge after beta reductions");
      beta_hat /= cfg.r;
      dmg.phi = phi_p;
      dmg.xi = extrapolate_latent(xi_prev, xi_prev2, beta_hat / beta_hat_prev);
      for (std::size_t i = 0; i < n; ++i)
        dmg.xi[i] = std::clamp(dmg.xi[i], xi_prev[i] - cfg.xi_guess_jump,
                               xi_prev[i] + cfg.xi_guess_jump);
    }

    // bound-preserving nodal update; exact up to machine precision
    for (std::size_t i = 0; i < n; ++i)
      dmg.phi[i] = phi_from_latent(dmg.xi[i], dmg.phi_prev[i], 1.0);
    for (const auto& [node, value] : phi_constraints) {
      dmg.phi[node] = value;
      dmg.xi[node] = latent_from_phi(value, dmg.phi_prev[node], 1.0);
    }

    // multiplier equilibration at nodes with negligible damage moves phi in
    // decades far below resolution; such motion does not hold the loop open
    auto floored_diff = [&](const Vector& a, const Vector& b, Vector& d) {
      for (std::size_t i = 0; i < n; ++i)
        d[i] = std::max(a[i], b[i]) >= cfg.phi_activity_floor ? a[i] - b[i] : 0.0;
    };
    Vector diff(n);
    floored_diff(dmg.phi, phi_p, diff);
    const double phi_diff = field_norm(mesh, diff, cfg.pg_norm);
    double xi_up_drift = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      xi_up_drift = std::max(xi_up_drift, dmg.xi[i] - xi_prev[i]);

    stats.pg_iterations = k;
    stats.newton_total += nr.iterations;
    stats.newton_per_pass.push_back(nr.iterations);

    if (std::getenv("PGFRAC_TRACE_NODE")) {
      std::size_t am = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (std::abs(diff[i]) > std::abs(diff[am])) am = i;
      std::fprintf(stderr,
                   "[pg] k=%d beta^=%.3g N=%d diff=%.3e drift=%.3e am=%zu dphi=%.2e phi=%.3e "
                   "xi=%.2f\n",
                   k, beta_hat, nr.iterations, phi_diff, xi_up_drift, am, diff[am], dmg.phi[am],
                   dmg.xi[am]);
    }

    phi_p = dmg.phi;
    xi_prev2 = xi_prev;
    xi_prev = dmg.xi;
    beta_hat_prev = beta_hat;
    beta_hat = std::clamp(update_beta(beta_hat, nr.iterations, cfg.r), cfg.beta_hat_min,
                          cfg.beta_hat_max);

    // two consecutive sub-tolerance passes: a single dip can be a transient
    // of the proximity-parameter feedback, not a fixed point
    if (phi_diff <= cfg.tol_pg) {
      if (++below_tol >= 2 || k == 1) {
        // polish at full Newton accuracy (the in-loop passes exit early
        // relative to the loop's initial residual)
        const double beta = beta_hat * cfg.L_ref / dmg.model.Gc;
        const NewtonResult pol = newton_with_work(wk, dmg, xi_prev, beta, cfg, phi_constraints);
        for (std::size_t i = 0; i < n; ++i)
          dmg.phi[i] = phi_from_latent(dmg.xi[i], dmg.phi_prev[i], 1.0);
        for (const auto& [node, value] : phi_constraints) {
          dmg.phi[node] = value;
          dmg.xi[node] = latent_from_phi(value, dmg.phi_prev[node], 1.0);
        }
        stats.newton_total += pol.iterations;
        floored_diff(dmg.phi, phi_p, diff);
        phi_p = dmg.phi;
        xi_prev2 = xi_prev;
        xi_prev = dmg.xi;
        if (pol.converged && field_norm(mesh, diff, cfg.pg_norm) <= cfg.tol_pg) {
          stats.converged = true;
          break;
        }
        below_tol = 0;  // the polish moved the iterate, keep going
      }
    } else {
      below_tol = 0;
    }
  }
  stats.beta_hat_final = beta_hat;
  return stats;
}

namespace {

// 2x2 Newton for the one-unknown problem; returns iterations, or -1 on failure
int scalar_newton(double& phi, double& xi, double xi_old, double psi_a, double phi_prev,
                  const CrackModel& model, double beta, const PgConfig& cfg) {
  const double c0 = model.c0();
  const double a11 =
      beta * (2.0 * psi_a +
              (model.kind == CrackModel::Kind::AT2 ? 2.0 * model.Gc / (c0 * model.l) : 0.0));
  auto residual = [&](double p, double x, double& r_phi, double& r_xi) {
    const double grad =
        degradation_prime(p) * psi_a + model.Gc / c0 * alpha_prime(model, p) / model.l;
    r_phi = beta * grad + (x - xi_old);
    r_xi = p - phi_from_latent(x, phi_prev, 1.0);
  };
  auto is_stuck = [&](double x, double r_phi) {
    return (x <= -kXiClamp + 1e-6 && r_phi > 0.0) || (x >= kXiClamp - 1e-6 && r_phi < 0.0);
  };
  auto err_norm = [&](double x, double r_phi, double r_xi) {
    return is_stuck(x, r_phi) ? std::abs(r_xi) : std::hypot(r_phi, r_xi);
  };

  double r_phi, r_xi;
  residual(phi, xi, r_phi, r_xi);
  const double r0 = err_norm(xi, r_phi, r_xi);
  const double target = std::max(cfg.newton_rtol * r0, cfg.newton_atol);

  for (int it = 0; it <= cfg.newton_max; ++it) {
    const double rn = err_norm(xi, r_phi, r_xi);
    if (rn <= target) return it;
    if (it == cfg.newton_max) break;
    double dphi, dxi;
    if (is_stuck(xi, r_phi)) {
      // saturated latent: snap phi to the consistency value, xi frozen
      dphi = -r_xi;
      dxi = 0.0;
    } else {
      const double cp = phi_from_latent_deriv(xi, phi_prev, 1.0) + cfg.omega;
      // [a11 1; 1 -cp] [dphi; dxi] = [-r_phi; -r_xi]
      const double det = -a11 * cp - 1.0;
      dphi = (r_phi * cp + r_xi) / det;
      dxi = (-a11 * r_xi + r_phi) / det;
      const bool deep_out = (xi < -30.0 && dxi < 0.0) || (xi > 30.0 && dxi > 0.0);
      if (!deep_out) dxi = std::clamp(dxi, -cfg.xi_step_max, cfg.xi_step_max);
    }
    const double phi0 = phi, xi0 = xi;
    double step = 1.0;
    for (int bt = 0; bt < 10; ++bt) {
      phi = phi0 + step * dphi;
      xi = std::clamp(xi0 + step * dxi, -kXiClamp, kXiClamp);
      residual(phi, xi, r_phi, r_xi);
      if (err_norm(xi, r_phi, r_xi) < rn || step < 1e-2) break;
      step *= 0.5;
    }
  }
  return -1;
}

}  // namespace

ScalarPgResult pg_scalar_solve(double psi_a, double phi_prev, const CrackModel& model,
                               const PgConfig& cfg) {
  ScalarPgResult out;
  double phi = phi_prev;
  double xi = 0.0;  // feasible-interval midpoint, as in the field solver
  double xi_prev = xi, xi_prev2 = xi;
  double beta_hat = cfg.beta0_hat, beta_hat_prev = beta_hat;
  double phi_p = phi;
  int retries = 0;

  for (int k = 1; k <= cfg.k_max; ++k) {
    const double q = beta_hat / beta_hat_prev;
    const double beta = beta_hat * cfg.L_ref / model.Gc;
    phi = phi_p;
    xi = std::clamp((1.0 + q) * xi_prev - q * xi_prev2, xi_prev - cfg.xi_guess_jump,
                    xi_prev + cfg.xi_guess_jump);
    xi = std::clamp(xi, -kXiClamp, kXiClamp);

    const int n_newton = scalar_newton(phi, xi, xi_prev, psi_a, phi_prev, model, beta, cfg);
    if (n_newton < 0) {
      if (++retries > cfg.beta_retry_max)
        throw std::runtime_error("pg_scalar_solve: Newton failed after beta reductions");
      beta_hat /= cfg.r;
      continue;
    }

    phi = phi_from_latent(xi, phi_prev, 1.0);
    const double diff =
        std::max(phi, phi_p) >= cfg.phi_activity_floor ? std::abs(phi - phi_p) : 0.0;
    out.pg_iterations = k;
    phi_p = phi;
    xi_prev2 = xi_prev;
    xi_prev = xi;
    beta_hat_prev = beta_hat;
    beta_hat = std::clamp(update_beta(beta_hat, n_newton, cfg.r), cfg.beta_hat_min,
                          cfg.beta_hat_max);
    if (diff <= cfg.tol_pg) {
      out.converged = true;
      break;
    }
  }
  out.phi = phi_p;
  out.xi = xi_prev;
  return out;
}

double damage_objective(const Mesh& mesh, const DrivingField& drive, const CrackModel& model,
                        const Vector& phi) {
  double total = 0.0;
  for (std::size_t e = 0; e < mesh.cells.size(); ++e) {
    const auto& cell = mesh.cells[e];
    const QuadratureRule& rule = gauss_rule(cell.kind);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const ElementBasis b = shape_eval(cell.kind, rule.points[q].xi, rule.points[q].eta);
      const MappedBasis mb = map_basis(mesh, cell, b, rule.weights[q]);
      double p = 0.0, gx = 0.0, gy = 0.0;
      for (int a = 0; a < mb.n; ++a) {
        p += mb.N[a] * phi[cell.v[a]];
        gx += mb.grad[a][0] * phi[cell.v[a]];
        gy += mb.grad[a][1] * phi[cell.v[a]];
      }
      total += (degradation(p) * drive.values[e][q] +
                model.Gc / model.c0() * (alpha(model, p) / model.l + model.l * (gx * gx + gy * gy))) *
               mb.jxw;
    }
  }
  return total;
}

}  // namespace pgfrac
