#include "pgfrac/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <stdexcept>

namespace pgfrac {

ConstraintMethod constraint_method_from_string(const std::string& s) {
  if (s == "pg") return ConstraintMethod::pg;
  if (s == "penalty") return ConstraintMethod::penalty;
  if (s == "hf") return ConstraintMethod::hf;
  if (s == "none") return ConstraintMethod::none;
  throw std::invalid_argument("unknown constraint method '" + s +
                              "' (expected pg, penalty, hf or none)");
}

RunState make_run_state(const Problem& pb) {
  RunState rs;
  rs.mech = MechState::zero(pb.mesh);
  rs.dmg = DamageState::zero(pb.mesh, pb.model);
  rs.history = HistoryField::zero(pb.mesh);
  rs.beta_hat = pb.pg.beta0_hat;
  rs.dphi.assign(pb.mesh.n_nodes(), 0.0);
  rs.dphi_cum.assign(pb.mesh.n_nodes(), 0.0);
  if (pb.loading.kind == LoadProgram::Kind::dynamic) {
    rs.mass = assemble_mass(pb.mesh, pb.material, pb.mech.lumped_mass);
    rs.ga = genalpha_params(pb.loading.rho_inf);
  }
  return rs;
}

namespace {

std::vector<std::pair<int, double>> phi_constraints_of(const Problem& pb) {
  std::vector<std::pair<int, double>> out;
  for (const auto& bc : pb.phi_bcs) {
    auto it = pb.mesh.boundary_sets.find(bc.set);
    if (it == pb.mesh.boundary_sets.end())
      throw std::invalid_argument("phi bc: unknown boundary set '" + bc.set + "'");
    for (int node : it->second) out.push_back({node, bc.value});
  }
  return out;
}

double stagger_norm(const Problem& pb, const Vector& a, const Vector& b) {
  Vector diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  if (pb.stagger.norm == StaggerConfig::Norm::Linf) return norm_inf(diff);
  return field_norm(pb.mesh, diff, PgConfig::Norm::L2);
}

}  // namespace

StepStats staggered_step(const Problem& pb, RunState& rs, double t_new) {
  StepStats stats;
  const bool dynamic = pb.loading.kind == LoadProgram::Kind::dynamic;
  const auto phi_cons = phi_constraints_of(pb);

  const MechState state_n = rs.mech;  // start-of-step kinematics (dynamic redo)
  Vector phi_s = rs.dmg.phi;
  HistoryField hist_trial = rs.history;

  const int j_cap = pb.stagger.fixed_j > 0 ? pb.stagger.fixed_j : pb.stagger.j_max;
  bool fresh = true;
  double e_phi = std::numeric_limits<double>::infinity();

  for (int j = 0; j < j_cap; ++j) {
    // displacement solve with phi frozen
    if (dynamic) {
      rs.mech = state_n;
      const MechStats ms = genalpha_step(pb.mesh, pb.material, rs.dmg.phi, pb.mech_bcs,
                                         pb.tractions, pb.loading.dt, rs.ga, rs.mass, rs.mech,
                                         pb.mech);
      if (!ms.converged) throw std::runtime_error("staggered_step: displacement solve failed");
    } else {
      const MechStats ms = static_solve(pb.mesh, pb.material, rs.dmg.phi, pb.mech_bcs,
                                        pb.tractions, t_new, rs.mech.u, pb.mech);
      if (!ms.converged) throw std::runtime_error("staggered_step: displacement solve failed");
      rs.mech.t = t_new;
    }

    // crack-driving energy at the collocated displacement level
    Vector u_eval = rs.mech.u;
    if (dynamic) {
      for (std::size_t i = 0; i < u_eval.size(); ++i)
        u_eval[i] = (1.0 - rs.ga.alpha_f) * state_n.u[i] + rs.ga.alpha_f * rs.mech.u[i];
    }
    const DrivingField psi = compute_psi_a(pb.mesh, pb.material, u_eval);

    // damage solve with displacements frozen
    switch (pb.method) {
      case ConstraintMethod::pg: {
        const PgStats ps = pg_loop(pb.mesh, psi, rs.dmg, pb.pg, rs.beta_hat, phi_cons, fresh);
        stats.n_pg_total += ps.pg_iterations;
        break;
      }
      case ConstraintMethod::penalty: {
        const double gp = pb.gamma_pen > 0.0 ? pb.gamma_pen : default_gamma_pen(pb.model);
        rs.dmg.phi = penalty_phi_solve(pb.mesh, psi, rs.dmg, gp, pb.baseline, phi_cons);
        break;
      }
      case ConstraintMethod::hf: {
        hist_trial = rs.history;
        history_update(hist_trial, psi);
        const bool active = pb.model.kind == CrackModel::Kind::AT1 ? true : pb.hf_active_set;
        rs.dmg.phi = hf_phi_solve(pb.mesh, hist_trial, rs.dmg, pb.baseline, phi_cons, active);
        break;
      }
      case ConstraintMethod::none: {
        rs.dmg.phi = unconstrained_phi_solve(pb.mesh, psi, rs.dmg, pb.baseline, phi_cons);
        break;
      }
    }
    fresh = false;

    e_phi = stagger_norm(pb, rs.dmg.phi, phi_s);
    phi_s = rs.dmg.phi;
    stats.n_stagger = j + 1;
    if (pb.stagger.fixed_j == 0 && e_phi <= pb.stagger.tol) {
      stats.converged = true;
      break;
    }
  }
  if (pb.stagger.fixed_j > 0) stats.converged = true;
  // non-convergence at j_max: flagged in stats, state still advances

  rs.dmg.phi_prev = rs.dmg.phi;  // irreversibility bookkeeping, once per step
  if (pb.method == ConstraintMethod::hf) rs.history = hist_trial;
  stats.beta_hat = rs.beta_hat;
  return stats;
}

namespace {

void maybe_write_vtk(const Problem& pb, const RunState& rs, int step, bool final) {
  if (pb.output.dir.empty() || pb.output.vtk_every < 0) return;
  if (!final && (pb.output.vtk_every == 0 || step % pb.output.vtk_every != 0)) return;
  std::filesystem::create_directories(pb.output.dir);
  const std::string path = pb.output.dir + "/" + pb.output.name +
                           (final ? "_final" : "_step" + std::to_string(step)) + ".vtk";
  write_vtk_snapshot(pb.mesh,
                     {{"phi", &rs.dmg.phi},
                      {"xi", &rs.dmg.xi},
                      {"u", &rs.mech.u},
                      {"dphi_cum", &rs.dphi_cum}},
                     path);
}

void flush_history(const Problem& pb, const RunHistory& history) {
  if (pb.output.dir.empty()) return;
  std::filesystem::create_directories(pb.output.dir);
  write_history_csv(history, pb.output.dir + "/" + pb.output.name + "_history.csv");
}

StepRecord make_record(const Problem& pb, const RunState& rs, int step, double t_or_disp,
                       const StepStats& ss) {
  StepRecord r;
  r.step = step;
  r.time_or_disp = t_or_disp;
  if (!pb.reaction_set.empty())
    r.force = reaction_force(pb.mesh, pb.material, rs.dmg.phi, rs.mech.u, pb.reaction_set,
                             pb.reaction_comp);
  const Energies en = energies(pb.mesh, pb.material, pb.model, rs.dmg.phi, rs.mech.u, rs.mech.v);
  r.E_e = en.elastic;
  r.E_d = en.dissipated;
  r.E_k = pb.loading.kind == LoadProgram::Kind::dynamic ? en.kinetic : 0.0;
  r.min_phi = *std::min_element(rs.dmg.phi.begin(), rs.dmg.phi.end());
  r.max_phi = *std::max_element(rs.dmg.phi.begin(), rs.dmg.phi.end());
  r.cum_violation_max = rs.dphi_cum.empty() ? 0.0 : norm_inf(rs.dphi_cum);
  r.n_stagger = ss.n_stagger;
  r.n_pg_total = ss.n_pg_total;
  r.beta_hat = ss.beta_hat;
  return r;
}

RunHistory run_loop(Problem& pb, bool dynamic) {
  RunState rs = make_run_state(pb);
  RunHistory history;
  int n_steps = pb.loading.n_steps;
  if (pb.max_steps_cap > 0) n_steps = std::min(n_steps, pb.max_steps_cap);

  if (dynamic)
    solve_initial_acceleration(pb.mesh, pb.material, rs.dmg.phi, pb.mech_bcs, pb.tractions,
                               rs.mass, rs.mech, pb.mech);

  try {
    for (int step = 1; step <= n_steps; ++step) {
      const double t_new = dynamic ? step * pb.loading.dt : step * pb.loading.du;
      const Vector phi_before = rs.dmg.phi;
      const StepStats ss = staggered_step(pb, rs, t_new);
      violation_update(rs.dmg.phi, phi_before, rs.dphi, rs.dphi_cum);

      history.records.push_back(make_record(pb, rs, step, t_new, ss));
      if (!pb.output.quiet) {
        const StepRecord& r = history.records.back();
        std::printf("step %4d  %s=%.6g  force=%.6g  E_d=%.6g  stagger=%d  pg=%d  beta^=%.3g%s\n",
                    step, dynamic ? "t" : "u", r.time_or_disp, r.force, r.E_d, r.n_stagger,
                    r.n_pg_total, r.beta_hat, ss.converged ? "" : "  [stagger cap]");
        std::fflush(stdout);
      }
      maybe_write_vtk(pb, rs, step, false);
    }
  } catch (...) {
    history.completed = false;
    flush_history(pb, history);  // partial history preserved
    throw;
  }
  maybe_write_vtk(pb, rs, n_steps, true);
  flush_history(pb, history);
  return history;
}

}  // namespace

RunHistory run_quasi_static(Problem& pb) { return run_loop(pb, false); }

RunHistory run_dynamic(Problem& pb) { return run_loop(pb, true); }

RunHistory run_problem(Problem& pb) {
  return pb.loading.kind == LoadProgram::Kind::dynamic ? run_dynamic(pb) : run_quasi_static(pb);
}

}  // namespace pgfrac
