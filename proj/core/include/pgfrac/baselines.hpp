#pragma once

#include <utility>
#include <vector>

#include "pgfrac/crack.hpp"
#include "pgfrac/mesh.hpp"
#include "pgfrac/pg.hpp"

namespace pgfrac {

/// Running pointwise maximum of the crack-driving energy, stored at the
/// Gauss points (where psi_a is evaluated).
struct HistoryField {
  std::vector<std::vector<double>> H;  // [cell][gauss point]
  static HistoryField zero(const Mesh& mesh);
};

/// H <- max(H, psi_a) pointwise.
void history_update(HistoryField& h, const DrivingField& psi_a);

struct BaselineConfig {
  double newton_rtol = 1e-8;
  double newton_atol = 1e-12;
  int newton_max = 100;
  int active_set_max = 100;
  double kkt_tol = 1e-8;
  double lin_rtol = 1e-10;
  double lin_atol = 1e-14;
  int lin_max_iter = 50000;
};

/// History-functional phase-field solve. AT2: one linear solve (the bounds
/// are implicit in the pointwise relation when H >= 0). AT1: reduced-space
/// active-set Newton on 0 <= phi <= 1; pass use_active_set = false to expose
/// the unguarded behavior.
Vector hf_phi_solve(const Mesh& mesh, const HistoryField& h, const DamageState& dmg,
                    const BaselineConfig& cfg = {},
                    const std::vector<std::pair<int, double>>& phi_constraints = {},
                    bool use_active_set = true);

/// Penalized solve: minimizes the phi-energy plus
/// (gamma_pen/2) int( <phi_prev - phi>_+^2 + <phi - 1>_+^2 + <-phi>_+^2 )
/// by semismooth Newton, penalty terms integrated nodally.
Vector penalty_phi_solve(const Mesh& mesh, const DrivingField& drive, const DamageState& dmg,
                         double gamma_pen, const BaselineConfig& cfg = {},
                         const std::vector<std::pair<int, double>>& phi_constraints = {});

/// Default restrictive penalization, 10^3 Gc / l.
double default_gamma_pen(const CrackModel& model);

/// Plain solve of the phase-field equation: no bounds, no irreversibility.
Vector unconstrained_phi_solve(const Mesh& mesh, const DrivingField& drive,
                               const DamageState& dmg, const BaselineConfig& cfg = {},
                               const std::vector<std::pair<int, double>>& phi_constraints = {});

}  // namespace pgfrac
