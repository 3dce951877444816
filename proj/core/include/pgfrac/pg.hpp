#pragma once

#include <utility>
#include <vector>

#include "pgfrac/crack.hpp"
#include "pgfrac/fem.hpp"
#include "pgfrac/mesh.hpp"
#include "pgfrac/sparse.hpp"

namespace pgfrac {

/// Latent transform xi = ln((phi - lo)/(hi - phi)). On-boundary inputs are
/// clamped with eps_m = 1e-8 and flagged; results clamped to [-700, 700]
/// before any exponentiation downstream.
double latent_from_phi(double phi, double lo, double hi, bool* clamped = nullptr);

/// Inverse transform phi = (lo + hi e^xi)/(1 + e^xi), overflow-safe, strictly
/// inside [lo, hi].
double phi_from_latent(double xi, double lo, double hi);
double phi_from_latent_deriv(double xi, double lo, double hi);

/// Proximity parameter feedback on the Newton iteration count:
/// grow by r when N <= 4, hold for 4 < N < 10, shrink by r when N >= 10.
double update_beta(double beta_hat, int n_newton, double r);

/// xi_guess = (1 + q) xi_prev - q xi_prev2
Vector extrapolate_latent(const Vector& xi_prev, const Vector& xi_prev2, double q);

/// Crack-driving energy density at the Gauss points of each cell.
struct DrivingField {
  std::vector<std::vector<double>> values;  // [cell][gauss point]
  static DrivingField zero(const Mesh& mesh);
};

struct DamageState {
  Vector phi;       // nodal phase field, in [phi_prev, 1] after finalization
  Vector xi;        // nodal latent field, stored clamped to [-700, 700]
  Vector phi_prev;  // previous converged step (running lower bound)
  CrackModel model;

  static DamageState zero(const Mesh& mesh, const CrackModel& model);
};

struct PgConfig {
  double beta0_hat = 1e-2;  // initial dimensionless proximity parameter
  double L_ref = 1.0;       // reference length in beta = beta_hat L_ref / Gc
  double r = 2.0;           // growth factor, > 1
  double beta_hat_min = 1e-10;
  double beta_hat_max = 1e3;
  double omega = 1e-3;      // coercive perturbation of the (2,2) block
  double tol_pg = 1e-8;
  enum class Norm { L2, H1 } pg_norm = Norm::L2;
  double phi_activity_floor = 1e-5;  // sub-resolution damage: motion below
                                     // this level does not hold the loop open
  double xi_guess_jump = 10.0;       // extrapolation clamp around the last iterate
  double xi_step_max = 5.0;          // per-Newton-iteration latent step cap
  int k_max = 500;
  double newton_rtol = 1e-6;
  double newton_atol = 1e-12;
  double newton_inexact = 0.1;  // mid-loop passes only shrink their own r0
  int newton_max = 50;
  int beta_retry_max = 12;  // beta reductions on Newton failure before hard error

  enum class Linear { condensed_cg, block_gmres } linear = Linear::condensed_cg;
  double lin_rtol = 1e-8;
  double lin_atol = 1e-14;
  int lin_max_iter = 50000;
  int gmres_restart = 30;
};

/// Blocks of the linearized coupled (phi, xi) system at the current state:
/// A from the Gauss-assembled phase-field terms, B/C/M from nodal quadrature
/// (hence diagonal), (2,2) block = -(C + omega M).
BlockSaddleSystem assemble_pg_system(const Mesh& mesh, const DrivingField& drive,
                                     const DamageState& dmg, const Vector& xi_old, double beta,
                                     double omega);

struct NewtonResult {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  double initial_residual = 0.0;
};

/// Newton on the coupled system with xi_old frozen; the only nonlinearity is
/// the latent consistency equation.
NewtonResult newton_solve_phi_xi(const Mesh& mesh, const DrivingField& drive, DamageState& dmg,
                                 const Vector& xi_old, double beta, const PgConfig& cfg,
                                 const std::vector<std::pair<int, double>>& phi_constraints = {});

struct PgStats {
  int pg_iterations = 0;
  int newton_total = 0;
  std::vector<int> newton_per_pass;
  double beta_hat_final = 0.0;
  bool converged = false;
  bool latent_init_clamped = false;
};

/// One proximal loop at frozen displacements: extrapolated latent guess,
/// coupled Newton solve, bound-preserving nodal update
/// phi_i <- (phi_prev_i + e^xi_i)/(1 + e^xi_i), proximity-parameter feedback.
/// beta_hat persists across calls (passed in/out).
PgStats pg_loop(const Mesh& mesh, const DrivingField& drive, DamageState& dmg,
                const PgConfig& cfg, double& beta_hat,
                const std::vector<std::pair<int, double>>& phi_constraints = {},
                bool fresh_step = false);

/// Single-unknown damage problem (no gradient term): driving energy psi_a,
/// feasible interval [phi_prev, 1]. Mirrors the nodal equations with unit
/// weight; used for pointwise studies and cross-checks.
struct ScalarPgResult {
  double phi = 0.0;
  double xi = 0.0;
  int pg_iterations = 0;
  bool converged = false;
};
ScalarPgResult pg_scalar_solve(double psi_a, double phi_prev, const CrackModel& model,
                               const PgConfig& cfg);

/// Gauss-quadrature value of the phase-field energy
/// int( g(phi) psi_a + (Gc/c0)(alpha(phi)/l + l |grad phi|^2) ).
double damage_objective(const Mesh& mesh, const DrivingField& drive, const CrackModel& model,
                        const Vector& phi);

/// Field norm of a nodal difference: L2 via lumped weights, H1 adds the
/// gradient seminorm.
double field_norm(const Mesh& mesh, const Vector& diff, PgConfig::Norm norm);

}  // namespace pgfrac
