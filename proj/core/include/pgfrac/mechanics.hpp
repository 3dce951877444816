#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pgfrac/fem.hpp"
#include "pgfrac/material.hpp"
#include "pgfrac/mesh.hpp"
#include "pgfrac/pg.hpp"
#include "pgfrac/sparse.hpp"

namespace pgfrac {

/// Kinematic fields at one time level. Dof layout: node-major with dim
/// components per node (1 in 1D).
struct MechState {
  Vector u, v, a;
  double t = 0.0;

  static MechState zero(const Mesh& mesh);
};

struct GenAlphaParams {
  double alpha_m = 0.5, alpha_f = 0.5, gamma = 0.5, beta = 0.25;
};

/// Parameter family in the interpolation convention
/// U_{n+af} = (1-af) U_n + af U_{n+1}:
///   af = 1/(1+rho_inf), am = (2-rho_inf)/(1+rho_inf),
///   gamma = 1/2 + am - af, beta = 1/4 (1 + am - af)^2.
GenAlphaParams genalpha_params(double rho_inf);

struct TractionBC {
  std::string set;
  std::array<double, 2> traction{0.0, 0.0};  // force per unit area
  std::function<double(double)> scale;       // of time; empty = 1
};

struct MechConfig {
  double newton_rtol = 1e-6;
  double newton_atol = 1e-6;
  int newton_max = 30;
  double lin_rtol = 1e-8;
  double lin_atol = 1e-14;
  int lin_max_iter = 100000;
  bool lumped_mass = false;
};

struct MechStats {
  bool converged = false;
  int newton_iterations = 0;
  int linear_iterations = 0;
  bool fallback_tangent = false;
  double residual = 0.0;
};

/// Internal force and consistent tangent of the degraded elasticity at
/// (u, phi): sigma = g(phi) sigma_a + sigma_b with the spectral-split
/// algorithmic tangent. Either output may be null. With isotropic_tangent
/// the tangent is replaced by g(phi) times the undegraded isotropic one
/// (stall fallback; the force stays exact).
void assemble_elasticity(const Mesh& mesh, const ElasticParams& p, const Vector& phi,
                         const Vector& u, Vector* f_int, SparseMatrix* tangent,
                         bool isotropic_tangent = false);

SparseMatrix assemble_mass(const Mesh& mesh, const ElasticParams& p, bool lumped = false);

/// Consistent traction load vector; edges are element faces that occur in
/// exactly one cell and whose endpoints both lie in the named set.
Vector assemble_traction(const Mesh& mesh, const std::vector<TractionBC>& tractions, double t);

/// Quasi-static equilibrium at fixed phi: Newton with the algorithmic
/// tangent (the problem is piecewise linear in u through the split).
MechStats static_solve(const Mesh& mesh, const ElasticParams& p, const Vector& phi,
                       const std::vector<DirichletBC>& bcs,
                       const std::vector<TractionBC>& tractions, double t, Vector& u,
                       const MechConfig& cfg = {});

/// One generalized-alpha step from state_n to t_n + dt at fixed phi.
/// Residual collocated at the intermediate levels, Newmark kinematics exact.
MechStats genalpha_step(const Mesh& mesh, const ElasticParams& p, const Vector& phi,
                        const std::vector<DirichletBC>& bcs,
                        const std::vector<TractionBC>& tractions, double dt,
                        const GenAlphaParams& ga, const SparseMatrix& mass, MechState& state,
                        const MechConfig& cfg = {});

/// Consistent initial acceleration: M a0 = f_ext - f_int, prescribed dofs by
/// finite differences of their boundary data.
void solve_initial_acceleration(const Mesh& mesh, const ElasticParams& p, const Vector& phi,
                                const std::vector<DirichletBC>& bcs,
                                const std::vector<TractionBC>& tractions,
                                const SparseMatrix& mass, MechState& state,
                                const MechConfig& cfg = {});

/// Crack-driving (tensile) energy density at the Gauss points.
DrivingField compute_psi_a(const Mesh& mesh, const ElasticParams& p, const Vector& u);

}  // namespace pgfrac
