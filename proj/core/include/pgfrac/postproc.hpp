#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pgfrac/crack.hpp"
#include "pgfrac/material.hpp"
#include "pgfrac/mechanics.hpp"
#include "pgfrac/mesh.hpp"
#include "pgfrac/pg.hpp"

namespace pgfrac {

struct StepRecord {
  int step = 0;
  double time_or_disp = 0.0;
  double force = 0.0;
  double E_e = 0.0;
  double E_d = 0.0;
  double E_k = 0.0;
  double min_phi = 0.0;
  double max_phi = 0.0;
  double cum_violation_max = 0.0;
  int n_stagger = 0;
  int n_pg_total = 0;
  double beta_hat = 0.0;
};

struct RunHistory {
  std::vector<StepRecord> records;
  bool completed = true;
};

/// Consistent nodal reactions: sum of the internal-force (plus inertia when
/// an acceleration is provided) residual components over the set.
double reaction_force(const Mesh& mesh, const ElasticParams& p, const Vector& phi,
                      const Vector& u, const std::string& boundary_set, int direction,
                      const Vector* mass_times_accel = nullptr);

struct Energies {
  double elastic = 0.0;    // int( g psi_a + psi_b )
  double dissipated = 0.0; // Gc * Gamma(phi)
  double kinetic = 0.0;    // 1/2 int rho v.v
};
Energies energies(const Mesh& mesh, const ElasticParams& p, const CrackModel& model,
                  const Vector& phi, const Vector& u, const Vector& v);

/// Per-step irreversibility violation d_phi = <phi - phi_prev>_- and the
/// running |.| accumulation.
void violation_update(const Vector& phi, const Vector& phi_prev_step, Vector& dphi,
                      Vector& cumulative);

void write_history_csv(const RunHistory& history, const std::string& path);
RunHistory read_history_csv(const std::string& path);
extern const char* const kHistoryCsvHeader;

/// VTK legacy 4.2 ASCII, POINT_DATA scalars "phi", "xi", "dphi_cum" and
/// vector "u".
void write_vtk_snapshot(const Mesh& mesh, const std::map<std::string, const Vector*>& point_data,
                        const std::string& path);

/// Principal direction of the phi > threshold node cloud, degrees from the
/// horizontal in [0, 180). Nodes may be restricted to x >= x_min.
double crack_angle_deg(const Mesh& mesh, const Vector& phi, double threshold,
                       double x_min = -1e300);

/// Connected components (through element adjacency) of {phi > threshold}
/// restricted to x >= x_min.
int crack_components(const Mesh& mesh, const Vector& phi, double threshold,
                     double x_min = -1e300);

}  // namespace pgfrac
