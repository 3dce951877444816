#pragma once

#include <string>
#include <vector>

#include "pgfrac/baselines.hpp"
#include "pgfrac/mechanics.hpp"
#include "pgfrac/postproc.hpp"

namespace pgfrac {

enum class ConstraintMethod { pg, penalty, hf, none };
ConstraintMethod constraint_method_from_string(const std::string& s);

struct StaggerConfig {
  double tol = 1e-8;
  enum class Norm { Linf, L2 } norm = Norm::Linf;
  int j_max = 100;
  int fixed_j = 0;  // > 0 forces exactly this many staggered iterations
};

struct LoadProgram {
  enum class Kind { quasi_static, dynamic } kind = Kind::quasi_static;
  double du = 0.0;  // displacement increment per step (quasi-static)
  int n_steps = 1;
  double dt = 0.0;  // time step (dynamic)
  double rho_inf = 0.5;
};

struct OutputConfig {
  std::string dir;  // empty = no files
  std::string name = "run";
  int vtk_every = 0;  // 0 = final snapshot only, -1 = never
  bool quiet = false;
};

struct PhiDirichlet {
  std::string set;
  double value = 1.0;
};

struct Problem {
  Mesh mesh;
  ElasticParams material;
  CrackModel model;

  ConstraintMethod method = ConstraintMethod::pg;
  PgConfig pg;
  BaselineConfig baseline;
  double gamma_pen = -1.0;  // <= 0: restrictive default 10^3 Gc/l
  bool hf_active_set = true;

  StaggerConfig stagger;
  MechConfig mech;
  LoadProgram loading;

  std::vector<DirichletBC> mech_bcs;  // driven dofs carry the load program in value(t)
  std::vector<TractionBC> tractions;
  std::vector<PhiDirichlet> phi_bcs;
  std::string reaction_set;
  int reaction_comp = 1;

  OutputConfig output;
  int max_steps_cap = 0;  // > 0 truncates the run (CI)
};

struct StepStats {
  int n_stagger = 0;
  int n_pg_total = 0;
  bool converged = false;
  double beta_hat = 0.0;
};

/// Runtime state shared across steps of one run (one run owns all state).
struct RunState {
  MechState mech;
  DamageState dmg;
  HistoryField history;     // hf method only
  double beta_hat = 0.0;    // persistent proximity parameter
  Vector dphi;              // last per-step violation
  Vector dphi_cum;          // cumulative |violation| per node
  SparseMatrix mass;        // dynamic runs
  GenAlphaParams ga;
};

RunState make_run_state(const Problem& pb);

/// One load/time step: alternate displacement and damage solves until the
/// phase-field change norm falls below tol (or j_max / fixed_j), then commit
/// phi_prev <- phi. For dynamic runs each pass re-integrates the step from
/// the saved start-of-step state.
StepStats staggered_step(const Problem& pb, RunState& rs, double t_new);

RunHistory run_quasi_static(Problem& pb);
RunHistory run_dynamic(Problem& pb);
RunHistory run_problem(Problem& pb);

}  // namespace pgfrac
