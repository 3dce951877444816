#include "pgfrac/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace pgfrac {

const char* const kHistoryCsvHeader =
    "step,time_or_disp,force,E_e,E_d,E_k,min_phi,max_phi,cum_violation_max,n_stagger,"
    "n_pg_total,beta_hat";

double reaction_force(const Mesh& mesh, const ElasticParams& p, const Vector& phi,
                      const Vector& u, const std::string& boundary_set, int direction,
                      const Vector* mass_times_accel) {
  auto it = mesh.boundary_sets.find(boundary_set);
  if (it == mesh.boundary_sets.end())
    throw std::invalid_argument("reaction_force: unknown boundary set '" + boundary_set + "'");
  Vector f_int;
  assemble_elasticity(mesh, p, phi, u, &f_int, nullptr);
  double s = 0.0;
  for (int node : it->second) {
    const int dof = node * mesh.dim + direction;
    s += f_int[dof];
    if (mass_times_accel) s += (*mass_times_accel)[dof];
  }
  return s;
}

Energies energies(const Mesh& mesh, const ElasticParams& p, const CrackModel& model,
                  const Vector& phi, const Vector& u, const Vector& v) {
  Energies en;
  for (std::size_t e = 0; e < mesh.cells.size(); ++e) {
    const auto& cell = mesh.cells[e];
    const QuadratureRule& rule = gauss_rule(cell.kind);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const ElementBasis basis = shape_eval(cell.kind, rule.points[q].xi, rule.points[q].eta);
      const MappedBasis mb = map_basis(mesh, cell, basis, rule.weights[q]);
      double phi_q = 0.0;
      for (int a = 0; a < mb.n; ++a) phi_q += mb.N[a] * phi[cell.v[a]];

      double psi_a, psi_b;
      double v2 = 0.0;
      if (mesh.dim == 1) {
        double eps = 0.0, vq = 0.0;
        for (int a = 0; a < mb.n; ++a) {
          eps += mb.grad[a][0] * u[cell.v[a]];
          vq += mb.N[a] * v[cell.v[a]];
        }
        psi_a = psi_a_1d(eps, p.E);
        psi_b = psi_b_1d(eps, p.E);
        v2 = vq * vq;
      } else {
        SymTensor2 eps;
        double vx = 0.0, vy = 0.0;
        for (int a = 0; a < mb.n; ++a) {
          const double ux = u[cell.v[a] * 2], uy = u[cell.v[a] * 2 + 1];
          eps.xx += mb.grad[a][0] * ux;
          eps.yy += mb.grad[a][1] * uy;
          eps.xy += 0.5 * (mb.grad[a][1] * ux + mb.grad[a][0] * uy);
          vx += mb.N[a] * v[cell.v[a] * 2];
          vy += mb.N[a] * v[cell.v[a] * 2 + 1];
        }
        const StrainState ss = spectral_split(eps);
        std::tie(psi_a, psi_b) = psi_split(ss, p);
        v2 = vx * vx + vy * vy;
      }
      en.elastic += (degradation(phi_q) * psi_a + psi_b) * mb.jxw;
      en.kinetic += 0.5 * p.rho * v2 * mb.jxw;
    }
  }
  en.dissipated = model.Gc * gamma_functional(model, mesh, phi);
  return en;
}

void violation_update(const Vector& phi, const Vector& phi_prev_step, Vector& dphi,
                      Vector& cumulative) {
  if (phi.size() != phi_prev_step.size())
    throw std::invalid_argument("violation_update: field size mismatch");
  dphi.resize(phi.size());
  if (cumulative.size() != phi.size()) cumulative.assign(phi.size(), 0.0);
  for (std::size_t i = 0; i < phi.size(); ++i) {
    dphi[i] = macaulay_neg(phi[i] - phi_prev_step[i]);
    cumulative[i] += std::abs(dphi[i]);
  }
}

void write_history_csv(const RunHistory& history, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_history_csv: cannot open " + path);
  std::fprintf(f, "%s\n", kHistoryCsvHeader);
  for (const auto& r : history.records) {
    std::fprintf(f, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%.17g\n", r.step,
                 r.time_or_disp, r.force, r.E_e, r.E_d, r.E_k, r.min_phi, r.max_phi,
                 r.cum_violation_max, r.n_stagger, r.n_pg_total, r.beta_hat);
  }
  if (std::fclose(f) != 0) throw std::runtime_error("write_history_csv: write failed");
}

RunHistory read_history_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_history_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kHistoryCsvHeader)
    throw std::runtime_error("read_history_csv: unexpected header");
  RunHistory h;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    StepRecord r;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    if (!(ls >> r.step >> r.time_or_disp >> r.force >> r.E_e >> r.E_d >> r.E_k >> r.min_phi >>
          r.max_phi >> r.cum_violation_max >> r.n_stagger >> r.n_pg_total >> r.beta_hat))
      throw std::runtime_error("read_history_csv: malformed record");
    h.records.push_back(r);
  }
  return h;
}

void write_vtk_snapshot(const Mesh& mesh, const std::map<std::string, const Vector*>& point_data,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_vtk_snapshot: cannot open " + path);
  out.precision(17);
  out << "# vtk DataFile Version 4.2\n";
  out << "pgfrac snapshot\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_nodes() << " double\n";
  for (const auto& p : mesh.nodes) out << p[0] << " " << p[1] << " 0\n";

  std::size_t list_len = 0;
  for (const auto& c : mesh.cells) list_len += 1 + c.n;
  out << "CELLS " << mesh.cells.size() << " " << list_len << "\n";
  for (const auto& c : mesh.cells) {
    out << c.n;
    for (int k = 0; k < c.n; ++k) out << " " << c.v[k];
    out << "\n";
  }
  out << "CELL_TYPES " << mesh.cells.size() << "\n";
  for (const auto& c : mesh.cells)
    out << (c.kind == CellKind::line2 ? 3 : c.kind == CellKind::tri3 ? 5 : 9) << "\n";

  out << "POINT_DATA " << mesh.n_nodes() << "\n";
  for (const auto& [name, field] : point_data) {
    if (!field) continue;
    if (field->size() == static_cast<std::size_t>(mesh.n_nodes())) {
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : *field) out << v << "\n";
    } else if (field->size() == static_cast<std::size_t>(mesh.n_nodes() * mesh.dim)) {
      out << "VECTORS " << name << " double\n";
      for (int i = 0; i < mesh.n_nodes(); ++i) {
        out << (*field)[i * mesh.dim];
        out << " " << (mesh.dim > 1 ? (*field)[i * mesh.dim + 1] : 0.0) << " 0\n";
      }
    } else {
      throw std::invalid_argument("write_vtk_snapshot: field '" + name + "' has invalid size");
    }
  }
  if (!out) throw std::runtime_error("write_vtk_snapshot: write failed");
}

double crack_angle_deg(const Mesh& mesh, const Vector& phi, double threshold, double x_min) {
  double mx = 0.0, my = 0.0;
  int n = 0;
  for (int i = 0; i < mesh.n_nodes(); ++i)
    if (phi[i] > threshold && mesh.nodes[i][0] >= x_min) {
      mx += mesh.nodes[i][0];
      my += mesh.nodes[i][1];
      ++n;
    }
  if (n < 2) return 0.0;
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < mesh.n_nodes(); ++i)
    if (phi[i] > threshold && mesh.nodes[i][0] >= x_min) {
      const double dx = mesh.nodes[i][0] - mx, dy = mesh.nodes[i][1] - my;
      sxx += dx * dx;
      sxy += dx * dy;
      syy += dy * dy;
    }
  // leading eigenvector of the 2x2 covariance (total least squares direction)
  const double tr = sxx + syy;
  const double det = sxx * syy - sxy * sxy;
  const double lam = 0.5 * tr + std::sqrt(std::max(0.25 * tr * tr - det, 0.0));
  double vx, vy;
  if (std::abs(sxy) > 1e-300) {
    vx = lam - syy;
    vy = sxy;
  } else {
    vx = sxx >= syy ? 1.0 : 0.0;
    vy = sxx >= syy ? 0.0 : 1.0;
  }
  double ang = std::atan2(vy, vx) * 180.0 / M_PI;
  if (ang < 0.0) ang += 180.0;
  return ang;
}

int crack_components(const Mesh& mesh, const Vector& phi, double threshold, double x_min) {
  const int n = mesh.n_nodes();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  auto in_set = [&](int i) { return phi[i] > threshold && mesh.nodes[i][0] >= x_min; };
  for (const auto& c : mesh.cells)
    for (int a = 0; a < c.n; ++a)
      for (int b = a + 1; b < c.n; ++b)
        if (in_set(c.v[a]) && in_set(c.v[b])) parent[find(c.v[a])] = find(c.v[b]);
  int count = 0;
  for (int i = 0; i < n; ++i)
    if (in_set(i) && find(i) == i) ++count;
  return count;
}

}  // namespace pgfrac
