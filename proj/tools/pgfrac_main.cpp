// pgfrac command line driver.
//
// Subcommands:
//   run          execute a configured quasi-static or dynamic fracture run
//   analytic1d   solve the 1D bar regularization problem and compare with
//                the closed-form profile
//   convergence  mesh-refinement error table for the 1D problem
//   compare      run the proximal solver and a baseline on one config and
//                emit a joined force/energy table

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pgfrac/config.hpp"
#include "pgfrac/crack.hpp"
#include "pgfrac/driver.hpp"
#include "pgfrac/pg.hpp"

namespace {

struct Analytic1dResult {
  pgfrac::Vector x, phi_num, phi_exact, xi_num;
  double err_linf = 0.0;
  double err_l2 = 0.0;
};

Analytic1dResult solve_analytic1d(pgfrac::CrackModel::Kind kind, double a, double l, int n) {
  using namespace pgfrac;
  Analytic1dResult out;
  const CrackModel model = CrackModel::make(kind, l, 1.0);  // Gc scales out of the profile
  Mesh mesh = make_line_mesh(a, n);

  DamageState dmg = DamageState::zero(mesh, model);
  DrivingField drive = DrivingField::zero(mesh);
  PgConfig cfg;
  cfg.k_max = 20000;  // cold start: the far tail fills in slowly before beta grows
  double beta_hat = cfg.beta0_hat;
  std::vector<std::pair<int, double>> cons = {{0, 1.0}};
  pg_loop(mesh, drive, dmg, cfg, beta_hat, cons, true);

  const double h = a / n;
  out.x.resize(n + 1);
  out.phi_num = dmg.phi;
  out.xi_num = dmg.xi;
  out.phi_exact.resize(n + 1);
  double l2 = 0.0;
  for (int i = 0; i <= n; ++i) {
    out.x[i] = mesh.nodes[i][0];
    out.phi_exact[i] = analytic_phi_1d(model, out.x[i], a, l);
    const double e = out.phi_num[i] - out.phi_exact[i];
    out.err_linf = std::max(out.err_linf, std::abs(e));
    l2 += e * e * h;
  }
  out.err_l2 = std::sqrt(l2);
  return out;
}

void write_analytic_csv(const Analytic1dResult& r, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path);
  std::fprintf(f, "x,phi_num,phi_exact,xi_num\n");
  for (std::size_t i = 0; i < r.x.size(); ++i)
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g\n", r.x[i], r.phi_num[i], r.phi_exact[i],
                 r.xi_num[i]);
  std::fclose(f);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phase-field fracture solver with latent-variable bound enforcement"};
  app.require_subcommand(1);

  std::string config_path, output_dir, model_str = "at2", baseline = "penalty", n_list = "64,128,256";
  bool quiet = false;
  int max_steps = 0;
  double a = 1.0, l = 0.1;
  int n = 1024;

  CLI::App* run = app.add_subcommand("run", "execute a configured run");
  run->add_option("config", config_path, "configuration file")->required();
  run->add_option("--output-dir", output_dir, "override the configured output directory");
  run->add_flag("--quiet", quiet, "suppress per-step progress");
  run->add_option("--max-steps", max_steps, "truncate the run after this many steps");

  CLI::App* ana = app.add_subcommand("analytic1d", "1D bar profile vs closed form");
  ana->add_option("--model", model_str, "at1 or at2")->required();
  ana->add_option("--a", a, "half-bar length");
  ana->add_option("--l", l, "regularization length");
  ana->add_option("--n", n, "number of elements");
  ana->add_option("--output-dir", output_dir, "where to write the profile csv");

  CLI::App* conv = app.add_subcommand("convergence", "refinement error table for the 1D bar");
  conv->add_option("--model", model_str, "at1 or at2")->required();
  conv->add_option("--a", a, "half-bar length");
  conv->add_option("--l", l, "regularization length");
  conv->add_option("--n", n_list, "comma-separated element counts, increasing");

  CLI::App* cmp = app.add_subcommand("compare", "pg vs a baseline on one config");
  cmp->add_option("config", config_path, "configuration file")->required();
  cmp->add_option("--baseline", baseline, "penalty, hf or none");
  cmp->add_option("--output-dir", output_dir, "override the configured output directory");
  cmp->add_flag("--quiet", quiet, "suppress per-step progress");
  cmp->add_option("--max-steps", max_steps, "truncate the runs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      pgfrac::Problem pb = pgfrac::load_problem(config_path);
      if (!output_dir.empty()) pb.output.dir = output_dir;
      pb.output.quiet = quiet;
      if (max_steps > 0) pb.max_steps_cap = max_steps;
      pgfrac::run_problem(pb);
      return 0;
    }

    if (ana->parsed()) {
      const auto kind = pgfrac::CrackModel::kind_from_string(model_str);
      const Analytic1dResult r = solve_analytic1d(kind, a, l, n);
      std::printf("model=%s a=%g l=%g n=%d  Linf error=%.6g  L2 error=%.6g\n", model_str.c_str(),
                  a, l, n, r.err_linf, r.err_l2);
      if (!output_dir.empty()) {
        std::filesystem::create_directories(output_dir);
        write_analytic_csv(r, output_dir + "/analytic1d_" + model_str + ".csv");
      }
      return 0;
    }

    if (conv->parsed()) {
      const auto kind = pgfrac::CrackModel::kind_from_string(model_str);
      std::vector<int> ns;
      std::string tok;
      std::istringstream in(n_list);
      while (std::getline(in, tok, ',')) ns.push_back(std::stoi(tok));
      if (!std::is_sorted(ns.begin(), ns.end()))
        throw std::invalid_argument("convergence: element counts must be increasing");
      std::vector<double> el2, elinf;
      for (int nn : ns) {
        const Analytic1dResult r = solve_analytic1d(kind, a, l, nn);
        el2.push_back(r.err_l2);
        elinf.push_back(r.err_linf);
      }
      std::printf("%8s  %12s  %8s  %12s  %8s\n", "n", "L2 error", "order", "Linf error", "order");
      for (std::size_t i = 0; i < ns.size(); ++i) {
        if (i == 0)
          std::printf("%8d  %12.5e  %8s  %12.5e  %8s\n", ns[i], el2[i], "-", elinf[i], "-");
        else
          std::printf("%8d  %12.5e  %8.2f  %12.5e  %8.2f\n", ns[i], el2[i],
                      std::log2(el2[i - 1] / el2[i]), elinf[i],
                      std::log2(elinf[i - 1] / elinf[i]));
      }
      return 0;
    }

    if (cmp->parsed()) {
      pgfrac::Problem pb = pgfrac::load_problem(config_path);
      if (!output_dir.empty()) pb.output.dir = output_dir;
      pb.output.quiet = quiet;
      if (max_steps > 0) pb.max_steps_cap = max_steps;

      pgfrac::Problem pb_pg = pb;
      pb_pg.method = pgfrac::ConstraintMethod::pg;
      pb_pg.output.name = pb.output.name + "_pg";
      const pgfrac::RunHistory h_pg = pgfrac::run_problem(pb_pg);

      pgfrac::Problem pb_b = pb;
      pb_b.method = pgfrac::constraint_method_from_string(baseline);
      pb_b.output.name = pb.output.name + "_" + baseline;
      const pgfrac::RunHistory h_b = pgfrac::run_problem(pb_b);

      if (!pb.output.dir.empty()) {
        std::filesystem::create_directories(pb.output.dir);
        const std::string path = pb.output.dir + "/" + pb.output.name + "_compare.csv";
        std::FILE* f = std::fopen(path.c_str(), "w");
        if (!f) throw std::runtime_error("cannot open " + path);
        std::fprintf(f, "step,time_or_disp,force_pg,force_%s,E_d_pg,E_d_%s\n", baseline.c_str(),
                     baseline.c_str());
        const std::size_t m = std::min(h_pg.records.size(), h_b.records.size());
        for (std::size_t i = 0; i < m; ++i)
          std::fprintf(f, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", h_pg.records[i].step,
                       h_pg.records[i].time_or_disp, h_pg.records[i].force, h_b.records[i].force,
                       h_pg.records[i].E_d, h_b.records[i].E_d);
        std::fclose(f);
        std::printf("wrote %s\n", path.c_str());
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
