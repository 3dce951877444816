#include "pgfrac/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pgfrac {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty section");
      cfg.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": key outside any [section]");
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    if (cfg.sections[section].count(key))
      throw std::invalid_argument("config: duplicate key " + section + "." + key);
    cfg.sections[section][key] = value;
  }
  return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

namespace {

class SectionReader {
 public:
  SectionReader(const ConfigFile& cfg, const std::string& name) : name_(name) {
    auto it = cfg.sections.find(name);
    if (it != cfg.sections.end()) kv_ = &it->second;
  }

  bool present() const { return kv_ != nullptr; }
  bool has(const std::string& key) const { return kv_ && kv_->count(key); }

  std::string str(const std::string& key, const std::string& fallback = "") {
    mark(key);
    if (!has(key)) return fallback;
    return kv_->at(key);
  }
  std::string require_str(const std::string& key) {
    mark(key);
    if (!has(key)) throw std::invalid_argument("config: missing required key " + path(key));
    return kv_->at(key);
  }
  double num(const std::string& key, double fallback) {
    mark(key);
    if (!has(key)) return fallback;
    return parse_num(key, kv_->at(key));
  }
  double require_num(const std::string& key) {
    mark(key);
    if (!has(key)) throw std::invalid_argument("config: missing required key " + path(key));
    return parse_num(key, kv_->at(key));
  }
  int integer(const std::string& key, int fallback) {
    const double v = num(key, fallback);
    if (v != std::floor(v)) throw std::invalid_argument("config: " + path(key) + " must be an integer");
    return static_cast<int>(v);
  }
  bool flag(const std::string& key, bool fallback) {
    mark(key);
    if (!has(key)) return fallback;
    const std::string v = kv_->at(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("config: " + path(key) + " must be a boolean");
  }
  /// keys matching a prefix followed by nothing or digits (fix, fix1, fix2...)
  std::vector<std::string> prefixed_values(const std::string& prefix) {
    std::vector<std::string> out;
    if (!kv_) return out;
    for (const auto& [k, v] : *kv_) {
      if (k.rfind(prefix, 0) != 0) continue;
      const std::string tail = k.substr(prefix.size());
      if (!tail.empty() && !std::all_of(tail.begin(), tail.end(), ::isdigit)) continue;
      mark(k);
      out.push_back(v);
    }
    return out;
  }

  void check_consumed() const {
    if (!kv_) return;
    for (const auto& [k, v] : *kv_)
      if (!seen_.count(k))
        throw std::invalid_argument("config: unknown key " + name_ + "." + k);
  }

 private:
  std::string path(const std::string& key) const { return name_ + "." + key; }
  void mark(const std::string& key) { seen_.insert(key); }
  double parse_num(const std::string& key, const std::string& v) const {
    try {
      std::size_t pos = 0;
      const double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("");
      return d;
    } catch (...) {
      throw std::invalid_argument("config: " + path(key) + " is not a number: '" + v + "'");
    }
  }

  std::string name_;
  const std::map<std::string, std::string>* kv_ = nullptr;
  std::set<std::string> seen_;
};

// "set:xy" -> (set, components)
std::pair<std::string, std::string> split_colon(const std::string& s, const std::string& what) {
  const auto c = s.find(':');
  if (c == std::string::npos)
    throw std::invalid_argument("config: malformed " + what + " entry '" + s +
                                "' (expected set:spec)");
  return {s.substr(0, c), s.substr(c + 1)};
}

int component_index(char c, const std::string& what) {
  if (c == 'x') return 0;
  if (c == 'y') return 1;
  throw std::invalid_argument("config: bad component in " + what + " (expected x or y)");
}

}  // namespace

Problem build_problem(const ConfigFile& cfg, const std::string& base_dir) {
  static const std::set<std::string> known_sections = {"mesh",    "material", "crack",
                                                       "constraint", "stagger", "loading",
                                                       "bc",      "output"};
  for (const auto& [name, kv] : cfg.sections)
    if (!known_sections.count(name))
      throw std::invalid_argument("config: unknown section [" + name + "]");

  Problem pb;

  // --- mesh ---
  SectionReader mesh(cfg, "mesh");
  const std::string kind = mesh.require_str("kind");
  if (kind == "line") {
    pb.mesh = make_line_mesh(mesh.require_num("length"), mesh.integer("n_elems", 0));
  } else if (kind == "rect") {
    const double w = mesh.require_num("width");
    const double h = mesh.require_num("height");
    const double hc = mesh.require_num("h_coarse");
    const double hf = mesh.num("h_fine", hc);
    Box box{mesh.num("refine_x0", 0.0), mesh.num("refine_y0", 0.0), mesh.num("refine_x1", w),
            mesh.num("refine_y1", h)};
    std::optional<NotchSegment> notch;
    if (mesh.has("notch_y"))
      notch = NotchSegment{mesh.num("notch_x0", 0.0), mesh.require_num("notch_x1"),
                           mesh.require_num("notch_y")};
    pb.mesh = make_rect_mesh(w, h, hc, box, hf, notch);
  } else if (kind == "gmsh") {
    const std::string rel = mesh.require_str("path");
    const std::filesystem::path p = std::filesystem::path(rel).is_absolute()
                                        ? std::filesystem::path(rel)
                                        : std::filesystem::path(base_dir) / rel;
    pb.mesh = read_gmsh_file(p.string());
  } else {
    throw std::invalid_argument("config: mesh.kind must be line, rect or gmsh");
  }
  // named node sets: selectN = name axis value [lo hi] (range on the other axis)
  for (const std::string& sel : mesh.prefixed_values("select")) {
    const auto tok = split_ws(sel);
    if (tok.size() != 3 && tok.size() != 5)
      throw std::invalid_argument("config: mesh.select expects 'name axis value [lo hi]'");
    const std::string sname = tok[0];
    const int axis = std::stoi(tok[1]);
    const double value = std::stod(tok[2]);
    if (axis != 0 && axis != 1) throw std::invalid_argument("config: mesh.select axis must be 0 or 1");
    const double tol = 1e-10 * pb.mesh.bbox_diagonal();
    if (tok.size() == 3) {
      pb.mesh = select_boundary(std::move(pb.mesh), axis, value, sname);
    } else {
      const double lo = std::stod(tok[3]), hi = std::stod(tok[4]);
      pb.mesh = select_boundary(
          std::move(pb.mesh),
          [axis, value, tol, lo, hi](double x, double y) {
            const double c = axis == 0 ? x : y;
            const double o = axis == 0 ? y : x;
            return std::abs(c - value) <= tol && o >= lo - tol && o <= hi + tol;
          },
          sname);
    }
  }
  mesh.check_consumed();

  // --- material ---
  SectionReader mat(cfg, "material");
  pb.material = ElasticParams::make(
      mat.require_num("E"), pb.mesh.dim == 1 ? mat.num("nu", 0.0) : mat.require_num("nu"),
      mat.num("rho", 0.0),
      pb.mesh.dim == 1 ? PlaneAssumption::one_d : PlaneAssumption::plane_strain);
  mat.check_consumed();

  // --- crack ---
  SectionReader crack(cfg, "crack");
  pb.model = CrackModel::make(CrackModel::kind_from_string(crack.require_str("model")),
                              crack.require_num("l"), crack.require_num("Gc"));
  crack.check_consumed();

  // --- constraint ---
  SectionReader con(cfg, "constraint");
  pb.method = constraint_method_from_string(con.str("method", "pg"));
  pb.pg.beta0_hat = con.num("beta0_hat", pb.pg.beta0_hat);
  pb.pg.L_ref = con.num("L_ref", pb.pg.L_ref);
  pb.pg.r = con.num("r", pb.pg.r);
  pb.pg.omega = con.num("omega", pb.pg.omega);
  pb.pg.tol_pg = con.num("tol_pg", pb.pg.tol_pg);
  const std::string pgn = con.str("pg_norm", "l2");
  if (pgn == "l2") pb.pg.pg_norm = PgConfig::Norm::L2;
  else if (pgn == "h1") pb.pg.pg_norm = PgConfig::Norm::H1;
  else throw std::invalid_argument("config: constraint.pg_norm must be l2 or h1");
  pb.pg.k_max = con.integer("k_max", pb.pg.k_max);
  pb.pg.newton_rtol = con.num("newton_rtol", pb.pg.newton_rtol);
  pb.pg.newton_atol = con.num("newton_atol", pb.pg.newton_atol);
  pb.pg.newton_max = con.integer("newton_max", pb.pg.newton_max);
  const std::string lin = con.str("linear", "condensed_cg");
  if (lin == "condensed_cg") pb.pg.linear = PgConfig::Linear::condensed_cg;
  else if (lin == "block_gmres") pb.pg.linear = PgConfig::Linear::block_gmres;
  else throw std::invalid_argument("config: constraint.linear must be condensed_cg or block_gmres");
  pb.gamma_pen = con.num("gamma_pen", -1.0);
  pb.hf_active_set = con.flag("hf_active_set", true);
  con.check_consumed();

  // --- stagger ---
  SectionReader st(cfg, "stagger");
  pb.stagger.tol = st.num("tol", pb.stagger.tol);
  const std::string sn = st.str("norm", "linf");
  if (sn == "linf") pb.stagger.norm = StaggerConfig::Norm::Linf;
  else if (sn == "l2") pb.stagger.norm = StaggerConfig::Norm::L2;
  else throw std::invalid_argument("config: stagger.norm must be linf or l2");
  pb.stagger.j_max = st.integer("j_max", pb.stagger.j_max);
  pb.stagger.fixed_j = st.integer("fixed_j", pb.stagger.fixed_j);
  st.check_consumed();

  // --- loading ---
  SectionReader load(cfg, "loading");
  const std::string lk = load.require_str("kind");
  double drive_velocity = 0.0, ramp_time = 0.0;
  if (lk == "quasi_static") {
    pb.loading.kind = LoadProgram::Kind::quasi_static;
    pb.loading.du = load.require_num("du");
    pb.loading.n_steps = load.integer("n_steps", 1);
  } else if (lk == "dynamic") {
    pb.loading.kind = LoadProgram::Kind::dynamic;
    pb.loading.dt = load.require_num("dt");
    pb.loading.n_steps = load.integer("n_steps", 1);
    pb.loading.rho_inf = load.num("rho_inf", 0.5);
    drive_velocity = load.num("drive_velocity", 0.0);
    ramp_time = load.num("ramp_time", 0.0);
  } else {
    throw std::invalid_argument("config: loading.kind must be quasi_static or dynamic");
  }
  load.check_consumed();

  // --- bc ---
  SectionReader bc(cfg, "bc");
  for (const std::string& fix : bc.prefixed_values("fix")) {
    for (const std::string& entry : split_ws(fix)) {
      const auto [set, comps] = split_colon(entry, "bc.fix");
      for (char c : comps)
        pb.mech_bcs.push_back({set, component_index(c, "bc.fix"), {}});
    }
  }
  if (bc.has("drive")) {
    const auto [set, comps] = split_colon(bc.str("drive"), "bc.drive");
    if (comps.size() != 1) throw std::invalid_argument("config: bc.drive takes one component");
    const int comp = component_index(comps[0], "bc.drive");
    std::function<double(double)> value;
    if (pb.loading.kind == LoadProgram::Kind::quasi_static) {
      value = [](double t) { return t; };  // t carries the prescribed displacement
    } else {
      if (drive_velocity == 0.0)
        throw std::invalid_argument("config: dynamic drive needs loading.drive_velocity");
      const double v = drive_velocity, t0 = ramp_time;
      if (t0 > 0.0)
        value = [v, t0](double t) {
          return t <= t0 ? 0.5 * v * t * t / t0 : v * (t - 0.5 * t0);
        };
      else
        value = [v](double t) { return v * t; };
    }
    pb.mech_bcs.push_back({set, comp, value});
    pb.reaction_set = set;
    pb.reaction_comp = comp;
  }
  for (const std::string& tr : bc.prefixed_values("traction")) {
    for (const std::string& entry : split_ws(tr)) {
      const auto [set, val] = split_colon(entry, "bc.traction");
      const auto comma = val.find(',');
      if (comma == std::string::npos)
        throw std::invalid_argument("config: bc.traction entry needs 'set:tx,ty'");
      TractionBC t;
      t.set = set;
      t.traction = {std::stod(val.substr(0, comma)), std::stod(val.substr(comma + 1))};
      pb.tractions.push_back(std::move(t));
    }
  }
  for (const std::string& ph : bc.prefixed_values("phi")) {
    for (const std::string& entry : split_ws(ph)) {
      const auto [set, val] = split_colon(entry, "bc.phi");
      pb.phi_bcs.push_back({set, std::stod(val)});
    }
  }
  if (bc.has("reaction")) {
    const auto [set, comps] = split_colon(bc.str("reaction"), "bc.reaction");
    if (comps.size() != 1) throw std::invalid_argument("config: bc.reaction takes one component");
    pb.reaction_set = set;
    pb.reaction_comp = component_index(comps[0], "bc.reaction");
  }
  bc.check_consumed();

  // --- output ---
  SectionReader out(cfg, "output");
  pb.output.dir = out.str("dir", "");
  pb.output.name = out.str("name", "run");
  pb.output.vtk_every = out.integer("vtk_every", 0);
  out.check_consumed();

  // validate references early
  for (const auto& d : pb.mech_bcs)
    if (!pb.mesh.boundary_sets.count(d.set))
      throw std::invalid_argument("config: bc references unknown set '" + d.set + "'");
  for (const auto& t : pb.tractions)
    if (!pb.mesh.boundary_sets.count(t.set))
      throw std::invalid_argument("config: traction references unknown set '" + t.set + "'");
  for (const auto& p : pb.phi_bcs)
    if (!pb.mesh.boundary_sets.count(p.set))
      throw std::invalid_argument("config: phi bc references unknown set '" + p.set + "'");
  if (pb.mesh.dim == 1)
    for (auto& d : pb.mech_bcs)
      if (d.component != 0)
        throw std::invalid_argument("config: 1D meshes only have the x component");

  return pb;
}

Problem load_problem(const std::string& config_path) {
  const ConfigFile cfg = ConfigFile::parse_file(config_path);
  return build_problem(cfg, std::filesystem::path(config_path).parent_path().string());
}

}  // namespace pgfrac
