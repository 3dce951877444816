#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "pgfrac/mesh.hpp"

namespace pgfrac {

namespace {

std::string next_nonempty_line(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (!line.empty()) return line;
  }
  return {};
}

}  // namespace

Mesh read_gmsh(std::istream& in) {
  std::vector<std::array<double, 2>> coords;
  std::map<long, int> id_to_index;

  struct RawElem {
    int type;
    int phys;  // -1 when untagged
    std::vector<long> nodes;
  };
  std::vector<RawElem> elems;

  std::string line;
  while (!(line = next_nonempty_line(in)).empty()) {
    if (line == "$MeshFormat") {
      std::istringstream ls(next_nonempty_line(in));
      std::string version;
      int file_type = -1, data_size = 0;
      ls >> version >> file_type >> data_size;
      if (version.rfind("2.", 0) != 0)
        throw std::runtime_error("read_gmsh: unsupported MSH version " + version);
      if (file_type != 0) throw std::runtime_error("read_gmsh: binary MSH format not supported");
      if (next_nonempty_line(in) != "$EndMeshFormat")
        throw std::runtime_error("read_gmsh: malformed $MeshFormat section");
    } else if (line == "$Nodes") {
      std::istringstream hs(next_nonempty_line(in));
      long n = -1;
      hs >> n;
      if (n < 0) throw std::runtime_error("read_gmsh: malformed $Nodes header");
      coords.reserve(n);
      for (long i = 0; i < n; ++i) {
        std::istringstream ls(next_nonempty_line(in));
        long id;
        double x, y, z;
        if (!(ls >> id >> x >> y >> z)) throw std::runtime_error("read_gmsh: malformed node line");
        id_to_index[id] = static_cast<int>(coords.size());
        coords.push_back({x, y});
      }
      if (next_nonempty_line(in) != "$EndNodes")
        throw std::runtime_error("read_gmsh: malformed $Nodes section");
    } else if (line == "$Elements") {
      std::istringstream hs(next_nonempty_line(in));
      long n = -1;
      hs >> n;
      if (n < 0) throw std::runtime_error("read_gmsh: malformed $Elements header");
      for (long i = 0; i < n; ++i) {
        std::istringstream ls(next_nonempty_line(in));
        long id;
        int type, ntags;
        if (!(ls >> id >> type >> ntags))
          throw std::runtime_error("read_gmsh: malformed element line");
        int n_nodes;
        switch (type) {
          case 1: n_nodes = 2; break;  // line2
          case 2: n_nodes = 3; break;  // tri3
          case 3: n_nodes = 4; break;  // quad4
          default:
            throw std::runtime_error("read_gmsh: unsupported element type " +
                                     std::to_string(type));
        }
        RawElem e;
        e.type = type;
        e.phys = -1;
        for (int t = 0; t < ntags; ++t) {
          long tag;
          ls >> tag;
          if (t == 0) e.phys = static_cast<int>(tag);
        }
        e.nodes.resize(n_nodes);
        for (int k = 0; k < n_nodes; ++k)
          if (!(ls >> e.nodes[k])) throw std::runtime_error("read_gmsh: truncated element line");
        elems.push_back(std::move(e));
      }
      if (next_nonempty_line(in) != "$EndElements")
        throw std::runtime_error("read_gmsh: malformed $Elements section");
    } else if (line[0] == '$') {
      // skip unknown section
      const std::string end = "$End" + line.substr(1);
      while (!(line = next_nonempty_line(in)).empty() && line != end) {}
    }
  }

  Mesh m;
  bool has_2d = false;
  for (const auto& e : elems)
    if (e.type == 2 || e.type == 3) has_2d = true;
  m.dim = has_2d ? 2 : 1;
  m.nodes = std::move(coords);

  auto idx = [&](long id) {
    auto it = id_to_index.find(id);
    if (it == id_to_index.end()) throw std::runtime_error("read_gmsh: element references unknown node");
    return it->second;
  };

  std::map<std::string, std::vector<int>> sets;
  for (const auto& e : elems) {
    const bool is_boundary = has_2d && e.type == 1;
    if (is_boundary) {
      if (e.phys >= 0) {
        auto& s = sets[std::to_string(e.phys)];
        for (long id : e.nodes) s.push_back(idx(id));
      }
      continue;
    }
    Mesh::Cell c;
    c.kind = e.type == 1 ? CellKind::line2 : e.type == 2 ? CellKind::tri3 : CellKind::quad4;
    c.n = static_cast<int>(e.nodes.size());
    for (int k = 0; k < c.n; ++k) c.v[k] = idx(e.nodes[k]);
    m.cells.push_back(c);
  }
  for (auto& [name, s] : sets) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    m.boundary_sets[name] = std::move(s);
  }
  if (m.nodes.empty()) throw std::runtime_error("read_gmsh: no $Nodes section found");
  return m;
}

Mesh read_gmsh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_gmsh_file: cannot open " + path);
  return read_gmsh(in);
}

void write_gmsh(const Mesh& mesh, std::ostream& out) {
  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
  out.precision(17);
  out << "$Nodes\n" << mesh.n_nodes() << "\n";
  for (int i = 0; i < mesh.n_nodes(); ++i)
    out << (i + 1) << " " << mesh.nodes[i][0] << " " << mesh.nodes[i][1] << " 0\n";
  out << "$EndNodes\n$Elements\n" << mesh.cells.size() << "\n";
  for (std::size_t e = 0; e < mesh.cells.size(); ++e) {
    const auto& c = mesh.cells[e];
    const int type = c.kind == CellKind::line2 ? 1 : c.kind == CellKind::tri3 ? 2 : 3;
    out << (e + 1) << " " << type << " 0";
    for (int k = 0; k < c.n; ++k) out << " " << (c.v[k] + 1);
    out << "\n";
  }
  out << "$EndElements\n";
}

}  // namespace pgfrac
