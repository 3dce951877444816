#include "pgfrac/crack.hpp"

#include <cmath>
#include <stdexcept>

#include "pgfrac/fem.hpp"

namespace pgfrac {

CrackModel CrackModel::make(Kind kind, double l, double Gc) {
  if (l <= 0.0) throw std::invalid_argument("CrackModel: l must be positive");
  if (Gc <= 0.0) throw std::invalid_argument("CrackModel: Gc must be positive");
  return CrackModel{kind, l, Gc};
}

CrackModel::Kind CrackModel::kind_from_string(const std::string& s) {
  if (s == "at1" || s == "AT1") return Kind::AT1;
  if (s == "at2" || s == "AT2") return Kind::AT2;
  throw std::invalid_argument("unknown crack model '" + s + "' (expected at1 or at2)");
}

double alpha(const CrackModel& m, double phi) {
  return m.kind == CrackModel::Kind::AT1 ? phi : phi * phi;
}

double alpha_prime(const CrackModel& m, double phi) {
  return m.kind == CrackModel::Kind::AT1 ? 1.0 : 2.0 * phi;
}

double gamma_functional(const CrackModel& m, const Mesh& mesh, const Vector& phi) {
  double total = 0.0;
  for (const auto& cell : mesh.cells) {
    const QuadratureRule& rule = gauss_rule(cell.kind);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const ElementBasis b = shape_eval(cell.kind, rule.points[q].xi, rule.points[q].eta);
      const MappedBasis mb = map_basis(mesh, cell, b, rule.weights[q]);
      double p = 0.0, gx = 0.0, gy = 0.0;
      for (int a = 0; a < mb.n; ++a) {
        const double pa = phi[cell.v[a]];
        p += mb.N[a] * pa;
        gx += mb.grad[a][0] * pa;
        gy += mb.grad[a][1] * pa;
      }
      total += (alpha(m, p) / m.l + m.l * (gx * gx + gy * gy)) * mb.jxw;
    }
  }
  return total / m.c0();
}

double analytic_phi_1d(const CrackModel& m, double x, double a, double l) {
  const double ax = std::abs(x);
  if (m.kind == CrackModel::Kind::AT2) {
    return std::exp(-ax / l) + 2.0 * std::sinh(ax / l) / (std::exp(2.0 * a / l) + 1.0);
  }
  // AT1: piecewise quadratic with compact support of half-width 2l
  if (a < 2.0 * l) {
    const double t = 1.0 - ax / (2.0 * l);
    return t * t + (ax / l) * (1.0 - a / (2.0 * l));
  }
  if (ax < 2.0 * l) {
    const double t = 1.0 - ax / (2.0 * l);
    return t * t;
  }
  return 0.0;
}

}  // namespace pgfrac
