#pragma once

#include <string>

#include "pgfrac/mesh.hpp"
#include "pgfrac/numeric.hpp"

namespace pgfrac {

/// Crack surface regularization. AT1: alpha(phi) = phi (compact-support
/// profile, damage threshold). AT2: alpha(phi) = phi^2 (exponential profile).
struct CrackModel {
  enum class Kind { AT1, AT2 };
  Kind kind = Kind::AT2;
  double l = 0.0;   // regularization length scale
  double Gc = 0.0;  // critical energy release rate

  double c0() const { return kind == Kind::AT1 ? 8.0 / 3.0 : 2.0; }

  static CrackModel make(Kind kind, double l, double Gc);
  static Kind kind_from_string(const std::string& s);
};

double alpha(const CrackModel& m, double phi);
double alpha_prime(const CrackModel& m, double phi);

/// Gamma(phi) = (1/c0) int( alpha(phi)/l + l |grad phi|^2 ) dOmega, evaluated
/// with Gauss quadrature (it is a reported diagnostic, not part of the
/// constrained system).
double gamma_functional(const CrackModel& m, const Mesh& mesh, const Vector& phi);

/// Closed-form 1D regularization profiles on a bar of half-length a with
/// phi(0) = 1, phi'(a) = 0.
double analytic_phi_1d(const CrackModel& m, double x, double a, double l);

}  // namespace pgfrac
