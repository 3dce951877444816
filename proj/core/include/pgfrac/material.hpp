#pragma once

#include <array>
#include <utility>

#include "pgfrac/numeric.hpp"

namespace pgfrac {

enum class PlaneAssumption { plane_strain, one_d };

struct ElasticParams {
  double E = 0.0;
  double nu = 0.0;
  double rho = 0.0;
  double lambda = 0.0;
  double mu = 0.0;
  PlaneAssumption plane = PlaneAssumption::plane_strain;

  static ElasticParams make(double E, double nu, double rho,
                            PlaneAssumption plane = PlaneAssumption::plane_strain);
};

/// lambda = E nu / ((1+nu)(1-2nu)), mu = E / (2(1+nu)); nu = 0.5 rejected.
std::pair<double, double> lame_from_E_nu(double E, double nu);

/// Spectral decomposition of a symmetric 2x2 strain into tensile and
/// compressive parts, eps = eps_plus + eps_minus with
/// eps_pm = sum_i <eps_i>_pm n_i (x) n_i.
struct StrainState {
  SymTensor2 eps;
  std::array<double, 2> eigenvalues{};
  std::array<std::array<double, 2>, 2> eigenvectors{};  // columns n1, n2
  SymTensor2 eps_plus, eps_minus;
  bool coalesced = false;  // eigenvalues within guard, axes used as eigenvectors
};

StrainState spectral_split(const SymTensor2& eps);

/// psi_a = 1/2 lambda <tr eps>_+^2 + mu tr(eps_+^2), psi_b with the negative
/// parts. Total strain energy psi = psi_a + psi_b.
std::pair<double, double> psi_split(const StrainState& s, const ElasticParams& p);

/// sigma_a = lambda <tr eps>_+ I + 2 mu eps_+, and the inactive counterpart.
std::pair<SymTensor2, SymTensor2> sigma_split(const StrainState& s, const ElasticParams& p);

/// Algorithmic tangents d(sigma_a)/d(eps) and d(sigma_b)/d(eps) in Voigt form
/// (xx, yy, gamma_xy), with the coalescence guard of spectral_split.
struct SplitTangent {
  std::array<std::array<double, 3>, 3> Da{}, Db{};
};
SplitTangent split_tangent(const StrainState& s, const ElasticParams& p);

inline double degradation(double phi) { return (1.0 - phi) * (1.0 - phi); }
inline double degradation_prime(double phi) { return -2.0 * (1.0 - phi); }

// 1D counterparts (axial strain, modulus E)
inline double psi_a_1d(double eps, double E) {
  const double e = macaulay_pos(eps);
  return 0.5 * E * e * e;
}
inline double psi_b_1d(double eps, double E) {
  const double e = macaulay_neg(eps);
  return 0.5 * E * e * e;
}
inline double sigma_a_1d(double eps, double E) { return E * macaulay_pos(eps); }
inline double sigma_b_1d(double eps, double E) { return E * macaulay_neg(eps); }

}  // namespace pgfrac
