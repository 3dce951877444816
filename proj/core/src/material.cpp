#include "pgfrac/material.hpp"

#include <cmath>
#include <stdexcept>
#include <tuple>

namespace pgfrac {

std::pair<double, double> lame_from_E_nu(double E, double nu) {
  if (E <= 0.0) throw std::invalid_argument("lame_from_E_nu: E must be positive");
  if (nu <= -1.0 || nu >= 0.5)
    throw std::invalid_argument("lame_from_E_nu: nu must lie in (-1, 0.5)");
  const double lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  const double mu = E / (2.0 * (1.0 + nu));
  return {lambda, mu};
}

ElasticParams ElasticParams::make(double E, double nu, double rho, PlaneAssumption plane) {
  ElasticParams p;
  p.E = E;
  p.nu = nu;
  p.rho = rho;
  p.plane = plane;
  if (plane == PlaneAssumption::one_d) {
    p.lambda = 0.0;
    p.mu = 0.5 * E;  // so that psi = 1/2 E eps^2 in the axial setting
  } else {
    std::tie(p.lambda, p.mu) = lame_from_E_nu(E, nu);
  }
  return p;
}

StrainState spectral_split(const SymTensor2& eps) {
  StrainState s;
  s.eps = eps;

  const double tr = eps.trace();
  const double half_diff = 0.5 * (eps.xx - eps.yy);
  const double radius = std::sqrt(half_diff * half_diff + eps.xy * eps.xy);
  const double e1 = 0.5 * tr + radius;
  const double e2 = 0.5 * tr - radius;
  s.eigenvalues = {e1, e2};

  const double guard = 1e-12 * std::max(eps.norm(), 1e-300);
  if (radius * 2.0 < guard) {
    // repeated eigenvalue: any orthonormal pair is admissible, use the axes
    s.coalesced = true;
    s.eigenvectors = {{{1.0, 0.0}, {0.0, 1.0}}};
  } else if (std::abs(eps.xy) > std::abs(half_diff) * 1e-14) {
    const double nx = eps.xy, ny = e1 - eps.xx;
    const double norm = std::hypot(nx, ny);
    s.eigenvectors[0] = {nx / norm, ny / norm};
    s.eigenvectors[1] = {-ny / norm, nx / norm};
  } else {
    // diagonal tensor
    if (eps.xx >= eps.yy) {
      s.eigenvectors = {{{1.0, 0.0}, {0.0, 1.0}}};
    } else {
      s.eigenvectors = {{{0.0, 1.0}, {1.0, 0.0}}};
    }
  }

  auto outer = [](const std::array<double, 2>& n) {
    return SymTensor2{n[0] * n[0], n[1] * n[1], n[0] * n[1]};
  };
  const SymTensor2 m1 = outer(s.eigenvectors[0]);
  const SymTensor2 m2 = outer(s.eigenvectors[1]);
  s.eps_plus = m1 * macaulay_pos(e1) + m2 * macaulay_pos(e2);
  s.eps_minus = m1 * macaulay_neg(e1) + m2 * macaulay_neg(e2);
  return s;
}

std::pair<double, double> psi_split(const StrainState& s, const ElasticParams& p) {
  const double tr = s.eps.trace();
  const double tp = macaulay_pos(tr), tm = macaulay_neg(tr);
  const double psi_a = 0.5 * p.lambda * tp * tp + p.mu * s.eps_plus.contract(s.eps_plus);
  const double psi_b = 0.5 * p.lambda * tm * tm + p.mu * s.eps_minus.contract(s.eps_minus);
  return {psi_a, psi_b};
}

std::pair<SymTensor2, SymTensor2> sigma_split(const StrainState& s, const ElasticParams& p) {
  const double tr = s.eps.trace();
  const SymTensor2 eye{1.0, 1.0, 0.0};
  const SymTensor2 sa = eye * (p.lambda * macaulay_pos(tr)) + s.eps_plus * (2.0 * p.mu);
  const SymTensor2 sb = eye * (p.lambda * macaulay_neg(tr)) + s.eps_minus * (2.0 * p.mu);
  return {sa, sb};
}

SplitTangent split_tangent(const StrainState& s, const ElasticParams& p) {
  SplitTangent t;
  const double e1 = s.eigenvalues[0], e2 = s.eigenvalues[1];
  const double h1 = e1 > 0.0 ? 1.0 : 0.0;
  const double h2 = e2 > 0.0 ? 1.0 : 0.0;
  const double htr = s.eps.trace() > 0.0 ? 1.0 : 0.0;

  // shear coupling factor (<e1>_+ - <e2>_+)/(e1 - e2), guarded at coalescence
  double theta;
  if (s.coalesced || std::abs(e1 - e2) < 1e-12 * std::max(s.eps.norm(), 1e-300)) {
    theta = h1;
  } else {
    theta = (macaulay_pos(e1) - macaulay_pos(e2)) / (e1 - e2);
  }

  // tangent in the eigenframe, Voigt (11, 22, gamma12)
  const double l = p.lambda, m = p.mu;
  std::array<std::array<double, 3>, 3> da_eig{}, db_eig{};
  da_eig[0] = {l * htr + 2 * m * h1, l * htr, 0.0};
  da_eig[1] = {l * htr, l * htr + 2 * m * h2, 0.0};
  da_eig[2] = {0.0, 0.0, m * theta};
  db_eig[0] = {l * (1 - htr) + 2 * m * (1 - h1), l * (1 - htr), 0.0};
  db_eig[1] = {l * (1 - htr), l * (1 - htr) + 2 * m * (1 - h2), 0.0};
  db_eig[2] = {0.0, 0.0, m * (1.0 - theta)};

  // rotate back to the xy frame: D_xy = T_sig^T D_eig T_eps with the Voigt
  // strain transformation for rotation angle of eigenvector n1
  const double c = s.eigenvectors[0][0], sn = s.eigenvectors[0][1];
  const double c2 = c * c, s2 = sn * sn, cs = c * sn;
  // strain (xx, yy, gamma) from xy to eigenframe
  const double Te[3][3] = {{c2, s2, cs}, {s2, c2, -cs}, {-2 * cs, 2 * cs, c2 - s2}};
  // stress from eigenframe back to xy equals Te^T applied on the left
  auto rotate = [&](const std::array<std::array<double, 3>, 3>& d) {
    std::array<std::array<double, 3>, 3> tmp{}, out{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) tmp[i][j] += d[i][k] * Te[k][j];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) out[i][j] += Te[k][i] * tmp[k][j];
    return out;
  };
  t.Da = rotate(da_eig);
  t.Db = rotate(db_eig);
  return t;
}

}  // namespace pgfrac
