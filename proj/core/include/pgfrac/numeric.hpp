#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace pgfrac {

using Vector = std::vector<double>;

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);
double norm_inf(const Vector& a);

/// y += alpha * x
void axpy(double alpha, const Vector& x, Vector& y);

inline double macaulay_pos(double t) { return t > 0.0 ? t : 0.0; }
inline double macaulay_neg(double t) { return t < 0.0 ? t : 0.0; }

/// Symmetric 2x2 tensor, components (xx, yy, xy).
struct SymTensor2 {
  double xx = 0.0, yy = 0.0, xy = 0.0;

  double trace() const { return xx + yy; }
  double det() const { return xx * yy - xy * xy; }

  SymTensor2 operator+(const SymTensor2& o) const { return {xx + o.xx, yy + o.yy, xy + o.xy}; }
  SymTensor2 operator-(const SymTensor2& o) const { return {xx - o.xx, yy - o.yy, xy - o.xy}; }
  SymTensor2 operator*(double s) const { return {xx * s, yy * s, xy * s}; }

  double norm() const { return std::sqrt(xx * xx + yy * yy + 2.0 * xy * xy); }
  /// tr(a . b) with both symmetric
  double contract(const SymTensor2& o) const { return xx * o.xx + yy * o.yy + 2.0 * xy * o.xy; }
};

/// Dense LU with partial pivoting, row-major n x n. Intended for small
/// systems (n < 200); used as the direct-solve path and by test oracles.
Vector dense_lu_solve(std::vector<double> a, Vector b);

}  // namespace pgfrac
