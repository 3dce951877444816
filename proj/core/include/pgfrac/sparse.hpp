#pragma once

#include <string>
#include <vector>

#include "pgfrac/numeric.hpp"

namespace pgfrac {

struct Triplet {
  int row = 0, col = 0;
  double value = 0.0;
};

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row and duplicates have been summed.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  static SparseMatrix from_triplets(int n_rows, int n_cols, const std::vector<Triplet>& triplets);
  static SparseMatrix diagonal(const Vector& d);

  int rows() const { return n_rows_; }
  int cols() const { return n_cols_; }
  int nnz() const { return static_cast<int>(val_.size()); }

  /// y = A x
  void matvec(const Vector& x, Vector& y) const;
  Vector operator*(const Vector& x) const;

  /// Pointer to stored entry (i, j), nullptr if not in the pattern.
  const double* find(int i, int j) const;
  double* find(int i, int j);

  /// Adds into an existing pattern entry; throws if (i, j) is not stored.
  void add_at(int i, int j, double v);

  /// Zeroes values, keeps the sparsity pattern (for re-assembly).
  void set_values_zero();

  Vector diagonal_vector() const;
  Vector dense_row_major() const;

  int n_rows_ = 0, n_cols_ = 0;
  std::vector<int> row_ptr_;
  std::vector<int> col_idx_;
  std::vector<double> val_;
};

SparseMatrix assemble_from_triplets(int n_rows, int n_cols, const std::vector<Triplet>& triplets);

/// Reciprocal-diagonal scaling; throws on a zero diagonal entry.
Vector jacobi_precond(const SparseMatrix& a);

struct SolveStats {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;   // true residual norm ||b - A x||, recomputed at exit
  bool breakdown = false;  // CG: indefinite direction encountered
  bool stagnated = false;  // GMRES: no progress over a restart cycle
};

/// Preconditioned conjugate gradients. precond is the reciprocal diagonal
/// (empty = identity). On non-convergence the last iterate is kept in x and
/// stats.converged is false.
SolveStats cg_solve(const SparseMatrix& a, const Vector& b, const Vector& precond, Vector& x,
                    double rtol = 1e-6, double atol = 1e-6, int max_iter = 10000);

/// Restarted GMRES with left diagonal preconditioning.
SolveStats gmres_solve(const SparseMatrix& a, const Vector& b, const Vector& precond, Vector& x,
                       double rtol = 1e-6, double atol = 1e-6, int restart = 30,
                       int max_iter = 10000);

/// Two-field saddle system
///   [ A    B^T ] [x_top   ]   [ rhs_top    ]
///   [ B   -C_p ] [x_bottom] = [ rhs_bottom ]
/// B and C_pert are diagonal when assembled with nodal quadrature.
struct BlockSaddleSystem {
  SparseMatrix A;
  SparseMatrix B;
  SparseMatrix C_pert;
  Vector rhs_top;
  Vector rhs_bottom;

  SparseMatrix monolithic() const;
  Vector monolithic_rhs() const;
};

SolveStats gmres_solve(const BlockSaddleSystem& sys, const Vector& precond, Vector& x,
                       double rtol = 1e-6, double atol = 1e-6, int restart = 30,
                       int max_iter = 10000);

}  // namespace pgfrac
