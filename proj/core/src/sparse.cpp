#include "pgfrac/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pgfrac {

SparseMatrix SparseMatrix::from_triplets(int n_rows, int n_cols,
                                         const std::vector<Triplet>& triplets) {
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols)
      throw std::invalid_argument("from_triplets: index out of range");
  }
  std::vector<int> order(triplets.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (triplets[a].row != triplets[b].row) return triplets[a].row < triplets[b].row;
    return triplets[a].col < triplets[b].col;
  });

  SparseMatrix m;
  m.n_rows_ = n_rows;
  m.n_cols_ = n_cols;
  m.row_ptr_.assign(n_rows + 1, 0);
  m.col_idx_.reserve(triplets.size());
  m.val_.reserve(triplets.size());

  int cur_row = -1, cur_col = -1;
  for (int k : order) {
    const Triplet& t = triplets[k];
    if (t.row == cur_row && t.col == cur_col) {
      m.val_.back() += t.value;  // duplicates summed
    } else {
      m.col_idx_.push_back(t.col);
      m.val_.push_back(t.value);
      cur_row = t.row;
      cur_col = t.col;
      m.row_ptr_[t.row + 1]++;
    }
  }
  for (int i = 0; i < n_rows; ++i) m.row_ptr_[i + 1] += m.row_ptr_[i];
  return m;
}

SparseMatrix assemble_from_triplets(int n_rows, int n_cols, const std::vector<Triplet>& triplets) {
  return SparseMatrix::from_triplets(n_rows, n_cols, triplets);
}

SparseMatrix SparseMatrix::diagonal(const Vector& d) {
  SparseMatrix m;
  const int n = static_cast<int>(d.size());
  m.n_rows_ = m.n_cols_ = n;
  m.row_ptr_.resize(n + 1);
  m.col_idx_.resize(n);
  m.val_ = d;
  for (int i = 0; i <= n; ++i) m.row_ptr_[i] = i;
  for (int i = 0; i < n; ++i) m.col_idx_[i] = i;
  return m;
}

void SparseMatrix::matvec(const Vector& x, Vector& y) const {
  y.assign(n_rows_, 0.0);
  for (int i = 0; i < n_rows_; ++i) {
    double s = 0.0;
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += val_[k] * x[col_idx_[k]];
    y[i] = s;
  }
}

Vector SparseMatrix::operator*(const Vector& x) const {
  Vector y;
  matvec(x, y);
  return y;
}

const double* SparseMatrix::find(int i, int j) const {
  const int lo = row_ptr_[i], hi = row_ptr_[i + 1];
  auto it = std::lower_bound(col_idx_.begin() + lo, col_idx_.begin() + hi, j);
  if (it == col_idx_.begin() + hi || *it != j) return nullptr;
  return &val_[it - col_idx_.begin()];
}

double* SparseMatrix::find(int i, int j) {
  return const_cast<double*>(static_cast<const SparseMatrix*>(this)->find(i, j));
}

void SparseMatrix::add_at(int i, int j, double v) {
  double* p = find(i, j);
  if (!p) throw std::invalid_argument("add_at: entry not in sparsity pattern");
  *p += v;
}

void SparseMatrix::set_values_zero() { std::fill(val_.begin(), val_.end(), 0.0); }

Vector SparseMatrix::diagonal_vector() const {
  Vector d(n_rows_, 0.0);
  for (int i = 0; i < n_rows_ && i < n_cols_; ++i)
    if (const double* p = find(i, i)) d[i] = *p;
  return d;
}

Vector SparseMatrix::dense_row_major() const {
  Vector d(static_cast<std::size_t>(n_rows_) * n_cols_, 0.0);
  for (int i = 0; i < n_rows_; ++i)
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      d[static_cast<std::size_t>(i) * n_cols_ + col_idx_[k]] += val_[k];
  return d;
}

Vector jacobi_precond(const SparseMatrix& a) {
  Vector d(a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    const double* p = a.find(i, i);
    if (!p || *p == 0.0) throw std::invalid_argument("jacobi_precond: zero diagonal entry");
    d[i] = 1.0 / *p;
  }
  return d;
}

namespace {

void apply_precond(const Vector& precond, const Vector& r, Vector& z) {
  if (precond.empty()) {
    z = r;
  } else {
    z.resize(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) z[i] = precond[i] * r[i];
  }
}

double true_residual(const SparseMatrix& a, const Vector& b, const Vector& x, Vector& scratch) {
  a.matvec(x, scratch);
  double s = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double r = b[i] - scratch[i];
    s += r * r;
  }
  return std::sqrt(s);
}

}  // namespace

SolveStats cg_solve(const SparseMatrix& a, const Vector& b, const Vector& precond, Vector& x,
                    double rtol, double atol, int max_iter) {
  SolveStats stats;
  const int n = a.rows();
  if (x.size() != static_cast<std::size_t>(n)) x.assign(n, 0.0);

  Vector r(n), z(n), p(n), ap(n);
  a.matvec(x, ap);
  for (int i = 0; i < n; ++i) r[i] = b[i] - ap[i];

  const double target = std::max(rtol * norm2(b), atol);
  apply_precond(precond, r, z);
  p = z;
  double rz = dot(r, z);

  for (int it = 0; it < max_iter; ++it) {
    if (norm2(r) <= target) break;
    a.matvec(p, ap);
    const double pap = dot(p, ap);
    if (pap <= 0.0) {  // not SPD along this direction
      stats.breakdown = true;
      break;
    }
    const double alpha = rz / pap;
    axpy(alpha, p, x);
    axpy(-alpha, ap, r);
    apply_precond(precond, r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    stats.iterations = it + 1;
  }

  stats.residual = true_residual(a, b, x, ap);
  stats.converged = !stats.breakdown && stats.residual <= target * (1.0 + 1e-12);
  return stats;
}

namespace {

SolveStats gmres_impl(const SparseMatrix& a, const Vector& b, const Vector& precond, Vector& x,
                      double rtol, double atol, int restart, int max_iter) {
  SolveStats stats;
  const int n = a.rows();
  if (x.size() != static_cast<std::size_t>(n)) x.assign(n, 0.0);

  Vector pb;
  apply_precond(precond, b, pb);
  const double target_precond = std::max(rtol * norm2(pb), atol);
  const double target_true = std::max(rtol * norm2(b), atol);

  Vector scratch(n);
  int total_it = 0;
  double last_cycle_res = -1.0;

  while (total_it < max_iter) {
    // Arnoldi with modified Gram-Schmidt on the left-preconditioned operator
    Vector r(n);
    a.matvec(x, scratch);
    for (int i = 0; i < n; ++i) r[i] = b[i] - scratch[i];
    apply_precond(precond, r, r);
    double beta = norm2(r);
    if (beta <= target_precond) break;

    if (last_cycle_res >= 0.0 && beta > 0.999 * last_cycle_res) {
      stats.stagnated = true;
      break;
    }
    last_cycle_res = beta;

    const int m = restart;
    std::vector<Vector> v;
    v.reserve(m + 1);
    v.push_back(r);
    for (double& c : v[0]) c /= beta;

    std::vector<double> h((m + 1) * m, 0.0);
    std::vector<double> cs(m, 0.0), sn(m, 0.0), g(m + 1, 0.0);
    g[0] = beta;

    int k = 0;
    for (; k < m && total_it < max_iter; ++k, ++total_it) {
      Vector w(n);
      a.matvec(v[k], w);
      apply_precond(precond, w, w);
      for (int i = 0; i <= k; ++i) {
        const double hik = dot(w, v[i]);
        h[i * m + k] = hik;
        axpy(-hik, v[i], w);
      }
      const double hkk = norm2(w);
      h[(k + 1) * m + k] = hkk;
      if (hkk > 0.0) {
        for (double& c : w) c /= hkk;
        v.push_back(w);
      }
      // Givens rotations to keep H upper triangular
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * h[i * m + k] + sn[i] * h[(i + 1) * m + k];
        h[(i + 1) * m + k] = -sn[i] * h[i * m + k] + cs[i] * h[(i + 1) * m + k];
        h[i * m + k] = t;
      }
      const double denom = std::hypot(h[k * m + k], h[(k + 1) * m + k]);
      if (denom == 0.0) { ++k; break; }
      cs[k] = h[k * m + k] / denom;
      sn[k] = h[(k + 1) * m + k] / denom;
      h[k * m + k] = denom;
      h[(k + 1) * m + k] = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      if (std::abs(g[k + 1]) <= target_precond) { ++k; break; }
      if (hkk == 0.0) { ++k; break; }  // lucky breakdown
    }

    // back-substitute y and update x
    std::vector<double> y(k, 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= h[i * m + j] * y[j];
      y[i] = s / h[i * m + i];
    }
    for (int i = 0; i < k; ++i) axpy(y[i], v[i], x);
    stats.iterations = total_it;
    if (k == 0) break;
  }

  stats.iterations = total_it;
  stats.residual = true_residual(a, b, x, scratch);
  stats.converged = stats.residual <= target_true * (1.0 + 1e-12);
  return stats;
}

}  // namespace

SolveStats gmres_solve(const SparseMatrix& a, const Vector& b, const Vector& precond, Vector& x,
                       double rtol, double atol, int restart, int max_iter) {
  return gmres_impl(a, b, precond, x, rtol, atol, restart, max_iter);
}

SparseMatrix BlockSaddleSystem::monolithic() const {
  const int n = A.rows();
  std::vector<Triplet> t;
  t.reserve(A.nnz() + 3 * B.nnz());
  for (int i = 0; i < n; ++i)
    for (int k = A.row_ptr_[i]; k < A.row_ptr_[i + 1]; ++k)
      t.push_back({i, A.col_idx_[k], A.val_[k]});
  for (int i = 0; i < B.rows(); ++i)
    for (int k = B.row_ptr_[i]; k < B.row_ptr_[i + 1]; ++k) {
      t.push_back({n + i, B.col_idx_[k], B.val_[k]});       // B
      t.push_back({B.col_idx_[k], n + i, B.val_[k]});       // B^T
    }
  for (int i = 0; i < C_pert.rows(); ++i)
    for (int k = C_pert.row_ptr_[i]; k < C_pert.row_ptr_[i + 1]; ++k)
      t.push_back({n + i, n + C_pert.col_idx_[k], -C_pert.val_[k]});
  return SparseMatrix::from_triplets(2 * n, 2 * n, t);
}

Vector BlockSaddleSystem::monolithic_rhs() const {
  Vector rhs(rhs_top.size() + rhs_bottom.size());
  std::copy(rhs_top.begin(), rhs_top.end(), rhs.begin());
  std::copy(rhs_bottom.begin(), rhs_bottom.end(), rhs.begin() + rhs_top.size());
  return rhs;
}

SolveStats gmres_solve(const BlockSaddleSystem& sys, const Vector& precond, Vector& x,
                       double rtol, double atol, int restart, int max_iter) {
  const SparseMatrix m = sys.monolithic();
  const Vector rhs = sys.monolithic_rhs();
  Vector p = precond;
  if (p.empty()) {
    p.assign(m.rows(), 1.0);
    for (int i = 0; i < m.rows(); ++i) {
      const double* d = m.find(i, i);
      if (d && *d != 0.0) p[i] = 1.0 / std::abs(*d);
    }
  }
  return gmres_impl(m, rhs, p, x, rtol, atol, restart, max_iter);
}

}  // namespace pgfrac
