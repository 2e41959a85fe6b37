#include "hviheat/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>

namespace hviheat::fem {

CsrMatrix::CsrMatrix(int n, std::vector<Triplet> triplets) : n_(n) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  row_ptr_.assign(size_t(n) + 1, 0);
  for (size_t i = 0; i < triplets.size();) {
    size_t j = i;
    double sum = 0.0;
    while (j < triplets.size() && triplets[j].row == triplets[i].row &&
           triplets[j].col == triplets[i].col)
      sum += triplets[j++].value;
    if (triplets[i].row < 0 || triplets[i].row >= n || triplets[i].col < 0 ||
        triplets[i].col >= n)
      throw std::out_of_range("CsrMatrix: triplet index out of range");
    col_.push_back(triplets[i].col);
    val_.push_back(sum);
    ++row_ptr_[size_t(triplets[i].row) + 1];
    i = j;
  }
  for (int r = 0; r < n; ++r) row_ptr_[size_t(r) + 1] += row_ptr_[size_t(r)];
}

void CsrMatrix::matvec(std::span<const double> x, std::span<double> y) const {
  for (int r = 0; r < n_; ++r) {
    double acc = 0.0;
    for (int k = row_ptr_[size_t(r)]; k < row_ptr_[size_t(r) + 1]; ++k)
      acc += val_[size_t(k)] * x[size_t(col_[size_t(k)])];
    y[size_t(r)] = acc;
  }
}

std::vector<double> CsrMatrix::apply(std::span<const double> x) const {
  std::vector<double> y(size_t(n_), 0.0);
  matvec(x, y);
  return y;
}

double CsrMatrix::quad(std::span<const double> u, std::span<const double> v) const {
  double acc = 0.0;
  for (int r = 0; r < n_; ++r) {
    double row = 0.0;
    for (int k = row_ptr_[size_t(r)]; k < row_ptr_[size_t(r) + 1]; ++k)
      row += val_[size_t(k)] * v[size_t(col_[size_t(k)])];
    acc += u[size_t(r)] * row;
  }
  return acc;
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(size_t(n_), 0.0);
  for (int r = 0; r < n_; ++r)
    for (int k = row_ptr_[size_t(r)]; k < row_ptr_[size_t(r) + 1]; ++k)
      if (col_[size_t(k)] == r) d[size_t(r)] = val_[size_t(k)];
  return d;
}

CsrMatrix CsrMatrix::linear_combination(
    std::initializer_list<std::pair<double, const CsrMatrix*>> terms) {
  int n = 0;
  std::vector<Triplet> t;
  for (const auto& [alpha, m] : terms) {
    if (m->n() == 0) continue;
    if (n == 0) n = m->n();
    if (m->n() != n) throw std::invalid_argument("linear_combination: size mismatch");
    for (int r = 0; r < n; ++r)
      for (int k = m->row_ptr_[size_t(r)]; k < m->row_ptr_[size_t(r) + 1]; ++k)
        t.push_back({r, m->col_[size_t(k)], alpha * m->val_[size_t(k)]});
  }
  return CsrMatrix(n, std::move(t));
}

CsrMatrix CsrMatrix::with_added_diagonal(std::span<const double> d) const {
  std::vector<Triplet> t;
  t.reserve(val_.size() + size_t(n_));
  for (int r = 0; r < n_; ++r)
    for (int k = row_ptr_[size_t(r)]; k < row_ptr_[size_t(r) + 1]; ++k)
      t.push_back({r, col_[size_t(k)], val_[size_t(k)]});
  for (int r = 0; r < n_; ++r) t.push_back({r, r, d[size_t(r)]});
  return CsrMatrix(n_, std::move(t));
}

void CsrMatrix::write_coo(std::ostream& os) const {
  char buf[64];
  os << n_ << " " << n_ << " " << nnz() << "\n";
  for (int r = 0; r < n_; ++r)
    for (int k = row_ptr_[size_t(r)]; k < row_ptr_[size_t(r) + 1]; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", val_[size_t(k)]);
      os << r << " " << col_[size_t(k)] << " " << buf << "\n";
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

CgResult cg_solve(const CsrMatrix& A, std::span<const double> b, std::span<double> x,
                  double rel_tol, int max_iter) {
  const size_t n = size_t(A.n());
  if (max_iter < 0) max_iter = 50 * A.n() + 100;

  std::vector<double> prec = A.diagonal();
  for (double& d : prec) d = (d > 0.0) ? 1.0 / d : 1.0;

  std::vector<double> r(n), z(n), p(n), Ap(n);
  A.matvec(x, Ap);
  for (size_t i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
  const double bnorm = norm2(b);
  CgResult res;
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    res.converged = true;
    return res;
  }

  for (size_t i = 0; i < n; ++i) z[i] = prec[i] * r[i];
  p = z;
  double rz = dot(r, z);

  for (int it = 0; it < max_iter; ++it) {
    res.relative_residual = norm2(r) / bnorm;
    if (res.relative_residual <= rel_tol) {
      res.converged = true;
      res.iterations = it;
      return res;
    }
    A.matvec(p, Ap);
    double pAp = dot(p, Ap);
    if (!(pAp > 0.0)) {
      res.indefinite = true;
      res.iterations = it;
      return res;
    }
    double alpha = rz / pAp;
    for (size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    for (size_t i = 0; i < n; ++i) z[i] = prec[i] * r[i];
    double rz_new = dot(r, z);
    double beta = rz_new / rz;
    rz = rz_new;
    for (size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  res.relative_residual = norm2(r) / bnorm;
  res.converged = res.relative_residual <= rel_tol;
  res.iterations = max_iter;
  return res;
}

bool lu_solve(std::vector<double> a, std::span<const double> b, std::span<double> x) {
  const int n = int(b.size());
  std::copy(b.begin(), b.end(), x.begin());

  for (int k = 0; k < n; ++k) {
    int pr = k;
    double best = std::fabs(a[size_t(k) * size_t(n) + size_t(k)]);
    for (int r = k + 1; r < n; ++r) {
      double v = std::fabs(a[size_t(r) * size_t(n) + size_t(k)]);
      if (v > best) {
        best = v;
        pr = r;
      }
    }
    if (best == 0.0) return false;
    if (pr != k) {
      for (int c = 0; c < n; ++c)
        std::swap(a[size_t(k) * size_t(n) + size_t(c)], a[size_t(pr) * size_t(n) + size_t(c)]);
      std::swap(x[size_t(k)], x[size_t(pr)]);
    }
    double pivot = a[size_t(k) * size_t(n) + size_t(k)];
    for (int r = k + 1; r < n; ++r) {
      double f = a[size_t(r) * size_t(n) + size_t(k)] / pivot;
      if (f == 0.0) continue;
      a[size_t(r) * size_t(n) + size_t(k)] = 0.0;
      for (int c = k + 1; c < n; ++c)
        a[size_t(r) * size_t(n) + size_t(c)] -= f * a[size_t(k) * size_t(n) + size_t(c)];
      x[size_t(r)] -= f * x[size_t(k)];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double acc = x[size_t(r)];
    for (int c = r + 1; c < n; ++c) acc -= a[size_t(r) * size_t(n) + size_t(c)] * x[size_t(c)];
    x[size_t(r)] = acc / a[size_t(r) * size_t(n) + size_t(r)];
  }
  return true;
}

void solve_spd(const CsrMatrix& A, std::span<const double> b, std::span<double> x,
               double rel_tol) {
  std::fill(x.begin(), x.end(), 0.0);
  CgResult cg = cg_solve(A, b, x, rel_tol);
  if (cg.converged) return;

  // Dense fallback, adequate at the problem sizes this solver targets.
  const size_t n = size_t(A.n());
  std::vector<double> dense(n * n, 0.0);
  auto rp = A.row_ptr();
  auto cols = A.cols();
  auto vals = A.values();
  for (size_t r = 0; r < n; ++r)
    for (int k = rp[r]; k < rp[r + 1]; ++k) dense[r * n + size_t(cols[size_t(k)])] = vals[size_t(k)];
  if (!lu_solve(std::move(dense), b, x))
    throw std::runtime_error("solve_spd: CG stalled and the dense factorization is singular");
}

}  // namespace hviheat::fem
