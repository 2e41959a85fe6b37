#pragma once

#include <initializer_list>
#include <iosfwd>
#include <span>
#include <vector>

namespace hviheat::fem {

struct Triplet {
  int row;
  int col;
  double value;
};

// Square CSR matrix with sorted column indices; duplicate triplets are summed.
class CsrMatrix {
public:
  CsrMatrix() = default;
  CsrMatrix(int n, std::vector<Triplet> triplets);

  int n() const { return n_; }
  int nnz() const { return int(val_.size()); }
  bool empty() const { return n_ == 0; }

  void matvec(std::span<const double> x, std::span<double> y) const;
  std::vector<double> apply(std::span<const double> x) const;
  double quad(std::span<const double> u, std::span<const double> v) const;  // u' A v
  std::vector<double> diagonal() const;

  // alpha*A + beta*B + ... over identical dimensions.
  static CsrMatrix linear_combination(
      std::initializer_list<std::pair<double, const CsrMatrix*>> terms);

  // Copy with values added to the diagonal.
  CsrMatrix with_added_diagonal(std::span<const double> d) const;

  // Coordinate text format: "n n nnz" header line, then "row col value".
  void write_coo(std::ostream& os) const;

  std::span<const int> row_ptr() const { return row_ptr_; }
  std::span<const int> cols() const { return col_; }
  std::span<const double> values() const { return val_; }

private:
  int n_ = 0;
  std::vector<int> row_ptr_;
  std::vector<int> col_;
  std::vector<double> val_;
};

struct CgResult {
  bool converged = false;
  int iterations = 0;
  double relative_residual = 0.0;
  bool indefinite = false;  // non-positive curvature encountered
};

// Jacobi-preconditioned conjugate gradients; x holds the initial guess and
// the solution. Tolerance is on ||b - Ax||_2 / ||b||_2.
CgResult cg_solve(const CsrMatrix& A, std::span<const double> b, std::span<double> x,
                  double rel_tol = 1e-13, int max_iter = -1);

// Dense LU with partial pivoting (row-major n*n matrix); returns false if
// singular. Fallback path for small or indefinite systems.
bool lu_solve(std::vector<double> dense, std::span<const double> b, std::span<double> x);

// Solves A x = b robustly: CG first, dense LU if CG stalls or detects an
// indefinite matrix. Throws std::runtime_error if both fail.
void solve_spd(const CsrMatrix& A, std::span<const double> b, std::span<double> x,
               double rel_tol = 1e-13);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace hviheat::fem
