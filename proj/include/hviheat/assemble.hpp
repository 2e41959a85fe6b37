#pragma once

#include <functional>
#include <optional>
#include <span>

#include "hviheat/mesh.hpp"
#include "hviheat/sparse.hpp"

namespace hviheat::fem {

using ScalarField = std::function<double(double x, double y)>;

// P1 operators of the coupled bulk/boundary problem. All matrices are
// n_vertices x n_vertices; boundary ones are supported on boundary vertices.
struct AssembledOperators {
  CsrMatrix M_omega;  // interior mass
  CsrMatrix M_gamma;  // boundary mass (counting measure at the two 1D ends)
  CsrMatrix K;        // stiffness
  CsrMatrix R;        // Robin term, integral of a u v over the boundary
  CsrMatrix A;        // K + R
  CsrMatrix M_H;      // M_omega + M_gamma (state-space Gram matrix)
  CsrMatrix G_V;      // K + M_omega + M_gamma (energy-space Gram matrix)
  std::vector<double> lumped_omega;  // row sums of M_omega
  std::vector<double> lumped_gamma;  // row sums of M_gamma
  double a0 = 0.0;                   // observed lower bound of the Robin coefficient
  double domain_measure = 0.0;
  double boundary_measure = 0.0;
  mutable std::optional<double> coercivity;  // set by estimate_coercivity

  int n() const { return M_omega.n(); }
};

// Exact P1 integrals on affine cells; the Robin coefficient is integrated
// with a 3-point Gauss rule per facet (exact for polynomial a up to degree
// 3). Rejects coefficients that are not uniformly positive on the boundary.
AssembledOperators assemble(const Mesh& mesh, const ScalarField& a_field);

// <U, V> in L2(Omega) x L2(Gamma): U' (M_omega + M_gamma) V.
double product_inner(const AssembledOperators& ops, std::span<const double> u,
                     std::span<const double> v);
double h_norm(const AssembledOperators& ops, std::span<const double> u);

// sqrt(U' G_V U) = sqrt(|grad u|^2 + |u|^2_Omega + |u|^2_Gamma).
double v_norm(const AssembledOperators& ops, std::span<const double> u);

// Smallest generalized eigenvalue of (K + R) x = lambda G_V x by inverse
// iteration; stores the value in ops.coercivity. Throws std::runtime_error
// if the iteration does not settle.
double estimate_coercivity(const AssembledOperators& ops, double rel_tol = 1e-8,
                           int max_iter = 500);

// Discrete dual norm sqrt(F' G_V^{-1} F) via a sparse symmetric solve.
double riesz_dual_norm(const AssembledOperators& ops, std::span<const double> load);

}  // namespace hviheat::fem
