#include "hviheat/assemble.hpp"

#include <cmath>
#include <stdexcept>

#include "hviheat/quadrature.hpp"

namespace hviheat::fem {

namespace {

void add_sym(std::vector<Triplet>& t, int i, int j, double v) {
  t.push_back({i, j, v});
}

}  // namespace

AssembledOperators assemble(const Mesh& mesh, const ScalarField& a_field) {
  validate(mesh);
  const int n = mesh.n_vertices();
  std::vector<Triplet> tm, tk, tb, tr;
  AssembledOperators ops;
  ops.lumped_omega.assign(size_t(n), 0.0);
  ops.lumped_gamma.assign(size_t(n), 0.0);

  if (mesh.dim == 1) {
    for (const auto& cell : mesh.cells) {
      const int a = cell[0], b = cell[1];
      const double h = std::fabs(mesh.vertices[size_t(b)][0] - mesh.vertices[size_t(a)][0]);
      add_sym(tm, a, a, h / 3.0);
      add_sym(tm, b, b, h / 3.0);
      add_sym(tm, a, b, h / 6.0);
      add_sym(tm, b, a, h / 6.0);
      add_sym(tk, a, a, 1.0 / h);
      add_sym(tk, b, b, 1.0 / h);
      add_sym(tk, a, b, -1.0 / h);
      add_sym(tk, b, a, -1.0 / h);
      ops.lumped_omega[size_t(a)] += h / 2.0;
      ops.lumped_omega[size_t(b)] += h / 2.0;
    }
  } else {
    for (const auto& cell : mesh.cells) {
      const auto& p0 = mesh.vertices[size_t(cell[0])];
      const auto& p1 = mesh.vertices[size_t(cell[1])];
      const auto& p2 = mesh.vertices[size_t(cell[2])];
      const double area =
          0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
      // Gradient of the hat at vertex i: perpendicular of the opposite edge / 2 area.
      const double bx[3] = {p1[1] - p2[1], p2[1] - p0[1], p0[1] - p1[1]};
      const double by[3] = {p2[0] - p1[0], p0[0] - p2[0], p1[0] - p0[0]};
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          add_sym(tm, cell[size_t(i)], cell[size_t(j)], area / (i == j ? 6.0 : 12.0));
          add_sym(tk, cell[size_t(i)], cell[size_t(j)],
                  (bx[i] * bx[j] + by[i] * by[j]) / (4.0 * area));
        }
        ops.lumped_omega[size_t(cell[size_t(i)])] += area / 3.0;
      }
    }
  }

  double a_min = std::numeric_limits<double>::infinity();
  if (mesh.dim == 1) {
    for (const Facet& f : mesh.boundary_facets) {
      const int v = f.v[0];
      const double av = a_field(mesh.vertices[size_t(v)][0], 0.0);
      a_min = std::min(a_min, av);
      add_sym(tb, v, v, 1.0);  // counting measure
      add_sym(tr, v, v, av);
      ops.lumped_gamma[size_t(v)] += 1.0;
    }
  } else {
    const GaussRule& rule = gauss_rule(3);
    for (const Facet& f : mesh.boundary_facets) {
      const auto& pa = mesh.vertices[size_t(f.v[0])];
      const auto& pb = mesh.vertices[size_t(f.v[1])];
      const double len = f.measure;
      double re[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
      for (size_t q = 0; q < rule.nodes.size(); ++q) {
        const double tau = 0.5 * (1.0 + rule.nodes[q]);
        const double w = 0.5 * rule.weights[q] * len;
        const double x = pa[0] + tau * (pb[0] - pa[0]);
        const double y = pa[1] + tau * (pb[1] - pa[1]);
        const double av = a_field(x, y);
        a_min = std::min(a_min, av);
        const double phi[2] = {1.0 - tau, tau};
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) re[i][j] += w * av * phi[i] * phi[j];
      }
      add_sym(tb, f.v[0], f.v[0], len / 3.0);
      add_sym(tb, f.v[1], f.v[1], len / 3.0);
      add_sym(tb, f.v[0], f.v[1], len / 6.0);
      add_sym(tb, f.v[1], f.v[0], len / 6.0);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) add_sym(tr, f.v[size_t(i)], f.v[size_t(j)], re[i][j]);
      ops.lumped_gamma[size_t(f.v[0])] += len / 2.0;
      ops.lumped_gamma[size_t(f.v[1])] += len / 2.0;
    }
    // Vertex values participate in the positivity scan too.
    for (int v : mesh.boundary_vertices)
      a_min = std::min(a_min, a_field(mesh.vertices[size_t(v)][0], mesh.vertices[size_t(v)][1]));
  }

  if (!(a_min > 0.0))
    throw std::invalid_argument(
        "assemble: the Robin coefficient must satisfy a >= a0 > 0 on the boundary");

  ops.M_omega = CsrMatrix(n, std::move(tm));
  ops.M_gamma = CsrMatrix(n, std::move(tb));
  ops.K = CsrMatrix(n, std::move(tk));
  ops.R = CsrMatrix(n, std::move(tr));
  ops.A = CsrMatrix::linear_combination({{1.0, &ops.K}, {1.0, &ops.R}});
  ops.M_H = CsrMatrix::linear_combination({{1.0, &ops.M_omega}, {1.0, &ops.M_gamma}});
  ops.G_V = CsrMatrix::linear_combination({{1.0, &ops.K}, {1.0, &ops.M_omega}, {1.0, &ops.M_gamma}});
  ops.a0 = a_min;
  ops.domain_measure = mesh.domain_measure();
  ops.boundary_measure = mesh.boundary_measure();
  return ops;
}

double product_inner(const AssembledOperators& ops, std::span<const double> u,
                     std::span<const double> v) {
  if (int(u.size()) != ops.n() || int(v.size()) != ops.n())
    throw std::invalid_argument("product_inner: dimension mismatch");
  return ops.M_H.quad(u, v);
}

double h_norm(const AssembledOperators& ops, std::span<const double> u) {
  return std::sqrt(std::max(0.0, product_inner(ops, u, u)));
}

double v_norm(const AssembledOperators& ops, std::span<const double> u) {
  if (int(u.size()) != ops.n()) throw std::invalid_argument("v_norm: dimension mismatch");
  return std::sqrt(std::max(0.0, ops.G_V.quad(u, u)));
}

double estimate_coercivity(const AssembledOperators& ops, double rel_tol, int max_iter) {
  const size_t n = size_t(ops.n());
  // Deterministic start with no special symmetry.
  std::vector<double> x(n), bx(n), y(n);
  for (size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.25 * std::sin(2.7 * double(i) + 0.4);

  auto b_normalize = [&](std::vector<double>& v) {
    double nb = std::sqrt(std::max(0.0, ops.G_V.quad(v, v)));
    for (double& c : v) c /= nb;
  };
  b_normalize(x);

  double lambda = ops.A.quad(x, x) / ops.G_V.quad(x, x);
  for (int it = 0; it < max_iter; ++it) {
    ops.G_V.matvec(x, bx);
    solve_spd(ops.A, bx, y, 1e-12);
    x = y;
    b_normalize(x);
    const double next = ops.A.quad(x, x) / ops.G_V.quad(x, x);
    const double change = std::fabs(next - lambda);
    lambda = next;
    if (it >= 2 && change <= rel_tol * std::fabs(lambda)) {
      ops.coercivity = lambda;
      return lambda;
    }
  }
  throw std::runtime_error("estimate_coercivity: inverse iteration did not settle within " +
                           std::to_string(max_iter) + " iterations");
}

double riesz_dual_norm(const AssembledOperators& ops, std::span<const double> load) {
  if (int(load.size()) != ops.n())
    throw std::invalid_argument("riesz_dual_norm: dimension mismatch");
  std::vector<double> x(load.size(), 0.0);
  solve_spd(ops.G_V, load, x, 1e-13);
  return std::sqrt(std::max(0.0, dot(load, x)));
}

}  // namespace hviheat::fem
