#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hviheat/quadrature.hpp"
#include "hviheat/solver.hpp"
#include "hviheat/verify.hpp"
#include "support.hpp"

using namespace hviheat;
using namespace hviheat::solver;

namespace {

ProblemSpec base_spec_1d(int cells = 16) {
  ProblemSpec spec;
  spec.domain.kind = DomainSpec::Kind::interval;
  spec.domain.x0 = 0.0;
  spec.domain.x1 = 1.0;
  spec.domain.cells = cells;
  spec.T = 0.4;
  spec.dt = 0.1;
  spec.eps = 0.1;
  spec.growth1 = {1.0, 0.0, {}};
  spec.growth2 = {1.0, 0.0, {}};
  return spec;
}

// Discrete L2(0,T;H) error of a run against an analytic field, by per-cell
// Gauss quadrature plus boundary values (counting measure in 1D).
double trajectory_error_1d(const Problem& p, const Trajectory& traj,
                           const std::function<double(double, double)>& exact) {
  const GaussRule& rule = gauss_rule(7);
  double acc = 0.0;
  for (size_t k = 1; k < traj.times.size(); ++k) {
    const double t = traj.times[k];
    const double dt = t - traj.times[k - 1];
    double err_sq = 0.0;
    for (const auto& cell : p.mesh.cells) {
      const double xa = p.mesh.vertices[size_t(cell[0])][0];
      const double xb = p.mesh.vertices[size_t(cell[1])][0];
      const double ua = traj.states[k][size_t(cell[0])];
      const double ub = traj.states[k][size_t(cell[1])];
      for (size_t q = 0; q < rule.nodes.size(); ++q) {
        const double tau = 0.5 * (1.0 + rule.nodes[q]);
        const double w = 0.5 * rule.weights[q] * (xb - xa);
        const double uh = (1.0 - tau) * ua + tau * ub;
        const double d = uh - exact(t, xa + tau * (xb - xa));
        err_sq += w * d * d;
      }
    }
    for (int bv : traj.boundary_vertices) {
      const double d = traj.states[k][size_t(bv)] - exact(t, p.mesh.vertices[size_t(bv)][0]);
      err_sq += d * d;
    }
    acc += dt * err_sq;
  }
  return std::sqrt(acc);
}

}  // namespace

TEST_CASE("initial datum by interpolation") {
  ProblemSpec spec = base_spec_1d(2);
  spec.u0 = [](double, double) { return 1.0; };
  Problem p = instantiate(spec, 0);
  std::vector<double> u = project_initial(p);
  for (double v : u) CHECK(v == 1.0);

  spec.u0 = [](double x, double) { return x; };
  Problem p2 = instantiate(spec, 0);
  std::vector<double> u2 = project_initial(p2);
  CHECK(u2 == std::vector<double>{0.0, 0.5, 1.0});

  spec.u0 = [](double x, double) { return x > 0.4 ? std::nan("") : 0.0; };
  Problem p3 = instantiate(spec, 0);
  CHECK_THROWS_AS(project_initial(p3), std::invalid_argument);
}

TEST_CASE("interpolation of a smooth datum converges at second order") {
  ProblemSpec spec = base_spec_1d();
  spec.u0 = [](double x, double) { return std::sin(3.14159265358979323846 * x); };
  std::vector<double> errs;
  for (int level = 0; level < 2; ++level) {
    Problem p = instantiate(spec, level);
    std::vector<double> u = project_initial(p);
    // Fine-quadrature L2 error of the interpolant.
    const GaussRule& rule = gauss_rule(9);
    double err_sq = 0.0;
    for (const auto& cell : p.mesh.cells) {
      const double xa = p.mesh.vertices[size_t(cell[0])][0];
      const double xb = p.mesh.vertices[size_t(cell[1])][0];
      for (size_t q = 0; q < rule.nodes.size(); ++q) {
        const double tau = 0.5 * (1.0 + rule.nodes[q]);
        const double w = 0.5 * rule.weights[q] * (xb - xa);
        const double uh = (1.0 - tau) * u[size_t(cell[0])] + tau * u[size_t(cell[1])];
        const double d = uh - spec.u0(xa + tau * (xb - xa), 0.0);
        err_sq += w * d * d;
      }
    }
    errs.push_back(std::sqrt(err_sq));
  }
  CHECK(std::log2(errs[0] / errs[1]) >= 1.9);
}

TEST_CASE("projection initial mode reproduces P1 functions") {
  ProblemSpec spec = base_spec_1d(8);
  spec.initial = InitialMode::project;
  spec.u0 = [](double x, double) { return 2.0 * x - 0.5; };
  Problem p = instantiate(spec, 0);
  std::vector<double> u = project_initial(p);
  for (int v = 0; v < p.mesh.n_vertices(); ++v)
    CHECK(u[size_t(v)] ==
          doctest::Approx(2.0 * p.mesh.vertices[size_t(v)][0] - 0.5).epsilon(1e-9));
}

TEST_CASE("nemytskii reaction vector") {
  ProblemSpec spec = base_spec_1d(4);
  Problem p = instantiate(spec, 0);
  std::vector<double> u(size_t(p.mesh.n_vertices()), 0.3);

  // Zero graphs give the zero vector.
  std::vector<double> r = nemytskii(p, u);
  for (double v : r) CHECK(v == 0.0);

  // gamma1 constant 1: the load is the lumped interior mass, summing to 1.
  ProblemSpec spec1 = base_spec_1d(4);
  spec1.gamma1 = graphs::PiecewiseGraph::parse("1");
  Problem p1 = instantiate(spec1, 0);
  std::vector<double> r1 = nemytskii(p1, u);
  double sum = 0.0;
  for (double v : r1) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

  // Mollifier consistency at a smooth point: reaction -> gamma(u) as eps -> 0.
  ProblemSpec spec2 = base_spec_1d(4);
  spec2.gamma1 = graphs::PiecewiseGraph::parse("s^2 + 1");
  std::vector<double> errs;
  for (double eps : {0.2, 0.1, 0.05}) {
    spec2.eps = eps;
    Problem p2 = instantiate(spec2, 0);
    std::vector<double> rr1;
    nemytskii(p2, u, &rr1, nullptr);
    errs.push_back(std::fabs(rr1[1] - (0.3 * 0.3 + 1.0)));
  }
  CHECK(errs[2] <= 1e-3);
  CHECK(errs[2] <= errs[0] + 1e-12);
}

TEST_CASE("pure dissipation step contracts the state") {
  ProblemSpec spec = base_spec_1d(8);
  spec.u0 = [](double, double) { return 1.0; };
  Problem p = instantiate(spec, 0);
  std::vector<double> u0 = project_initial(p);
  StepResult r = step(p, u0, 0.0, 0.1);
  CHECK(fem::h_norm(p.ops, r.state) < fem::h_norm(p.ops, u0));
  for (double v : r.reaction1) CHECK(v == 0.0);
}

TEST_CASE("linear graph step equals a direct linear solve") {
  ProblemSpec spec = base_spec_1d(16);
  spec.gamma1 = graphs::PiecewiseGraph::parse("s");
  spec.gamma2 = graphs::PiecewiseGraph::parse("s");
  spec.u0 = [](double x, double) { return std::cos(3.14159265358979323846 * x); };
  Problem p = instantiate(spec, 0);
  std::vector<double> u0 = project_initial(p);
  const double dt = 0.05;
  StepResult r = step(p, u0, 0.0, dt);

  // (M_H/dt + K + R + L) U = M_H u0 / dt for the identity graph.
  const size_t n = size_t(p.mesh.n_vertices());
  std::vector<double> ldiag(n, 0.0);
  for (size_t i = 0; i < n; ++i) ldiag[i] = p.ops.lumped_omega[i] + p.ops.lumped_gamma[i];
  fem::CsrMatrix lhs = fem::CsrMatrix::linear_combination({{1.0 / dt, &p.ops.M_H}, {1.0, &p.ops.A}})
                           .with_added_diagonal(ldiag);
  std::vector<double> rhs = p.ops.M_H.apply(u0);
  for (double& v : rhs) v /= dt;
  std::vector<double> direct(n, 0.0);
  fem::solve_spd(lhs, rhs, direct, 1e-14);

  for (size_t i = 0; i < n; ++i) CHECK(std::fabs(r.state[i] - direct[i]) <= 1e-12);
}

TEST_CASE("one-step error is second order against step doubling") {
  ProblemSpec spec = base_spec_1d(16);
  spec.gamma1 = graphs::PiecewiseGraph::parse("tanh(s)");
  spec.u0 = [](double x, double) { return std::cos(3.14159265358979323846 * x); };
  Problem p = instantiate(spec, 0);
  std::vector<double> u = project_initial(p);
  // Damp the under-resolved stiff modes first, so the asymptotic one-step
  // expansion applies at moderate dt on the fixed mesh.
  for (int k = 0; k < 4; ++k) u = step(p, u, 0.05 * k, 0.05).state;

  auto defect = [&](double dt) {
    StepResult full = step(p, u, 0.2, dt);
    StepResult half = step(p, u, 0.2, dt / 2.0);
    StepResult two = step(p, half.state, 0.2 + dt / 2.0, dt / 2.0);
    std::vector<double> d(full.state.size());
    for (size_t i = 0; i < d.size(); ++i) d[i] = full.state[i] - two.state[i];
    return fem::h_norm(p.ops, d);
  };
  const double e1 = defect(0.02);
  const double e2 = defect(0.01);
  CHECK(e1 / e2 >= 3.0);  // ratio 4 for a second-order one-step defect
}

TEST_CASE("zero data yields the zero trajectory") {
  ProblemSpec spec = base_spec_1d(8);
  spec.gamma1 = graphs::PiecewiseGraph::parse("s");  // gamma(0) = 0, continuous
  Problem p = instantiate(spec, 0);
  SolveResult run = solve(p);
  for (const auto& state : run.trajectory.states)
    for (double v : state) CHECK(std::fabs(v) <= 1e-12);
  verify::EnergyReport er = verify::energy_check(run.ledger);
  CHECK(er.ok);
}

TEST_CASE("manufactured solution converges in the discrete L2(0,T;H) norm") {
  constexpr double pi = 3.14159265358979323846;
  ProblemSpec spec = base_spec_1d(32);
  spec.T = 0.4;
  spec.dt = 0.05;
  spec.eps = 0.05;
  spec.gamma1 = graphs::PiecewiseGraph::parse("s");
  spec.gamma2 = graphs::PiecewiseGraph::parse("s");
  spec.growth1 = {1.0, 1.0, {}};
  spec.growth2 = {1.0, 1.0, {}};
  spec.u0 = [=](double x, double) { return std::cos(pi * x); };
  spec.f1 = [=](double t, double x, double) { return pi * pi * std::exp(-t) * std::cos(pi * x); };
  spec.f2 = [=](double t, double x, double) { return std::exp(-t) * std::cos(pi * x); };
  auto exact = [=](double t, double x) { return std::exp(-t) * std::cos(pi * x); };

  std::vector<double> errs;
  for (int level = 0; level < 3; ++level) {
    Problem p = instantiate(spec, level);
    SolveResult run = solve(p);
    errs.push_back(trajectory_error_1d(p, run.trajectory, exact));
    CHECK(verify::energy_check(run.ledger).ok);
  }
  CHECK(std::log2(errs[0] / errs[1]) >= 0.9);
  CHECK(std::log2(errs[1] / errs[2]) >= 0.9);
}

TEST_CASE("discontinuous boundary graph stays within the a priori bound") {
  ProblemSpec spec = base_spec_1d(16);
  spec.gamma2 = graphs::PiecewiseGraph::parse("0 upto 0; 1");
  spec.u0 = [](double x, double) { return x - 0.3; };
  Problem p = instantiate(spec, 0);
  SolveResult run = solve(p);
  CHECK(verify::energy_check(run.ledger).ok);
  verify::AprioriBoundReport bound = verify::apriori_bound_check(run.ledger);
  CHECK(bound.applicable);
  CHECK(bound.ok);
}

TEST_CASE("solve is deterministic") {
  ProblemSpec spec = base_spec_1d(8);
  spec.gamma2 = graphs::PiecewiseGraph::parse("0 upto 0; 1");
  spec.u0 = [](double x, double) { return x - 0.3; };
  Problem p = instantiate(spec, 0);
  SolveResult a = solve(p);
  SolveResult b = solve(p);
  REQUIRE(a.trajectory.states.size() == b.trajectory.states.size());
  for (size_t k = 0; k < a.trajectory.states.size(); ++k)
    for (size_t i = 0; i < a.trajectory.states[k].size(); ++i)
      CHECK(a.trajectory.states[k][i] == b.trajectory.states[k][i]);
}

TEST_CASE("refinement study on a smooth monotone graph") {
  ProblemSpec spec = base_spec_1d(8);
  spec.T = 0.2;
  spec.dt = 0.05;
  spec.gamma1 = graphs::PiecewiseGraph::parse("s");
  spec.gamma2 = graphs::PiecewiseGraph::parse("s");
  spec.growth1 = {1.0, 1.0, {}};
  spec.growth2 = {1.0, 1.0, {}};
  spec.u0 = [](double x, double) { return std::cos(3.14159265358979323846 * x); };

  StudyReport report = refine_study(spec, 3);
  REQUIRE(report.diffs.size() == 2);
  REQUIRE(report.rates.size() == 1);
  CHECK(report.rates[0] >= 0.8);  // first-order coupling of h, dt, eps
  CHECK(report.apriori_ok);
  for (const auto& lv : report.levels) {
    CHECK(lv.energy_ok);
    CHECK(lv.inclusion_ok);
  }
  CHECK_THROWS_AS(refine_study(spec, 1), std::invalid_argument);
}

TEST_CASE("refinement study with zero graphs: pure linear-FEM differences") {
  ProblemSpec spec = base_spec_1d(16);
  spec.T = 0.2;
  spec.dt = 0.05;
  spec.u0 = [](double x, double) { return std::cos(3.14159265358979323846 * x); };
  StudyReport report = refine_study(spec, 4);
  REQUIRE(report.rates.size() == 2);
  // First-order joint coupling: the observed rate climbs towards 1 and the
  // second pair is already >= 0.85 at this resolution.
  CHECK(report.rates[1] >= report.rates[0]);
  CHECK(report.rates[1] >= 0.85);
  for (const auto& lv : report.levels) CHECK(lv.energy_ok);
}

TEST_CASE("constant eps schedule is flagged") {
  ProblemSpec spec = base_spec_1d(8);
  spec.T = 0.1;
  spec.dt = 0.05;
  spec.eps_mode = EpsMode::constant;
  StudyReport report = refine_study(spec, 2);
  CHECK(report.eps_constant);
  CHECK(report.levels[0].eps == report.levels[1].eps);
}
