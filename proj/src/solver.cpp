#include "hviheat/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hviheat/quadrature.hpp"
#include "hviheat/verify.hpp"

namespace hviheat::solver {

using fem::CsrMatrix;
using fem::solve_spd;

Mesh build_mesh(const DomainSpec& spec) {
  if (spec.kind == DomainSpec::Kind::interval)
    return fem::build_interval(spec.x0, spec.x1, spec.cells);
  return fem::build_polygon(spec.loop, spec.h);
}

namespace {

const MollifierKernel& kernel_of(const ProblemSpec& spec) {
  return spec.kernel ? *spec.kernel : MollifierKernel::standard_bump();
}

double eval_space_time(const SpaceTimeFn& f, double t, double x, double y) {
  return f ? f(t, x, y) : 0.0;
}

// || r ||_H of the Riesz representative of a residual functional r.
double residual_hnorm(const AssembledOperators& ops, std::span<const double> r) {
  std::vector<double> z(r.size(), 0.0);
  solve_spd(ops.M_H, r, z, 1e-13);
  return std::sqrt(std::max(0.0, fem::dot(r, z)));
}

}  // namespace

Problem instantiate(const ProblemSpec& spec, int level) {
  if (level < 0) throw std::invalid_argument("instantiate: level must be >= 0");
  if (!(spec.T > 0.0)) throw std::invalid_argument("instantiate: T must be positive");
  if (!(spec.dt > 0.0)) throw std::invalid_argument("instantiate: dt must be positive");
  if (!(spec.eps > 0.0)) throw std::invalid_argument("instantiate: eps must be positive");
  if (!(spec.newton_tol > 0.0))
    throw std::invalid_argument("instantiate: newton_tol must be positive");

  Problem p;
  p.spec = &spec;
  p.level = level;
  p.mesh = build_mesh(spec.domain);
  for (int l = 0; l < level; ++l) p.mesh = fem::refine(p.mesh);
  const auto& robin = spec.robin;
  p.ops = fem::assemble(p.mesh, robin ? robin : [](double, double) { return 1.0; });
  p.T = spec.T;
  p.dt = spec.dt / std::pow(2.0, level);
  p.eps = spec.eps_mode == EpsMode::geometric ? spec.eps / std::pow(2.0, level) : spec.eps;
  return p;
}

std::vector<double> project_initial(const Problem& p) {
  const ProblemSpec& spec = *p.spec;
  const int n = p.mesh.n_vertices();
  std::vector<double> nodal(size_t(n), 0.0);
  for (int v = 0; v < n; ++v) {
    const auto& pt = p.mesh.vertices[size_t(v)];
    double val = spec.u0 ? spec.u0(pt[0], pt[1]) : 0.0;
    if (!std::isfinite(val))
      throw std::invalid_argument("project_initial: u0 is not finite at a mesh vertex");
    nodal[size_t(v)] = val;
  }
  if (spec.initial == InitialMode::interpolate) return nodal;

  // M_H-projection: right-hand side integrated cellwise (degree-2 rules).
  std::vector<double> load(size_t(n), 0.0);
  auto u0 = [&spec](double x, double y) { return spec.u0 ? spec.u0(x, y) : 0.0; };
  if (p.mesh.dim == 1) {
    const GaussRule& rule = gauss_rule(3);
    for (const auto& cell : p.mesh.cells) {
      const double xa = p.mesh.vertices[size_t(cell[0])][0];
      const double xb = p.mesh.vertices[size_t(cell[1])][0];
      for (size_t q = 0; q < rule.nodes.size(); ++q) {
        const double tau = 0.5 * (1.0 + rule.nodes[q]);
        const double w = 0.5 * rule.weights[q] * (xb - xa);
        const double x = xa + tau * (xb - xa);
        load[size_t(cell[0])] += w * u0(x, 0.0) * (1.0 - tau);
        load[size_t(cell[1])] += w * u0(x, 0.0) * tau;
      }
    }
    for (const auto& f : p.mesh.boundary_facets)
      load[size_t(f.v[0])] += u0(p.mesh.vertices[size_t(f.v[0])][0], 0.0);
  } else {
    // Three-point edge-midpoint rule, exact through degree 2.
    for (const auto& cell : p.mesh.cells) {
      const auto& p0 = p.mesh.vertices[size_t(cell[0])];
      const auto& p1 = p.mesh.vertices[size_t(cell[1])];
      const auto& p2 = p.mesh.vertices[size_t(cell[2])];
      const double area = 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) -
                                 (p2[0] - p0[0]) * (p1[1] - p0[1]));
      const double mx[3] = {0.5 * (p0[0] + p1[0]), 0.5 * (p1[0] + p2[0]), 0.5 * (p2[0] + p0[0])};
      const double my[3] = {0.5 * (p0[1] + p1[1]), 0.5 * (p1[1] + p2[1]), 0.5 * (p2[1] + p0[1])};
      const double phi[3][3] = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
      for (int q = 0; q < 3; ++q) {
        const double w = area / 3.0;
        const double v = u0(mx[q], my[q]);
        for (int i = 0; i < 3; ++i) load[size_t(cell[size_t(i)])] += w * v * phi[q][i];
      }
    }
    const GaussRule& rule = gauss_rule(3);
    for (const auto& f : p.mesh.boundary_facets) {
      const auto& pa = p.mesh.vertices[size_t(f.v[0])];
      const auto& pb = p.mesh.vertices[size_t(f.v[1])];
      for (size_t q = 0; q < rule.nodes.size(); ++q) {
        const double tau = 0.5 * (1.0 + rule.nodes[q]);
        const double w = 0.5 * rule.weights[q] * f.measure;
        const double x = pa[0] + tau * (pb[0] - pa[0]);
        const double y = pa[1] + tau * (pb[1] - pa[1]);
        load[size_t(f.v[0])] += w * u0(x, y) * (1.0 - tau);
        load[size_t(f.v[1])] += w * u0(x, y) * tau;
      }
    }
  }
  std::vector<double> proj(size_t(n), 0.0);
  solve_spd(p.ops.M_H, load, proj, 1e-13);
  return proj;
}

std::vector<double> assemble_load(const Problem& p, double t) {
  const ProblemSpec& spec = *p.spec;
  if (spec.load_override) return spec.load_override(t);
  const int n = p.mesh.n_vertices();
  std::vector<double> f1(size_t(n), 0.0), f2(size_t(n), 0.0);
  for (int v = 0; v < n; ++v) {
    const auto& pt = p.mesh.vertices[size_t(v)];
    f1[size_t(v)] = eval_space_time(spec.f1, t, pt[0], pt[1]);
  }
  for (int v : p.mesh.boundary_vertices) {
    const auto& pt = p.mesh.vertices[size_t(v)];
    f2[size_t(v)] = eval_space_time(spec.f2, t, pt[0], pt[1]);
  }
  std::vector<double> load = p.ops.M_omega.apply(f1);
  std::vector<double> bl = p.ops.M_gamma.apply(f2);
  for (size_t i = 0; i < load.size(); ++i) load[i] += bl[i];
  return load;
}

std::vector<double> nemytskii(const Problem& p, std::span<const double> u,
                              std::vector<double>* reaction1, std::vector<double>* reaction2) {
  const ProblemSpec& spec = *p.spec;
  const MollifierKernel& kernel = kernel_of(spec);
  const int n = p.mesh.n_vertices();
  std::vector<double> out(size_t(n), 0.0);
  std::vector<double> r1(size_t(n), 0.0);
  std::vector<double> r2;
  r2.reserve(p.mesh.boundary_vertices.size());
  for (int v = 0; v < n; ++v) {
    const double g1 = mollify(spec.gamma1, kernel, p.eps, u[size_t(v)]);
    r1[size_t(v)] = g1;
    out[size_t(v)] += p.ops.lumped_omega[size_t(v)] * g1;
  }
  for (int v : p.mesh.boundary_vertices) {
    const double g2 = mollify(spec.gamma2, kernel, p.eps, u[size_t(v)]);
    r2.push_back(g2);
    out[size_t(v)] += p.ops.lumped_gamma[size_t(v)] * g2;
  }
  if (reaction1) *reaction1 = std::move(r1);
  if (reaction2) *reaction2 = std::move(r2);
  return out;
}

namespace {

struct NewtonOutcome {
  bool converged = false;
  double residual = 0.0;
  int iterations = 0;
};

NewtonOutcome newton_solve(const Problem& p, std::span<const double> u_prev, double t_next,
                           double dt, std::vector<double>& u, std::vector<double>& reaction1,
                           std::vector<double>& reaction2) {
  const ProblemSpec& spec = *p.spec;
  const MollifierKernel& kernel = kernel_of(spec);
  const size_t n = size_t(p.mesh.n_vertices());

  const CsrMatrix lhs = CsrMatrix::linear_combination(
      {{1.0 / dt, &p.ops.M_H}, {1.0, &p.ops.A}});
  const std::vector<double> load = assemble_load(p, t_next);
  std::vector<double> rhs_fixed = p.ops.M_H.apply(u_prev);
  for (size_t i = 0; i < n; ++i) rhs_fixed[i] = rhs_fixed[i] / dt + load[i];

  u.assign(u_prev.begin(), u_prev.end());
  const double tol = spec.newton_tol * (1.0 + fem::h_norm(p.ops, u_prev));

  auto residual_of = [&](std::span<const double> v, std::vector<double>& res,
                         std::vector<double>* r1, std::vector<double>* r2) {
    res = lhs.apply(v);
    std::vector<double> reac = nemytskii(p, v, r1, r2);
    for (size_t i = 0; i < n; ++i) res[i] += reac[i] - rhs_fixed[i];
    return residual_hnorm(p.ops, res);
  };

  std::vector<double> res, trial, trial_res;
  double rn = residual_of(u, res, &reaction1, &reaction2);

  NewtonOutcome out;
  int it = 0;
  for (; it < spec.newton_max_iter; ++it) {
    if (rn <= tol) {
      out.converged = true;
      out.residual = rn;
      out.iterations = it;
      return out;
    }
    // Reaction Jacobian: lumped masses times the mollified graph slope.
    std::vector<double> jdiag(n, 0.0);
    for (size_t v = 0; v < n; ++v)
      jdiag[v] = p.ops.lumped_omega[v] *
                 mollify_derivative(spec.gamma1, kernel, p.eps, u[v]);
    {
      size_t bi = 0;
      for (int v : p.mesh.boundary_vertices) {
        jdiag[size_t(v)] += p.ops.lumped_gamma[size_t(v)] *
                            mollify_derivative(spec.gamma2, kernel, p.eps, u[size_t(v)]);
        ++bi;
      }
    }
    const CsrMatrix jac = lhs.with_added_diagonal(jdiag);
    std::vector<double> delta(n, 0.0);
    std::vector<double> neg(res);
    for (double& x : neg) x = -x;
    solve_spd(jac, neg, delta, 1e-12);

    // Backtracking on the H-norm residual.
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 8; ++ls) {
      trial.assign(u.begin(), u.end());
      for (size_t i = 0; i < n; ++i) trial[i] += alpha * delta[i];
      std::vector<double> t1, t2;
      const double tn = residual_of(trial, trial_res, &t1, &t2);
      if (tn < rn || tn <= tol) {
        u.swap(trial);
        res.swap(trial_res);
        reaction1 = std::move(t1);
        reaction2 = std::move(t2);
        rn = tn;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }
  out.converged = rn <= tol;
  out.residual = rn;
  out.iterations = it;
  return out;
}

StepResult single_step(const Problem& p, std::span<const double> u_prev, double t_next,
                       double dt, bool& ok, NewtonOutcome& info) {
  StepResult r;
  info = newton_solve(p, u_prev, t_next, dt, r.state, r.reaction1, r.reaction2);
  r.newton_res = info.residual;
  r.newton_iters = info.iterations;
  ok = info.converged;
  return r;
}

}  // namespace

StepResult step(const Problem& p, std::span<const double> u_prev, double t_prev, double dt,
                std::optional<StepResult>* halved_midstate) {
  bool ok = false;
  NewtonOutcome info;
  StepResult full = single_step(p, u_prev, t_prev + dt, dt, ok, info);
  if (ok) return full;

  // One dt-halving retry: two substeps landing on the same t_next.
  bool ok_a = false, ok_b = false;
  StepResult a = single_step(p, u_prev, t_prev + 0.5 * dt, 0.5 * dt, ok_a, info);
  if (ok_a) {
    StepResult b = single_step(p, a.state, t_prev + dt, 0.5 * dt, ok_b, info);
    if (ok_b) {
      if (halved_midstate) *halved_midstate = std::move(a);
      return b;
    }
  }
  std::ostringstream msg;
  msg << "step: Newton did not converge at t = " << t_prev + dt << " (residual " << info.residual
      << " after " << info.iterations << " iterations, dt-halving retry included)";
  throw StepError(msg.str());
}

SolveResult solve(const Problem& p) {
  const ProblemSpec& spec = *p.spec;
  SolveResult out;
  Trajectory& traj = out.trajectory;
  EnergyLedger& ledger = out.ledger;

  const double M =
      p.ops.coercivity ? *p.ops.coercivity : fem::estimate_coercivity(p.ops);

  ledger.M = M;
  ledger.T = p.T;
  ledger.domain_measure = p.ops.domain_measure;
  ledger.boundary_measure = p.ops.boundary_measure;
  ledger.growth1 = spec.growth1;
  ledger.growth2 = spec.growth2;
  const double t1 = spec.growth1.theta, t2 = spec.growth2.theta;
  ledger.a1 = spec.growth1.c * std::sqrt(2.0 * p.T * p.ops.domain_measure);
  ledger.a1p = spec.growth1.c *
               std::sqrt(2.0 * std::pow(p.ops.domain_measure, 1.0 - t1) * std::pow(p.T, 1.0 - t1));
  ledger.a2 = spec.growth2.c * std::sqrt(2.0 * p.T * p.ops.boundary_measure);
  ledger.a2p = spec.growth2.c *
               std::sqrt(2.0 * std::pow(p.ops.boundary_measure, 1.0 - t2) * std::pow(p.T, 1.0 - t2));
  ledger.smallness = verify::smallness_check(t1, t2, spec.growth1.c, spec.growth2.c, M);
  ledger.newton_tol = spec.newton_tol;

  std::vector<double> u = project_initial(p);
  ledger.u0_hnorm = fem::h_norm(p.ops, u);

  traj.eps = p.eps;
  traj.boundary_vertices = p.mesh.boundary_vertices;
  auto record = [&](double t, std::vector<double> state) {
    std::vector<double> r1, r2;
    nemytskii(p, state, &r1, &r2);
    traj.times.push_back(t);
    traj.loads.push_back(assemble_load(p, t));
    traj.states.push_back(std::move(state));
    traj.reactions1.push_back(std::move(r1));
    traj.reactions2.push_back(std::move(r2));
  };
  record(0.0, u);

  const int n_steps = std::max(1, int(std::ceil(p.T / p.dt - 1e-9)));
  const double dt = p.T / double(n_steps);

  double t_prev = 0.0;
  for (int k = 1; k <= n_steps; ++k) {
    const double t_next = (k == n_steps) ? p.T : double(k) * dt;
    std::optional<StepResult> mid;
    StepResult r = step(p, u, t_prev, t_next - t_prev, &mid);

    auto append = [&](double ta, double tb, const std::vector<double>& prev,
                      const StepResult& sr) {
      LedgerStep ls;
      ls.t = tb;
      ls.dt = tb - ta;
      ls.hsq_prev = p.ops.M_H.quad(prev, prev);
      ls.hsq = p.ops.M_H.quad(sr.state, sr.state);
      ls.vsq = p.ops.G_V.quad(sr.state, sr.state);
      std::vector<double> load = assemble_load(p, tb);
      ls.f_dual_sq = std::pow(fem::riesz_dual_norm(p.ops, load), 2);
      std::vector<double> du(sr.state.size());
      for (size_t i = 0; i < du.size(); ++i) du[i] = (sr.state[i] - prev[i]) / ls.dt;
      std::vector<double> mdu = p.ops.M_H.apply(du);
      ls.uprime_dual_sq = std::pow(fem::riesz_dual_norm(p.ops, mdu), 2);
      for (size_t i = 0; i < sr.state.size(); ++i) {
        ls.pair_interior += p.ops.lumped_omega[i] * sr.reaction1[i] * sr.state[i];
        ls.reaction1_sq += p.ops.lumped_omega[i] * sr.reaction1[i] * sr.reaction1[i];
      }
      for (size_t bi = 0; bi < traj.boundary_vertices.size(); ++bi) {
        const size_t v = size_t(traj.boundary_vertices[bi]);
        ls.pair_boundary += p.ops.lumped_gamma[v] * sr.reaction2[bi] * sr.state[v];
        ls.reaction2_sq += p.ops.lumped_gamma[v] * sr.reaction2[bi] * sr.reaction2[bi];
      }
      ls.newton_res = sr.newton_res;
      ls.newton_iters = sr.newton_iters;
      ledger.steps.push_back(ls);

      traj.times.push_back(tb);
      traj.loads.push_back(std::move(load));
      traj.states.push_back(sr.state);
      traj.reactions1.push_back(sr.reaction1);
      traj.reactions2.push_back(sr.reaction2);
    };

    if (mid) {
      const double t_mid = 0.5 * (t_prev + t_next);
      append(t_prev, t_mid, u, *mid);
      append(t_mid, t_next, mid->state, r);
    } else {
      append(t_prev, t_next, u, r);
    }
    u = r.state;
    t_prev = t_next;
  }
  return out;
}

namespace {

// Discrete L2(0,T;H) distance between a coarse run and the next-level run,
// measured on the fine mesh at the coarse time grid.
double trajectory_difference(const Problem& fine_problem, const Trajectory& coarse,
                             const Trajectory& fine, const fem::Prolongation& prol) {
  double acc = 0.0;
  for (size_t k = 1; k < coarse.times.size(); ++k) {
    const double t = coarse.times[k];
    const double dt = t - coarse.times[k - 1];
    std::vector<double> pc = prol.apply(coarse.states[k]);

    // Fine state at time t by linear interpolation (exact on nested grids).
    const auto& ft = fine.times;
    size_t j = size_t(std::lower_bound(ft.begin(), ft.end(), t) - ft.begin());
    std::vector<double> fs;
    if (j >= ft.size()) {
      fs = fine.states.back();
    } else if (ft[j] == t || j == 0) {
      fs = fine.states[j];
    } else {
      const double w = (t - ft[j - 1]) / (ft[j] - ft[j - 1]);
      fs = fine.states[j - 1];
      for (size_t i = 0; i < fs.size(); ++i) fs[i] = (1.0 - w) * fs[i] + w * fine.states[j][i];
    }
    for (size_t i = 0; i < fs.size(); ++i) fs[i] -= pc[i];
    acc += dt * fine_problem.ops.M_H.quad(fs, fs);
  }
  return std::sqrt(std::max(0.0, acc));
}

}  // namespace

StudyReport refine_study(const ProblemSpec& spec, int levels) {
  if (levels < 2) throw std::invalid_argument("refine_study: need at least 2 levels");

  StudyReport report;
  report.eps_constant = spec.eps_mode == EpsMode::constant;

  std::vector<Problem> problems;
  std::vector<SolveResult> runs;
  std::vector<fem::Prolongation> prols;  // level l -> l+1

  for (int l = 0; l < levels; ++l) {
    problems.push_back(instantiate(spec, l));
    Problem& p = problems.back();
    fem::estimate_coercivity(p.ops);
    runs.push_back(solve(p));

    const SolveResult& run = runs.back();
    StudyLevel lv;
    lv.level = l;
    lv.h = p.mesh.max_edge();
    lv.dt = p.dt;
    lv.eps = p.eps;
    lv.coercivity = *p.ops.coercivity;

    verify::EnergyReport er = verify::energy_check(run.ledger, 1e-10);
    lv.energy_ok = er.ok;
    lv.energy_worst = er.worst_violation;

    verify::InclusionReport ir = verify::inclusion_check(
        run.trajectory, spec.gamma1, spec.gamma2, p.eps, verify::default_inclusion_tol);
    lv.inclusion_fraction = ir.fraction_inside;
    lv.inclusion_worst = ir.worst_distance;
    lv.inclusion_ok = ir.fraction_inside >= 0.99;

    verify::HviReport hr = verify::hvi_residual(run.trajectory, p.mesh, p.ops, spec.gamma1,
                                                spec.gamma2, verify::HviBattery{50, spec.seed},
                                                lv.h, p.dt);
    lv.hvi_min = hr.min_residual;
    lv.hvi_ok = hr.ok;

    verify::AprioriReport ar = verify::apriori_check(run.ledger);
    lv.c_observed = ar.c_observed;
    double vsq = 0.0;
    for (const LedgerStep& s : run.ledger.steps) vsq += s.dt * s.vsq;
    lv.traj_v_norm = std::sqrt(vsq);
    report.levels.push_back(lv);
  }

  for (int l = 0; l + 1 < levels; ++l) {
    // One uniform refinement maps mesh level l onto level l+1.
    fem::Prolongation prol;
    Mesh refined = fem::refine(problems[size_t(l)].mesh, &prol);
    if (refined.n_vertices() != problems[size_t(l) + 1].mesh.n_vertices())
      throw std::logic_error("refine_study: refinement hierarchy mismatch");
    prols.push_back(std::move(prol));
    report.diffs.push_back(trajectory_difference(problems[size_t(l) + 1],
                                                 runs[size_t(l)].trajectory,
                                                 runs[size_t(l) + 1].trajectory,
                                                 prols.back()));
  }
  for (size_t i = 0; i + 1 < report.diffs.size(); ++i)
    report.rates.push_back(std::log2(report.diffs[i] / report.diffs[i + 1]));

  double cmin = std::numeric_limits<double>::infinity(), cmax = 0.0;
  for (const StudyLevel& lv : report.levels) {
    cmin = std::min(cmin, lv.c_observed);
    cmax = std::max(cmax, lv.c_observed);
  }
  report.apriori_spread = cmin > 0.0 ? cmax / cmin : (cmax > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
  report.apriori_ok = report.apriori_spread <= 4.0;

  bool ok = report.apriori_ok;
  bool fractions_monotone = true;
  for (size_t l = 0; l < report.levels.size(); ++l) {
    ok = ok && report.levels[l].energy_ok && report.levels[l].hvi_ok &&
         report.levels[l].inclusion_ok;
    if (l > 0 &&
        report.levels[l].inclusion_fraction < report.levels[l - 1].inclusion_fraction - 1e-12)
      fractions_monotone = false;
  }
  report.all_ok = ok && fractions_monotone;
  return report;
}

}  // namespace hviheat::solver
