#include "hviheat/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace hviheat::verify {

using solver::LedgerStep;

EnergyReport energy_check(const EnergyLedger& ledger, double rel_tol) {
  EnergyReport rep;
  if (ledger.steps.empty()) {
    rep.ok = rep.integrated_ok = true;
    return rep;
  }
  rep.worst_violation = -std::numeric_limits<double>::infinity();
  rep.integrated_violation = -std::numeric_limits<double>::infinity();

  double sum_lhs = 0.0, sum_rhs = 0.0, sum_mag = 0.0, sum_slack = 0.0;
  for (size_t k = 0; k < ledger.steps.size(); ++k) {
    const LedgerStep& s = ledger.steps[k];
    const double pair = s.pair_interior + s.pair_boundary;
    const double lhs = 0.5 * s.hsq - 0.5 * s.hsq_prev + s.dt * (0.5 * ledger.M * s.vsq + pair);
    const double rhs = s.dt * s.f_dual_sq / (2.0 * ledger.M);
    const double magnitude = 0.5 * s.hsq + 0.5 * s.hsq_prev +
                             s.dt * (0.5 * ledger.M * s.vsq + std::fabs(pair)) + rhs + 1e-300;
    const double newton_slack = s.dt * s.newton_res * std::sqrt(std::max(0.0, s.hsq));
    const double violation = (lhs - rhs - newton_slack) / magnitude;
    if (violation > rep.worst_violation) {
      rep.worst_violation = violation;
      rep.worst_step = int(k);
    }
    if (violation > rel_tol) ++rep.steps_failed;
    ++rep.steps_checked;

    // Integrated form over (0, t_k): running sums telescope the step forms.
    sum_lhs += lhs;
    sum_rhs += rhs;
    sum_mag += magnitude;
    sum_slack += newton_slack;
    rep.integrated_violation =
        std::max(rep.integrated_violation, (sum_lhs - sum_rhs - sum_slack) / sum_mag);
  }
  rep.integrated_ok = rep.integrated_violation <= rel_tol;
  rep.ok = rep.steps_failed == 0 && rep.integrated_ok;
  return rep;
}

AprioriReport apriori_check(const EnergyLedger& ledger) {
  double fsq = 0.0;
  for (const LedgerStep& s : ledger.steps) fsq += s.dt * s.f_dual_sq;
  return apriori_check(ledger, ledger.u0_hnorm, std::sqrt(fsq));
}

AprioriReport apriori_check(const EnergyLedger& ledger, double u0_norm, double f_dual_norm) {
  AprioriReport rep;
  double vsq = 0.0, upsq = 0.0;
  for (const LedgerStep& s : ledger.steps) {
    vsq += s.dt * s.vsq;
    upsq += s.dt * s.uprime_dual_sq;
  }
  rep.traj_v_norm = std::sqrt(vsq);
  rep.uprime_dual_norm = std::sqrt(upsq);
  rep.f_dual_norm = f_dual_norm;
  rep.c_observed = (rep.traj_v_norm + rep.uprime_dual_norm) / (1.0 + u0_norm + f_dual_norm);
  return rep;
}

AprioriBoundReport apriori_bound_check(const EnergyLedger& ledger) {
  AprioriBoundReport rep;
  const double th1 = ledger.growth1.theta, th2 = ledger.growth2.theta;
  double quad = 0.5 * ledger.M;
  if (th1 == 1.0) quad -= ledger.a1p;
  if (th2 == 1.0) quad -= ledger.a2p;
  rep.applicable = quad > 0.0;

  double fsq = 0.0, vsq = 0.0, umax_sq = ledger.u0_hnorm * ledger.u0_hnorm;
  for (const LedgerStep& s : ledger.steps) {
    fsq += s.dt * s.f_dual_sq;
    vsq += s.dt * s.vsq;
    umax_sq = std::max(umax_sq, s.hsq);
  }
  rep.x_actual = std::sqrt(vsq);
  rep.umax_actual = std::sqrt(umax_sq);
  if (!rep.applicable) return rep;

  const double D = fsq / (2.0 * ledger.M) + 0.5 * ledger.u0_hnorm * ledger.u0_hnorm;
  auto q = [&](double x) {
    return 0.5 * ledger.M * x * x - (ledger.a1 + ledger.a2) * x -
           ledger.a1p * std::pow(x, 1.0 + th1) - ledger.a2p * std::pow(x, 1.0 + th2) - D;
  };
  double hi = 1.0;
  int guard = 0;
  while (q(hi) <= 0.0 && guard++ < 2000) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (q(mid) <= 0.0 ? lo : hi) = mid;
  }
  rep.x_bound = hi;
  const double rhs_energy = D + (ledger.a1 + ledger.a2) * rep.x_bound +
                            ledger.a1p * std::pow(rep.x_bound, 1.0 + th1) +
                            ledger.a2p * std::pow(rep.x_bound, 1.0 + th2);
  rep.umax_bound = std::sqrt(2.0 * std::max(0.0, rhs_energy));
  const double slack = 1e-9;
  rep.ok = rep.x_actual <= rep.x_bound * (1.0 + slack) + 1e-12 &&
           rep.umax_actual <= rep.umax_bound * (1.0 + slack) + 1e-12;
  return rep;
}

ReactionGrowthReport reaction_growth_check(const EnergyLedger& ledger) {
  ReactionGrowthReport rep;
  double r1 = 0.0, r2 = 0.0, vsq = 0.0;
  for (const LedgerStep& s : ledger.steps) {
    r1 += s.dt * s.reaction1_sq;
    r2 += s.dt * s.reaction2_sq;
    vsq += s.dt * s.vsq;
  }
  const double x = std::sqrt(vsq);
  rep.lhs1 = std::sqrt(r1);
  rep.lhs2 = std::sqrt(r2);
  rep.rhs1 = ledger.a1 + ledger.a1p * std::pow(x, ledger.growth1.theta);
  rep.rhs2 = ledger.a2 + ledger.a2p * std::pow(x, ledger.growth2.theta);
  const double slack = 1e-9;
  rep.ok = rep.lhs1 <= rep.rhs1 * (1.0 + slack) + 1e-12 &&
           rep.lhs2 <= rep.rhs2 * (1.0 + slack) + 1e-12;
  return rep;
}

double default_inclusion_tol(double eps, double local_osc) {
  return 10.0 * eps * local_osc + 1e-8;
}

namespace {

// Oscillation (sup - inf) of the graph over [c - eps, c + eps], from segment
// samples plus one-sided limits at interior breakpoints.
double window_oscillation(const graphs::PiecewiseGraph& g, double c, double eps) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  auto visit = [&](double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  const double a = c - eps, b = c + eps;
  for (double bp : g.breakpoints()) {
    if (bp < a || bp > b) continue;
    auto [lv, rv] = g.one_sided_limits(bp);
    visit(lv);
    visit(rv);
  }
  constexpr int kSamples = 33;
  for (int i = 0; i <= kSamples; ++i) {
    double t = a + (b - a) * double(i) / double(kSamples);
    auto [lv, rv] = g.one_sided_limits(t);
    visit(lv);
    visit(rv);
  }
  return hi - lo;
}

}  // namespace

InclusionReport inclusion_check(const Trajectory& traj, const graphs::PiecewiseGraph& gamma1,
                                const graphs::PiecewiseGraph& gamma2, double eps,
                                const InclusionTol& tol_fn) {
  InclusionReport rep;
  for (size_t k = 0; k < traj.times.size(); ++k) {
    const auto& state = traj.states[k];
    const auto& r1 = traj.reactions1[k];
    for (size_t v = 0; v < state.size(); ++v) {
      const double d = gamma1.chang_envelope(state[v]).distance(r1[v]);
      const double tol = tol_fn(eps, window_oscillation(gamma1, state[v], eps));
      ++rep.total_pairs;
      if (d > tol) ++rep.failed_pairs;
      rep.worst_distance = std::max(rep.worst_distance, d);
    }
    const auto& r2 = traj.reactions2[k];
    for (size_t bi = 0; bi < traj.boundary_vertices.size(); ++bi) {
      const double u = state[size_t(traj.boundary_vertices[bi])];
      const double d = gamma2.chang_envelope(u).distance(r2[bi]);
      const double tol = tol_fn(eps, window_oscillation(gamma2, u, eps));
      ++rep.total_pairs;
      if (d > tol) ++rep.failed_pairs;
      rep.worst_distance = std::max(rep.worst_distance, d);
    }
  }
  rep.fraction_inside =
      rep.total_pairs == 0
          ? 1.0
          : double(rep.total_pairs - rep.failed_pairs) / double(rep.total_pairs);
  return rep;
}

namespace {

class SeededUniform {
public:
  explicit SeededUniform(std::uint64_t seed) : rng_(seed) {}
  double u01() { return double(rng_() >> 11) * 0x1.0p-53; }
  double normal() {
    // Box-Muller; both draws consumed to stay reproducible.
    double a = std::max(u01(), 1e-300), b = u01();
    return std::sqrt(-2.0 * std::log(a)) * std::cos(6.283185307179586 * b);
  }
  std::uint64_t raw() { return rng_(); }

private:
  std::mt19937_64 rng_;
};

}  // namespace

HviReport hvi_residual(const Trajectory& traj, const fem::Mesh& mesh,
                       const fem::AssembledOperators& ops, const graphs::PiecewiseGraph& gamma1,
                       const graphs::PiecewiseGraph& gamma2, const HviBattery& battery, double h,
                       double dt) {
  HviReport rep;
  rep.min_residual = std::numeric_limits<double>::infinity();
  rep.tol = 10.0 * (traj.eps + h + dt);
  const size_t n = traj.states.empty() ? 0 : traj.states[0].size();

  // Domain bounding box for the sinusoid family.
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& p : mesh.vertices) {
    xmin = std::min(xmin, p[0]);
    xmax = std::max(xmax, p[0]);
    ymin = std::min(ymin, p[1]);
    ymax = std::max(ymax, p[1]);
  }
  const double lx = std::max(xmax - xmin, 1e-30);
  const double ly = std::max(ymax - ymin, 1e-30);

  auto pair_term = [&](const std::vector<double>& state,
                       const std::vector<double>& dir) {
    double acc = 0.0;
    for (size_t v = 0; v < n; ++v)
      acc += ops.lumped_omega[v] * gamma1.clarke_dd(state[v], dir[v]);
    for (int bv : traj.boundary_vertices)
      acc += ops.lumped_gamma[size_t(bv)] * gamma2.clarke_dd(state[size_t(bv)], dir[size_t(bv)]);
    return acc;
  };

  for (size_t k = 1; k < traj.times.size(); ++k) {
    const double dt_k = traj.times[k] - traj.times[k - 1];
    const auto& u = traj.states[k];
    const auto& up = traj.states[k - 1];

    std::vector<double> du(n);
    for (size_t i = 0; i < n; ++i) du[i] = (u[i] - up[i]) / dt_k;
    std::vector<double> resid = ops.M_H.apply(du);
    std::vector<double> au = ops.A.apply(u);
    for (size_t i = 0; i < n; ++i) resid[i] += au[i] - traj.loads[k][i];

    const double unorm = fem::v_norm(ops, u);
    const double umax = *std::max_element(u.begin(), u.end(),
                                          [](double a, double b) { return std::fabs(a) < std::fabs(b); });

    SeededUniform rng(battery.seed * 0x9E3779B97F4A7C15ull + k);

    auto evaluate = [&](const std::vector<double>& dir) {
      const double t = fem::dot(resid, dir) + pair_term(u, dir);
      const double scale = (1.0 + unorm) * (1.0 + fem::v_norm(ops, dir));
      const double normalized = t / scale;
      if (normalized < rep.min_residual) {
        rep.min_residual = normalized;
        rep.worst_step = int(k);
      }
    };

    // V = U^n itself: the residual vanishes identically.
    {
      std::vector<double> zero(n, 0.0);
      const double t0 = fem::dot(resid, zero) + pair_term(u, zero);
      rep.residual_at_state = std::max(rep.residual_at_state, std::fabs(t0));
    }

    const int per_family = std::max(1, battery.count / 3);
    std::vector<double> dir(n);

    // Nodal bumps around the current state.
    for (int j = 0; j < per_family; ++j) {
      std::fill(dir.begin(), dir.end(), 0.0);
      const size_t node = size_t(rng.raw() % std::uint64_t(n));
      const double s = (0.2 + rng.u01()) * (1.0 + std::fabs(umax));
      dir[node] = (rng.u01() < 0.5 ? -s : s);
      evaluate(dir);
    }

    // Interpolated low-frequency sinusoids as absolute test functions.
    for (int j = 0; j < per_family; ++j) {
      const int kx = 1 + int(rng.raw() % 3);
      const int ky = 1 + int(rng.raw() % 3);
      const double amp = (rng.u01() < 0.5 ? -1.0 : 1.0) * (0.5 + rng.u01());
      constexpr double pi = 3.14159265358979323846;
      for (size_t v = 0; v < n; ++v) {
        const auto& p = mesh.vertices[v];
        double val = amp * std::sin(kx * pi * (p[0] - xmin) / lx);
        if (mesh.dim == 2) val *= std::cos(ky * pi * (p[1] - ymin) / ly);
        dir[v] = val - u[v];  // dir = V - U^n
      }
      evaluate(dir);
    }

    // State plus/minus scaled random fields.
    const int rest = battery.count - 2 * per_family;
    for (int j = 0; j < rest; ++j) {
      for (size_t v = 0; v < n; ++v) dir[v] = rng.normal();
      const double dn = fem::v_norm(ops, dir);
      const double eta = 0.5 * (0.5 + rng.u01()) * (1.0 + unorm);
      const double f = dn > 0 ? eta / dn : 0.0;
      for (size_t v = 0; v < n; ++v) dir[v] *= f;
      evaluate(dir);
    }
  }
  if (!std::isfinite(rep.min_residual)) rep.min_residual = 0.0;
  rep.ok = rep.min_residual >= -rep.tol;
  return rep;
}

}  // namespace hviheat::verify
