#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "hviheat/smallness.hpp"
#include "hviheat/solver.hpp"

namespace hviheat::verify {

using solver::EnergyLedger;
using solver::Trajectory;

// --- energy inequality -----------------------------------------------------

struct EnergyReport {
  bool ok = false;
  int steps_checked = 0;
  int steps_failed = 0;
  // Worst signed violation of the step inequality, relative to the step's
  // magnitude (negative values mean slack). The known Newton residual term
  // is subtracted before comparing against the tolerance.
  double worst_violation = 0.0;
  int worst_step = -1;
  double integrated_violation = 0.0;  // same for the summed inequality
  bool integrated_ok = false;
};

// Step form for implicit Euler:
//   1/2 |U^n|^2 - 1/2 |U^{n-1}|^2 + dt (M/2) ||U^n||^2 + dt <g_eps(U^n), U^n>
//     <= dt ||f^n||_*^2 / (2M) + rho,
// with rho = rel_tol * magnitude + dt * newton_res * |U^n|.
EnergyReport energy_check(const EnergyLedger& ledger, double rel_tol = 1e-10);

// --- a priori bound ----------------------------------------------------------

struct AprioriReport {
  double c_observed = 0.0;  // (||U||_{L2 V} + ||U'||_{L2 V*}) / (1 + |U0| + ||f||)
  double traj_v_norm = 0.0;
  double uprime_dual_norm = 0.0;
  double f_dual_norm = 0.0;
};

AprioriReport apriori_check(const EnergyLedger& ledger);
AprioriReport apriori_check(const EnergyLedger& ledger, double u0_norm, double f_dual_norm);

struct AprioriBoundReport {
  bool applicable = false;  // the smallness condition makes the bound finite
  bool ok = false;
  double x_bound = 0.0;   // bound on ||U||_{L2(0,T;V)}
  double x_actual = 0.0;
  double umax_bound = 0.0;  // bound on max_n |U^n|
  double umax_actual = 0.0;
};

// Closed-form bound assembled from the ledger constants (coercivity, growth
// constants, data norms); the checker recomputes both sides.
AprioriBoundReport apriori_bound_check(const EnergyLedger& ledger);

// --- reaction growth ---------------------------------------------------------

struct ReactionGrowthReport {
  bool ok = false;
  double lhs1 = 0.0, rhs1 = 0.0;  // ||xi1|| vs a1 + a1' X^theta1
  double lhs2 = 0.0, rhs2 = 0.0;
};

ReactionGrowthReport reaction_growth_check(const EnergyLedger& ledger);

// --- envelope inclusion ------------------------------------------------------

using InclusionTol = std::function<double(double eps, double local_osc)>;

// 10 * eps * (oscillation of the graph over the eps-window) + 1e-8.
double default_inclusion_tol(double eps, double local_osc);

struct InclusionReport {
  double fraction_inside = 0.0;
  double worst_distance = 0.0;
  long total_pairs = 0;
  long failed_pairs = 0;
};

// Distance of every recorded reaction value to the envelope of its graph at
// the recorded state value, over all time-node pairs.
InclusionReport inclusion_check(const Trajectory& traj, const graphs::PiecewiseGraph& gamma1,
                                const graphs::PiecewiseGraph& gamma2, double eps,
                                const InclusionTol& tol_fn = default_inclusion_tol);

// --- hemivariational residual ------------------------------------------------

struct HviBattery {
  int count = 50;
  std::uint64_t seed = 1;
};

struct HviReport {
  double min_residual = 0.0;  // normalized by (1 + ||U||_V)(1 + ||V - U||_V)
  double tol = 0.0;           // 10 (eps + h + dt)
  bool ok = false;
  double residual_at_state = 0.0;  // V = U^n; exactly zero by construction
  int worst_step = -1;
};

// For every step and test function V:
//   <M_H U' + (K+R) U - F, V - U> + sum_i L_i clarke_dd(gamma, u_i, v_i - u_i),
// normalized; the battery mixes nodal bumps, interpolated low-frequency
// sinusoids, and state +/- seeded random fields.
HviReport hvi_residual(const Trajectory& traj, const fem::Mesh& mesh,
                       const fem::AssembledOperators& ops, const graphs::PiecewiseGraph& gamma1,
                       const graphs::PiecewiseGraph& gamma2, const HviBattery& battery, double h,
                       double dt);

}  // namespace hviheat::verify
