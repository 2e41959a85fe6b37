#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hviheat/assemble.hpp"
#include "hviheat/mesh.hpp"
#include "hviheat/mollifier.hpp"
#include "hviheat/piecewise.hpp"
#include "hviheat/smallness.hpp"

namespace hviheat::solver {

using fem::AssembledOperators;
using fem::Mesh;
using graphs::GrowthParams;
using graphs::MollifierKernel;
using graphs::PiecewiseGraph;

using SpaceFn = std::function<double(double x, double y)>;
using SpaceTimeFn = std::function<double(double t, double x, double y)>;

struct DomainSpec {
  enum class Kind { interval, polygon } kind = Kind::interval;
  double x0 = 0.0, x1 = 1.0;
  int cells = 16;  // interval
  std::vector<std::array<double, 2>> loop;
  double h = 0.25;  // polygon
};

Mesh build_mesh(const DomainSpec& spec);

enum class InitialMode { interpolate, project };
enum class EpsMode { geometric, constant };

// Everything one run needs. Level-dependent pieces (mesh resolution, dt,
// eps) are derived by instantiate().
struct ProblemSpec {
  DomainSpec domain;
  double T = 1.0;
  double dt = 0.1;
  double eps = 0.1;
  EpsMode eps_mode = EpsMode::geometric;
  PiecewiseGraph gamma1;
  PiecewiseGraph gamma2;
  const MollifierKernel* kernel = nullptr;  // default standard bump
  SpaceTimeFn f1;                           // empty means zero
  SpaceTimeFn f2;
  SpaceFn u0;               // empty means zero
  fem::ScalarField robin;   // Robin coefficient a(x, y); empty means 1
  GrowthParams growth1{1.0, 0.0, {}};
  GrowthParams growth2{1.0, 0.0, {}};
  InitialMode initial = InitialMode::interpolate;
  double newton_tol = 1e-10;
  int newton_max_iter = 25;
  std::uint64_t seed = 1;
  // Direct right-hand-side hook (bench/control runs); replaces f1, f2.
  std::function<std::vector<double>(double t)> load_override;
};

// One instantiated level: mesh built and refined, operators assembled,
// coercivity estimated.
struct Problem {
  Mesh mesh;
  AssembledOperators ops;
  double T = 1.0, dt = 0.1, eps = 0.1;
  int level = 0;
  const ProblemSpec* spec = nullptr;
};

Problem instantiate(const ProblemSpec& spec, int level);

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;      // all vertices, per time
  std::vector<std::vector<double>> reactions1;  // mollified gamma1 at all vertices
  std::vector<std::vector<double>> reactions2;  // mollified gamma2 at boundary vertices
  std::vector<std::vector<double>> loads;       // assembled right-hand side per time
  std::vector<int> boundary_vertices;
  double eps = 0.0;
};

struct LedgerStep {
  double t = 0.0;
  double dt = 0.0;
  double hsq_prev = 0.0;       // |U^{n-1}|_H^2
  double hsq = 0.0;            // |U^n|_H^2
  double vsq = 0.0;            // v_norm(U^n)^2
  double f_dual_sq = 0.0;      // ||F^n||_{V*}^2
  double uprime_dual_sq = 0.0; // ||M_H (U^n - U^{n-1}) / dt||_{V*}^2
  double pair_interior = 0.0;  // lumped <gamma1_eps(u), u> over Omega
  double pair_boundary = 0.0;  // lumped <gamma2_eps(u), u> over Gamma
  double reaction1_sq = 0.0;   // lumped ||gamma1_eps(u)||^2 over Omega
  double reaction2_sq = 0.0;   // lumped ||gamma2_eps(u)||^2 over Gamma
  double newton_res = 0.0;
  int newton_iters = 0;
};

struct EnergyLedger {
  double M = 0.0;  // coercivity constant used throughout
  double T = 0.0;
  double domain_measure = 0.0;
  double boundary_measure = 0.0;
  GrowthParams growth1, growth2;
  double a1 = 0.0, a1p = 0.0;  // c1 sqrt(2 T |Omega|), c1 sqrt(2 |Omega|^{1-th1} T^{1-th1})
  double a2 = 0.0, a2p = 0.0;  // same with sigma(Gamma)
  verify::SmallnessVerdict smallness;
  double u0_hnorm = 0.0;
  double newton_tol = 0.0;
  std::vector<LedgerStep> steps;
};

struct SolveResult {
  Trajectory trajectory;
  EnergyLedger ledger;
};

struct StepError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Nodal interpolation of u0 (or the M_H-projection when configured).
std::vector<double> project_initial(const Problem& p);

// Right-hand side at time t: M_omega f1(t, nodes) + M_gamma f2(t, nodes).
std::vector<double> assemble_load(const Problem& p, double t);

// Lumped nodal reaction load: L_Omega gamma1_eps(u) + L_Gamma gamma2_eps(u).
std::vector<double> nemytskii(const Problem& p, std::span<const double> u,
                              std::vector<double>* reaction1 = nullptr,
                              std::vector<double>* reaction2 = nullptr);

struct StepResult {
  std::vector<double> state;
  std::vector<double> reaction1;
  std::vector<double> reaction2;
  double newton_res = 0.0;
  int newton_iters = 0;
};

// One implicit Euler step with damped Newton; throws StepError after the
// single dt-halving retry fails. `halved_midstate` receives the midpoint
// state when the retry path was taken.
StepResult step(const Problem& p, std::span<const double> u_prev, double t_prev, double dt,
                std::optional<StepResult>* halved_midstate = nullptr);

SolveResult solve(const Problem& p);

struct StudyLevel {
  int level = 0;
  double h = 0.0, dt = 0.0, eps = 0.0;
  double coercivity = 0.0;
  double energy_worst = 0.0;  // signed relative violation (negative = slack)
  bool energy_ok = false;
  double inclusion_fraction = 0.0;
  double inclusion_worst = 0.0;
  bool inclusion_ok = false;
  double hvi_min = 0.0;  // normalized
  bool hvi_ok = false;
  double c_observed = 0.0;
  double traj_v_norm = 0.0;  // discrete L2(0,T;V) norm of the run
};

struct StudyReport {
  std::vector<StudyLevel> levels;
  std::vector<double> diffs;  // ||U_{l+1} - U_l|| in discrete L2(0,T;H), fine grid
  std::vector<double> rates;  // log2(diff_{l-1} / diff_l)
  bool eps_constant = false;  // constant eps schedule: no regularization limit
  double apriori_spread = 0.0;  // max/min of c_observed
  bool apriori_ok = false;
  bool all_ok = false;
};

// Runs nested levels (h, dt halved; eps per schedule), solves each, applies
// every check, and reports pairwise trajectory differences and rates.
StudyReport refine_study(const ProblemSpec& spec, int levels);

}  // namespace hviheat::solver
