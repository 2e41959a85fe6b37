#include "hviheat/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "hviheat/configfile.hpp"
#include "hviheat/mollifier.hpp"
#include "hviheat/report_io.hpp"
#include "hviheat/solver.hpp"
#include "hviheat/verify.hpp"

namespace hviheat::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct CommonOpts {
  std::string config_path;
  std::string out_dir;  // --out-dir override
  std::uint64_t seed = 0;
  bool seed_set = false;
};

// Precedence: --out-dir, then HVIHEAT_OUT_DIR, then the config value.
std::string resolve_out_dir(const CommonOpts& opts, const config::ProblemConfig& cfg) {
  if (!opts.out_dir.empty()) return opts.out_dir;
  if (const char* env = std::getenv("HVIHEAT_OUT_DIR"); env && *env) return env;
  return cfg.out_dir;
}

config::ProblemConfig load_config(const CommonOpts& opts) {
  config::ProblemConfig cfg = config::load_problem_config(opts.config_path);
  if (opts.seed_set) cfg.spec.seed = opts.seed;
  return cfg;
}

int config_error(const config::ConfigError& e) {
  std::cerr << "config error at line " << e.line() << ", column " << e.column() << ": "
            << e.what() << "\n";
  return 2;
}

ordered_json grid_json(const solver::Problem& p, const solver::SolveResult& run) {
  ordered_json g;
  g["h"] = io::json_number(p.mesh.max_edge());
  g["dt"] = io::json_number(p.dt);
  g["eps"] = io::json_number(p.eps);
  g["vertices"] = p.mesh.n_vertices();
  g["steps"] = run.ledger.steps.size();
  return g;
}

int cmd_solve(const CommonOpts& opts, bool dump_matrices) {
  config::ProblemConfig cfg;
  try {
    cfg = load_config(opts);
  } catch (const config::ConfigError& e) {
    return config_error(e);
  }
  const std::string out_dir = resolve_out_dir(opts, cfg);

  try {
    solver::Problem p = solver::instantiate(cfg.spec, 0);
    fem::estimate_coercivity(p.ops);
    solver::SolveResult run = solver::solve(p);

    verify::EnergyReport energy = verify::energy_check(run.ledger, cfg.energy_tol);
    verify::AprioriReport apriori = verify::apriori_check(run.ledger);
    verify::AprioriBoundReport bound = verify::apriori_bound_check(run.ledger);
    verify::ReactionGrowthReport growth = verify::reaction_growth_check(run.ledger);
    verify::InclusionReport inclusion = verify::inclusion_check(
        run.trajectory, cfg.spec.gamma1, cfg.spec.gamma2, p.eps);
    verify::HviReport hvi =
        verify::hvi_residual(run.trajectory, p.mesh, p.ops, cfg.spec.gamma1, cfg.spec.gamma2,
                             verify::HviBattery{cfg.hvi_tests, cfg.spec.seed},
                             p.mesh.max_edge(), p.dt);

    fs::create_directories(out_dir);
    io::write_trajectory_csv(out_dir + "/trajectory.csv", run.trajectory);
    io::write_ledger_csv(out_dir + "/ledger.csv", run.ledger);

    ordered_json j;
    j["schema_version"] = 1;
    j["kind"] = "solve";
    j["coercivity"] = io::json_number(run.ledger.M);
    j["constants"] = {{"a1", io::json_number(run.ledger.a1)},
                      {"a1p", io::json_number(run.ledger.a1p)},
                      {"a2", io::json_number(run.ledger.a2)},
                      {"a2p", io::json_number(run.ledger.a2p)},
                      {"domain_measure", io::json_number(run.ledger.domain_measure)},
                      {"boundary_measure", io::json_number(run.ledger.boundary_measure)},
                      {"T", io::json_number(run.ledger.T)}};
    j["smallness"] = io::smallness_json(run.ledger.smallness);
    j["energy"] = io::energy_json(energy);
    j["apriori"] = io::apriori_json(apriori);
    j["apriori_bound"] = io::apriori_bound_json(bound);
    j["reaction_growth"] = io::reaction_growth_json(growth);
    j["inclusion"] = io::inclusion_json(inclusion);
    j["hvi"] = io::hvi_json(hvi);
    j["grid"] = grid_json(p, run);
    io::write_text(out_dir + "/solve.json", j.dump(2) + "\n");

    if (dump_matrices) {
      auto dump = [&](const char* name, const fem::CsrMatrix& m) {
        std::ofstream out(out_dir + std::string("/") + name + ".coo");
        m.write_coo(out);
      };
      dump("M_omega", p.ops.M_omega);
      dump("M_gamma", p.ops.M_gamma);
      dump("K", p.ops.K);
      dump("R", p.ops.R);
      dump("G_V", p.ops.G_V);
    }

    std::cout << (energy.ok ? "solve: ok" : "solve: energy check FAILED") << " (steps "
              << run.ledger.steps.size() << ", coercivity " << io::fmt17(run.ledger.M) << ")\n";
    return energy.ok ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid problem: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "solve failed: " << e.what() << "\n";
    return 1;
  }
}

int cmd_study(const CommonOpts& opts, int levels_flag) {
  config::ProblemConfig cfg;
  try {
    cfg = load_config(opts);
  } catch (const config::ConfigError& e) {
    return config_error(e);
  }
  const int levels = levels_flag > 0 ? levels_flag : cfg.study_levels;
  if (levels < 2) {
    std::cerr << "study: need at least 2 levels\n";
    return 2;
  }
  const std::string out_dir = resolve_out_dir(opts, cfg);

  try {
    solver::StudyReport report = solver::refine_study(cfg.spec, levels);
    fs::create_directories(out_dir);
    io::write_text(out_dir + "/study.json", io::study_json(report).dump(2) + "\n");
    std::cout << (report.all_ok ? "study: ok" : "study: some checks FAILED") << " (levels "
              << levels << ")\n";
    return report.all_ok ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid problem: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "study failed: " << e.what() << "\n";
    return 1;
  }
}

int cmd_envelope(const std::string& graph_text, double lo, double hi, int samples,
                 const std::string& eps_list, const std::string& out_path) {
  if (!(lo < hi)) {
    std::cerr << "envelope: empty range\n";
    return 2;
  }
  if (samples < 2) {
    std::cerr << "envelope: need at least 2 samples\n";
    return 2;
  }
  graphs::PiecewiseGraph g;
  try {
    g = graphs::PiecewiseGraph::parse(graph_text);
  } catch (const ParseError& e) {
    std::cerr << "graph error at column " << e.column() << ": " << e.what() << "\n";
    return 2;
  }
  std::vector<double> eps_values;
  if (!eps_list.empty()) {
    std::istringstream ss(eps_list);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        double eps = std::stod(tok);
        if (!(eps > 0.0)) throw std::invalid_argument("eps");
        eps_values.push_back(eps);
      } catch (const std::exception&) {
        std::cerr << "envelope: bad eps value '" << tok << "'\n";
        return 2;
      }
    }
  }

  std::ostringstream out;
  out << "t,g_left,g_right,env_lo,env_hi";
  for (double eps : eps_values) out << ",moll_eps_" << io::fmt17(eps);
  out << "\n";
  const auto& kernel = graphs::MollifierKernel::standard_bump();
  for (int i = 0; i < samples; ++i) {
    double t = lo + (hi - lo) * double(i) / double(samples - 1);
    auto [lv, rv] = g.one_sided_limits(t);
    graphs::Envelope env = g.chang_envelope(t);
    out << io::fmt17(t) << "," << io::fmt17(lv) << "," << io::fmt17(rv) << ","
        << io::fmt17(env.lo) << "," << io::fmt17(env.hi);
    for (double eps : eps_values) out << "," << io::fmt17(graphs::mollify(g, kernel, eps, t));
    out << "\n";
  }

  if (out_path.empty() || out_path == "-") {
    std::cout << out.str();
  } else {
    io::write_text(out_path, out.str());
  }
  return 0;
}

int cmd_check(const CommonOpts& opts) {
  config::ProblemConfig cfg;
  try {
    cfg = load_config(opts);
  } catch (const config::ConfigError& e) {
    return config_error(e);
  }

  try {
    solver::Problem p = solver::instantiate(cfg.spec, 0);
    const double M = fem::estimate_coercivity(p.ops);

    graphs::GrowthReport g1 = graphs::check_growth(cfg.spec.gamma1, cfg.spec.growth1,
                                                   cfg.check_lo, cfg.check_hi, cfg.check_samples);
    graphs::GrowthReport g2 = graphs::check_growth(cfg.spec.gamma2, cfg.spec.growth2,
                                                   cfg.check_lo, cfg.check_hi, cfg.check_samples);
    graphs::SignReport s1 = graphs::check_sign_condition(cfg.spec.gamma1, cfg.sign_d, cfg.check_lo,
                                                         cfg.check_hi, cfg.check_samples);
    graphs::SignReport s2 = graphs::check_sign_condition(cfg.spec.gamma2, cfg.sign_d, cfg.check_lo,
                                                         cfg.check_hi, cfg.check_samples);
    verify::SmallnessVerdict sm = verify::smallness_check(
        cfg.spec.growth1.theta, cfg.spec.growth2.theta, cfg.spec.growth1.c, cfg.spec.growth2.c, M);

    auto row = [](const char* name, bool ok, const std::string& detail) {
      std::cout << (ok ? "  ok    " : "  FAIL  ") << name << "  " << detail << "\n";
      return ok;
    };
    std::cout << "hypothesis checks (coercivity M = " << io::fmt17(M) << ")\n";
    bool ok = true;
    ok &= row("growth gamma1       ", g1.ok,
              "worst ratio " + io::fmt17(g1.worst_ratio) + " at t = " + io::fmt17(g1.worst_t));
    ok &= row("growth gamma2       ", g2.ok,
              "worst ratio " + io::fmt17(g2.worst_ratio) + " at t = " + io::fmt17(g2.worst_t));
    ok &= row("sign condition gamma1", s1.ok, "worst excess " + io::fmt17(s1.worst_excess));
    ok &= row("sign condition gamma2", s2.ok, "worst excess " + io::fmt17(s2.worst_excess));
    std::ostringstream sm_detail;
    sm_detail << "case " << int(sm.which) << ", margin "
              << (std::isinf(sm.margin) ? std::string("inf") : io::fmt17(sm.margin));
    ok &= row("smallness            ", sm.ok, sm_detail.str());
    return ok ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid problem: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"heat equation with nonmonotone dynamic boundary reactions: "
               "mollified Galerkin solver and estimate checker"};
  app.require_subcommand(1);

  CommonOpts solve_opts, study_opts, check_opts;
  bool dump_matrices = false;
  int levels_flag = 0;

  auto add_common = [](CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "problem config file")->required();
    cmd->add_option("--out-dir", opts.out_dir, "output directory (overrides HVIHEAT_OUT_DIR)");
    auto* seed = cmd->add_option("--seed", opts.seed, "seed override");
    cmd->callback([&opts, seed]() { opts.seed_set = seed->count() > 0; });
  };

  CLI::App* solve = app.add_subcommand("solve", "run one level and write trajectory/ledger/verdicts");
  add_common(solve, solve_opts);
  solve->add_flag("--dump-matrices", dump_matrices, "write assembled matrices in COO text form");

  CLI::App* study = app.add_subcommand("study", "joint mesh/time/eps refinement study");
  add_common(study, study_opts);
  study->add_option("--levels", levels_flag, "number of levels (>= 2)");

  std::string graph_text, eps_list, env_out;
  std::vector<double> range;
  int samples = 201;
  CLI::App* envelope = app.add_subcommand("envelope", "tabulate limits, envelope, mollification");
  envelope->add_option("--graph", graph_text, "piecewise graph text")->required();
  envelope->add_option("--range", range, "lo hi")->expected(2)->required();
  envelope->add_option("--samples", samples, "sample count (default 201)");
  envelope->add_option("--eps-list", eps_list, "comma-separated mollification radii");
  envelope->add_option("--out", env_out, "output CSV path ('-' for stdout)");

  CLI::App* check = app.add_subcommand("check", "hypothesis checks without solving");
  add_common(check, check_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (solve->parsed()) return cmd_solve(solve_opts, dump_matrices);
  if (study->parsed()) return cmd_study(study_opts, levels_flag);
  if (envelope->parsed()) return cmd_envelope(graph_text, range[0], range[1], samples, eps_list, env_out);
  if (check->parsed()) return cmd_check(check_opts);
  return 2;
}

}  // namespace hviheat::cli
