#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hviheat/configfile.hpp"
#include "hviheat/mollifier.hpp"
#include "hviheat/piecewise.hpp"
#include "hviheat/report_io.hpp"
#include "hviheat/smallness.hpp"
#include "hviheat/solver.hpp"
#include "hviheat/verify.hpp"

namespace py = pybind11;
using namespace hviheat;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(py::ssize_t(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::array_t<double> to_array_2d(const std::vector<std::vector<double>>& rows) {
  const py::ssize_t nr = py::ssize_t(rows.size());
  const py::ssize_t nc = nr > 0 ? py::ssize_t(rows[0].size()) : 0;
  py::array_t<double> out({nr, nc});
  double* data = out.mutable_data();
  for (py::ssize_t r = 0; r < nr; ++r)
    std::copy(rows[size_t(r)].begin(), rows[size_t(r)].end(), data + r * nc);
  return out;
}

py::dict solve_to_dict(const solver::Problem& p, const solver::SolveResult& run) {
  verify::EnergyReport energy = verify::energy_check(run.ledger);
  verify::AprioriReport apriori = verify::apriori_check(run.ledger);
  verify::InclusionReport inclusion =
      verify::inclusion_check(run.trajectory, p.spec->gamma1, p.spec->gamma2, p.eps);

  py::dict d;
  d["times"] = to_array(run.trajectory.times);
  d["states"] = to_array_2d(run.trajectory.states);
  d["reactions_interior"] = to_array_2d(run.trajectory.reactions1);
  d["reactions_boundary"] = to_array_2d(run.trajectory.reactions2);
  d["boundary_vertices"] = run.trajectory.boundary_vertices;
  d["coercivity"] = run.ledger.M;
  d["eps"] = p.eps;
  d["h"] = p.mesh.max_edge();
  d["dt"] = p.dt;
  d["energy_ok"] = energy.ok;
  d["energy_worst_violation"] = energy.worst_violation;
  d["c_observed"] = apriori.c_observed;
  d["inclusion_fraction"] = inclusion.fraction_inside;
  d["smallness_case"] = int(run.ledger.smallness.which);
  d["smallness_ok"] = run.ledger.smallness.ok;
  return d;
}

}  // namespace

PYBIND11_MODULE(hviheat, m) {
  m.doc() = "heat equation with nonmonotone dynamic boundary reactions: "
            "mollified Galerkin solver and estimate checker";

  py::register_exception<ParseError>(m, "GraphParseError");
  py::register_exception<config::ConfigError>(m, "ConfigError");

  py::class_<graphs::Envelope>(m, "Envelope")
      .def_readonly("lo", &graphs::Envelope::lo)
      .def_readonly("hi", &graphs::Envelope::hi)
      .def("contains", &graphs::Envelope::contains)
      .def("distance", &graphs::Envelope::distance)
      .def("__repr__", [](const graphs::Envelope& e) {
        return "Envelope(lo=" + io::fmt17(e.lo) + ", hi=" + io::fmt17(e.hi) + ")";
      });

  py::class_<graphs::PiecewiseGraph>(m, "Graph")
      .def_static("parse", &graphs::PiecewiseGraph::parse, py::arg("text"))
      .def("__call__", &graphs::PiecewiseGraph::eval, py::arg("t"))
      .def("eval", &graphs::PiecewiseGraph::eval, py::arg("t"))
      .def("one_sided_limits", &graphs::PiecewiseGraph::one_sided_limits, py::arg("t"))
      .def("envelope", &graphs::PiecewiseGraph::chang_envelope, py::arg("t"))
      .def("potential", &graphs::PiecewiseGraph::potential, py::arg("t"))
      .def("clarke_dd", &graphs::PiecewiseGraph::clarke_dd, py::arg("t"), py::arg("v"))
      .def("mollify",
           [](const graphs::PiecewiseGraph& g, double eps, double xi) {
             return graphs::mollify(g, graphs::MollifierKernel::standard_bump(), eps, xi);
           },
           py::arg("eps"), py::arg("xi"))
      .def_property_readonly("breakpoints", &graphs::PiecewiseGraph::breakpoints)
      .def_property_readonly("source", &graphs::PiecewiseGraph::source);

  m.def("parse_graph", &graphs::PiecewiseGraph::parse, py::arg("text"));

  m.def("product_clarke_dd", &graphs::product_clarke_dd, py::arg("g1"), py::arg("g2"),
        py::arg("t"), py::arg("s"), py::arg("v1"), py::arg("v2"));

  m.def(
      "check_growth",
      [](const graphs::PiecewiseGraph& g, double c, double theta, double lo, double hi, int n) {
        graphs::GrowthReport r = graphs::check_growth(g, {c, theta, {}}, lo, hi, n);
        py::dict d;
        d["ok"] = r.ok;
        d["worst_ratio"] = r.worst_ratio;
        d["worst_t"] = r.worst_t;
        return d;
      },
      py::arg("graph"), py::arg("c"), py::arg("theta"), py::arg("lo") = -10.0,
      py::arg("hi") = 10.0, py::arg("samples") = 2001);

  m.def(
      "check_sign_condition",
      [](const graphs::PiecewiseGraph& g, double d, double lo, double hi, int n) {
        graphs::SignReport r = graphs::check_sign_condition(g, d, lo, hi, n);
        py::dict out;
        out["ok"] = r.ok;
        out["worst_excess"] = r.worst_excess;
        out["worst_t"] = r.worst_t;
        return out;
      },
      py::arg("graph"), py::arg("d") = 0.0, py::arg("lo") = -10.0, py::arg("hi") = 10.0,
      py::arg("samples") = 2001);

  m.def(
      "smallness_check",
      [](double theta1, double theta2, double c1, double c2, double M) {
        verify::SmallnessVerdict v = verify::smallness_check(theta1, theta2, c1, c2, M);
        py::dict d;
        d["case"] = int(v.which);
        d["ok"] = v.ok;
        d["margin"] = v.margin;
        d["threshold"] = v.threshold;
        return d;
      },
      py::arg("theta1"), py::arg("theta2"), py::arg("c1"), py::arg("c2"), py::arg("M"));

  m.def(
      "coercivity",
      [](const std::string& config_text) {
        config::ProblemConfig cfg = config::parse_problem_config(config_text);
        solver::Problem p = solver::instantiate(cfg.spec, 0);
        return fem::estimate_coercivity(p.ops);
      },
      py::arg("config_text"), "Coercivity constant of the assembled level-0 operators.");

  m.def(
      "solve",
      [](const std::string& config_text, int level) {
        config::ProblemConfig cfg = config::parse_problem_config(config_text);
        solver::Problem p = solver::instantiate(cfg.spec, level);
        fem::estimate_coercivity(p.ops);
        solver::SolveResult run = solver::solve(p);
        return solve_to_dict(p, run);
      },
      py::arg("config_text"), py::arg("level") = 0,
      "Run one level from a config string; returns arrays and verdicts.");

  m.def(
      "study",
      [](const std::string& config_text, int levels) {
        config::ProblemConfig cfg = config::parse_problem_config(config_text);
        solver::StudyReport report =
            solver::refine_study(cfg.spec, levels > 0 ? levels : cfg.study_levels);
        return io::study_json(report).dump();
      },
      py::arg("config_text"), py::arg("levels") = 0,
      "Run the refinement study; returns the report as a JSON string.");
}
