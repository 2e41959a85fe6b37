#include "hviheat/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace hviheat::io {

using nlohmann::ordered_json;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ordered_json json_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

void write_trajectory_csv(const std::string& path, const solver::Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  const size_t n = traj.states.empty() ? 0 : traj.states[0].size();
  out << "time";
  for (size_t v = 0; v < n; ++v) out << ",u" << v;
  out << "\n";
  for (size_t k = 0; k < traj.times.size(); ++k) {
    out << fmt17(traj.times[k]);
    for (size_t v = 0; v < n; ++v) out << "," << fmt17(traj.states[k][v]);
    out << "\n";
  }
}

void write_ledger_csv(const std::string& path, const solver::EnergyLedger& ledger) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "step,t,dt,hsq_prev,hsq,vsq,f_dual_sq,uprime_dual_sq,pair_interior,pair_boundary,"
         "reaction1_sq,reaction2_sq,newton_res,newton_iters\n";
  for (size_t k = 0; k < ledger.steps.size(); ++k) {
    const auto& s = ledger.steps[k];
    out << k + 1 << "," << fmt17(s.t) << "," << fmt17(s.dt) << "," << fmt17(s.hsq_prev) << ","
        << fmt17(s.hsq) << "," << fmt17(s.vsq) << "," << fmt17(s.f_dual_sq) << ","
        << fmt17(s.uprime_dual_sq) << "," << fmt17(s.pair_interior) << ","
        << fmt17(s.pair_boundary) << "," << fmt17(s.reaction1_sq) << ","
        << fmt17(s.reaction2_sq) << "," << fmt17(s.newton_res) << "," << s.newton_iters << "\n";
  }
}

ordered_json smallness_json(const verify::SmallnessVerdict& v) {
  ordered_json j;
  j["case"] = int(v.which);
  j["ok"] = v.ok;
  j["margin"] = json_number(v.margin);
  j["threshold"] = json_number(v.threshold);
  return j;
}

ordered_json energy_json(const verify::EnergyReport& r) {
  ordered_json j;
  j["ok"] = r.ok;
  j["steps_checked"] = r.steps_checked;
  j["steps_failed"] = r.steps_failed;
  j["worst_violation"] = json_number(r.worst_violation);
  j["worst_step"] = r.worst_step;
  j["integrated_violation"] = json_number(r.integrated_violation);
  j["integrated_ok"] = r.integrated_ok;
  return j;
}

ordered_json inclusion_json(const verify::InclusionReport& r) {
  ordered_json j;
  j["fraction_inside"] = json_number(r.fraction_inside);
  j["worst_distance"] = json_number(r.worst_distance);
  j["total_pairs"] = r.total_pairs;
  j["failed_pairs"] = r.failed_pairs;
  return j;
}

ordered_json hvi_json(const verify::HviReport& r) {
  ordered_json j;
  j["min_residual"] = json_number(r.min_residual);
  j["tol"] = json_number(r.tol);
  j["ok"] = r.ok;
  j["residual_at_state"] = json_number(r.residual_at_state);
  j["worst_step"] = r.worst_step;
  return j;
}

ordered_json apriori_json(const verify::AprioriReport& r) {
  ordered_json j;
  j["c_observed"] = json_number(r.c_observed);
  j["traj_v_norm"] = json_number(r.traj_v_norm);
  j["uprime_dual_norm"] = json_number(r.uprime_dual_norm);
  j["f_dual_norm"] = json_number(r.f_dual_norm);
  return j;
}

ordered_json apriori_bound_json(const verify::AprioriBoundReport& r) {
  ordered_json j;
  j["applicable"] = r.applicable;
  j["ok"] = r.ok;
  j["x_bound"] = json_number(r.x_bound);
  j["x_actual"] = json_number(r.x_actual);
  j["umax_bound"] = json_number(r.umax_bound);
  j["umax_actual"] = json_number(r.umax_actual);
  return j;
}

ordered_json reaction_growth_json(const verify::ReactionGrowthReport& r) {
  ordered_json j;
  j["ok"] = r.ok;
  j["interior_norm"] = json_number(r.lhs1);
  j["interior_bound"] = json_number(r.rhs1);
  j["boundary_norm"] = json_number(r.lhs2);
  j["boundary_bound"] = json_number(r.rhs2);
  return j;
}

ordered_json study_json(const solver::StudyReport& report) {
  ordered_json j;
  j["schema_version"] = 1;
  j["kind"] = "study";
  j["eps_constant"] = report.eps_constant;
  if (report.eps_constant)
    j["note"] = "constant eps schedule: reactions converge to the mollified graph, "
                "not to the envelope";
  ordered_json levels = ordered_json::array();
  for (const auto& lv : report.levels) {
    ordered_json l;
    l["level"] = lv.level;
    l["h"] = json_number(lv.h);
    l["dt"] = json_number(lv.dt);
    l["eps"] = json_number(lv.eps);
    l["coercivity"] = json_number(lv.coercivity);
    l["energy"] = {{"ok", lv.energy_ok}, {"worst_violation", json_number(lv.energy_worst)}};
    l["inclusion"] = {{"ok", lv.inclusion_ok},
                      {"fraction_inside", json_number(lv.inclusion_fraction)},
                      {"worst_distance", json_number(lv.inclusion_worst)}};
    l["hvi"] = {{"ok", lv.hvi_ok}, {"min_residual", json_number(lv.hvi_min)}};
    l["c_observed"] = json_number(lv.c_observed);
    l["traj_v_norm"] = json_number(lv.traj_v_norm);
    levels.push_back(l);
  }
  j["levels"] = levels;
  ordered_json diffs = ordered_json::array();
  for (double d : report.diffs) diffs.push_back(json_number(d));
  j["diffs"] = diffs;
  ordered_json rates = ordered_json::array();
  for (double r : report.rates) rates.push_back(json_number(r));
  j["rates"] = rates;
  j["apriori"] = {{"spread", json_number(report.apriori_spread)}, {"ok", report.apriori_ok}};
  j["all_ok"] = report.all_ok;
  return j;
}

}  // namespace hviheat::io
