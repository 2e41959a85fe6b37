#pragma once

#include <string>

#include "json.hpp"

#include "hviheat/solver.hpp"
#include "hviheat/verify.hpp"

namespace hviheat::io {

// Floating-point text with 17 significant digits (exact round-trip).
std::string fmt17(double v);

// JSON value for a double; non-finite values become the strings "inf",
// "-inf", "nan" so reports stay valid JSON.
nlohmann::ordered_json json_number(double v);

void write_trajectory_csv(const std::string& path, const solver::Trajectory& traj);
void write_ledger_csv(const std::string& path, const solver::EnergyLedger& ledger);

nlohmann::ordered_json smallness_json(const verify::SmallnessVerdict& v);
nlohmann::ordered_json energy_json(const verify::EnergyReport& r);
nlohmann::ordered_json inclusion_json(const verify::InclusionReport& r);
nlohmann::ordered_json hvi_json(const verify::HviReport& r);
nlohmann::ordered_json apriori_json(const verify::AprioriReport& r);
nlohmann::ordered_json apriori_bound_json(const verify::AprioriBoundReport& r);
nlohmann::ordered_json reaction_growth_json(const verify::ReactionGrowthReport& r);
nlohmann::ordered_json study_json(const solver::StudyReport& report);

void write_text(const std::string& path, const std::string& content);

}  // namespace hviheat::io
