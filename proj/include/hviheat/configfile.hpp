#pragma once

#include <stdexcept>
#include <string>

#include "hviheat/solver.hpp"

namespace hviheat::config {

class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string& msg, int line, int column = 1)
      : std::runtime_error(msg), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_, column_;
};

// Parsed problem description plus run options. Sections and keys are listed
// in the README; unknown keys are rejected.
struct ProblemConfig {
  solver::ProblemSpec spec;
  std::string out_dir = "out";
  int study_levels = 3;
  bool dump_matrices = false;
  double energy_tol = 1e-10;
  int hvi_tests = 50;
  double check_lo = -10.0;
  double check_hi = 10.0;
  int check_samples = 2001;
  double sign_d = 0.0;

  // Raw expression texts, kept for reports.
  std::string gamma1_text = "0";
  std::string gamma2_text = "0";
  std::string f1_text;
  std::string f2_text;
  std::string u0_text;
  std::string a_text = "1";
};

ProblemConfig parse_problem_config(const std::string& text);
ProblemConfig load_problem_config(const std::string& path);

}  // namespace hviheat::config
