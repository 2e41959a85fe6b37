#include "hviheat/configfile.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hviheat::config {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_number(const std::string& v, int line) {
  try {
    size_t used = 0;
    double x = std::stod(v, &used);
    while (used < v.size() && std::isspace(static_cast<unsigned char>(v[used]))) ++used;
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("expected a number, got '" + v + "'", line);
  }
}

int parse_int(const std::string& v, int line) {
  double x = parse_number(v, line);
  if (x != std::floor(x)) throw ConfigError("expected an integer, got '" + v + "'", line);
  return int(x);
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("expected a boolean, got '" + v + "'", line);
}

constexpr std::string_view kSpaceTimeVars[] = {"t", "x", "y"};
constexpr std::string_view kSpaceVars[] = {"x", "y"};

solver::SpaceTimeFn make_space_time(const std::string& text, int line) {
  try {
    Expr e = Expr::parse(text, kSpaceTimeVars);
    return [e](double t, double x, double y) {
      const double args[3] = {t, x, y};
      return e.eval(args);
    };
  } catch (const ParseError& pe) {
    throw ConfigError(std::string("bad expression: ") + pe.what(), line, pe.column());
  }
}

solver::SpaceFn make_space(const std::string& text, int line) {
  try {
    Expr e = Expr::parse(text, kSpaceVars);
    return [e](double x, double y) {
      const double args[2] = {x, y};
      return e.eval(args);
    };
  } catch (const ParseError& pe) {
    throw ConfigError(std::string("bad expression: ") + pe.what(), line, pe.column());
  }
}

graphs::PiecewiseGraph parse_graph_value(const std::string& text, int line) {
  try {
    return graphs::PiecewiseGraph::parse(text);
  } catch (const ParseError& pe) {
    throw ConfigError(std::string("bad graph: ") + pe.what(), line, pe.column());
  }
}

std::vector<std::array<double, 2>> parse_vertex_loop(const std::string& v, int line) {
  // "(x,y) (x,y) ..." pairs.
  std::vector<std::array<double, 2>> loop;
  size_t i = 0;
  while (i < v.size()) {
    while (i < v.size() && std::isspace(static_cast<unsigned char>(v[i]))) ++i;
    if (i >= v.size()) break;
    if (v[i] != '(') throw ConfigError("expected '(' in vertex list", line);
    size_t close = v.find(')', i);
    if (close == std::string::npos) throw ConfigError("unclosed vertex pair", line);
    std::string pair = v.substr(i + 1, close - i - 1);
    size_t comma = pair.find(',');
    if (comma == std::string::npos) throw ConfigError("vertex pair needs 'x,y'", line);
    loop.push_back({parse_number(trim(pair.substr(0, comma)), line),
                    parse_number(trim(pair.substr(comma + 1)), line)});
    i = close + 1;
  }
  if (loop.size() < 3) throw ConfigError("polygon needs at least 3 vertices", line);
  return loop;
}

}  // namespace

ProblemConfig parse_problem_config(const std::string& text) {
  ProblemConfig cfg;
  solver::ProblemSpec& spec = cfg.spec;

  bool has_T = false, has_dt = false, has_eps = false;
  bool has_c1 = false, has_c2 = false, has_th1 = false, has_th2 = false;
  bool domain_is_polygon = false;
  bool has_cells = false, has_h = false, has_loop = false;

  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
      section = trim(line.substr(1, line.size() - 2));
      static const char* known[] = {"domain", "time", "regularization", "graphs", "hypotheses",
                                    "sources", "boundary", "solver", "study", "output", "check"};
      bool ok = false;
      for (const char* s : known) ok = ok || section == s;
      if (!ok) throw ConfigError("unknown section [" + section + "]", line_no);
      continue;
    }

    size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line_no);
    if (value.empty()) throw ConfigError("empty value for key '" + key + "'", line_no);
    if (section.empty()) throw ConfigError("key outside of any section", line_no);

    auto unknown = [&]() -> ConfigError {
      return ConfigError("unknown key '" + key + "' in section [" + section + "]", line_no);
    };

    if (section == "domain") {
      if (key == "kind") {
        if (value == "interval") {
          spec.domain.kind = solver::DomainSpec::Kind::interval;
        } else if (value == "polygon") {
          spec.domain.kind = solver::DomainSpec::Kind::polygon;
          domain_is_polygon = true;
        } else {
          throw ConfigError("domain kind must be interval or polygon", line_no);
        }
      } else if (key == "x0") {
        spec.domain.x0 = parse_number(value, line_no);
      } else if (key == "x1") {
        spec.domain.x1 = parse_number(value, line_no);
      } else if (key == "cells") {
        spec.domain.cells = parse_int(value, line_no);
        has_cells = true;
      } else if (key == "vertices") {
        spec.domain.loop = parse_vertex_loop(value, line_no);
        has_loop = true;
      } else if (key == "h") {
        spec.domain.h = parse_number(value, line_no);
        has_h = true;
      } else {
        throw unknown();
      }
    } else if (section == "time") {
      if (key == "T") {
        spec.T = parse_number(value, line_no);
        has_T = true;
      } else if (key == "dt") {
        spec.dt = parse_number(value, line_no);
        has_dt = true;
      } else {
        throw unknown();
      }
    } else if (section == "regularization") {
      if (key == "eps") {
        spec.eps = parse_number(value, line_no);
        has_eps = true;
      } else if (key == "eps_mode") {
        if (value == "geometric")
          spec.eps_mode = solver::EpsMode::geometric;
        else if (value == "constant")
          spec.eps_mode = solver::EpsMode::constant;
        else
          throw ConfigError("eps_mode must be geometric or constant", line_no);
      } else {
        throw unknown();
      }
    } else if (section == "graphs") {
      if (key == "gamma1") {
        spec.gamma1 = parse_graph_value(value, line_no);
        cfg.gamma1_text = value;
      } else if (key == "gamma2") {
        spec.gamma2 = parse_graph_value(value, line_no);
        cfg.gamma2_text = value;
      } else {
        throw unknown();
      }
    } else if (section == "hypotheses") {
      if (key == "c1") {
        spec.growth1.c = parse_number(value, line_no);
        has_c1 = true;
      } else if (key == "c2") {
        spec.growth2.c = parse_number(value, line_no);
        has_c2 = true;
      } else if (key == "theta1") {
        spec.growth1.theta = parse_number(value, line_no);
        has_th1 = true;
      } else if (key == "theta2") {
        spec.growth2.theta = parse_number(value, line_no);
        has_th2 = true;
      } else if (key == "d") {
        cfg.sign_d = parse_number(value, line_no);
        spec.growth1.d = cfg.sign_d;
        spec.growth2.d = cfg.sign_d;
      } else if (key == "check_lo") {
        cfg.check_lo = parse_number(value, line_no);
      } else if (key == "check_hi") {
        cfg.check_hi = parse_number(value, line_no);
      } else if (key == "check_samples") {
        cfg.check_samples = parse_int(value, line_no);
      } else {
        throw unknown();
      }
    } else if (section == "sources") {
      if (key == "f1") {
        spec.f1 = make_space_time(value, line_no);
        cfg.f1_text = value;
      } else if (key == "f2") {
        spec.f2 = make_space_time(value, line_no);
        cfg.f2_text = value;
      } else if (key == "u0") {
        spec.u0 = make_space(value, line_no);
        cfg.u0_text = value;
      } else {
        throw unknown();
      }
    } else if (section == "boundary") {
      if (key == "a") {
        spec.robin = make_space(value, line_no);
        cfg.a_text = value;
      } else {
        throw unknown();
      }
    } else if (section == "solver") {
      if (key == "newton_tol") {
        spec.newton_tol = parse_number(value, line_no);
      } else if (key == "newton_max_iter") {
        spec.newton_max_iter = parse_int(value, line_no);
      } else if (key == "initial") {
        if (value == "interpolate")
          spec.initial = solver::InitialMode::interpolate;
        else if (value == "project")
          spec.initial = solver::InitialMode::project;
        else
          throw ConfigError("initial must be interpolate or project", line_no);
      } else if (key == "seed") {
        spec.seed = std::uint64_t(parse_number(value, line_no));
      } else {
        throw unknown();
      }
    } else if (section == "study") {
      if (key == "levels") {
        cfg.study_levels = parse_int(value, line_no);
      } else {
        throw unknown();
      }
    } else if (section == "output") {
      if (key == "dir") {
        cfg.out_dir = value;
      } else if (key == "dump_matrices") {
        cfg.dump_matrices = parse_bool(value, line_no);
      } else {
        throw unknown();
      }
    } else if (section == "check") {
      if (key == "energy_tol") {
        cfg.energy_tol = parse_number(value, line_no);
      } else if (key == "hvi_tests") {
        cfg.hvi_tests = parse_int(value, line_no);
      } else {
        throw unknown();
      }
    }
  }

  if (!has_T) throw ConfigError("[time] T is required", line_no);
  if (!has_dt) throw ConfigError("[time] dt is required", line_no);
  if (!has_eps) throw ConfigError("[regularization] eps is required", line_no);
  if (!(has_c1 && has_c2 && has_th1 && has_th2))
    throw ConfigError("[hypotheses] c1, theta1, c2, theta2 are required", line_no);

  if (!(spec.T > 0.0)) throw ConfigError("T must be positive", line_no);
  if (!(spec.dt > 0.0)) throw ConfigError("dt must be positive", line_no);
  if (!(spec.eps > 0.0)) throw ConfigError("eps must be positive", line_no);
  if (!(spec.newton_tol > 0.0)) throw ConfigError("newton_tol must be positive", line_no);
  if (spec.newton_max_iter < 1) throw ConfigError("newton_max_iter must be >= 1", line_no);
  if (!(spec.growth1.c > 0.0) || !(spec.growth2.c > 0.0))
    throw ConfigError("growth constants c1, c2 must be positive", line_no);
  if (!(spec.growth1.theta >= 0.0 && spec.growth1.theta <= 1.0) ||
      !(spec.growth2.theta >= 0.0 && spec.growth2.theta <= 1.0))
    throw ConfigError("growth exponents theta1, theta2 must lie in [0, 1]", line_no);
  if (cfg.sign_d < 0.0) throw ConfigError("sign-condition constant d must be >= 0", line_no);
  if (cfg.study_levels < 1) throw ConfigError("study levels must be >= 1", line_no);
  if (cfg.check_samples < 2) throw ConfigError("check_samples must be >= 2", line_no);
  if (!(cfg.check_lo < cfg.check_hi)) throw ConfigError("check range must have lo < hi", line_no);

  if (domain_is_polygon) {
    if (!has_loop || !has_h)
      throw ConfigError("[domain] polygon needs vertices and h", line_no);
    if (!(spec.domain.h > 0.0)) throw ConfigError("polygon h must be positive", line_no);
  } else {
    if (has_loop) throw ConfigError("[domain] vertices given for an interval domain", line_no);
    if (!(spec.domain.x1 > spec.domain.x0))
      throw ConfigError("[domain] needs x1 > x0", line_no);
    if (has_cells && spec.domain.cells < 1)
      throw ConfigError("[domain] cells must be >= 1", line_no);
    (void)has_h;
  }
  return cfg;
}

ProblemConfig load_problem_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'", 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_problem_config(ss.str());
}

}  // namespace hviheat::config
