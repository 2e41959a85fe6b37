#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hviheat/expr.hpp"

namespace hviheat::graphs {

// Interval [lo, hi] filling a jump of a locally bounded function.
struct Envelope {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return x >= lo && x <= hi; }
  double distance(double x) const;  // 0 inside, gap outside
};

// Growth law |g(t)| <= c (1 + |t|^theta), plus the optional sign-condition
// constant d >= 0.
struct GrowthParams {
  double c = 1.0;
  double theta = 0.0;
  std::optional<double> d;
};

enum class BreakSide { left, right };

// Scalar function given by strictly increasing breakpoints and one smooth
// expression per open interval (two unbounded tails included). One-sided
// limits exist and are finite at every breakpoint; pointwise evaluation at a
// breakpoint picks the side given by the convention.
class PiecewiseGraph {
public:
  PiecewiseGraph();  // the zero function

  // Text form: "expr upto b1 ; expr upto b2 ; ... ; expr", optionally
  // prefixed by "left:" or "right:" to set the breakpoint convention.
  // The segment variable is named s; breakpoints are constant expressions.
  static PiecewiseGraph parse(std::string_view text);

  double eval(double t) const;
  std::pair<double, double> one_sided_limits(double t) const;  // (t-0, t+0)
  Envelope chang_envelope(double t) const;

  // Primitive with value 0 at the origin; exact antiderivatives on
  // polynomial segments, adaptive quadrature (<= 1e-10) otherwise.
  double potential(double t) const;

  // Generalized directional derivative of the primitive at t in direction v:
  // v * hi for v > 0, v * lo for v < 0, 0 for v = 0.
  double clarke_dd(double t, double v) const;

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  BreakSide convention() const { return convention_; }
  const std::string& source() const { return source_; }

private:
  struct Segment {
    Expr expr;
    std::optional<Polynomial> poly;
    double eval(double t) const { return poly ? poly->eval(t) : expr.eval1(t); }
  };

  // Index of the segment owning the open interval containing t; for t exactly
  // at a breakpoint, the interval to the right.
  size_t segment_right_of(double t) const;

  std::vector<double> breakpoints_;
  std::vector<Segment> segments_;  // breakpoints_.size() + 1
  BreakSide convention_ = BreakSide::right;
  std::string source_;
};

// Directional derivative of the separated primitive (t, s) -> phi1(t) + phi2(s).
double product_clarke_dd(const PiecewiseGraph& g1, const PiecewiseGraph& g2, double t, double s,
                         double v1, double v2);

struct GrowthReport {
  bool ok = false;
  double worst_ratio = 0.0;
  double worst_t = 0.0;
};

struct SignReport {
  bool ok = false;
  double worst_excess = 0.0;  // max of clarke_dd(t,-t) - d(1+|t|)
  double worst_t = 0.0;
};

// Samples n grid points plus all breakpoint one-sided limits in [lo, hi];
// ok iff max |g| / (c (1 + |t|^theta)) <= 1.
GrowthReport check_growth(const PiecewiseGraph& g, const GrowthParams& p, double lo, double hi,
                          int n);

// Samples clarke_dd(t, -t) <= d (1 + |t|) on the same point set; d >= 0.
SignReport check_sign_condition(const PiecewiseGraph& g, double d, double lo, double hi, int n);

}  // namespace hviheat::graphs
