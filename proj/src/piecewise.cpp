#include "hviheat/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hviheat/quadrature.hpp"

namespace hviheat::graphs {

double Envelope::distance(double x) const {
  return std::max({lo - x, x - hi, 0.0});
}

namespace {

std::string_view trim(std::string_view s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

constexpr std::string_view kVar[] = {"s"};

}  // namespace

PiecewiseGraph::PiecewiseGraph() {
  Segment zero;
  zero.poly = Polynomial{{0.0}};
  segments_.push_back(std::move(zero));
  source_ = "0";
}

PiecewiseGraph PiecewiseGraph::parse(std::string_view text) {
  PiecewiseGraph g;
  g.segments_.clear();
  g.source_ = std::string(trim(text));
  std::string_view rest = trim(text);

  if (rest.substr(0, 5) == "left:") {
    g.convention_ = BreakSide::left;
    rest = trim(rest.substr(5));
  } else if (rest.substr(0, 6) == "right:") {
    g.convention_ = BreakSide::right;
    rest = trim(rest.substr(6));
  }
  if (rest.empty()) throw ParseError("empty graph specification", 1);

  std::vector<std::string_view> chunks;
  size_t start = 0;
  for (size_t i = 0; i <= rest.size(); ++i) {
    if (i == rest.size() || rest[i] == ';') {
      chunks.push_back(trim(rest.substr(start, i - start)));
      start = i + 1;
    }
  }

  for (size_t ci = 0; ci < chunks.size(); ++ci) {
    std::string_view chunk = chunks[ci];
    if (chunk.empty()) throw ParseError("empty graph segment", 1);
    const bool is_tail = (ci + 1 == chunks.size());

    // Split "expr upto bp" at the last word-boundary "upto".
    size_t upto = std::string_view::npos;
    for (size_t i = 0; i + 4 <= chunk.size(); ++i) {
      if (chunk.substr(i, 4) == "upto") {
        bool lw = i == 0 || !std::isalnum(static_cast<unsigned char>(chunk[i - 1]));
        bool rw = i + 4 == chunk.size() || !std::isalnum(static_cast<unsigned char>(chunk[i + 4]));
        if (lw && rw) upto = i;
      }
    }

    if (is_tail) {
      if (upto != std::string_view::npos)
        throw ParseError("the final graph segment must not have an 'upto' bound", 1);
      Segment seg;
      seg.expr = Expr::parse(chunk, kVar);
      seg.poly = seg.expr.as_polynomial();
      g.segments_.push_back(std::move(seg));
    } else {
      if (upto == std::string_view::npos)
        throw ParseError("graph segment is missing its 'upto <breakpoint>' bound", 1);
      Segment seg;
      seg.expr = Expr::parse(trim(chunk.substr(0, upto)), kVar);
      seg.poly = seg.expr.as_polynomial();
      Expr bp_expr = Expr::parse(trim(chunk.substr(upto + 4)), std::span<const std::string_view>{});
      double bp = bp_expr.eval({});
      if (!std::isfinite(bp)) throw ParseError("breakpoint is not finite", 1);
      if (!g.breakpoints_.empty() && bp <= g.breakpoints_.back())
        throw ParseError("breakpoints must be strictly increasing", 1);
      g.breakpoints_.push_back(bp);
      g.segments_.push_back(std::move(seg));
    }
  }

  // One-sided limits must exist and be finite at every breakpoint.
  for (size_t i = 0; i < g.breakpoints_.size(); ++i) {
    double b = g.breakpoints_[i];
    double lv = g.segments_[i].eval(b);
    double rv = g.segments_[i + 1].eval(b);
    if (!std::isfinite(lv) || !std::isfinite(rv))
      throw ParseError("graph segment has a non-finite one-sided limit at a breakpoint", 1);
  }
  return g;
}

size_t PiecewiseGraph::segment_right_of(double t) const {
  return size_t(std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t) -
                breakpoints_.begin());
}

double PiecewiseGraph::eval(double t) const {
  auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), t);
  size_t i = size_t(it - breakpoints_.begin());
  if (it != breakpoints_.end() && *it == t) {
    // At a breakpoint: segment i is the left neighbour, i+1 the right one.
    return convention_ == BreakSide::right ? segments_[i + 1].eval(t) : segments_[i].eval(t);
  }
  return segments_[i].eval(t);
}

std::pair<double, double> PiecewiseGraph::one_sided_limits(double t) const {
  auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), t);
  size_t i = size_t(it - breakpoints_.begin());
  if (it != breakpoints_.end() && *it == t)
    return {segments_[i].eval(t), segments_[i + 1].eval(t)};
  double v = segments_[i].eval(t);
  return {v, v};
}

Envelope PiecewiseGraph::chang_envelope(double t) const {
  auto [lv, rv] = one_sided_limits(t);
  return Envelope{std::min(lv, rv), std::max(lv, rv)};
}

double PiecewiseGraph::potential(double t) const {
  if (t == 0.0) return 0.0;
  const double lo = std::min(0.0, t), hi = std::max(0.0, t);

  std::vector<double> cuts;
  cuts.push_back(lo);
  for (double b : breakpoints_)
    if (b > lo && b < hi) cuts.push_back(b);
  cuts.push_back(hi);

  double acc = 0.0;
  const double piece_tol = 1e-11 / double(cuts.size() - 1);
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    const Segment& seg = segments_[segment_right_of(a)];
    if (seg.poly) {
      Polynomial F = seg.poly->antiderivative();
      acc += F.eval(b) - F.eval(a);
    } else {
      acc += adaptive_integrate([&seg](double x) { return seg.eval(x); }, a, b, piece_tol);
    }
  }
  return t >= 0 ? acc : -acc;
}

double PiecewiseGraph::clarke_dd(double t, double v) const {
  if (v == 0.0) return 0.0;
  Envelope e = chang_envelope(t);
  return v > 0 ? v * e.hi : v * e.lo;
}

double product_clarke_dd(const PiecewiseGraph& g1, const PiecewiseGraph& g2, double t, double s,
                         double v1, double v2) {
  return g1.clarke_dd(t, v1) + g2.clarke_dd(s, v2);
}

namespace {

// Grid points plus breakpoint one-sided limit locations inside [lo, hi].
template <class F>
void scan(const PiecewiseGraph& g, double lo, double hi, int n, const F& visit) {
  for (int i = 0; i < n; ++i) {
    double t = lo + (hi - lo) * double(i) / double(n - 1);
    auto [lv, rv] = g.one_sided_limits(t);
    visit(t, lv);
    visit(t, rv);
  }
  for (double b : g.breakpoints()) {
    if (b < lo || b > hi) continue;
    auto [lv, rv] = g.one_sided_limits(b);
    visit(b, lv);
    visit(b, rv);
  }
}

}  // namespace

// |t|^theta with 0^0 read as 0, so the theta = 0 bound is c at the origin.
double growth_power(double t, double theta) {
  if (t == 0.0 && theta == 0.0) return 0.0;
  return std::pow(std::fabs(t), theta);
}

GrowthReport check_growth(const PiecewiseGraph& g, const GrowthParams& p, double lo, double hi,
                          int n) {
  if (!(p.c > 0.0)) throw std::invalid_argument("check_growth: c must be positive");
  if (!(p.theta >= 0.0 && p.theta <= 1.0))
    throw std::invalid_argument("check_growth: theta must lie in [0, 1]");
  if (n < 2) throw std::invalid_argument("check_growth: need at least 2 sample points");
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw std::invalid_argument("check_growth: range must be bounded with lo < hi");

  GrowthReport rep;
  rep.worst_t = lo;
  scan(g, lo, hi, n, [&](double t, double v) {
    double ratio = std::fabs(v) / (p.c * (1.0 + growth_power(t, p.theta)));
    if (ratio > rep.worst_ratio) {
      rep.worst_ratio = ratio;
      rep.worst_t = t;
    }
  });
  rep.ok = rep.worst_ratio <= 1.0;
  return rep;
}

SignReport check_sign_condition(const PiecewiseGraph& g, double d, double lo, double hi, int n) {
  if (d < 0.0) throw std::invalid_argument("check_sign_condition: d must be >= 0");
  if (n < 2) throw std::invalid_argument("check_sign_condition: need at least 2 sample points");
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw std::invalid_argument("check_sign_condition: range must be bounded with lo < hi");

  SignReport rep;
  rep.worst_excess = -std::numeric_limits<double>::infinity();
  rep.worst_t = lo;
  auto probe = [&](double t) {
    double excess = g.clarke_dd(t, -t) - d * (1.0 + std::fabs(t));
    if (excess > rep.worst_excess) {
      rep.worst_excess = excess;
      rep.worst_t = t;
    }
  };
  for (int i = 0; i < n; ++i) probe(lo + (hi - lo) * double(i) / double(n - 1));
  for (double b : g.breakpoints())
    if (b >= lo && b <= hi) probe(b);
  rep.ok = rep.worst_excess <= 0.0;
  return rep;
}

}  // namespace hviheat::graphs
