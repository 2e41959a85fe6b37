#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hviheat/expr.hpp"
#include "hviheat/mollifier.hpp"
#include "hviheat/piecewise.hpp"
#include "support.hpp"

using namespace hviheat;
using namespace hviheat::graphs;
using testsupport::Rng;

namespace {

PiecewiseGraph heaviside() { return PiecewiseGraph::parse("0 upto 0; 1"); }
PiecewiseGraph sign_graph() { return PiecewiseGraph::parse("-1 upto 0; 1"); }
PiecewiseGraph identity_graph() { return PiecewiseGraph::parse("s"); }
PiecewiseGraph sign_plus_t() { return PiecewiseGraph::parse("s - 1 upto 0; s + 1"); }

constexpr std::string_view kS[] = {"s"};

}  // namespace

TEST_CASE("expression parsing and evaluation") {
  Expr e = Expr::parse("2*s^3 - s + 1", kS);
  CHECK(e.eval1(2.0) == doctest::Approx(15.0).epsilon(1e-15));
  auto p = e.as_polynomial();
  REQUIRE(p.has_value());
  CHECK(p->degree() == 3);
  CHECK(p->coeffs[0] == 1.0);
  CHECK(p->coeffs[1] == -1.0);
  CHECK(p->coeffs[3] == 2.0);

  Expr trig = Expr::parse("sin(pi*s) + exp(-s)", kS);
  CHECK(trig.eval1(0.5) == doctest::Approx(1.0 + std::exp(-0.5)).epsilon(1e-15));
  CHECK_FALSE(trig.as_polynomial().has_value());

  CHECK(Expr::parse("tanh(s)*abs(s) - sign(s)", kS).eval1(-2.0) ==
        doctest::Approx(std::tanh(-2.0) * 2.0 + 1.0));

  CHECK_THROWS_AS(Expr::parse("2*q", kS), ParseError);
  CHECK_THROWS_AS(Expr::parse("sin(s", kS), ParseError);
  CHECK_THROWS_AS(Expr::parse("1 +", kS), ParseError);
}

TEST_CASE("polynomial antiderivative") {
  auto p = Expr::parse("3*s^2", kS).as_polynomial();
  REQUIRE(p.has_value());
  Polynomial F = p->antiderivative();
  CHECK(F.eval(2.0) == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(F.eval(0.0) == 0.0);
}

TEST_CASE("graph text parsing") {
  PiecewiseGraph g = PiecewiseGraph::parse("left: -1 upto 0; 1");
  CHECK(g.convention() == BreakSide::left);
  CHECK(g.eval(0.0) == -1.0);

  CHECK_THROWS_AS(PiecewiseGraph::parse("1 upto 0; 2 upto 0; 3"), ParseError);  // not increasing
  CHECK_THROWS_AS(PiecewiseGraph::parse("1 upto 0"), ParseError);               // no tail
  CHECK_THROWS_AS(PiecewiseGraph::parse(""), ParseError);

  // Breakpoints accept constant expressions.
  PiecewiseGraph h = PiecewiseGraph::parse("0 upto pi/2; 1");
  CHECK(h.breakpoints()[0] == doctest::Approx(1.5707963267948966));
}

TEST_CASE("pointwise evaluation and the breakpoint convention") {
  CHECK(heaviside().eval(0.0) == 1.0);  // right convention at the jump
  CHECK(identity_graph().eval(3.5) == 3.5);
  CHECK(sign_plus_t().eval(-2.0) == -3.0);
  CHECK(PiecewiseGraph::parse("left: 0 upto 0; 1").eval(0.0) == 0.0);
}

TEST_CASE("one-sided limits") {
  auto [hl, hr] = heaviside().one_sided_limits(0.0);
  CHECK(hl == 0.0);
  CHECK(hr == 1.0);

  auto [il, ir] = identity_graph().one_sided_limits(1.0);
  CHECK(il == 1.0);
  CHECK(ir == 1.0);

  PiecewiseGraph g = sign_plus_t();
  auto [gl, gr] = g.one_sided_limits(0.0);
  CHECK(gl == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(gr == doctest::Approx(1.0).epsilon(1e-15));
  // Cross-check the limits by shrinking-offset samples t = +-10^-k.
  for (int k = 3; k <= 8; ++k) {
    const double off = std::pow(10.0, -k);
    CHECK(g.eval(-off) == doctest::Approx(gl).epsilon(2 * off));
    CHECK(g.eval(off) == doctest::Approx(gr).epsilon(2 * off));
  }
}

TEST_CASE("envelope at jumps and continuity points") {
  PiecewiseGraph down = PiecewiseGraph::parse("1 upto 0; -1");
  Envelope e = down.chang_envelope(0.0);
  CHECK(e.lo == -1.0);
  CHECK(e.hi == 1.0);

  Envelope c = identity_graph().chang_envelope(2.0);
  CHECK(c.lo == 2.0);
  CHECK(c.hi == 2.0);

  Envelope s = sign_plus_t().chang_envelope(0.0);
  CHECK(s.lo == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(s.hi == doctest::Approx(1.0).epsilon(1e-12));
  // Brute-force windowed oracle agreement at the jump.
  CHECK(testsupport::envelope_oracle(sign_plus_t(), 0.0, false, 20000) ==
        doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(testsupport::envelope_oracle(sign_plus_t(), 0.0, true, 20000) ==
        doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("envelope equals the dense-sampling oracle on random graphs") {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    PiecewiseGraph g = testsupport::random_graph(rng);
    std::vector<double> points;
    for (double b : g.breakpoints()) points.push_back(b);
    for (int extra = 0; extra < 2; ++extra) {
      double t = rng.uniform(-2.5, 2.5);
      bool near_break = false;
      for (double b : g.breakpoints()) near_break = near_break || std::fabs(t - b) < 0.05;
      if (!near_break) points.push_back(t);
    }
    for (double t : points) {
      Envelope env = g.chang_envelope(t);
      CHECK(std::fabs(env.lo - testsupport::envelope_oracle(g, t, false, 20000)) <= 1e-8);
      CHECK(std::fabs(env.hi - testsupport::envelope_oracle(g, t, true, 20000)) <= 1e-8);
    }
  }
}

TEST_CASE("potential") {
  CHECK(sign_graph().potential(-3.0) == doctest::Approx(3.0).epsilon(1e-14));  // |t|
  CHECK(sign_graph().potential(0.0) == 0.0);
  CHECK(heaviside().potential(2.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(heaviside().potential(-2.0) == doctest::Approx(0.0).epsilon(1e-14));

  // Non-polynomial segment against an adaptive quadrature oracle.
  PiecewiseGraph g = PiecewiseGraph::parse("sin(s) upto 0; cos(s)");
  const double want = adaptive_integrate([](double x) { return std::cos(x); }, 0.0, 1.5, 1e-13);
  CHECK(g.potential(1.5) == doctest::Approx(want).epsilon(1e-10));
  const double want_neg = -adaptive_integrate([](double x) { return std::sin(x); }, -1.5, 0.0, 1e-13);
  CHECK(g.potential(-1.5) == doctest::Approx(want_neg).epsilon(1e-10));
}

TEST_CASE("clarke directional derivative of the primitive") {
  // phi = |.|: the subdifferential at 0 is [-1, 1].
  CHECK(sign_graph().clarke_dd(0.0, 1.0) == 1.0);
  CHECK(sign_graph().clarke_dd(0.0, -1.0) == 1.0);
  // Smooth case: phi'(3) v.
  CHECK(identity_graph().clarke_dd(3.0, 2.0) == doctest::Approx(6.0).epsilon(1e-15));
  // Jump with slope: dd at 0 in direction -1 is -1 * lower limit = 1.
  CHECK(sign_plus_t().clarke_dd(0.0, -1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sign_plus_t().clarke_dd(0.0, 0.0) == 0.0);

  // Difference-quotient oracle agreement.
  CHECK(sign_plus_t().clarke_dd(0.0, -1.0) ==
        doctest::Approx(testsupport::clarke_oracle(sign_plus_t(), 0.0, -1.0)).epsilon(1e-7));
  CHECK(heaviside().clarke_dd(0.0, 1.0) ==
        doctest::Approx(testsupport::clarke_oracle(heaviside(), 0.0, 1.0)).epsilon(1e-7));
}

TEST_CASE("clarke calculus: homogeneity, subadditivity, oracle match on random graphs") {
  Rng rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    PiecewiseGraph g = testsupport::random_graph(rng);
    double t;
    if (!g.breakpoints().empty() && trial % 2 == 0) {
      t = g.breakpoints()[size_t(rng.uniform_int(0, int(g.breakpoints().size()) - 1))];
    } else {
      do {
        t = rng.uniform(-2.5, 2.5);
      } while ([&] {
        for (double b : g.breakpoints())
          if (std::fabs(t - b) < 0.01) return true;
        return false;
      }());
    }
    const double v = rng.uniform(-2.0, 2.0);
    const double w = rng.uniform(-2.0, 2.0);
    const double alpha = rng.uniform(0.1, 3.0);

    CHECK(std::fabs(g.clarke_dd(t, alpha * v) - alpha * g.clarke_dd(t, v)) <=
          1e-12 * (1.0 + std::fabs(g.clarke_dd(t, v))));
    CHECK(g.clarke_dd(t, v + w) <= g.clarke_dd(t, v) + g.clarke_dd(t, w) + 1e-12);
    CHECK(std::fabs(g.clarke_dd(t, v) - testsupport::clarke_oracle(g, t, v)) <= 1e-6);
  }
}

TEST_CASE("separated-variable directional derivative") {
  PiecewiseGraph s1 = sign_graph(), s2 = sign_graph();
  CHECK(product_clarke_dd(s1, s2, 0.0, 0.0, 1.0, 1.0) == 2.0);
  CHECK(product_clarke_dd(identity_graph(), PiecewiseGraph(), 1.0, 5.0, 1.0, 1.0) ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(product_clarke_dd(heaviside(), sign_graph(), 0.0, 0.0, -1.0, -1.0) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // Componentwise limsup oracle.
  CHECK(product_clarke_dd(heaviside(), sign_graph(), 0.0, 0.0, -1.0, -1.0) ==
        doctest::Approx(testsupport::product_clarke_oracle(heaviside(), sign_graph(), 0.0, 0.0,
                                                           -1.0, -1.0))
            .epsilon(1e-7));
}

TEST_CASE("growth condition checks") {
  GrowthParams p{1.0, 0.0, {}};
  GrowthReport r = check_growth(sign_graph(), p, -10.0, 10.0, 101);
  CHECK(r.ok);
  CHECK(r.worst_ratio == doctest::Approx(1.0).epsilon(1e-12));

  GrowthParams lin{1.0, 1.0, {}};
  CHECK(check_growth(identity_graph(), lin, -10.0, 10.0, 101).ok);

  PiecewiseGraph two_t = PiecewiseGraph::parse("2*s");
  GrowthReport bad = check_growth(two_t, lin, -10.0, 10.0, 101);
  CHECK_FALSE(bad.ok);
  CHECK(bad.worst_ratio == doctest::Approx(20.0 / 11.0).epsilon(1e-12));
  CHECK(std::fabs(bad.worst_t) == doctest::Approx(10.0));

  CHECK_THROWS_AS(check_growth(two_t, GrowthParams{-1.0, 0.0, {}}, -1, 1, 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(check_growth(two_t, GrowthParams{1.0, 2.0, {}}, -1, 1, 10),
                  std::invalid_argument);
}

TEST_CASE("sign condition checks") {
  CHECK(check_sign_condition(sign_graph(), 0.0, -10.0, 10.0, 101).ok);
  CHECK(check_sign_condition(identity_graph(), 0.0, -10.0, 10.0, 101).ok);

  PiecewiseGraph neg_sign = PiecewiseGraph::parse("1 upto 0; -1");
  SignReport r = check_sign_condition(neg_sign, 0.9, -10.0, 10.0, 101);
  CHECK_FALSE(r.ok);  // clarke_dd(t, -t) = |t|, and |t| > 0.9 (1 + |t|) at t = 10

  CHECK_THROWS_AS(check_sign_condition(neg_sign, -0.1, -1.0, 1.0, 10), std::invalid_argument);
}

TEST_CASE("mollifier kernel mass and shape") {
  const MollifierKernel& k = MollifierKernel::standard_bump();
  CHECK(std::fabs(k.mass() - 1.0) <= 1e-12);
  CHECK(k.value(0.0) > 0.0);
  CHECK(k.value(1.0) == 0.0);
  CHECK(k.value(-1.0) == 0.0);
  CHECK(k.value(0.3) == k.value(-0.3));
  CHECK(k.derivative(0.0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("mollification basics") {
  const MollifierKernel& k = MollifierKernel::standard_bump();
  CHECK(mollify(heaviside(), k, 0.1, 0.0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(mollify(heaviside(), k, 0.1, 0.1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mollify(identity_graph(), k, 0.1, 2.0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK_THROWS_AS(mollify(heaviside(), k, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(mollify(heaviside(), k, -1.0, 0.0), std::invalid_argument);
}

TEST_CASE("mollified derivative by differentiated quadrature") {
  const MollifierKernel& k = MollifierKernel::standard_bump();
  // Smooth graph: derivative of the mollification equals the derivative.
  CHECK(mollify_derivative(identity_graph(), k, 0.05, 0.7) == doctest::Approx(1.0).epsilon(1e-9));
  // Jump: finite-difference cross-check.
  const double eps = 0.1, xi = 0.03, h = 1e-6;
  const double fd = (mollify(heaviside(), k, eps, xi + h) - mollify(heaviside(), k, eps, xi - h)) /
                    (2.0 * h);
  CHECK(mollify_derivative(heaviside(), k, eps, xi) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("mollifier localization and jump containment on random graphs") {
  Rng rng(5150);
  const MollifierKernel& k = MollifierKernel::standard_bump();
  for (int trial = 0; trial < 25; ++trial) {
    PiecewiseGraph g = testsupport::random_graph(rng);
    const double eps = rng.uniform(0.02, 0.3);
    const double xi = rng.uniform(-2.5, 2.5);

    bool clear = true;
    for (double b : g.breakpoints()) clear = clear && std::fabs(xi - b) > eps * 1.01;

    const double m = mollify(g, k, eps, xi);

    // Convex averaging: the value stays inside the windowed range.
    double wlo = std::numeric_limits<double>::infinity(), whi = -wlo;
    for (int i = 0; i <= 4000; ++i) {
      const double s = xi - eps + 2.0 * eps * double(i) / 4000.0;
      auto [lv, rv] = g.one_sided_limits(s);
      wlo = std::min({wlo, lv, rv});
      whi = std::max({whi, lv, rv});
    }
    CHECK(m >= wlo - 1e-9);
    CHECK(m <= whi + 1e-9);

    if (clear) {
      // No breakpoint in the window: |moll - value| <= L eps with L the
      // sampled Lipschitz slope of the segment.
      double slope = 0.0;
      double prev = g.eval(xi - eps);
      for (int i = 1; i <= 2000; ++i) {
        const double s = xi - eps + 2.0 * eps * double(i) / 2000.0;
        const double v = g.eval(s);
        slope = std::max(slope, std::fabs(v - prev) / (2.0 * eps / 2000.0));
        prev = v;
      }
      CHECK(std::fabs(m - g.eval(xi)) <= slope * eps * (1.0 + 1e-3) + 1e-9);
    }
  }
}

TEST_CASE("growth transfer to the mollification (windowed form)") {
  Rng rng(99);
  const MollifierKernel& k = MollifierKernel::standard_bump();
  for (int trial = 0; trial < 15; ++trial) {
    PiecewiseGraph g = testsupport::random_graph(rng);
    const double theta = std::array<double, 3>{0.0, 0.5, 1.0}[size_t(rng.uniform_int(0, 2))];
    const double A = -2.0, B = 2.0;

    // Fit a valid c on [A-1, B+1] with a small safety factor.
    auto growth_pow = [](double t, double th) {
      return (t == 0.0 && th == 0.0) ? 0.0 : std::pow(std::fabs(t), th);
    };
    double c = 0.0;
    auto fit_at = [&](double t) {
      auto [lv, rv] = g.one_sided_limits(t);
      const double denom = 1.0 + growth_pow(t, theta);
      c = std::max({c, std::fabs(lv) / denom, std::fabs(rv) / denom});
    };
    for (int i = 0; i <= 8000; ++i) fit_at((A - 1.0) + (B - A + 2.0) * double(i) / 8000.0);
    for (double b : g.breakpoints())
      if (b >= A - 1.0 && b <= B + 1.0) fit_at(b);
    fit_at(0.0);
    c *= 1.001;
    REQUIRE(check_growth(g, GrowthParams{c, theta, {}}, A - 1.0, B + 1.0, 2001).ok);

    const double eps = rng.uniform(0.05, 1.0);
    for (int i = 0; i < 25; ++i) {
      const double s = rng.uniform(A, B);
      const double bound = c * (1.0 + std::pow(std::fabs(s) + eps, theta));
      CHECK(std::fabs(mollify(g, k, eps, s)) <= bound * (1.0 + 1e-9) + 1e-12);
    }
  }
}
