// Shared test oracles. Everything here recomputes quantities along routes
// independent of the library paths under test: dense sampling for envelopes,
// direct quadrature for difference quotients, dense factorizations for the
// sparse solvers and eigenvalue estimates.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hviheat/piecewise.hpp"
#include "hviheat/quadrature.hpp"
#include "hviheat/sparse.hpp"

namespace testsupport {

using hviheat::graphs::PiecewiseGraph;

// ---------------------------------------------------------------------------
// deterministic uniforms (engine-independent mapping)

class Rng {
public:
  explicit Rng(std::uint64_t seed) : rng_(seed) {}
  double u01() { return double(rng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }
  int uniform_int(int lo, int hi) {  // inclusive
    return lo + int(rng_() % std::uint64_t(hi - lo + 1));
  }
  std::uint64_t raw() { return rng_(); }

private:
  std::mt19937_64 rng_;
};

// ---------------------------------------------------------------------------
// random piecewise graphs (polynomial segments) built through the text parser

struct RandomGraphOptions {
  int max_breakpoints = 5;
  int max_degree = 3;
  double coeff_range = 2.0;
  double breakpoint_range = 2.0;
};

inline std::string random_polynomial_text(Rng& rng, int max_degree, double coeff_range) {
  const int deg = rng.uniform_int(0, max_degree);
  std::string text;
  char buf[64];
  for (int k = 0; k <= deg; ++k) {
    double c = rng.uniform(-coeff_range, coeff_range);
    std::snprintf(buf, sizeof buf, "%.17g", c);
    if (k == 0) {
      text = buf;
    } else if (k == 1) {
      text += std::string(" + (") + buf + ")*s";
    } else {
      text += std::string(" + (") + buf + ")*s^" + std::to_string(k);
    }
  }
  return text;
}

inline PiecewiseGraph random_graph(Rng& rng, const RandomGraphOptions& opt = {}) {
  const int nb = rng.uniform_int(0, opt.max_breakpoints);
  std::vector<double> bps;
  for (int i = 0; i < nb; ++i) bps.push_back(rng.uniform(-opt.breakpoint_range, opt.breakpoint_range));
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end(),
                        [](double a, double b) { return std::fabs(a - b) < 1e-3; }),
            bps.end());
  std::string text;
  char buf[64];
  for (double b : bps) {
    std::snprintf(buf, sizeof buf, "%.17g", b);
    text += random_polynomial_text(rng, opt.max_degree, opt.coeff_range);
    text += std::string(" upto ") + buf + " ; ";
  }
  text += random_polynomial_text(rng, opt.max_degree, opt.coeff_range);
  return PiecewiseGraph::parse(text);
}

// ---------------------------------------------------------------------------
// envelope oracle: ess-inf/sup over |s - t| < mu by dense midpoint sampling,
// polynomial extrapolation of the window sequence to mu -> 0

// Per-side window extrema at midpoint samples; samples never land on t, so
// each belongs to one side and single points carry no essential mass.
struct SideExtremes {
  double left_min, left_max, right_min, right_max;
};

inline SideExtremes windowed_extremes(const PiecewiseGraph& g, double t, double mu, int samples) {
  SideExtremes e{std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity(),
                 std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity()};
  for (int i = 0; i < samples; ++i) {
    const double s = t - mu + 2.0 * mu * (double(i) + 0.5) / double(samples);
    const double v = g.eval(s);
    if (s < t) {
      e.left_min = std::min(e.left_min, v);
      e.left_max = std::max(e.left_max, v);
    } else {
      e.right_min = std::min(e.right_min, v);
      e.right_max = std::max(e.right_max, v);
    }
  }
  return e;
}

inline double neville_at_zero(std::vector<double> xs, std::vector<double> ys) {
  const size_t n = xs.size();
  for (size_t m = 1; m < n; ++m)
    for (size_t i = 0; i + m < n; ++i)
      ys[i] = (xs[i + m] * ys[i] - xs[i] * ys[i + 1]) / (xs[i + m] - xs[i]);
  return ys[0];
}

// Limit of the windowed ess-inf (upper = false) or ess-sup (upper = true) as
// the window shrinks, extrapolated side-by-side across the window sequence.
inline double envelope_oracle(const PiecewiseGraph& g, double t, bool upper,
                              int samples_per_window = 100000) {
  std::vector<double> mus = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  std::vector<double> lmin, lmax, rmin, rmax;
  for (double mu : mus) {
    SideExtremes e = windowed_extremes(g, t, mu, samples_per_window);
    lmin.push_back(e.left_min);
    lmax.push_back(e.left_max);
    rmin.push_back(e.right_min);
    rmax.push_back(e.right_max);
  }
  if (upper)
    return std::max(neville_at_zero(mus, lmax), neville_at_zero(mus, rmax));
  return std::min(neville_at_zero(mus, lmin), neville_at_zero(mus, rmin));
}

// ---------------------------------------------------------------------------
// Clarke directional derivative oracle: limsup difference quotient computed
// from direct quadrature of the graph over shrinking windows, Richardson
// extrapolated over a shrinking w-perturbation grid

inline double quotient(const PiecewiseGraph& g, double w, double hv) {
  // (phi(w + hv) - phi(w)) / h computed as a direct integral; exact Gauss on
  // polynomial pieces, so no cancellation at small h.
  const double a = std::min(w, w + hv), b = std::max(w, w + hv);
  const double integral =
      hviheat::integrate_with_splits([&g](double x) { return g.eval(x); }, a, b,
                                     g.breakpoints(), 1e-18);
  return (hv >= 0 ? integral : -integral);
}

inline double clarke_oracle(const PiecewiseGraph& g, double t, double v) {
  if (v == 0.0) return 0.0;
  std::vector<double> deltas = {1e-3, 1e-4, 1e-5};
  std::vector<double> q;
  for (double delta : deltas) {
    const double h = delta / (16.0 * std::max(1.0, std::fabs(v)));
    double best = -std::numeric_limits<double>::infinity();
    constexpr int kGrid = 16;
    for (int i = -kGrid; i <= kGrid; ++i) {
      const double w = t + delta * double(i) / double(kGrid);
      best = std::max(best, quotient(g, w, h * v) / h);
    }
    q.push_back(best);
  }
  return neville_at_zero(deltas, q);
}

inline double product_clarke_oracle(const PiecewiseGraph& g1, const PiecewiseGraph& g2, double t,
                                    double s, double v1, double v2) {
  // Joint difference quotient over the product grid with one shared step; the
  // grid maximum splits because the components perturb independently.
  std::vector<double> deltas = {1e-3, 1e-4, 1e-5};
  std::vector<double> q;
  const double vmax = std::max({1.0, std::fabs(v1), std::fabs(v2)});
  for (double delta : deltas) {
    const double h = delta / (16.0 * vmax);
    double best1 = v1 == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    double best2 = v2 == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    constexpr int kGrid = 16;
    for (int i = -kGrid; i <= kGrid; ++i) {
      const double w1 = t + delta * double(i) / double(kGrid);
      const double w2 = s + delta * double(i) / double(kGrid);
      if (v1 != 0.0) best1 = std::max(best1, quotient(g1, w1, h * v1) / h);
      if (v2 != 0.0) best2 = std::max(best2, quotient(g2, w2, h * v2) / h);
    }
    q.push_back(best1 + best2);
  }
  return neville_at_zero(deltas, q);
}

// ---------------------------------------------------------------------------
// dense linear-algebra oracles

inline std::vector<double> dense_of(const hviheat::fem::CsrMatrix& m) {
  const size_t n = size_t(m.n());
  std::vector<double> d(n * n, 0.0);
  auto rp = m.row_ptr();
  auto cols = m.cols();
  auto vals = m.values();
  for (size_t r = 0; r < n; ++r)
    for (int k = rp[r]; k < rp[r + 1]; ++k) d[r * n + size_t(cols[size_t(k)])] = vals[size_t(k)];
  return d;
}

// Cyclic Jacobi eigenvalues of a dense symmetric matrix (destroys input).
inline std::vector<double> jacobi_eigenvalues(std::vector<double> a, int n) {
  auto at = [&](int i, int j) -> double& { return a[size_t(i) * size_t(n) + size_t(j)]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
    if (off < 1e-24) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::fabs(at(p, q)) < 1e-300) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * at(p, q));
        const double sgn = theta >= 0 ? 1.0 : -1.0;
        const double tau = sgn / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(tau * tau + 1.0);
        const double sn = tau * c;
        for (int k = 0; k < n; ++k) {
          const double akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - sn * akq;
          at(k, q) = sn * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - sn * aqk;
          at(q, k) = sn * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(size_t(n), 0.0);
  for (int i = 0; i < n; ++i) ev[size_t(i)] = at(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

// In-place dense Cholesky, lower triangle; returns false if not SPD.
inline bool cholesky(std::vector<double>& a, int n) {
  auto at = [&](int i, int j) -> double& { return a[size_t(i) * size_t(n) + size_t(j)]; };
  for (int j = 0; j < n; ++j) {
    double d = at(j, j);
    for (int k = 0; k < j; ++k) d -= at(j, k) * at(j, k);
    if (!(d > 0.0)) return false;
    at(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = at(i, j);
      for (int k = 0; k < j; ++k) s -= at(i, k) * at(j, k);
      at(i, j) = s / at(j, j);
    }
    for (int i = 0; i < j; ++i) at(i, j) = 0.0;
  }
  return true;
}

// Smallest eigenvalue of the pencil A x = lambda B x via the dense reduction
// L^{-1} A L^{-T} with B = L L^T.
inline double dense_smallest_generalized_eigenvalue(const hviheat::fem::CsrMatrix& A,
                                                    const hviheat::fem::CsrMatrix& B) {
  const int n = A.n();
  std::vector<double> a = dense_of(A);
  std::vector<double> l = dense_of(B);
  if (!cholesky(l, n)) throw std::runtime_error("oracle: B is not SPD");
  auto at = [&](std::vector<double>& m, int i, int j) -> double& {
    return m[size_t(i) * size_t(n) + size_t(j)];
  };
  // Solve L X = A (columns), then L Y = X^T: Y = L^{-1} A L^{-T}.
  for (int col = 0; col < n; ++col)
    for (int i = 0; i < n; ++i) {
      double s = at(a, i, col);
      for (int k = 0; k < i; ++k) s -= at(l, i, k) * at(a, k, col);
      at(a, i, col) = s / at(l, i, i);
    }
  for (int row = 0; row < n; ++row)
    for (int j = 0; j < n; ++j) {
      double s = at(a, row, j);
      for (int k = 0; k < j; ++k) s -= at(l, j, k) * at(a, row, k);
      at(a, row, j) = s / at(l, j, j);
    }
  return jacobi_eigenvalues(std::move(a), n).front();
}

}  // namespace testsupport
