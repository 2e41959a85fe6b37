#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace hviheat {

// Gauss-Legendre rule on [-1, 1]; nodes ascending.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Cached rule of the given point count (n >= 1).
const GaussRule& gauss_rule(int n);

template <class F>
double gauss_integrate(const F& f, double a, double b, int n) {
  const GaussRule& r = gauss_rule(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (size_t q = 0; q < r.nodes.size(); ++q) acc += r.weights[q] * f(mid + half * r.nodes[q]);
  return half * acc;
}

namespace detail {

template <class F>
double adaptive_rec(const F& f, double a, double b, double whole, double abs_tol, int depth) {
  const double m = 0.5 * (a + b);
  const double left = gauss_integrate(f, a, m, 15);
  const double right = gauss_integrate(f, m, b, 15);
  const double err = std::fabs(left + right - whole);
  if (err <= abs_tol || depth <= 0) return left + right;
  return adaptive_rec(f, a, m, left, 0.5 * abs_tol, depth - 1) +
         adaptive_rec(f, m, b, right, 0.5 * abs_tol, depth - 1);
}

}  // namespace detail

// Adaptive bisection with a 15-point Gauss kernel, absolute tolerance.
template <class F>
double adaptive_integrate(const F& f, double a, double b, double abs_tol, int max_depth = 48) {
  if (a == b) return 0.0;
  return detail::adaptive_rec(f, a, b, gauss_integrate(f, a, b, 15), abs_tol, max_depth);
}

// Integrates f over [a, b], first splitting at the given points (any order,
// points outside (a, b) ignored) so each piece is smooth.
template <class F>
double integrate_with_splits(const F& f, double a, double b, std::span<const double> splits,
                             double abs_tol) {
  std::vector<double> cuts;
  cuts.push_back(a);
  for (double s : splits)
    if (s > a && s < b) cuts.push_back(s);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  const double piece_tol = abs_tol / double(cuts.size() - 1);
  double acc = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i)
    acc += adaptive_integrate(f, cuts[i], cuts[i + 1], piece_tol);
  return acc;
}

}  // namespace hviheat
