#include "hviheat/mollifier.hpp"

#include <cmath>
#include <stdexcept>

#include "hviheat/quadrature.hpp"

namespace hviheat::graphs {

MollifierKernel::MollifierKernel(Fn profile, Fn profile_derivative)
    : profile_(std::move(profile)), dprofile_(std::move(profile_derivative)) {
  double raw = adaptive_integrate([this](double x) { return profile_(x); }, -1.0, 1.0, 1e-14);
  if (!(raw > 0.0)) throw std::invalid_argument("mollifier profile must have positive mass");
  scale_ = 1.0 / raw;
}

const MollifierKernel& MollifierKernel::standard_bump() {
  static const MollifierKernel k(
      [](double x) {
        double w = 1.0 - x * x;
        return w > 0.0 ? std::exp(-1.0 / w) : 0.0;
      },
      [](double x) {
        double w = 1.0 - x * x;
        return w > 0.0 ? std::exp(-1.0 / w) * (-2.0 * x / (w * w)) : 0.0;
      });
  return k;
}

double MollifierKernel::value(double x) const {
  if (x <= -1.0 || x >= 1.0) return 0.0;
  return scale_ * profile_(x);
}

double MollifierKernel::derivative(double x) const {
  if (x <= -1.0 || x >= 1.0) return 0.0;
  return scale_ * dprofile_(x);
}

double MollifierKernel::mass(double abs_tol) const {
  return adaptive_integrate([this](double x) { return value(x); }, -1.0, 1.0, abs_tol);
}

namespace {

std::vector<double> kernel_splits(const PiecewiseGraph& g, double eps, double xi) {
  std::vector<double> splits;
  for (double b : g.breakpoints()) {
    double s = (xi - b) / eps;
    if (s > -1.0 && s < 1.0) splits.push_back(s);
  }
  return splits;
}

}  // namespace

double mollify(const PiecewiseGraph& g, const MollifierKernel& k, double eps, double xi) {
  if (!(eps > 0.0)) throw std::invalid_argument("mollify: eps must be positive");
  auto splits = kernel_splits(g, eps, xi);
  return integrate_with_splits(
      [&](double s) { return k.value(s) * g.eval(xi - eps * s); }, -1.0, 1.0, splits, 1e-10);
}

double mollify_derivative(const PiecewiseGraph& g, const MollifierKernel& k, double eps,
                          double xi) {
  if (!(eps > 0.0)) throw std::invalid_argument("mollify_derivative: eps must be positive");
  auto splits = kernel_splits(g, eps, xi);
  double v = integrate_with_splits(
      [&](double s) { return k.derivative(s) * g.eval(xi - eps * s); }, -1.0, 1.0, splits, 1e-10);
  return v / eps;
}

}  // namespace hviheat::graphs
