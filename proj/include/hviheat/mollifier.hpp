#pragma once

#include <functional>

#include "hviheat/piecewise.hpp"

namespace hviheat::graphs {

// Smooth nonnegative kernel supported in [-1, 1], rescaled to unit mass at
// construction (numerical quadrature, tolerance 1e-12).
class MollifierKernel {
public:
  using Fn = std::function<double(double)>;

  MollifierKernel(Fn profile, Fn profile_derivative);

  // exp(-1/(1-x^2)) on (-1, 1), the usual bump.
  static const MollifierKernel& standard_bump();

  double value(double x) const;       // zero for |x| >= 1
  double derivative(double x) const;  // of the normalized profile
  double mass(double abs_tol = 1e-13) const;  // re-integrated, ~1

private:
  Fn profile_;
  Fn dprofile_;
  double scale_ = 1.0;
};

// Convolution (p_eps * g)(xi) with p_eps(x) = p(x/eps)/eps. The integration
// window is split at every breakpoint preimage; absolute quadrature error
// <= 1e-10. Throws std::invalid_argument for eps <= 0.
double mollify(const PiecewiseGraph& g, const MollifierKernel& k, double eps, double xi);

// d/dxi of the above, by differentiating the kernel under the integral.
double mollify_derivative(const PiecewiseGraph& g, const MollifierKernel& k, double eps,
                          double xi);

}  // namespace hviheat::graphs
