#include "hviheat/smallness.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hviheat::verify {

SmallnessVerdict smallness_check(double theta1, double theta2, double c1, double c2, double M) {
  if (!(c1 > 0.0) || !(c2 > 0.0))
    throw std::invalid_argument("smallness_check: growth constants must be positive");
  if (!(theta1 >= 0.0 && theta1 <= 1.0) || !(theta2 >= 0.0 && theta2 <= 1.0))
    throw std::invalid_argument("smallness_check: growth exponents must lie in [0, 1]");
  if (!(M > 0.0)) throw std::invalid_argument("smallness_check: coercivity constant must be positive");

  SmallnessVerdict v;
  v.threshold = M / (2.0 * std::sqrt(2.0));
  const bool lin1 = theta1 == 1.0, lin2 = theta2 == 1.0;
  if (!lin1 && !lin2) {
    v.which = SmallnessCase::case1;
    v.ok = true;
    v.margin = std::numeric_limits<double>::infinity();
  } else if (!lin1 && lin2) {
    v.which = SmallnessCase::case2;
    v.margin = v.threshold - c2;
    v.ok = c2 < v.threshold;
  } else if (lin1 && !lin2) {
    v.which = SmallnessCase::case3;
    v.margin = v.threshold - c1;
    v.ok = c1 < v.threshold;
  } else {
    v.which = SmallnessCase::case4;
    v.margin = v.threshold - (c1 + c2);
    v.ok = (c1 + c2) < v.threshold;
  }
  return v;
}

}  // namespace hviheat::verify
