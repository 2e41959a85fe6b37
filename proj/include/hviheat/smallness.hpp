#pragma once

namespace hviheat::verify {

// Which sublinearity pattern the growth exponents fall into, and whether the
// associated constant restriction (threshold M / (2 sqrt 2), strict) holds.
//   1: theta1, theta2 < 1                 -- unconditional
//   2: theta1 < 1, theta2 = 1             -- needs c2 < M / (2 sqrt 2)
//   3: theta2 < 1, theta1 = 1             -- needs c1 < M / (2 sqrt 2)
//   4: theta1 = theta2 = 1                -- needs c1 + c2 < M / (2 sqrt 2)
enum class SmallnessCase { none = 0, case1 = 1, case2 = 2, case3 = 3, case4 = 4 };

struct SmallnessVerdict {
  SmallnessCase which = SmallnessCase::none;
  bool ok = false;
  double margin = 0.0;     // threshold minus the relevant c-sum; +inf for case 1
  double threshold = 0.0;  // M / (2 sqrt 2)
};

// Throws std::invalid_argument for c <= 0, theta outside [0, 1], or M <= 0.
SmallnessVerdict smallness_check(double theta1, double theta2, double c1, double c2, double M);

}  // namespace hviheat::verify
