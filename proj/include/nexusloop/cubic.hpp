#pragma once

#include <array>
#include <vector>

namespace nexusloop {

/// Coefficients of d1 x^3 + d2 x^2 + d3 x + d4.
struct Cubic {
  double d1 = 0, d2 = 0, d3 = 0, d4 = 0;

  double eval(double x) const { return ((d1 * x + d2) * x + d3) * x + d4; }
  double deriv(double x) const { return (3.0 * d1 * x + 2.0 * d2) * x + d3; }
};

/// Real roots in ascending order (1-3 entries). Three-real-root
/// configurations use the trigonometric closed form, the single-root
/// regime the depressed-cubic formula; every root gets two Newton
/// polish steps. A leading coefficient below 1e-12 relative to the
/// largest coefficient falls back to the quadratic/linear solve.
/// Throws std::invalid_argument when all coefficients vanish.
std::vector<double> solve_cubic(const Cubic& c);

/// Discriminant of the cubic; > 0 iff three distinct real roots.
double cubic_discriminant(const Cubic& c);

/// |discriminant| normalized by the sum of the absolute values of its
/// five terms; used to flag marginal (near-fold) configurations.
double cubic_discriminant_normalized(const Cubic& c);

}  // namespace nexusloop
