#include "nexusloop/cubic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nexusloop {

namespace {

void newton_polish(const Cubic& c, double& x) {
  for (int i = 0; i < 2; ++i) {
    const double f = c.eval(x);
    const double fp = c.deriv(x);
    if (fp == 0.0) return;
    const double step = f / fp;
    if (!std::isfinite(step)) return;
    x -= step;
  }
}

std::vector<double> solve_quadratic(double a, double b, double c) {
  if (a == 0.0) {
    if (b == 0.0) return {};  // constant; caller handles
    return {-c / b};
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return {};
  const double s = std::sqrt(disc);
  // Citardauq form avoids cancellation.
  const double q = -0.5 * (b + std::copysign(s, b));
  std::vector<double> r;
  r.push_back(q / a);
  if (q != 0.0) r.push_back(c / q);
  else r.push_back(0.0);
  std::sort(r.begin(), r.end());
  if (r.size() == 2 && r[0] == r[1]) r.pop_back();
  return r;
}

}  // namespace

std::vector<double> solve_cubic(const Cubic& c) {
  const double scale = std::max({std::abs(c.d1), std::abs(c.d2), std::abs(c.d3), std::abs(c.d4)});
  if (scale == 0.0) throw std::invalid_argument("solve_cubic: all coefficients zero");

  if (std::abs(c.d1) < 1e-12 * scale) {
    if (std::abs(c.d2) < 1e-12 * scale) {
      if (std::abs(c.d3) < 1e-12 * scale) return {};  // degenerate constant
      return {-c.d4 / c.d3};
    }
    return solve_quadratic(c.d2, c.d3, c.d4);
  }

  const double A = c.d2 / c.d1;
  const double B = c.d3 / c.d1;
  const double C = c.d4 / c.d1;
  // Depressed form t^3 + p t + q, x = t - A/3.
  const double p = B - A * A / 3.0;
  const double q = 2.0 * A * A * A / 27.0 - A * B / 3.0 + C;

  std::vector<double> roots;
  const double disc = -4.0 * p * p * p - 27.0 * q * q;
  if (disc > 0.0 && p < 0.0) {
    // Three real roots: 2 sqrt(-p/3) cos((phi + 2 k pi)/3) - A/3.
    const double r = std::sqrt(-p / 3.0);
    double arg = 3.0 * q / (2.0 * p * r);
    arg = std::clamp(arg, -1.0, 1.0);
    const double phi = std::acos(arg);
    for (int k = 0; k < 3; ++k) {
      roots.push_back(2.0 * r * std::cos((phi + 2.0 * std::numbers::pi * k) / 3.0) - A / 3.0);
    }
  } else {
    // One real root via the stable Cardano branch.
    double t;
    if (p == 0.0) {
      t = std::cbrt(-q);
    } else {
      const double half_q = q / 2.0;
      const double inner = half_q * half_q + p * p * p / 27.0;
      if (inner >= 0.0) {
        const double s = std::sqrt(inner);
        const double u = std::cbrt(-half_q + s);
        const double v = std::cbrt(-half_q - s);
        t = u + v;
      } else {
        // Numerically in the three-root region after all; use trig form.
        const double r = std::sqrt(-p / 3.0);
        double arg = std::clamp(3.0 * q / (2.0 * p * r), -1.0, 1.0);
        t = 2.0 * r * std::cos(std::acos(arg) / 3.0);
      }
    }
    roots.push_back(t - A / 3.0);
  }

  for (double& x : roots) newton_polish(c, x);
  std::sort(roots.begin(), roots.end());
  return roots;
}

double cubic_discriminant(const Cubic& c) {
  const double a = c.d1, b = c.d2, cc = c.d3, d = c.d4;
  return 18.0 * a * b * cc * d - 4.0 * b * b * b * d + b * b * cc * cc -
         4.0 * a * cc * cc * cc - 27.0 * a * a * d * d;
}

double cubic_discriminant_normalized(const Cubic& c) {
  const double a = c.d1, b = c.d2, cc = c.d3, d = c.d4;
  const double mag = std::abs(18.0 * a * b * cc * d) + std::abs(4.0 * b * b * b * d) +
                     std::abs(b * b * cc * cc) + std::abs(4.0 * a * cc * cc * cc) +
                     std::abs(27.0 * a * a * d * d);
  if (mag == 0.0) return 0.0;
  return cubic_discriminant(c) / mag;
}

}  // namespace nexusloop
