#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nexusloop/model.hpp"
#include "nexusloop/params.hpp"

namespace nexusloop {

struct CellClass {
  int real_roots = 0;
  int branch_stable = 0;  // fold-stable physical roots
  int rh_stable = 0;      // full Routh-Hurwitz stable physical roots
  int unphysical = 0;
  // |q| of the labelled roots, NaN where absent
  double q_low, q_mid, q_high;
};

CellClass classify_point(const PhysicalParams& p, const DerivedParams& dp, const DrivePoint& d);

struct FoldPoint {
  double power;
  double detuning;
};

struct NexusPoint {
  double power;
  double detuning;
  double tolerance;  // achieved detuning-localization half width
};

struct RegionMap {
  std::vector<double> p_axis;      // [W]
  std::vector<double> delta_axis;  // [rad/s]
  std::vector<CellClass> cells;    // row-major, delta index fastest
  std::vector<FoldPoint> fold_points;
  std::optional<NexusPoint> nexus;

  const CellClass& at(std::size_t ip, std::size_t id) const {
    return cells[ip * delta_axis.size() + id];
  }
};

/// Classify a grid over [p_min, p_max] x [delta_min, delta_max] and
/// refine fold points along grid edges by bisection on the cubic
/// discriminant. Cells are independent; `parallel` switches between the
/// serial reference and the OpenMP kernel (identical output).
RegionMap scan_region(const PhysicalParams& p, const DerivedParams& dp, double p_min, double p_max,
                      double delta_min, double delta_max, int n_p, int n_delta,
                      bool parallel = true);

/// Cubic family over a two-parameter control plane.
using CubicFamily = std::function<Cubic(double a, double b)>;

struct NoCuspError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MultipleTongueError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Locate the closure point of the three-real-root tongue: the first
/// coordinate interval with positive discriminant shrinks to zero width
/// as the second coordinate is bisected toward the cusp. Throws
/// NoCuspError / MultipleTongueError when the box topology is wrong.
NexusPoint locate_cusp(const CubicFamily& family, double a_min, double a_max, double b_min,
                       double b_max, int scan_resolution = 512);

/// locate_cusp over the physical steady-state cubic in (power, detuning).
NexusPoint locate_nexus(const PhysicalParams& p, const DerivedParams& dp, double p_min,
                        double p_max, double delta_min, double delta_max);

/// Winding number of a closed polyline around (x0, y0); coordinates are
/// rescaled by the loop's extent per axis before angle accumulation.
int winding_number(const std::vector<std::pair<double, double>>& loop, double x0, double y0);

}  // namespace nexusloop
