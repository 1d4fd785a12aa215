#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nexusloop/model.hpp"
#include "nexusloop/params.hpp"
#include "nexusloop/stability.hpp"

namespace nexusloop {

/// Clockwise traverses the control ellipse with decreasing angle.
enum class Direction { Clockwise, CounterClockwise };
std::string to_string(Direction d);
Direction direction_from_string(const std::string& s);

enum class FluctMode { ConstantScale, PerStepUniform };

/// Closed elliptical path in (power, detuning) space:
///   P(theta)  = p0 + a0 (1+delta) cos(theta + theta0), clamped at 0
///   Dc(theta) = delta0 + b0 (1+delta) sin(theta + theta0)
struct LoopSpec {
  double p0;            // center power [W]
  double delta0;        // center detuning [rad/s]
  double a0;            // power radius [W]
  double b0;            // detuning radius [rad/s]
  double theta0;        // initial phase [rad]
  double delta_fluct = 0.0;
  int n_steps = 256;
  Direction direction = Direction::CounterClockwise;
  FluctMode fluct_mode = FluctMode::ConstantScale;
  std::uint64_t seed = 1;
};

/// Loop to scale with the default device: p0 = a0 = 15 uW,
/// delta0 = 0.3 omega_m, b0 = 0.45 omega_m, theta0 = 0.28 pi.
LoopSpec default_loop(const PhysicalParams& p);

/// Control point at angle theta. `step` indexes the per-step uniform
/// radius draw; pass a negative step (default) for constant scaling.
DrivePoint loop_point(const LoopSpec& spec, double theta, long step = -1);

LoopSpec perturbed_spec(const LoopSpec& spec, double delta);

struct TrajectorySample {
  double theta;
  DrivePoint drive;
  SteadyState state;
  std::optional<double> e_n;  // absent where unstable or marginal
};

struct JumpEvent {
  double theta;
  Branch from;
  Branch to;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::vector<JumpEvent> jumps;
  Branch start_branch;
  Branch final_branch;
  Direction direction;
  double delta_fluct;
};

struct StartNotBistableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoStableRootError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Quasi-static continuation around one revolution. At each step the
/// fold-stable root nearest in q_s is followed; losing the tracked root
/// (or exceeding the jump threshold) records a fold jump, localized by
/// bisection in theta down to 2 pi / (64 n_steps).
Trajectory track_branch(const PhysicalParams& p, const DerivedParams& dp, const LoopSpec& spec,
                        Branch start);

/// Fill e_n on every sample whose state is Hurwitz-stable and outside the
/// marginal band; other samples keep an empty marker.
void entanglement_along(const PhysicalParams& p, const DerivedParams& dp, Trajectory& traj,
                        DiffusionMode mode);

struct NonreciprocityReport {
  Trajectory cw_from_upper, cw_from_lower, ccw_from_upper, ccw_from_lower;
  Branch cw_final, ccw_final;
  bool nonreciprocal;
  std::optional<double> e_n_final[4];  // order as the four members above
};

/// Runs the four direction x start combinations and classifies the
/// outcome: nonreciprocal iff finals agree within a direction and differ
/// across directions.
NonreciprocityReport nonreciprocity_report(const PhysicalParams& p, const DerivedParams& dp,
                                           const LoopSpec& spec,
                                           DiffusionMode mode = DiffusionMode::Diagonal);

}  // namespace nexusloop
