#pragma once

#include <array>
#include <complex>
#include <vector>

#include "nexusloop/cubic.hpp"
#include "nexusloop/params.hpp"

namespace nexusloop {

enum class Branch { Upper, Lower, Middle, Mono };
std::string to_string(Branch b);

struct EffectiveRates {
  double kappa_eff;  // kappa + g_kappa * q [rad/s]
  double delta_eff;  // detuning + g_omega * q [rad/s]
  bool physical;     // kappa_eff > 0
};

EffectiveRates effective_rates(const PhysicalParams& p, const DrivePoint& d, double q_s);

/// Intracavity amplitude sqrt(kappa_eff) eps / (kappa_eff/2 + i delta_eff).
/// Throws std::domain_error when kappa_eff <= 0.
std::complex<double> cavity_amplitude(const PhysicalParams& p, const DerivedParams& dp,
                                      const DrivePoint& d, double q_s);

/// Coefficients of the displacement self-consistency cubic, SI units.
Cubic cubic_coefficients(const PhysicalParams& p, const DerivedParams& dp, const DrivePoint& d);

/// One semiclassical solution of the force-balance cubic.
struct SteadyState {
  double q_s = 0;                      // displacement [m]
  std::complex<double> c_s{0, 0};      // cavity amplitude [sqrt(photon)]
  double kappa_eff = 0;
  double delta_eff = 0;
  std::array<double, 3> rh{0, 0, 0};   // Routh-Hurwitz combinations s1..s3
  bool stable = false;                 // full Routh-Hurwitz verdict
  bool branch_stable = false;          // static (fold) criterion: s1 > 0
  bool physical = false;               // kappa_eff > 0
  bool marginal = false;               // within the marginal stability band
  double guard_ratio = 0;              // |g_kappa q_s| / kappa; linearization guard
  Branch branch = Branch::Mono;
};

/// All real roots with rates, amplitude, stability verdicts and branch
/// labels. Unphysical roots (kappa_eff <= 0) are kept, flagged, and
/// excluded from branch labelling. Branch labels rank the physical
/// fold-stable roots by |q_s|: largest -> Upper, smallest -> Lower,
/// fold-unstable root -> Middle; a single fold-stable root -> Mono.
std::vector<SteadyState> steady_states(const PhysicalParams& p, const DerivedParams& dp,
                                       const DrivePoint& d);

/// Self-consistency map q -> Q(q) of the exact steady-state relation
/// (square root of the displacement-dependent decay kept unexpanded).
double fixed_point_map(const PhysicalParams& p, const DerivedParams& dp, const DrivePoint& d,
                       double q);

/// fixed_point_map(q) - q [m]; the independent oracle residual.
double fixed_point_residual(const PhysicalParams& p, const DerivedParams& dp,
                            const DrivePoint& d, double q);

struct FixedPointResult {
  double q = 0;
  bool converged = false;
  int iterations = 0;
};

/// Damped iteration q <- (1-damping) q + damping Q(q).
FixedPointResult fixed_point_solve(const PhysicalParams& p, const DerivedParams& dp,
                                   const DrivePoint& d, double seed, double damping = 0.5,
                                   double tol = 1e-12, int max_iter = 10000);

/// Bisection on the residual around a seed root; robust where the damped
/// iteration is repelled. Returns converged=false when no sign change
/// brackets the seed.
FixedPointResult fixed_point_bisect(const PhysicalParams& p, const DerivedParams& dp,
                                    const DrivePoint& d, double seed, double half_width);

}  // namespace nexusloop
