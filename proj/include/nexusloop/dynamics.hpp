#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "nexusloop/loop.hpp"
#include "nexusloop/model.hpp"
#include "nexusloop/params.hpp"
#include "nexusloop/stability.hpp"

namespace nexusloop {

struct MeanFieldState {
  std::complex<double> c{0, 0};  // cavity amplitude
  double q = 0;                  // displacement [m]
  double p = 0;                  // momentum [kg m/s]
  double t = 0;                  // time [s]
};

struct MeanFieldDeriv {
  std::complex<double> dc;
  double dq;
  double dp;
};

/// Deterministic part of the nonlinear equations of motion (noise off,
/// input field replaced by the coherent drive amplitude).
MeanFieldDeriv mean_field_rhs(const PhysicalParams& p, const DerivedParams& dp,
                              const DrivePoint& d, const MeanFieldState& s);

using DriveSchedule = std::function<DrivePoint(double t)>;

struct MeanFieldTrace {
  MeanFieldState final;
  std::vector<MeanFieldState> samples;
};

/// Fixed-step classical RK4. Requires dt <= 0.05 / max(kappa, omega_m);
/// throws std::invalid_argument otherwise and std::runtime_error on
/// state blow-up.
MeanFieldTrace integrate_mean_field(const PhysicalParams& p, const DerivedParams& dp,
                                    const DriveSchedule& schedule, const MeanFieldState& init,
                                    double dt, double t_total, int sample_stride = 0);

struct DynamicLoopResult {
  Branch final_branch;
  MeanFieldState final_state;
  std::vector<MeanFieldState> trace;
};

/// Integrate the mean field around the loop with theta linear in time,
/// starting on the requested branch; classify the final state by the
/// nearest fold-stable root at the closing drive point.
DynamicLoopResult quasi_static_loop_dynamic(const PhysicalParams& p, const DerivedParams& dp,
                                            const LoopSpec& spec, Branch init_branch,
                                            double t_total, double dt = 0.0);

struct McEstimate {
  Mat4 v_hat = Mat4::Zero();
  Mat4 stderr_ = Mat4::Zero();
  long n_traj = 0;
  double t_total = 0;
  double dt = 0;
  std::uint64_t seed = 0;
  bool insufficient = false;  // relative stderr above 20% somewhere on the diagonal
};

/// Stationary covariance of du = A u dt + L dW (3 independent Wiener
/// components) by a stochastic Euler scheme whose mechanical update is
/// symplectic: the displacement row advances with the freshly updated
/// momentum. Stationary second moments are accumulated after a burn-in
/// of 10 slowest-mode relaxation times; per-trajectory streams make the
/// result independent of the thread count, bit for bit.
McEstimate stochastic_covariance_raw(const Mat4& a, const Eigen::Matrix<double, 4, 3>& loading,
                                     double dt, double t_total, long n_traj, std::uint64_t seed,
                                     int sample_stride, double burn_in, bool parallel = true);

/// Noise loading of the nondimensionalized fluctuation system for the
/// given steady state and diffusion mode; loading * loading^T equals the
/// nondimensionalized diffusion matrix.
Eigen::Matrix<double, 4, 3> noise_loading(const PhysicalParams& p, const DerivedParams& dp,
                                          const SteadyState& ss, DiffusionMode mode);

/// Monte Carlo estimate for a physical steady state. Step size, burn-in
/// and sampling stride are derived from the drift spectrum; throws
/// std::domain_error when the state is unstable.
McEstimate stochastic_covariance(const PhysicalParams& p, const DerivedParams& dp,
                                 const DrivePoint& d, const SteadyState& ss, DiffusionMode mode,
                                 long n_traj, std::uint64_t seed, double t_total = 0.0,
                                 bool parallel = true);

}  // namespace nexusloop
