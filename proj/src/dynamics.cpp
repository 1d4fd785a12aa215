#include "nexusloop/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "nexusloop/constants.hpp"

namespace nexusloop {

using constants::hbar;

MeanFieldDeriv mean_field_rhs(const PhysicalParams& p, const DerivedParams& dp,
                              const DrivePoint& d, const MeanFieldState& s) {
  const double kq = p.kappa + p.g_kappa * s.q;
  if (kq <= 0) throw std::domain_error("mean_field_rhs: kappa(q) <= 0");
  const double eps = drive_amplitude(d, dp);
  MeanFieldDeriv out;
  out.dc = -std::complex<double>(kq / 2.0, d.detuning + p.g_omega * s.q) * s.c +
           std::sqrt(kq) * eps;
  out.dq = s.p / p.mass;
  out.dp = -p.mass * p.omega_m * p.omega_m * s.q - hbar * p.g_omega * std::norm(s.c) -
           (hbar * p.g_kappa * eps / std::sqrt(p.kappa)) * s.c.imag() - dp.gamma * s.p;
  return out;
}

MeanFieldTrace integrate_mean_field(const PhysicalParams& p, const DerivedParams& dp,
                                    const DriveSchedule& schedule, const MeanFieldState& init,
                                    double dt, double t_total, int sample_stride) {
  if (dt > 0.05 / std::max(p.kappa, p.omega_m))
    throw std::invalid_argument("integrate_mean_field: dt too large for the fastest rate");
  if (dt <= 0 || t_total <= 0)
    throw std::invalid_argument("integrate_mean_field: dt and t_total must be > 0");

  auto add = [](const MeanFieldState& s, const MeanFieldDeriv& k, double h) {
    MeanFieldState out = s;
    out.c += h * k.dc;
    out.q += h * k.dq;
    out.p += h * k.dp;
    return out;
  };

  MeanFieldTrace trace;
  MeanFieldState s = init;
  const long n = static_cast<long>(std::ceil(t_total / dt));
  for (long i = 0; i < n; ++i) {
    const double t = i * dt;
    const DrivePoint d1 = schedule(t);
    const DrivePoint d2 = schedule(t + dt / 2.0);
    const DrivePoint d3 = schedule(t + dt);
    const MeanFieldDeriv k1 = mean_field_rhs(p, dp, d1, s);
    const MeanFieldDeriv k2 = mean_field_rhs(p, dp, d2, add(s, k1, dt / 2.0));
    const MeanFieldDeriv k3 = mean_field_rhs(p, dp, d2, add(s, k2, dt / 2.0));
    const MeanFieldDeriv k4 = mean_field_rhs(p, dp, d3, add(s, k3, dt));
    s.c += dt / 6.0 * (k1.dc + 2.0 * (k2.dc + k3.dc) + k4.dc);
    s.q += dt / 6.0 * (k1.dq + 2.0 * (k2.dq + k3.dq) + k4.dq);
    s.p += dt / 6.0 * (k1.dp + 2.0 * (k2.dp + k3.dp) + k4.dp);
    s.t = (i + 1) * dt;
    if (!std::isfinite(s.q) || !std::isfinite(s.p) || !std::isfinite(std::norm(s.c)))
      throw std::runtime_error("integrate_mean_field: state diverged");
    if (sample_stride > 0 && (i + 1) % sample_stride == 0) trace.samples.push_back(s);
  }
  trace.final = s;
  return trace;
}

DynamicLoopResult quasi_static_loop_dynamic(const PhysicalParams& p, const DerivedParams& dp,
                                            const LoopSpec& spec, Branch init_branch,
                                            double t_total, double dt) {
  const double sgn = spec.direction == Direction::CounterClockwise ? 1.0 : -1.0;
  const double two_pi = 2.0 * std::numbers::pi;

  const DrivePoint d0 = loop_point(spec, 0.0);
  const auto states = steady_states(p, dp, d0);
  const SteadyState* start = nullptr;
  for (const auto& ss : states)
    if (ss.physical && ss.branch_stable && ss.branch == init_branch) start = &ss;
  if (!start)
    throw StartNotBistableError("quasi_static_loop_dynamic: start branch not present");

  MeanFieldState init;
  init.c = start->c_s;
  init.q = start->q_s;
  init.p = 0.0;

  if (dt <= 0) dt = 0.04 / std::max(p.kappa, p.omega_m);
  DriveSchedule schedule = [&](double t) {
    return loop_point(spec, sgn * two_pi * std::min(t / t_total, 1.0));
  };
  const long stride = std::max(1L, static_cast<long>(t_total / dt / 2048));
  MeanFieldTrace tr =
      integrate_mean_field(p, dp, schedule, init, dt, t_total, static_cast<int>(stride));

  DynamicLoopResult res;
  res.final_state = tr.final;
  res.trace = std::move(tr.samples);

  const auto closing = steady_states(p, dp, loop_point(spec, sgn * two_pi));
  const SteadyState* best = nullptr;
  for (const auto& ss : closing) {
    if (!ss.physical || !ss.branch_stable) continue;
    if (!best || std::abs(ss.q_s - tr.final.q) < std::abs(best->q_s - tr.final.q)) best = &ss;
  }
  if (!best) throw NoStableRootError("quasi_static_loop_dynamic: no stable root at closing point");
  res.final_branch = best->branch;
  return res;
}

namespace {

struct GaussianStream {
  std::mt19937_64 gen;
  double spare = 0;
  bool has_spare = false;

  explicit GaussianStream(std::uint64_t seed) : gen(seed) {}

  double uniform() {
    // 53-bit mantissa in (0,1); the +0.5 offset avoids an exact zero.
    return ((gen() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare) {
      has_spare = false;
      return spare;
    }
    const double u = uniform();
    const double v = uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double a = 2.0 * std::numbers::pi * v;
    spare = r * std::sin(a);
    has_spare = true;
    return r * std::cos(a);
  }
};

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Second-moment accumulation for one trajectory. Predictor-corrector
// (Heun) drift with additive noise: weak second order, and the
// oscillatory mechanical pair stays stable as long as the slowest
// damping exceeds (|lambda| dt)^4 / 4 per step.
Mat4 run_trajectory(const Mat4& a, const Eigen::Matrix<double, 4, 3>& loading, double dt,
                    long n_steps, long burn_steps, int stride, std::uint64_t seed, long* count) {
  GaussianStream rng(seed);
  Eigen::Vector4d u = Eigen::Vector4d::Zero();
  const double sdt = std::sqrt(dt);
  Mat4 acc = Mat4::Zero();
  long n = 0;
  for (long i = 0; i < n_steps; ++i) {
    Eigen::Vector3d z(rng.normal(), rng.normal(), rng.normal());
    const Eigen::Vector4d noise = sdt * (loading * z);
    const Eigen::Vector4d k1 = a * u;
    const Eigen::Vector4d predictor = u + dt * k1 + noise;
    u += 0.5 * dt * (k1 + a * predictor) + noise;
    if (i >= burn_steps && (i - burn_steps) % stride == 0) {
      acc += u * u.transpose();
      ++n;
    }
  }
  *count = n;
  return acc;
}

}  // namespace

McEstimate stochastic_covariance_raw(const Mat4& a, const Eigen::Matrix<double, 4, 3>& loading,
                                     double dt, double t_total, long n_traj, std::uint64_t seed,
                                     int sample_stride, double burn_in, bool parallel) {
  if (n_traj < 1) throw std::invalid_argument("stochastic_covariance: n_traj must be >= 1");
  McEstimate est;
  est.n_traj = n_traj;
  est.t_total = t_total;
  est.dt = dt;
  est.seed = seed;

  const long n_steps = static_cast<long>(std::ceil(t_total / dt));
  const long burn_steps = std::min<long>(static_cast<long>(burn_in / dt), n_steps - 1);
  const int stride = std::max(1, sample_stride);

  std::vector<Mat4> acc(n_traj);
  std::vector<long> counts(n_traj);
#pragma omp parallel for schedule(static) if (parallel)
  for (long k = 0; k < n_traj; ++k) {
    acc[k] = run_trajectory(a, loading, dt, n_steps, burn_steps, stride,
                            mix64(seed ^ mix64(static_cast<std::uint64_t>(k) + 1)), &counts[k]);
  }

  // Fixed-order reduction keeps the estimate identical for any thread count.
  std::vector<Mat4> traj_mean(n_traj);
  Mat4 total = Mat4::Zero();
  long total_n = 0;
  for (long k = 0; k < n_traj; ++k) {
    traj_mean[k] = counts[k] > 0 ? Mat4((acc[k] / static_cast<double>(counts[k]))) : Mat4::Zero();
    total += acc[k];
    total_n += counts[k];
  }
  if (total_n == 0) throw std::runtime_error("stochastic_covariance: no samples after burn-in");
  est.v_hat = total / static_cast<double>(total_n);

  // Batch-means standard error: trajectories grouped into 16 batches.
  const int n_batches = static_cast<int>(std::min<long>(16, n_traj));
  std::vector<Mat4> batch(n_batches, Mat4::Zero());
  std::vector<int> bcount(n_batches, 0);
  for (long k = 0; k < n_traj; ++k) {
    const int b = static_cast<int>(k % n_batches);
    batch[b] += traj_mean[k];
    ++bcount[b];
  }
  for (int b = 0; b < n_batches; ++b)
    if (bcount[b] > 0) batch[b] /= static_cast<double>(bcount[b]);
  Mat4 var = Mat4::Zero();
  for (int b = 0; b < n_batches; ++b) {
    const Mat4 dev = batch[b] - est.v_hat;
    var += dev.cwiseProduct(dev);
  }
  if (n_batches > 1)
    est.stderr_ = (var / (n_batches * (n_batches - 1.0))).cwiseSqrt();

  for (int i = 0; i < 4; ++i) {
    const double v = std::abs(est.v_hat(i, i));
    if (v > 0 && est.stderr_(i, i) / v > 0.20) est.insufficient = true;
  }
  return est;
}

Eigen::Matrix<double, 4, 3> noise_loading(const PhysicalParams& p, const DerivedParams& dp,
                                          const SteadyState& ss, DiffusionMode mode) {
  if (!ss.physical) throw std::domain_error("noise_loading: unphysical steady state");
  const double keff = ss.kappa_eff;
  const double half = std::sqrt(0.5);
  Eigen::Matrix<double, 4, 3> l = Eigen::Matrix<double, 4, 3>::Zero();
  // columns: X_in, Y_in, thermal force; input quadratures carry
  // symmetrized variance 1/2 per unit time.
  l(0, 0) = std::sqrt(keff) * half;
  l(1, 1) = std::sqrt(keff) * half;
  const double s2p = std::sqrt(2.0) * dp.p_zpf;
  const double thermal = dp.gamma * (2.0 * dp.n_bar + 1.0);
  if (mode == DiffusionMode::Exact) {
    const double pref = hbar * p.g_kappa / std::sqrt(2.0 * p.kappa);
    l(3, 0) = (-pref * ss.c_s.imag() / s2p) * half;
    l(3, 1) = (pref * ss.c_s.real() / s2p) * half;
    l(3, 2) = std::sqrt(thermal);
  } else {
    // diagonal mode folds the dissipative backaction into one white force
    const double backaction =
        hbar * hbar * p.g_kappa * p.g_kappa * std::norm(ss.c_s) / (4.0 * p.kappa) /
        (2.0 * dp.p_zpf * dp.p_zpf);
    l(3, 2) = std::sqrt(thermal + backaction);
  }
  return l;
}

McEstimate stochastic_covariance(const PhysicalParams& p, const DerivedParams& dp,
                                 const DrivePoint& d, const SteadyState& ss, DiffusionMode mode,
                                 long n_traj, std::uint64_t seed, double t_total, bool parallel) {
  const DriftMatrix a = drift_matrix(p, dp, d, ss);
  const DiffusionMatrix dm = diffusion_matrix(p, dp, ss, mode);
  const Nondimensional nd = nondimensionalize(a.a, dm.d, dp);
  if (!hurwitz_generic(nd.a)) throw std::domain_error("stochastic_covariance: unstable drift");

  Eigen::EigenSolver<Mat4> es(nd.a);
  double slowest = std::numeric_limits<double>::infinity();
  double fastest_abs = 0;
  for (int i = 0; i < 4; ++i) {
    const double re = std::abs(es.eigenvalues()(i).real());
    slowest = std::min(slowest, re);
    fastest_abs = std::max(fastest_abs, std::abs(es.eigenvalues()(i)));
  }
  const double rate_max = std::max({p.omega_m, std::abs(ss.delta_eff), ss.kappa_eff, fastest_abs,
                                    std::abs(nd.a(0, 2)), std::abs(nd.a(1, 2)),
                                    std::abs(nd.a(3, 0)), std::abs(nd.a(3, 1))});
  const double dt = 0.02 / rate_max;
  const double burn_in = 10.0 / slowest;
  if (t_total <= 0) t_total = burn_in + 20.0 / slowest;
  if (t_total <= burn_in) t_total = burn_in * 2.0;
  const int stride = std::max(1, static_cast<int>((1.0 / ss.kappa_eff) / dt));
  return stochastic_covariance_raw(nd.a, noise_loading(p, dp, ss, mode), dt, t_total, n_traj,
                                   seed, stride, burn_in, parallel);
}

}  // namespace nexusloop
