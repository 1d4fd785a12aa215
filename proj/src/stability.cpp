#include "nexusloop/stability.hpp"

#include <cmath>
#include <stdexcept>

#include "nexusloop/constants.hpp"

namespace nexusloop {

using constants::hbar;
using constants::k_B;

std::string to_string(DiffusionMode m) {
  return m == DiffusionMode::Diagonal ? "paper" : "exact";
}

DiffusionMode diffusion_mode_from_string(const std::string& s) {
  if (s == "paper" || s == "diagonal") return DiffusionMode::Diagonal;
  if (s == "exact") return DiffusionMode::Exact;
  throw std::invalid_argument("unknown d_mode: " + s);
}

DriftMatrix drift_matrix(const PhysicalParams& p, const DerivedParams& dp, const DrivePoint& d,
                         const SteadyState& ss) {
  if (!ss.physical) throw std::domain_error("drift_matrix: unphysical steady state");
  const double eps = drive_amplitude(d, dp);
  const double keff = ss.kappa_eff, deff = ss.delta_eff;
  const double re = ss.c_s.real(), im = ss.c_s.imag();
  const double s2 = std::sqrt(2.0);

  DriftMatrix m;
  m.u1 = -(p.g_kappa / s2) * re + p.g_kappa * eps / std::sqrt(2.0 * keff) + s2 * p.g_omega * im;
  m.u2 = -(p.g_kappa / s2) * im - s2 * p.g_omega * re;
  m.v1 = -hbar * p.g_omega * s2 * re;
  m.v2 = -hbar * p.g_omega * s2 * im - hbar * p.g_kappa * eps / std::sqrt(2.0 * p.kappa);

  m.a.setZero();
  m.a(0, 0) = -keff / 2.0;
  m.a(0, 1) = deff;
  m.a(0, 2) = m.u1;
  m.a(1, 0) = -deff;
  m.a(1, 1) = -keff / 2.0;
  m.a(1, 2) = m.u2;
  m.a(2, 3) = 1.0 / p.mass;
  m.a(3, 0) = m.v1;
  m.a(3, 1) = m.v2;
  m.a(3, 2) = -p.mass * p.omega_m * p.omega_m;
  m.a(3, 3) = -dp.gamma;
  return m;
}

DiffusionMatrix diffusion_matrix(const PhysicalParams& p, const DerivedParams& dp,
                                 const SteadyState& ss, DiffusionMode mode) {
  if (!ss.physical) throw std::domain_error("diffusion_matrix: unphysical steady state");
  DiffusionMatrix dm;
  dm.mode = mode;
  dm.d.setZero();
  const double keff = ss.kappa_eff;
  const double thermal = hbar * p.mass * p.omega_m * dp.gamma * (2.0 * dp.n_bar + 1.0);
  const double backaction = hbar * hbar * p.g_kappa * p.g_kappa * std::norm(ss.c_s) / (4.0 * p.kappa);
  dm.d(0, 0) = keff / 2.0;
  dm.d(1, 1) = keff / 2.0;
  dm.d(3, 3) = thermal + backaction;
  if (mode == DiffusionMode::Exact) {
    // Momentum row of the noise vector carries alpha X_in + beta Y_in;
    // the optical rows carry sqrt(keff) X_in, sqrt(keff) Y_in. With
    // <X_in X_in>_sym = 1/2 the symmetrized cross terms follow.
    const double pref = hbar * p.g_kappa / std::sqrt(2.0 * p.kappa);
    const double alpha = -pref * ss.c_s.imag();
    const double beta = pref * ss.c_s.real();
    dm.d(0, 3) = dm.d(3, 0) = std::sqrt(keff) * alpha / 2.0;
    dm.d(1, 3) = dm.d(3, 1) = std::sqrt(keff) * beta / 2.0;
  }
  return dm;
}

RouthHurwitz routh_hurwitz_coeffs(double mass, double omega_m, double gamma, double kappa_eff,
                                  double delta_eff, double u1, double u2, double v1, double v2) {
  const double wm2 = omega_m * omega_m;
  const double k = kappa_eff, de = delta_eff, g = gamma, m = mass;
  const double uv = u1 * v1 + u2 * v2;
  const double w = u1 * v2 - u2 * v1;

  // s1 is the constant coefficient of the characteristic quartic, s2 the
  // second Hurwitz determinant, s3 the third. s1's first term is
  // wm^2 (k/2)^2; together with a1 = g + k > 0 the three conditions are
  // exactly the Hurwitz chain for the quartic.
  const double s1 = wm2 * (k / 2.0) * (k / 2.0) + wm2 * de * de + de * w / m - (k / 2.0) * uv / m;
  const double s1_scale = wm2 * (k / 2.0) * (k / 2.0) + wm2 * de * de + std::abs(de * w / m) +
                          std::abs((k / 2.0) * uv / m);

  const double s2 = g * g * k + de * de * k + k * k * k / 4.0 + g * (k * k + wm2) + uv / m;
  const double s2_scale = g * g * k + de * de * k + k * k * k / 4.0 + g * (k * k + wm2) +
                          std::abs(uv / m);

  const double a3 = g * (de * de + k * k / 4.0) + k * wm2 - uv / m;
  const double t1 = (g + k) * (g * k + de * de + k * k / 4.0 + wm2) * a3;
  const double t2 = a3 * a3;
  const double t3 = ((g + k) * (g + k) / (4.0 * m)) *
                    (m * wm2 * (4.0 * de * de + k * k) + u1 * (4.0 * de * v2 - 2.0 * k * v1) -
                     2.0 * u2 * (2.0 * de * v1 + k * v2));
  const double s3 = t1 - t2 - t3;
  const double s3_scale = std::abs(t1) + std::abs(t2) + std::abs(t3);

  RouthHurwitz r;
  r.s1 = s1;
  r.s2 = s2;
  r.s3 = s3;
  r.stable = s1 > 0.0 && s2 > 0.0 && s3 > 0.0;
  const double m1 = s1_scale > 0 ? std::abs(s1) / s1_scale : 1.0;
  const double m2 = s2_scale > 0 ? std::abs(s2) / s2_scale : 1.0;
  const double m3 = s3_scale > 0 ? std::abs(s3) / s3_scale : 1.0;
  r.marginal = std::min({m1, m2, m3}) < 1e-6;
  return r;
}

RouthHurwitz routh_hurwitz(const PhysicalParams& p, const DerivedParams& dp, const DrivePoint& d,
                           const SteadyState& ss) {
  const DriftMatrix m = drift_matrix(p, dp, d, ss);
  return routh_hurwitz_coeffs(p.mass, p.omega_m, dp.gamma, ss.kappa_eff, ss.delta_eff, m.u1, m.u2,
                              m.v1, m.v2);
}

bool hurwitz_generic(const Mat4& a) {
  // Characteristic polynomial lambda^4 + c1 l^3 + c2 l^2 + c3 l + c4 via
  // Faddeev-LeVerrier.
  Mat4 m = a;
  const double c1 = -m.trace();
  Mat4 m2 = a * (m + c1 * Mat4::Identity());
  const double c2 = -m2.trace() / 2.0;
  Mat4 m3 = a * (m2 + c2 * Mat4::Identity());
  const double c3 = -m3.trace() / 3.0;
  Mat4 m4 = a * (m3 + c3 * Mat4::Identity());
  const double c4 = -m4.trace() / 4.0;

  const double h2 = c1 * c2 - c3;
  const double h3 = c3 * h2 - c1 * c1 * c4;
  return c1 > 0.0 && h2 > 0.0 && h3 > 0.0 && c4 > 0.0;
}

Nondimensional nondimensionalize(const Mat4& a, const Mat4& d, const DerivedParams& dp) {
  const double s2 = std::sqrt(2.0);
  Eigen::Vector4d s(1.0, 1.0, 1.0 / (s2 * dp.q_zpf), 1.0 / (s2 * dp.p_zpf));
  Eigen::Vector4d si = s.cwiseInverse();
  Nondimensional n;
  n.a = s.asDiagonal() * a * si.asDiagonal();
  n.d = s.asDiagonal() * d * s.asDiagonal();
  return n;
}

Mat4 solve_lyapunov(const Mat4& a, const Mat4& d) {
  if (!hurwitz_generic(a)) throw std::domain_error("solve_lyapunov: drift matrix not stable");
  // (I (x) A + A (x) I) vec(V) = -vec(D), column-major vec.
  Eigen::Matrix<double, 16, 16> k = Eigen::Matrix<double, 16, 16>::Zero();
  for (int col = 0; col < 4; ++col)
    for (int row = 0; row < 4; ++row)
      for (int rr = 0; rr < 4; ++rr)
        k(4 * col + row, 4 * col + rr) += a(row, rr);  // I (x) A
  for (int col = 0; col < 4; ++col)
    for (int cc = 0; cc < 4; ++cc)
      for (int row = 0; row < 4; ++row)
        k(4 * col + row, 4 * cc + row) += a(col, cc);  // A (x) I

  Eigen::Matrix<double, 16, 1> rhs;
  for (int col = 0; col < 4; ++col)
    for (int row = 0; row < 4; ++row) rhs(4 * col + row) = -d(row, col);

  Eigen::PartialPivLU<Eigen::Matrix<double, 16, 16>> lu(k);
  if (lu.rcond() < 1e-14) throw std::runtime_error("solve_lyapunov: near-singular system");
  Eigen::Matrix<double, 16, 1> x = lu.solve(rhs);

  Mat4 v;
  for (int col = 0; col < 4; ++col)
    for (int row = 0; row < 4; ++row) v(row, col) = x(4 * col + row);
  v = ((v + v.transpose()) / 2.0).eval();
  return v;
}

double lyapunov_residual(const Mat4& a, const Mat4& d, const Mat4& v) {
  return (a * v + v * a.transpose() + d).norm();
}

namespace {

double det2(const Mat4& v, int r, int c) {
  return v(r, c) * v(r + 1, c + 1) - v(r, c + 1) * v(r + 1, c);
}

}  // namespace

CovarianceResult log_negativity(const Mat4& v) {
  CovarianceResult res;
  res.v = v;
  const double det_a = det2(v, 0, 0);
  const double det_b = det2(v, 2, 2);
  const double det_c = v(0, 2) * v(1, 3) - v(0, 3) * v(1, 2);
  const double det_v = v.determinant();

  auto sympl_min = [&](double sigma) {
    double inner = sigma * sigma - 4.0 * det_v;
    const double tol = 1e-9 * std::max(1.0, sigma * sigma);
    if (inner < -tol) throw std::runtime_error("log_negativity: inconsistent covariance");
    if (inner < 0.0) inner = 0.0;
    double arg = (sigma - std::sqrt(inner)) / 2.0;
    if (arg < 0.0) {
      if (arg < -tol) throw std::runtime_error("log_negativity: negative symplectic eigenvalue");
      arg = 0.0;
    }
    return std::sqrt(arg);
  };

  res.eta_minus = sympl_min(det_a + det_b - 2.0 * det_c);
  res.nu_minus = sympl_min(det_a + det_b + 2.0 * det_c);
  res.e_n = std::max(0.0, -std::log(2.0 * res.eta_minus));
  return res;
}

CovarianceResult covariance_at(const PhysicalParams& p, const DerivedParams& dp,
                               const DrivePoint& d, const SteadyState& ss, DiffusionMode mode) {
  const DriftMatrix a = drift_matrix(p, dp, d, ss);
  const DiffusionMatrix dd = diffusion_matrix(p, dp, ss, mode);
  const Nondimensional nd = nondimensionalize(a.a, dd.d, dp);
  const Mat4 v = solve_lyapunov(nd.a, nd.d);
  return log_negativity(v);
}

}  // namespace nexusloop
