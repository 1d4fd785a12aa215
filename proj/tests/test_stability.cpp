#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nexusloop/loop.hpp"
#include "nexusloop/stability.hpp"

using namespace nexusloop;

namespace {

struct Setup {
  PhysicalParams p = default_device(FreqConvention::Angular);
  DerivedParams dp = derive_params(p);
  LoopSpec spec = default_loop(p);
};

SteadyState state_at(const Setup& s, double theta, Branch b) {
  const DrivePoint d = loop_point(s.spec, theta);
  for (const auto& ss : steady_states(s.p, s.dp, d))
    if (ss.branch == b) return ss;
  throw std::runtime_error("branch not found");
}

}  // namespace

TEST_CASE("drift matrix structure") {
  Setup s;
  const DrivePoint d = loop_point(s.spec, 0.0);
  const SteadyState ss = steady_states(s.p, s.dp, d)[2];
  const DriftMatrix m = drift_matrix(s.p, s.dp, d, ss);

  CHECK(m.a(0, 3) == 0.0);
  CHECK(m.a(1, 3) == 0.0);
  CHECK(m.a(2, 0) == 0.0);
  CHECK(m.a(2, 1) == 0.0);
  CHECK(m.a(2, 2) == 0.0);
  CHECK(m.a(2, 3) == doctest::Approx(1.0 / s.p.mass).epsilon(1e-15));
  CHECK(m.a.trace() == doctest::Approx(-ss.kappa_eff - s.dp.gamma).epsilon(1e-12));
}

TEST_CASE("drift matrix uncoupled limits") {
  Setup s;
  // no drive: all coupling coefficients vanish except the direct drive term
  PhysicalParams p0 = s.p;
  p0.g_omega = 0.0;
  p0.g_kappa = 0.0;
  const DrivePoint d{15e-6, 0.3 * p0.omega_m};
  const auto states = steady_states(p0, s.dp, d);
  const DriftMatrix m = drift_matrix(p0, s.dp, d, states[0]);
  CHECK(m.u1 == 0.0);
  CHECK(m.u2 == 0.0);
  CHECK(m.v1 == 0.0);
  CHECK(m.v2 == 0.0);
  // block diagonal: optical rows do not see the mechanics
  CHECK(m.a(0, 2) == 0.0);
  CHECK(m.a(1, 2) == 0.0);
  CHECK(m.a(3, 0) == 0.0);
  CHECK(m.a(3, 1) == 0.0);
}

TEST_CASE("routh-hurwitz on the decoupled system") {
  const RouthHurwitz r = routh_hurwitz_coeffs(8e-11, 1.36e5, 0.23, 1.36e4, 8.8e4, 0, 0, 0, 0);
  CHECK(r.stable);
  CHECK(r.s1 > 0);
  CHECK(r.s2 > 0);
  CHECK(r.s3 > 0);
}

TEST_CASE("generic hurwitz oracle") {
  Mat4 a = -Mat4::Identity();
  CHECK(hurwitz_generic(a));
  a(3, 3) = 1e-3;
  CHECK_FALSE(hurwitz_generic(a));

  // rotation + weak damping is stable
  Mat4 b = Mat4::Zero();
  b(0, 0) = -0.1; b(0, 1) = 5.0;
  b(1, 0) = -5.0; b(1, 1) = -0.1;
  b(2, 2) = -1.0;
  b(3, 3) = -2.0;
  CHECK(hurwitz_generic(b));
}

TEST_CASE("closed-form conditions agree with the generic oracle along the loop") {
  Setup s;
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int tested = 0;
  for (int i = 0; i < 300; ++i) {
    const double theta = 2.0 * std::numbers::pi * u(gen);
    const double jitter = 0.8 + 0.4 * u(gen);
    LoopSpec spec = s.spec;
    spec.a0 *= jitter;
    spec.b0 *= jitter;
    const DrivePoint d = loop_point(spec, theta);
    for (const auto& ss : steady_states(s.p, s.dp, d)) {
      if (!ss.physical || ss.marginal) continue;
      const DriftMatrix m = drift_matrix(s.p, s.dp, d, ss);
      CHECK(hurwitz_generic(m.a) == ss.stable);
      ++tested;
    }
  }
  CHECK(tested > 300);
}

TEST_CASE("diffusion matrix") {
  Setup s;
  // g_kappa = 0 at zero temperature: diag(kappa/2, kappa/2, 0, hbar m wm gamma)
  PhysicalParams p0 = s.p;
  p0.g_kappa = 0.0;
  p0.temperature = 0.0;
  const DerivedParams dp0 = derive_params(p0);
  const DrivePoint d{15e-6, 0.3 * p0.omega_m};
  const auto states = steady_states(p0, dp0, d);
  const DiffusionMatrix dm = diffusion_matrix(p0, dp0, states[0], DiffusionMode::Diagonal);
  CHECK(dm.d(0, 0) == doctest::Approx(states[0].kappa_eff / 2.0));
  CHECK(dm.d(1, 1) == doctest::Approx(states[0].kappa_eff / 2.0));
  CHECK(dm.d(2, 2) == 0.0);
  CHECK(dm.d(3, 3) ==
        doctest::Approx(1.054571817e-34 * p0.mass * p0.omega_m * dp0.gamma).epsilon(1e-12));

  // exact mode equals diagonal mode when g_kappa = 0
  const DiffusionMatrix de = diffusion_matrix(p0, dp0, states[0], DiffusionMode::Exact);
  CHECK((de.d - dm.d).norm() == 0.0);

  // with dissipative coupling the exact mode gains X-p and Y-p terms
  const DrivePoint dl = loop_point(s.spec, 0.0);
  const auto full = steady_states(s.p, s.dp, dl);
  const DiffusionMatrix dx = diffusion_matrix(s.p, s.dp, full[2], DiffusionMode::Exact);
  CHECK(dx.d(0, 3) != 0.0);
  CHECK(dx.d(1, 3) != 0.0);
  CHECK(dx.d(0, 3) == dx.d(3, 0));
  // and stays positive semidefinite
  Eigen::SelfAdjointEigenSolver<Mat4> es(dx.d);
  CHECK(es.eigenvalues().minCoeff() >= -1e-30);
}

TEST_CASE("nondimensionalization") {
  Setup s;
  const DrivePoint d = loop_point(s.spec, 0.0);
  const SteadyState ss = steady_states(s.p, s.dp, d)[2];
  const DriftMatrix m = drift_matrix(s.p, s.dp, d, ss);
  const DiffusionMatrix dm = diffusion_matrix(s.p, s.dp, ss, DiffusionMode::Diagonal);

  const Nondimensional nd = nondimensionalize(m.a, dm.d, s.dp);
  // applying the inverse scaling recovers the original to 1e-14
  const double sq = std::sqrt(2.0) * s.dp.q_zpf;
  const double sp = std::sqrt(2.0) * s.dp.p_zpf;
  Eigen::Vector4d si(1.0, 1.0, sq, sp);
  Mat4 back = si.asDiagonal() * nd.a * si.cwiseInverse().asDiagonal();
  CHECK((back - m.a).norm() <= 1e-14 * m.a.norm());

  // mechanical rows become omega_m in the dimensionless system
  CHECK(nd.a(2, 3) == doctest::Approx(s.p.omega_m).epsilon(1e-12));
  CHECK(nd.a(3, 2) == doctest::Approx(-s.p.omega_m).epsilon(1e-12));
}

TEST_CASE("uncoupled stationary covariance is the thermal state") {
  Setup s;
  PhysicalParams p0 = s.p;
  p0.g_omega = 0.0;
  p0.g_kappa = 0.0;
  const DerivedParams dp0 = derive_params(p0);
  const DrivePoint d{15e-6, 0.3 * p0.omega_m};
  const SteadyState ss = steady_states(p0, dp0, d)[0];
  const CovarianceResult cov = covariance_at(p0, dp0, d, ss, DiffusionMode::Diagonal);

  // optical block: vacuum at 1/2; mechanical block: n_bar + 1/2
  CHECK(cov.v(0, 0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(cov.v(1, 1) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(cov.v(2, 2) == doctest::Approx(dp0.n_bar + 0.5).epsilon(1e-9));
  CHECK(cov.v(3, 3) == doctest::Approx(dp0.n_bar + 0.5).epsilon(1e-9));
  // zero coupling: no cross block, no entanglement
  CHECK(std::abs(cov.v(0, 2)) < 1e-12);
  CHECK(cov.e_n == 0.0);
}

TEST_CASE("lyapunov trivial solutions") {
  Mat4 a = -0.5 * Mat4::Identity();
  Mat4 d = Mat4::Identity();
  Mat4 v = solve_lyapunov(a, d);
  CHECK((v - Mat4::Identity()).norm() < 1e-12);

  Eigen::Vector4d diag_a(-1, -2, -3, -4);
  Eigen::Vector4d diag_d(2, 4, 6, 8);
  v = solve_lyapunov(Mat4(diag_a.asDiagonal()), Mat4(diag_d.asDiagonal()));
  CHECK((v - Mat4::Identity()).norm() < 1e-12);

  Mat4 unstable = Mat4::Identity();
  CHECK_THROWS_AS(solve_lyapunov(unstable, d), std::domain_error);
}

TEST_CASE("lyapunov residual bound at a physical state") {
  Setup s;
  const DrivePoint d = loop_point(s.spec, 0.0);
  const SteadyState ss = steady_states(s.p, s.dp, d)[2];
  const DriftMatrix m = drift_matrix(s.p, s.dp, d, ss);
  const DiffusionMatrix dm = diffusion_matrix(s.p, s.dp, ss, DiffusionMode::Diagonal);
  const Nondimensional nd = nondimensionalize(m.a, dm.d, s.dp);
  const Mat4 v = solve_lyapunov(nd.a, nd.d);
  CHECK(lyapunov_residual(nd.a, nd.d, v) < 1e-10 * nd.d.norm());
}

TEST_CASE("logarithmic negativity analytic cases") {
  // vacuum
  Mat4 vac = 0.5 * Mat4::Identity();
  const CovarianceResult v0 = log_negativity(vac);
  CHECK(v0.e_n == 0.0);
  CHECK(v0.eta_minus == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(v0.nu_minus == doctest::Approx(0.5).epsilon(1e-14));

  // two-mode squeezed vacuum with r = 0.5: E_N = 2r exactly
  const double r = 0.5;
  Mat4 tm = Mat4::Zero();
  const double ch = std::cosh(2.0 * r) / 2.0, sh = std::sinh(2.0 * r) / 2.0;
  tm(0, 0) = tm(1, 1) = tm(2, 2) = tm(3, 3) = ch;
  tm(0, 2) = tm(2, 0) = sh;
  tm(1, 3) = tm(3, 1) = -sh;
  const CovarianceResult tmsv = log_negativity(tm);
  CHECK(tmsv.e_n == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(tmsv.eta_minus == doctest::Approx(std::exp(-1.0) / 2.0).epsilon(1e-9));
  // pure state: nu_minus is the vacuum value; the determinant combination
  // cancels exactly there, so only ~sqrt(eps) digits survive
  CHECK(tmsv.nu_minus == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("negativity symmetry under mode exchange") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n(0.0, 0.3);
  for (int t = 0; t < 50; ++t) {
    Mat4 g;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) g(i, j) = n(gen);
    Mat4 v = 0.5 * Mat4::Identity() + (g * g.transpose());
    Mat4 sw;
    sw.setZero();
    sw(0, 2) = sw(1, 3) = sw(2, 0) = sw(3, 1) = 1.0;  // exchange the two modes
    Mat4 v2 = sw * v * sw.transpose();
    CHECK(log_negativity(v).e_n == doctest::Approx(log_negativity(v2).e_n).epsilon(1e-10));
  }
}

TEST_CASE("physicality and entanglement on the stable bistable branch") {
  Setup s;
  // theta = 1.8 pi: both outer branches exist and the strongly displaced
  // one is Hurwitz-stable there
  const SteadyState up = state_at(s, 1.8 * std::numbers::pi, Branch::Upper);
  REQUIRE(up.stable);
  const DrivePoint d = loop_point(s.spec, 1.8 * std::numbers::pi);
  const CovarianceResult cov = covariance_at(s.p, s.dp, d, up, DiffusionMode::Diagonal);
  CHECK(cov.nu_minus >= 0.5 - 1e-9);
  CHECK(cov.e_n >= 0.0);

  const CovarianceResult cove = covariance_at(s.p, s.dp, d, up, DiffusionMode::Exact);
  CHECK(cove.nu_minus >= 0.5 - 1e-9);
}

TEST_CASE("entanglement decreases monotonically with temperature") {
  Setup s;
  const double theta = 1.8 * std::numbers::pi;
  const DrivePoint d = loop_point(s.spec, theta);
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 10; ++i) {
    PhysicalParams pt = s.p;
    pt.temperature = 5e-3 * i / 10.0;
    const DerivedParams dpt = derive_params(pt);
    const auto states = steady_states(pt, dpt, d);
    const SteadyState* up = nullptr;
    for (const auto& ss : states)
      if (ss.branch == Branch::Upper) up = &ss;
    REQUIRE(up != nullptr);
    REQUIRE(up->stable);
    const double en = covariance_at(pt, dpt, d, *up, DiffusionMode::Diagonal).e_n;
    CHECK(en <= prev + 1e-12);
    prev = en;
  }
}
