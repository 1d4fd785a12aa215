#pragma once

#include <Eigen/Dense>

#include "nexusloop/model.hpp"
#include "nexusloop/params.hpp"

namespace nexusloop {

using Mat4 = Eigen::Matrix4d;

/// Linearized drift in the quadrature basis (X, Y, q, p), SI units,
/// with the four coupling coefficients cached for inspection.
struct DriftMatrix {
  Mat4 a;
  double u1, u2, v1, v2;
};

DriftMatrix drift_matrix(const PhysicalParams& p, const DerivedParams& dp, const DrivePoint& d,
                         const SteadyState& ss);

enum class DiffusionMode { Diagonal, Exact };
std::string to_string(DiffusionMode m);
DiffusionMode diffusion_mode_from_string(const std::string& s);

/// Symmetrized noise covariance. Diagonal mode keeps only the diagonal
/// entries; Exact mode adds the X-p and Y-p cross terms that arise
/// because the optical input noise also drives the momentum through the
/// dissipative coupling (same white-noise process entering two rows).
struct DiffusionMatrix {
  Mat4 d;
  DiffusionMode mode;
};

DiffusionMatrix diffusion_matrix(const PhysicalParams& p, const DerivedParams& dp,
                                 const SteadyState& ss, DiffusionMode mode);

struct RouthHurwitz {
  double s1, s2, s3;
  bool stable;    // s1 > 0 and s2 > 0 and s3 > 0
  bool marginal;  // min |s_i| within 1e-6 of its own term-magnitude scale
};

/// Stability combinations of the quartic characteristic polynomial,
/// evaluated from the drift coefficients in closed form.
RouthHurwitz routh_hurwitz(const PhysicalParams& p, const DerivedParams& dp, const DrivePoint& d,
                           const SteadyState& ss);

/// Same combinations from raw ingredients (used by tests and sweeps).
RouthHurwitz routh_hurwitz_coeffs(double mass, double omega_m, double gamma, double kappa_eff,
                                  double delta_eff, double u1, double u2, double v1, double v2);

/// Independent stability oracle: characteristic polynomial by the
/// Faddeev-LeVerrier recursion plus the full Hurwitz determinant chain.
/// No eigenvalue solver involved.
bool hurwitz_generic(const Mat4& a);

/// Similarity scaling to dimensionless quadratures with vacuum variance
/// 1/2 on all four entries: S = diag(1, 1, 1/(sqrt2 q_zpf), 1/(sqrt2 p_zpf)).
struct Nondimensional {
  Mat4 a;
  Mat4 d;
};

Nondimensional nondimensionalize(const Mat4& a, const Mat4& d, const DerivedParams& dp);

/// Solve A V + V A^T = -D by the dense 16x16 Kronecker system with
/// partial pivoting; result symmetrized. Throws std::domain_error on an
/// unstable A and std::runtime_error on a (near-)singular system.
Mat4 solve_lyapunov(const Mat4& a, const Mat4& d);

/// Residual ||A V + V A^T + D||_F.
double lyapunov_residual(const Mat4& a, const Mat4& d, const Mat4& v);

struct CovarianceResult {
  Mat4 v;
  double eta_minus;  // smallest partially transposed symplectic eigenvalue
  double e_n;        // logarithmic negativity, >= 0
  double nu_minus;   // smallest symplectic eigenvalue of v itself
};

/// Two-mode Gaussian logarithmic negativity from the 2x2 block form.
/// Expects a symmetric 4x4 covariance in the vacuum-1/2 convention.
CovarianceResult log_negativity(const Mat4& v);

/// Drift, diffusion, Lyapunov and negativity in one call.
/// Throws std::domain_error when the state is not Hurwitz-stable.
CovarianceResult covariance_at(const PhysicalParams& p, const DerivedParams& dp,
                               const DrivePoint& d, const SteadyState& ss, DiffusionMode mode);

}  // namespace nexusloop
