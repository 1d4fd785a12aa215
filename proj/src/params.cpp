#include "nexusloop/params.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nexusloop/constants.hpp"

namespace nexusloop {

std::string to_string(FreqConvention c) {
  return c == FreqConvention::Angular ? "angular" : "times2pi";
}

FreqConvention freq_convention_from_string(const std::string& s) {
  if (s == "angular") return FreqConvention::Angular;
  if (s == "times2pi") return FreqConvention::Times2Pi;
  throw std::invalid_argument("unknown freq_convention: " + s);
}

void PhysicalParams::validate() const {
  if (!(mass > 0)) throw std::invalid_argument("mass must be > 0");
  if (!(omega_m > 0)) throw std::invalid_argument("omega_m must be > 0");
  if (!(quality > 0)) throw std::invalid_argument("quality must be > 0");
  if (!(kappa > 0)) throw std::invalid_argument("kappa must be > 0");
  if (!(lambda_drive > 0)) throw std::invalid_argument("lambda_drive must be > 0");
  if (!(temperature >= 0)) throw std::invalid_argument("temperature must be >= 0");
}

PhysicalParams default_device(FreqConvention convention) {
  const double f = convention == FreqConvention::Times2Pi ? 2.0 * std::numbers::pi : 1.0;
  PhysicalParams p;
  p.mass = 80e-12;                 // 80 ng
  p.omega_m = f * 136e3;           // 136 kHz
  p.quality = 5.8e5;
  p.kappa = 0.1 * p.omega_m;
  p.lambda_drive = 1064e-9;
  p.g_omega = f * 196.57e3 / 1e-9; // 196.57 kHz/nm
  p.g_kappa = f * 17.47e3 / 1e-9;  // 17.47 kHz/nm
  p.temperature = 0.5e-3;          // 0.5 mK
  return p;
}

DerivedParams derive_params(const PhysicalParams& p) {
  p.validate();
  DerivedParams dp;
  dp.gamma = p.omega_m / p.quality;
  dp.omega_d = 2.0 * std::numbers::pi * constants::c0 / p.lambda_drive;
  if (p.temperature == 0.0) {
    dp.n_bar = 0.0;
  } else {
    // 1/(exp(x)-1) via expm1 keeps the small-x limit accurate.
    const double x = constants::hbar * p.omega_m / (constants::k_B * p.temperature);
    dp.n_bar = 1.0 / std::expm1(x);
  }
  dp.q_zpf = std::sqrt(constants::hbar / (2.0 * p.mass * p.omega_m));
  dp.p_zpf = std::sqrt(constants::hbar * p.mass * p.omega_m / 2.0);
  return dp;
}

double drive_amplitude(const DrivePoint& d, const DerivedParams& dp) {
  if (d.power < 0) throw std::invalid_argument("drive power must be >= 0");
  return std::sqrt(d.power / (constants::hbar * dp.omega_d));
}

}  // namespace nexusloop
