#pragma once

#include <string>

namespace nexusloop {

/// How quoted device frequencies (kHz, kHz/nm) map to angular rates.
/// Angular: quoted values are already rad/s. Times2Pi: multiply by 2*pi.
enum class FreqConvention { Angular, Times2Pi };

std::string to_string(FreqConvention c);
FreqConvention freq_convention_from_string(const std::string& s);

/// Fixed device constants, all SI with angular rates.
struct PhysicalParams {
  double mass;         // kg
  double omega_m;      // mechanical angular frequency [rad/s]
  double quality;      // mechanical quality factor
  double kappa;        // bare cavity energy decay [rad/s]
  double lambda_drive; // drive wavelength [m]
  double g_omega;      // dispersive coupling [rad/s per m]
  double g_kappa;      // dissipative coupling [rad/s per m]
  double temperature;  // bath temperature [K]

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// Membrane-in-cavity device the simulations default to.
PhysicalParams default_device(FreqConvention convention);

struct DerivedParams {
  double gamma;    // mechanical damping omega_m/quality [rad/s]
  double omega_d;  // drive angular frequency 2 pi c0 / lambda [rad/s]
  double n_bar;    // thermal occupancy
  double q_zpf;    // zero-point displacement [m]
  double p_zpf;    // zero-point momentum [kg m/s]
};

DerivedParams derive_params(const PhysicalParams& p);

/// Instantaneous control pair.
struct DrivePoint {
  double power;    // input power [W], >= 0
  double detuning; // bare cavity-drive detuning [rad/s]
};

/// Drive amplitude sqrt(P / (hbar omega_d)) [s^-1/2].
double drive_amplitude(const DrivePoint& d, const DerivedParams& dp);

}  // namespace nexusloop
