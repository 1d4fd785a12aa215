#pragma once

namespace nexusloop::constants {

// CODATA 2018
inline constexpr double hbar = 1.054571817e-34;  // J s
inline constexpr double k_B = 1.380649e-23;      // J/K
inline constexpr double c0 = 299792458.0;        // m/s

}  // namespace nexusloop::constants
