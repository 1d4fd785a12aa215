#pragma once

#include <cstdint>
#include <string>

#include "nexusloop/loop.hpp"
#include "nexusloop/params.hpp"
#include "nexusloop/stability.hpp"

namespace nexusloop {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raw configuration with unit-suffixed keys; defaults reproduce the
/// reference device and loop. Unknown keys are rejected at parse time,
/// range violations name the offending key.
struct RunConfig {
  struct Physical {
    double mass_ng = 80.0;
    double omega_m_khz = 136.0;
    double kappa_over_omega_m = 0.1;
    double lambda_nm = 1064.0;
    double g_omega_khz_per_nm = 196.57;
    double g_kappa_khz_per_nm = 17.47;
    double temperature_mk = 0.5;
    double quality = 5.8e5;
  } physical;

  struct Loop {
    double p0_uw = 15.0;
    double delta0_over_omega_m = 0.3;
    double a0_uw = 15.0;
    double b0_over_omega_m = 0.45;
    double theta0_over_pi = 0.28;
    double delta_fluct = 0.0;
    int n_steps = 256;
    std::string direction = "ccw";
    std::string fluct_mode = "constant";  // constant | per-step-uniform
  } loop;

  struct Run {
    std::uint64_t seed = 1;
    std::string output_dir = ".";
    std::string d_mode = "paper";  // paper | exact
    std::string freq_convention = "angular";
    // command-specific knobs
    int map_resolution = 64;
    double map_margin = 0.2;      // box margin relative to the loop extent
    long mc_n_traj = 200;
    double mc_t_total = 0.0;      // 0 = automatic from the drift spectrum
    double dynamic_t_total = 0.6; // mean-field loop duration [s]
    bool delta_sweep = false;     // nonrecip: also run delta = -0.1, +0.1
    std::string start = "upper";  // loop: starting branch
  } run;

  FreqConvention convention() const;
  PhysicalParams physical_params() const;
  LoopSpec loop_spec(const PhysicalParams& p) const;
  DiffusionMode diffusion_mode() const;
};

/// Parse a JSON document; missing keys take defaults, unknown keys are
/// errors, out-of-range values name the key.
RunConfig parse_config(const std::string& text);

std::string serialize(const RunConfig& cfg);

}  // namespace nexusloop
