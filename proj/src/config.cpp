#include "nexusloop/config.hpp"

#include <cmath>
#include <numbers>

#include <json.hpp>

namespace nexusloop {

using nlohmann::json;

namespace {

void check_known_keys(const json& j, const char* section,
                      std::initializer_list<const char*> known) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) ok = true;
    if (!ok)
      throw ConfigError(std::string("unknown key \"") + it.key() + "\" in section " + section);
  }
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(std::string("bad value type for key ") + key);
    }
  }
}

void require_range(bool ok, const char* key) {
  if (!ok) throw ConfigError(std::string("value out of range for key ") + key);
}

}  // namespace

FreqConvention RunConfig::convention() const {
  return freq_convention_from_string(run.freq_convention);
}

PhysicalParams RunConfig::physical_params() const {
  const double f = convention() == FreqConvention::Times2Pi ? 2.0 * std::numbers::pi : 1.0;
  PhysicalParams p;
  p.mass = physical.mass_ng * 1e-12;
  p.omega_m = f * physical.omega_m_khz * 1e3;
  p.quality = physical.quality;
  p.kappa = physical.kappa_over_omega_m * p.omega_m;
  p.lambda_drive = physical.lambda_nm * 1e-9;
  p.g_omega = f * physical.g_omega_khz_per_nm * 1e3 / 1e-9;
  p.g_kappa = f * physical.g_kappa_khz_per_nm * 1e3 / 1e-9;
  p.temperature = physical.temperature_mk * 1e-3;
  p.validate();
  return p;
}

LoopSpec RunConfig::loop_spec(const PhysicalParams& p) const {
  LoopSpec s;
  s.p0 = loop.p0_uw * 1e-6;
  s.a0 = loop.a0_uw * 1e-6;
  s.delta0 = loop.delta0_over_omega_m * p.omega_m;
  s.b0 = loop.b0_over_omega_m * p.omega_m;
  s.theta0 = loop.theta0_over_pi * std::numbers::pi;
  s.delta_fluct = loop.delta_fluct;
  s.n_steps = loop.n_steps;
  s.direction = direction_from_string(loop.direction);
  s.fluct_mode =
      loop.fluct_mode == "per-step-uniform" ? FluctMode::PerStepUniform : FluctMode::ConstantScale;
  s.seed = run.seed;
  return s;
}

DiffusionMode RunConfig::diffusion_mode() const {
  return diffusion_mode_from_string(run.d_mode);
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  check_known_keys(j, "root", {"physical", "loop", "run"});

  RunConfig cfg;
  if (j.contains("physical")) {
    const json& p = j.at("physical");
    check_known_keys(p, "physical",
                     {"mass_ng", "omega_m_khz", "kappa_over_omega_m", "lambda_nm",
                      "g_omega_khz_per_nm", "g_kappa_khz_per_nm", "temperature_mk", "quality"});
    get_if(p, "mass_ng", cfg.physical.mass_ng);
    get_if(p, "omega_m_khz", cfg.physical.omega_m_khz);
    get_if(p, "kappa_over_omega_m", cfg.physical.kappa_over_omega_m);
    get_if(p, "lambda_nm", cfg.physical.lambda_nm);
    get_if(p, "g_omega_khz_per_nm", cfg.physical.g_omega_khz_per_nm);
    get_if(p, "g_kappa_khz_per_nm", cfg.physical.g_kappa_khz_per_nm);
    get_if(p, "temperature_mk", cfg.physical.temperature_mk);
    get_if(p, "quality", cfg.physical.quality);
  }
  if (j.contains("loop")) {
    const json& l = j.at("loop");
    check_known_keys(l, "loop",
                     {"p0_uw", "delta0_over_omega_m", "a0_uw", "b0_over_omega_m", "theta0_over_pi",
                      "delta_fluct", "n_steps", "direction", "fluct_mode"});
    get_if(l, "p0_uw", cfg.loop.p0_uw);
    get_if(l, "delta0_over_omega_m", cfg.loop.delta0_over_omega_m);
    get_if(l, "a0_uw", cfg.loop.a0_uw);
    get_if(l, "b0_over_omega_m", cfg.loop.b0_over_omega_m);
    get_if(l, "theta0_over_pi", cfg.loop.theta0_over_pi);
    get_if(l, "delta_fluct", cfg.loop.delta_fluct);
    get_if(l, "n_steps", cfg.loop.n_steps);
    get_if(l, "direction", cfg.loop.direction);
    get_if(l, "fluct_mode", cfg.loop.fluct_mode);
  }
  if (j.contains("run")) {
    const json& r = j.at("run");
    check_known_keys(r, "run",
                     {"seed", "output_dir", "d_mode", "freq_convention", "map_resolution",
                      "map_margin", "mc_n_traj", "mc_t_total", "dynamic_t_total", "delta_sweep",
                      "start"});
    get_if(r, "seed", cfg.run.seed);
    get_if(r, "output_dir", cfg.run.output_dir);
    get_if(r, "d_mode", cfg.run.d_mode);
    get_if(r, "freq_convention", cfg.run.freq_convention);
    get_if(r, "map_resolution", cfg.run.map_resolution);
    get_if(r, "map_margin", cfg.run.map_margin);
    get_if(r, "mc_n_traj", cfg.run.mc_n_traj);
    get_if(r, "mc_t_total", cfg.run.mc_t_total);
    get_if(r, "dynamic_t_total", cfg.run.dynamic_t_total);
    get_if(r, "delta_sweep", cfg.run.delta_sweep);
    get_if(r, "start", cfg.run.start);
  }

  require_range(cfg.physical.mass_ng > 0, "mass_ng");
  require_range(cfg.physical.omega_m_khz > 0, "omega_m_khz");
  require_range(cfg.physical.kappa_over_omega_m > 0, "kappa_over_omega_m");
  require_range(cfg.physical.lambda_nm > 0, "lambda_nm");
  require_range(cfg.physical.temperature_mk >= 0, "temperature_mk");
  require_range(cfg.physical.quality > 0, "quality");
  require_range(cfg.loop.p0_uw >= 0, "p0_uw");
  require_range(cfg.loop.n_steps >= 16, "n_steps");
  require_range(cfg.run.map_resolution >= 1, "map_resolution");
  require_range(cfg.run.mc_n_traj >= 1, "mc_n_traj");
  require_range(cfg.run.dynamic_t_total > 0, "dynamic_t_total");
  if (cfg.loop.direction != "cw" && cfg.loop.direction != "ccw")
    throw ConfigError("value out of range for key direction (cw|ccw)");
  if (cfg.loop.fluct_mode != "constant" && cfg.loop.fluct_mode != "per-step-uniform")
    throw ConfigError("value out of range for key fluct_mode");
  if (cfg.run.d_mode != "paper" && cfg.run.d_mode != "exact")
    throw ConfigError("value out of range for key d_mode (paper|exact)");
  if (cfg.run.freq_convention != "angular" && cfg.run.freq_convention != "times2pi")
    throw ConfigError("value out of range for key freq_convention (angular|times2pi)");
  if (cfg.run.start != "upper" && cfg.run.start != "lower")
    throw ConfigError("value out of range for key start (upper|lower)");
  return cfg;
}

std::string serialize(const RunConfig& cfg) {
  json j;
  j["physical"] = {{"mass_ng", cfg.physical.mass_ng},
                   {"omega_m_khz", cfg.physical.omega_m_khz},
                   {"kappa_over_omega_m", cfg.physical.kappa_over_omega_m},
                   {"lambda_nm", cfg.physical.lambda_nm},
                   {"g_omega_khz_per_nm", cfg.physical.g_omega_khz_per_nm},
                   {"g_kappa_khz_per_nm", cfg.physical.g_kappa_khz_per_nm},
                   {"temperature_mk", cfg.physical.temperature_mk},
                   {"quality", cfg.physical.quality}};
  j["loop"] = {{"p0_uw", cfg.loop.p0_uw},
               {"delta0_over_omega_m", cfg.loop.delta0_over_omega_m},
               {"a0_uw", cfg.loop.a0_uw},
               {"b0_over_omega_m", cfg.loop.b0_over_omega_m},
               {"theta0_over_pi", cfg.loop.theta0_over_pi},
               {"delta_fluct", cfg.loop.delta_fluct},
               {"n_steps", cfg.loop.n_steps},
               {"direction", cfg.loop.direction},
               {"fluct_mode", cfg.loop.fluct_mode}};
  j["run"] = {{"seed", cfg.run.seed},
              {"output_dir", cfg.run.output_dir},
              {"d_mode", cfg.run.d_mode},
              {"freq_convention", cfg.run.freq_convention},
              {"map_resolution", cfg.run.map_resolution},
              {"map_margin", cfg.run.map_margin},
              {"mc_n_traj", cfg.run.mc_n_traj},
              {"mc_t_total", cfg.run.mc_t_total},
              {"dynamic_t_total", cfg.run.dynamic_t_total},
              {"delta_sweep", cfg.run.delta_sweep},
              {"start", cfg.run.start}};
  return j.dump(2) + "\n";
}

}  // namespace nexusloop
