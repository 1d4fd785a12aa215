#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nexusloop/config.hpp"

using namespace nexusloop;

TEST_CASE("empty object yields the full default configuration") {
  const RunConfig cfg = parse_config("{}");
  const PhysicalParams p = cfg.physical_params();
  CHECK(p.mass == doctest::Approx(80e-12));
  CHECK(p.omega_m == doctest::Approx(136e3));  // angular default convention
  CHECK(p.kappa == doctest::Approx(0.1 * p.omega_m));
  CHECK(p.temperature == doctest::Approx(0.5e-3));

  const LoopSpec s = cfg.loop_spec(p);
  CHECK(s.p0 == doctest::Approx(15e-6));
  CHECK(s.a0 == doctest::Approx(15e-6));
  CHECK(s.delta0 == doctest::Approx(0.3 * p.omega_m));
  CHECK(s.b0 == doctest::Approx(0.45 * p.omega_m));
  CHECK(s.theta0 == doctest::Approx(0.28 * std::numbers::pi));
  CHECK(s.n_steps == 256);
  CHECK(cfg.diffusion_mode() == DiffusionMode::Diagonal);
}

TEST_CASE("times2pi convention multiplies the quoted rates") {
  const RunConfig cfg = parse_config(R"({"run": {"freq_convention": "times2pi"}})");
  const PhysicalParams p = cfg.physical_params();
  CHECK(p.omega_m == doctest::Approx(2.0 * std::numbers::pi * 136e3));
  CHECK(p.g_omega == doctest::Approx(2.0 * std::numbers::pi * 196.57e3 / 1e-9));
}

TEST_CASE("unknown keys are rejected by name") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"physical": {"mass_g": 1}})"),
                       doctest::Contains("mass_g"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"turbo": true})"), doctest::Contains("turbo"),
                       ConfigError);
}

TEST_CASE("range errors name the offending key") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"physical": {"temperature_mk": -1}})"),
                       doctest::Contains("temperature_mk"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"loop": {"n_steps": 4}})"),
                       doctest::Contains("n_steps"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"run": {"d_mode": "both"}})"),
                       doctest::Contains("d_mode"), ConfigError);
}

TEST_CASE("malformed documents are config errors") {
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_config("[1,2]"), ConfigError);
}

TEST_CASE("fluctuation configuration") {
  const RunConfig cfg = parse_config(R"({"loop": {"delta_fluct": 0.1}})");
  const PhysicalParams p = cfg.physical_params();
  CHECK(cfg.loop_spec(p).delta_fluct == doctest::Approx(0.1));
}

TEST_CASE("serialize round trip") {
  RunConfig cfg = parse_config(R"({
    "physical": {"temperature_mk": 0.7, "quality": 2e5},
    "loop": {"delta_fluct": -0.05, "direction": "cw", "n_steps": 128},
    "run": {"seed": 42, "d_mode": "exact", "freq_convention": "times2pi"}
  })");
  const RunConfig back = parse_config(serialize(cfg));
  CHECK(back.physical.temperature_mk == cfg.physical.temperature_mk);
  CHECK(back.physical.quality == cfg.physical.quality);
  CHECK(back.loop.delta_fluct == cfg.loop.delta_fluct);
  CHECK(back.loop.direction == cfg.loop.direction);
  CHECK(back.loop.n_steps == cfg.loop.n_steps);
  CHECK(back.run.seed == cfg.run.seed);
  CHECK(back.run.d_mode == cfg.run.d_mode);
  CHECK(back.run.freq_convention == cfg.run.freq_convention);
  // and the serialization is a fixed point
  CHECK(serialize(back) == serialize(cfg));
}
