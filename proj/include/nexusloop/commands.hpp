#pragma once

#include <string>

#include "nexusloop/config.hpp"

namespace nexusloop {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reads NEXUSLOOP_THREADS and caps the OpenMP worker count when set.
void apply_thread_cap_from_env();

/// Region map, fold curves and nexus location.
/// Writes map.csv, folds.csv, nexus.json into cfg.run.output_dir.
void cmd_map(const RunConfig& cfg);

/// One tracked loop with entanglement trace.
/// Writes trajectory.csv and summary.json. `with_entanglement` is forced
/// on by the `entangle` alias.
void cmd_loop(const RunConfig& cfg, bool with_entanglement = true);

/// Four direction x start runs; writes report.json and one trajectory
/// CSV per combination.
void cmd_nonrecip(const RunConfig& cfg);

/// Runs every cross-check oracle and writes validation.json.
/// Returns true when all checks pass.
bool cmd_validate(const RunConfig& cfg);

}  // namespace nexusloop
