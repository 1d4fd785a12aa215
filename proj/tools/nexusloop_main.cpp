// Command-line front end: bistability maps, quasi-static loops,
// nonreciprocity reports and the self-validation oracle suite.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nexusloop/commands.hpp"

namespace {

enum ExitCode { kOk = 0, kValidationFail = 1, kConfigError = 2, kNumericalError = 3, kIoError = 4 };

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::string direction;
  std::string start;
  std::string d_mode;
  std::string freq_convention;
  double delta_fluct = std::numeric_limits<double>::quiet_NaN();
  long long seed = -1;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "JSON configuration file");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--direction", o.direction, "cw|ccw")
      ->check(CLI::IsMember({"cw", "ccw"}));
  cmd->add_option("--start", o.start, "upper|lower")->check(CLI::IsMember({"upper", "lower"}));
  cmd->add_option("--delta-fluct", o.delta_fluct, "radius fluctuation delta");
  cmd->add_option("--d-mode", o.d_mode, "paper|exact")->check(CLI::IsMember({"paper", "exact"}));
  cmd->add_option("--freq-convention", o.freq_convention, "angular|times2pi")
      ->check(CLI::IsMember({"angular", "times2pi"}));
}

nexusloop::RunConfig load_config(const CommonOpts& o) {
  std::string text = "{}";
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw nexusloop::IoError("cannot read config file " + o.config_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  nexusloop::RunConfig cfg = nexusloop::parse_config(text);
  if (!o.out_dir.empty()) cfg.run.output_dir = o.out_dir;
  if (o.seed >= 0) cfg.run.seed = static_cast<std::uint64_t>(o.seed);
  if (!o.direction.empty()) cfg.loop.direction = o.direction;
  if (!o.start.empty()) cfg.run.start = o.start;
  if (!o.d_mode.empty()) cfg.run.d_mode = o.d_mode;
  if (!o.freq_convention.empty()) cfg.run.freq_convention = o.freq_convention;
  if (!std::isnan(o.delta_fluct)) cfg.loop.delta_fluct = o.delta_fluct;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dissipative-optomechanics bistability, loop and entanglement simulator"};
  app.require_subcommand(1);

  CommonOpts opts;
  CLI::App* map = app.add_subcommand("map", "classify the control plane, folds and nexus");
  CLI::App* loop = app.add_subcommand("loop", "track one quasi-static loop");
  CLI::App* entangle =
      app.add_subcommand("entangle", "track one loop with the entanglement trace always on");
  CLI::App* nonrecip =
      app.add_subcommand("nonrecip", "run all four direction x start combinations");
  CLI::App* validate = app.add_subcommand("validate", "run the cross-check oracle suite");
  bool sweep = false;
  nonrecip->add_flag("--delta-sweep", sweep, "also run delta = -0.1, 0, +0.1");
  for (CLI::App* c : {map, loop, entangle, nonrecip, validate}) add_common(c, opts);

  CLI11_PARSE(app, argc, argv);
  nexusloop::apply_thread_cap_from_env();

  try {
    nexusloop::RunConfig cfg = load_config(opts);
    if (sweep) cfg.run.delta_sweep = true;
    if (map->parsed()) {
      nexusloop::cmd_map(cfg);
    } else if (loop->parsed()) {
      nexusloop::cmd_loop(cfg);
    } else if (entangle->parsed()) {
      nexusloop::cmd_loop(cfg, true);
    } else if (nonrecip->parsed()) {
      nexusloop::cmd_nonrecip(cfg);
    } else if (validate->parsed()) {
      if (!nexusloop::cmd_validate(cfg)) {
        std::cerr << "validate: at least one check failed (see validation.json)\n";
        return kValidationFail;
      }
    }
  } catch (const nexusloop::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const nexusloop::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumericalError;
  }
  return kOk;
}
