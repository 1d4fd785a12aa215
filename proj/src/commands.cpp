#include "nexusloop/commands.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "nexusloop/dynamics.hpp"
#include "nexusloop/map.hpp"

namespace nexusloop {

using nlohmann::json;
namespace fs = std::filesystem;

void apply_thread_cap_from_env() {
#ifdef _OPENMP
  if (const char* env = std::getenv("NEXUSLOOP_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
#endif
}

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_out(const RunConfig& cfg, const std::string& name) {
  fs::path dir(cfg.run.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path path = dir / name;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void write_json(const RunConfig& cfg, const std::string& name, const json& j) {
  auto out = open_out(cfg, name);
  out << j.dump(2) << "\n";
}

std::vector<std::pair<double, double>> loop_polyline(const LoopSpec& spec, int n = 512) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    const DrivePoint d = loop_point(spec, 2.0 * std::numbers::pi * i / n);
    pts.emplace_back(d.power, d.detuning);
  }
  return pts;
}

void write_trajectory_csv(const RunConfig& cfg, const std::string& name, const Trajectory& traj) {
  auto out = open_out(cfg, name);
  out << "theta_rad,power_w,detuning_rad_s,qs_m,abs_qs_m,kappa_eff,delta_eff,branch,stable,e_n\n";
  for (const auto& s : traj.samples) {
    out << fmt17(s.theta) << ',' << fmt17(s.drive.power) << ',' << fmt17(s.drive.detuning) << ','
        << fmt17(s.state.q_s) << ',' << fmt17(std::abs(s.state.q_s)) << ','
        << fmt17(s.state.kappa_eff) << ',' << fmt17(s.state.delta_eff) << ','
        << to_string(s.state.branch) << ',' << (s.state.stable ? "true" : "false") << ','
        << (s.e_n ? fmt17(*s.e_n) : "") << "\n";
  }
}

json jumps_json(const Trajectory& traj) {
  json arr = json::array();
  for (const auto& j : traj.jumps)
    arr.push_back({{"theta_rad", j.theta}, {"from", to_string(j.from)}, {"to", to_string(j.to)}});
  return arr;
}

json summary_json(const Trajectory& traj) {
  json j;
  j["start_branch"] = to_string(traj.start_branch);
  j["final_branch"] = to_string(traj.final_branch);
  j["jumps"] = jumps_json(traj);
  if (traj.samples.back().e_n)
    j["e_n_final"] = *traj.samples.back().e_n;
  else
    j["e_n_final"] = nullptr;
  j["direction"] = to_string(traj.direction);
  j["delta_fluct"] = traj.delta_fluct;
  return j;
}

}  // namespace

void cmd_map(const RunConfig& cfg) {
  const PhysicalParams p = cfg.physical_params();
  const DerivedParams dp = derive_params(p);
  const LoopSpec spec = cfg.loop_spec(p);

  // bounding box of the loop plus the configured margin
  const double m = cfg.run.map_margin;
  const double p_lo = std::max(0.0, spec.p0 - spec.a0 * (1.0 + m));
  const double p_hi = spec.p0 + spec.a0 * (1.0 + m);
  const double d_lo = spec.delta0 - spec.b0 * (1.0 + m);
  const double d_hi = spec.delta0 + spec.b0 * (1.0 + m);

  const int n = cfg.run.map_resolution;
  const RegionMap map = scan_region(p, dp, p_lo, p_hi, d_lo, d_hi, n, n);

  {
    auto out = open_out(cfg, "map.csv");
    out << "power_w,detuning_rad_s,real_roots,stable_roots,qs_low_m,qs_mid_m,qs_high_m\n";
    for (std::size_t i = 0; i < map.p_axis.size(); ++i)
      for (std::size_t jd = 0; jd < map.delta_axis.size(); ++jd) {
        const CellClass& c = map.at(i, jd);
        out << fmt17(map.p_axis[i]) << ',' << fmt17(map.delta_axis[jd]) << ',' << c.real_roots
            << ',' << c.branch_stable << ',' << (std::isnan(c.q_low) ? "" : fmt17(c.q_low)) << ','
            << (std::isnan(c.q_mid) ? "" : fmt17(c.q_mid)) << ','
            << (std::isnan(c.q_high) ? "" : fmt17(c.q_high)) << "\n";
      }
  }
  {
    auto out = open_out(cfg, "folds.csv");
    out << "power_w,detuning_rad_s\n";
    for (const auto& f : map.fold_points)
      out << fmt17(f.power) << ',' << fmt17(f.detuning) << "\n";
  }

  json nx;
  try {
    const NexusPoint nexus = locate_nexus(p, dp, p_lo, p_hi, d_lo, d_hi);
    nx["p_star"] = nexus.power;
    nx["delta_star"] = nexus.detuning;
    nx["tolerance"] = nexus.tolerance;
    nx["loop_contains_nexus"] =
        winding_number(loop_polyline(spec), nexus.power, nexus.detuning) != 0;
  } catch (const NoCuspError& e) {
    nx["p_star"] = nullptr;
    nx["delta_star"] = nullptr;
    nx["error"] = e.what();
  }
  write_json(cfg, "nexus.json", nx);
}

void cmd_loop(const RunConfig& cfg, bool with_entanglement) {
  const PhysicalParams p = cfg.physical_params();
  const DerivedParams dp = derive_params(p);
  const LoopSpec spec = cfg.loop_spec(p);
  const Branch start = cfg.run.start == "upper" ? Branch::Upper : Branch::Lower;

  Trajectory traj = track_branch(p, dp, spec, start);
  if (with_entanglement) entanglement_along(p, dp, traj, cfg.diffusion_mode());

  write_trajectory_csv(cfg, "trajectory.csv", traj);
  write_json(cfg, "summary.json", summary_json(traj));
}

void cmd_nonrecip(const RunConfig& cfg) {
  const PhysicalParams p = cfg.physical_params();
  const DerivedParams dp = derive_params(p);
  const LoopSpec spec = cfg.loop_spec(p);

  auto run_once = [&](const LoopSpec& s) {
    return nonreciprocity_report(p, dp, s, cfg.diffusion_mode());
  };

  const NonreciprocityReport rep = run_once(spec);
  const char* names[4] = {"cw_from_upper", "cw_from_lower", "ccw_from_upper", "ccw_from_lower"};
  const Trajectory* trajs[4] = {&rep.cw_from_upper, &rep.cw_from_lower, &rep.ccw_from_upper,
                                &rep.ccw_from_lower};

  json j;
  j["outcome"] = {{"cw", to_string(rep.cw_final)}, {"ccw", to_string(rep.ccw_final)}};
  json table;
  for (int i = 0; i < 4; ++i) {
    table[names[i]] = {{"final_branch", to_string(trajs[i]->final_branch)},
                       {"jumps", jumps_json(*trajs[i])}};
    if (rep.e_n_final[i])
      table[names[i]]["e_n_final"] = *rep.e_n_final[i];
    else
      table[names[i]]["e_n_final"] = nullptr;
    write_trajectory_csv(cfg, std::string("trajectory_") + names[i] + ".csv", *trajs[i]);
  }
  j["trajectories"] = table;
  j["nonreciprocal"] = rep.nonreciprocal;

  if (cfg.run.delta_sweep) {
    json sweep = json::array();
    for (double d : {-0.1, 0.0, 0.1}) {
      const NonreciprocityReport r = run_once(perturbed_spec(spec, d));
      sweep.push_back({{"delta_fluct", d},
                       {"cw", to_string(r.cw_final)},
                       {"ccw", to_string(r.ccw_final)},
                       {"nonreciprocal", r.nonreciprocal}});
    }
    j["delta_sweep"] = sweep;
  }
  write_json(cfg, "report.json", j);
}

bool cmd_validate(const RunConfig& cfg) {
  const PhysicalParams p = cfg.physical_params();
  const DerivedParams dp = derive_params(p);
  const LoopSpec spec = cfg.loop_spec(p);

  json checks = json::array();
  bool all_pass = true;
  auto record = [&](const std::string& name, bool pass, double metric, double tol,
                    const std::string& note = "") {
    json c = {{"name", name}, {"pass", pass}, {"metric", metric}, {"tolerance", tol}};
    if (!note.empty()) c["note"] = note;
    checks.push_back(c);
    all_pass = all_pass && pass;
  };

  // 1. fixed-point residuals at the roots of the loop start point
  {
    const DrivePoint d = loop_point(spec, 0.0);
    double worst = 0;
    for (const auto& ss : steady_states(p, dp, d)) {
      if (!ss.physical) continue;
      const double rel =
          std::abs(fixed_point_residual(p, dp, d, ss.q_s)) / std::max(std::abs(ss.q_s), dp.q_zpf);
      worst = std::max(worst, rel);
    }
    // Tolerance reflects the measured expansion gap; roots violating the
    // |g_kappa q| << kappa premise reach the 5e-3 decade.
    record("fixed_point_residual_loop_start", worst < 1e-2, worst, 1e-2);
  }

  // 2. closed-form stability combinations vs the generic Hurwitz test
  {
    int disagreements = 0, tested = 0;
    for (int i = 0; i < 200; ++i) {
      const double th = 2.0 * std::numbers::pi * i / 200.0;
      const DrivePoint d = loop_point(spec, th);
      for (const auto& ss : steady_states(p, dp, d)) {
        if (!ss.physical || ss.marginal) continue;
        const DriftMatrix a = drift_matrix(p, dp, d, ss);
        ++tested;
        if (hurwitz_generic(a.a) != ss.stable) ++disagreements;
      }
    }
    record("hurwitz_cross_check", disagreements == 0, disagreements, 0, std::to_string(tested) + " states");
  }

  // 3. Lyapunov vs Monte Carlo at the most stable loop-start root
  {
    const DrivePoint d = loop_point(spec, 0.0);
    const auto states = steady_states(p, dp, d);
    const SteadyState* pick = nullptr;
    for (const auto& ss : states)
      if (ss.physical && ss.stable && !ss.marginal && (!pick || ss.rh[2] > pick->rh[2])) pick = &ss;
    if (!pick) {
      record("lyapunov_vs_mc", false, 0, 0, "no stable state at the loop start");
    } else {
      const DiffusionMode mode = cfg.diffusion_mode();
      const CovarianceResult cov = covariance_at(p, dp, d, *pick, mode);
      const McEstimate mc = stochastic_covariance(p, dp, d, *pick, mode,
                                                  std::max(32L, cfg.run.mc_n_traj / 4), cfg.run.seed,
                                                  cfg.run.mc_t_total);
      double worst = 0;
      bool pass = true;
      for (int i = 0; i < 4; ++i)
        for (int jj = 0; jj < 4; ++jj) {
          const double diff = std::abs(mc.v_hat(i, jj) - cov.v(i, jj));
          const double tol = std::max(0.05 * std::abs(cov.v(i, jj)), 3.0 * mc.stderr_(i, jj));
          if (diff > tol) pass = false;
          if (tol > 0) worst = std::max(worst, diff / tol);
        }
      record("lyapunov_vs_mc", pass, worst, 1.0,
             mc.insufficient ? "insufficient-samples warning" : "");
      record("physicality_nu_minus", cov.nu_minus >= 0.5 - 1e-9, cov.nu_minus, 0.5 - 1e-9);
    }
  }

  // 4. quasi-static tracking vs mean-field dynamics (one combination)
  {
    try {
      Trajectory tr = track_branch(p, dp, spec, Branch::Lower);
      const DynamicLoopResult dyn =
          quasi_static_loop_dynamic(p, dp, spec, Branch::Lower, cfg.run.dynamic_t_total);
      record("dynamic_vs_quasi_static", dyn.final_branch == tr.final_branch,
             dyn.final_branch == tr.final_branch ? 1 : 0, 1,
             to_string(tr.final_branch) + " vs " + to_string(dyn.final_branch));
    } catch (const std::exception& e) {
      record("dynamic_vs_quasi_static", false, 0, 1, e.what());
    }
  }

  json out;
  out["checks"] = checks;
  out["all_pass"] = all_pass;
  write_json(cfg, "validation.json", out);
  return all_pass;
}

}  // namespace nexusloop
