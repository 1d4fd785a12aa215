#include "nexusloop/loop.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nexusloop {

std::string to_string(Direction d) {
  return d == Direction::Clockwise ? "cw" : "ccw";
}

Direction direction_from_string(const std::string& s) {
  if (s == "cw" || s == "clockwise") return Direction::Clockwise;
  if (s == "ccw" || s == "counterclockwise") return Direction::CounterClockwise;
  throw std::invalid_argument("unknown direction: " + s);
}

LoopSpec default_loop(const PhysicalParams& p) {
  LoopSpec s;
  s.p0 = 15e-6;
  s.a0 = 15e-6;
  s.delta0 = 0.3 * p.omega_m;
  s.b0 = 0.45 * p.omega_m;
  s.theta0 = 0.28 * std::numbers::pi;
  return s;
}

namespace {

// splitmix64; stable across platforms for the per-step radius draws.
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double uniform_pm1(std::uint64_t seed, std::uint64_t idx) {
  const std::uint64_t z = mix64(mix64(seed) ^ (idx + 0x9e3779b97f4a7c15ull));
  return 2.0 * ((z >> 11) * 0x1.0p-53) - 1.0;
}

}  // namespace

DrivePoint loop_point(const LoopSpec& spec, double theta, long step) {
  double delta = spec.delta_fluct;
  if (spec.fluct_mode == FluctMode::PerStepUniform && step >= 0)
    delta = spec.delta_fluct * uniform_pm1(spec.seed, static_cast<std::uint64_t>(step));
  const double a = spec.a0 * (1.0 + delta);
  const double b = spec.b0 * (1.0 + delta);
  DrivePoint d;
  d.power = std::max(spec.p0 + a * std::cos(theta + spec.theta0), 0.0);
  d.detuning = spec.delta0 + b * std::sin(theta + spec.theta0);
  return d;
}

LoopSpec perturbed_spec(const LoopSpec& spec, double delta) {
  LoopSpec out = spec;
  out.delta_fluct = delta;
  return out;
}

namespace {

struct TrackedRoots {
  std::vector<SteadyState> all;
  std::vector<const SteadyState*> followable;  // physical and fold-stable
};

TrackedRoots roots_at(const PhysicalParams& p, const DerivedParams& dp, const DrivePoint& d) {
  TrackedRoots r;
  r.all = steady_states(p, dp, d);
  for (const auto& ss : r.all)
    if (ss.physical && ss.branch_stable) r.followable.push_back(&ss);
  return r;
}

const SteadyState* nearest(const TrackedRoots& r, double q) {
  const SteadyState* best = nullptr;
  double dist = 0;
  for (const auto* ss : r.followable) {
    const double dd = std::abs(ss->q_s - q);
    if (!best || dd < dist) {
      best = ss;
      dist = dd;
    }
  }
  return best;
}

Branch rank_branch(const TrackedRoots& r, double q) {
  if (r.followable.size() < 2) return r.followable.size() == 1 ? Branch::Mono : Branch::Middle;
  const SteadyState* lo = r.followable.front();
  const SteadyState* hi = r.followable.front();
  for (const auto* ss : r.followable) {
    if (std::abs(ss->q_s) < std::abs(lo->q_s)) lo = ss;
    if (std::abs(ss->q_s) > std::abs(hi->q_s)) hi = ss;
  }
  return std::abs(q - hi->q_s) <= std::abs(q - lo->q_s) ? Branch::Upper : Branch::Lower;
}

}  // namespace

Trajectory track_branch(const PhysicalParams& p, const DerivedParams& dp, const LoopSpec& spec,
                        Branch start) {
  if (spec.n_steps < 16) throw std::invalid_argument("track_branch: n_steps must be >= 16");
  if (start != Branch::Upper && start != Branch::Lower)
    throw std::invalid_argument("track_branch: start must be upper or lower");

  const double sgn = spec.direction == Direction::CounterClockwise ? 1.0 : -1.0;
  const double two_pi = 2.0 * std::numbers::pi;

  Trajectory traj;
  traj.direction = spec.direction;
  traj.delta_fluct = spec.delta_fluct;
  traj.start_branch = start;

  const DrivePoint d0 = loop_point(spec, 0.0, 0);
  TrackedRoots r0 = roots_at(p, dp, d0);
  if (r0.followable.size() < 2)
    throw StartNotBistableError("track_branch: start point is not bistable");
  const SteadyState* cur = nullptr;
  for (const auto* ss : r0.followable)
    if (ss->branch == start) cur = ss;
  if (!cur) throw StartNotBistableError("track_branch: requested start branch not present");

  traj.samples.push_back({0.0, d0, *cur, std::nullopt});

  double q_prev = cur->q_s;
  double max_step = 0.0;  // largest continuous inter-step |dq| seen so far
  std::size_t prev_count = r0.followable.size();
  const double floor_threshold = 10.0 * dp.q_zpf;

  for (int k = 1; k <= spec.n_steps; ++k) {
    const double theta = sgn * two_pi * k / spec.n_steps;
    const DrivePoint d = loop_point(spec, theta, k);
    TrackedRoots r = roots_at(p, dp, d);
    if (r.followable.empty())
      throw NoStableRootError("track_branch: no stable physical root along the loop");

    const SteadyState* best = nearest(r, q_prev);
    const double dist = std::abs(best->q_s - q_prev);
    const double threshold = std::max(3.0 * max_step, floor_threshold);

    // A fold jump needs both signatures: the stable-root count dropped
    // and the nearest continuation is far from the tracked root.
    if (r.followable.size() < prev_count && dist > threshold) {
      // Localize the branch loss by bisection in theta.
      double lo = sgn * two_pi * (k - 1) / spec.n_steps;
      double hi = theta;
      const double resolution = two_pi / (64.0 * spec.n_steps);
      while (std::abs(hi - lo) > resolution) {
        const double mid = (lo + hi) / 2.0;
        TrackedRoots rm = roots_at(p, dp, loop_point(spec, mid, k));
        const SteadyState* bm = rm.followable.empty() ? nullptr : nearest(rm, q_prev);
        if (bm && std::abs(bm->q_s - q_prev) <= threshold)
          lo = mid;
        else
          hi = mid;
      }
      JumpEvent ev;
      ev.theta = (lo + hi) / 2.0;
      ev.from = traj.samples.back().state.branch;
      ev.to = best->branch;
      traj.jumps.push_back(ev);
    } else {
      max_step = std::max(max_step, dist);
    }

    prev_count = r.followable.size();
    traj.samples.push_back({theta, d, *best, std::nullopt});
    q_prev = best->q_s;
  }

  const DrivePoint dend = loop_point(spec, sgn * two_pi, spec.n_steps);
  TrackedRoots rend = roots_at(p, dp, dend);
  traj.final_branch = rank_branch(rend, q_prev);
  return traj;
}

void entanglement_along(const PhysicalParams& p, const DerivedParams& dp, Trajectory& traj,
                        DiffusionMode mode) {
  for (auto& s : traj.samples) {
    s.e_n.reset();
    if (!s.state.physical || !s.state.stable || s.state.marginal) continue;
    try {
      const CovarianceResult cov = covariance_at(p, dp, s.drive, s.state, mode);
      // the negativity is only meaningful for a physical covariance; close
      // to the instability boundary the linearized model violates the
      // bound, and those samples stay gaps like the marginal ones
      if (cov.nu_minus >= 0.5 - 1e-9) s.e_n = cov.e_n;
    } catch (const std::exception&) {
      // per-sample failures are recorded as gaps, not fatal
    }
  }
}

NonreciprocityReport nonreciprocity_report(const PhysicalParams& p, const DerivedParams& dp,
                                           const LoopSpec& spec, DiffusionMode mode) {
  NonreciprocityReport rep;
  LoopSpec cw = spec, ccw = spec;
  cw.direction = Direction::Clockwise;
  ccw.direction = Direction::CounterClockwise;

  rep.cw_from_upper = track_branch(p, dp, cw, Branch::Upper);
  rep.cw_from_lower = track_branch(p, dp, cw, Branch::Lower);
  rep.ccw_from_upper = track_branch(p, dp, ccw, Branch::Upper);
  rep.ccw_from_lower = track_branch(p, dp, ccw, Branch::Lower);

  Trajectory* all[4] = {&rep.cw_from_upper, &rep.cw_from_lower, &rep.ccw_from_upper,
                        &rep.ccw_from_lower};
  for (int i = 0; i < 4; ++i) {
    entanglement_along(p, dp, *all[i], mode);
    rep.e_n_final[i] = all[i]->samples.back().e_n;
  }

  rep.cw_final = rep.cw_from_upper.final_branch;
  rep.ccw_final = rep.ccw_from_upper.final_branch;
  const bool cw_agree = rep.cw_from_upper.final_branch == rep.cw_from_lower.final_branch;
  const bool ccw_agree = rep.ccw_from_upper.final_branch == rep.ccw_from_lower.final_branch;
  rep.nonreciprocal = cw_agree && ccw_agree && rep.cw_final != rep.ccw_final;
  return rep;
}

}  // namespace nexusloop
