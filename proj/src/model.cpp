#include "nexusloop/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nexusloop/constants.hpp"
#include "nexusloop/stability.hpp"

namespace nexusloop {

using constants::hbar;

std::string to_string(Branch b) {
  switch (b) {
    case Branch::Upper: return "upper";
    case Branch::Lower: return "lower";
    case Branch::Middle: return "middle";
    case Branch::Mono: return "mono";
  }
  return "?";
}

EffectiveRates effective_rates(const PhysicalParams& p, const DrivePoint& d, double q_s) {
  EffectiveRates r;
  r.kappa_eff = p.kappa + p.g_kappa * q_s;
  r.delta_eff = d.detuning + p.g_omega * q_s;
  r.physical = r.kappa_eff > 0.0;
  return r;
}

std::complex<double> cavity_amplitude(const PhysicalParams& p, const DerivedParams& dp,
                                      const DrivePoint& d, double q_s) {
  const EffectiveRates r = effective_rates(p, d, q_s);
  if (!r.physical) throw std::domain_error("cavity_amplitude: kappa_eff <= 0");
  const double eps = drive_amplitude(d, dp);
  return std::sqrt(r.kappa_eff) * eps /
         std::complex<double>(r.kappa_eff / 2.0, r.delta_eff);
}

Cubic cubic_coefficients(const PhysicalParams& p, const DerivedParams& dp, const DrivePoint& d) {
  const double eps2 = d.power / (hbar * dp.omega_d);
  const double mo2 = p.mass * p.omega_m * p.omega_m;
  const double gk = p.g_kappa, gw = p.g_omega, k = p.kappa, D = d.detuning;
  Cubic c;
  c.d1 = mo2 * (gk * gk / 4.0 + gw * gw);
  c.d2 = mo2 * (k * gk / 2.0 + 2.0 * D * gw) - hbar * gk * gk * gw * eps2 / (2.0 * k);
  c.d3 = mo2 * (k * k / 4.0 + D * D) - hbar * gk * gk * D * eps2 / (2.0 * k);
  c.d4 = -hbar * eps2 * (gk * D - gw * k);
  return c;
}

std::vector<SteadyState> steady_states(const PhysicalParams& p, const DerivedParams& dp,
                                       const DrivePoint& d) {
  p.validate();
  if (d.power < 0) throw std::invalid_argument("steady_states: power must be >= 0");

  std::vector<double> roots;
  const Cubic cub = cubic_coefficients(p, dp, d);
  if (d.power == 0.0) {
    roots = {0.0};  // undriven: unique equilibrium at the origin
  } else {
    roots = solve_cubic(cub);
    if (roots.empty()) roots = {0.0};
  }

  std::vector<SteadyState> out;
  out.reserve(roots.size());
  for (double q : roots) {
    SteadyState ss;
    ss.q_s = q;
    const EffectiveRates r = effective_rates(p, d, q);
    ss.kappa_eff = r.kappa_eff;
    ss.delta_eff = r.delta_eff;
    ss.physical = r.physical;
    ss.guard_ratio = std::abs(p.g_kappa * q) / p.kappa;
    if (ss.physical) {
      ss.c_s = cavity_amplitude(p, dp, d, q);
      const RouthHurwitz rh = routh_hurwitz(p, dp, d, ss);
      ss.rh = {rh.s1, rh.s2, rh.s3};
      ss.stable = rh.stable;
      ss.marginal = rh.marginal;
      ss.branch_stable = rh.s1 > 0.0;
    }
    out.push_back(ss);
  }

  // Branch labels rank physical fold-stable roots by |q_s|.
  std::vector<SteadyState*> labelled;
  for (auto& ss : out)
    if (ss.physical && ss.branch_stable) labelled.push_back(&ss);
  std::sort(labelled.begin(), labelled.end(),
            [](const SteadyState* a, const SteadyState* b) { return std::abs(a->q_s) < std::abs(b->q_s); });
  for (auto& ss : out)
    if (ss.physical && !ss.branch_stable) ss.branch = Branch::Middle;
  if (labelled.size() == 1) {
    labelled[0]->branch = Branch::Mono;
  } else if (labelled.size() >= 2) {
    labelled.front()->branch = Branch::Lower;
    labelled.back()->branch = Branch::Upper;
    for (std::size_t i = 1; i + 1 < labelled.size(); ++i) labelled[i]->branch = Branch::Middle;
  }
  return out;
}

double fixed_point_map(const PhysicalParams& p, const DerivedParams& dp, const DrivePoint& d,
                       double q) {
  const EffectiveRates r = effective_rates(p, d, q);
  if (!r.physical) throw std::domain_error("fixed_point_map: kappa_eff <= 0");
  const double eps = drive_amplitude(d, dp);
  const std::complex<double> cs =
      std::sqrt(r.kappa_eff) * eps / std::complex<double>(r.kappa_eff / 2.0, r.delta_eff);
  const double mo2 = p.mass * p.omega_m * p.omega_m;
  return -(hbar * p.g_omega / mo2) * std::norm(cs) -
         (hbar * p.g_kappa * eps / (mo2 * std::sqrt(p.kappa))) * cs.imag();
}

double fixed_point_residual(const PhysicalParams& p, const DerivedParams& dp,
                            const DrivePoint& d, double q) {
  return fixed_point_map(p, dp, d, q) - q;
}

FixedPointResult fixed_point_solve(const PhysicalParams& p, const DerivedParams& dp,
                                   const DrivePoint& d, double seed, double damping,
                                   double tol, int max_iter) {
  FixedPointResult res;
  double q = seed;
  for (int i = 0; i < max_iter; ++i) {
    double next;
    try {
      next = (1.0 - damping) * q + damping * fixed_point_map(p, dp, d, q);
    } catch (const std::domain_error&) {
      res.q = q;
      res.iterations = i;
      return res;  // walked out of the physical domain
    }
    if (std::abs(next - q) <= tol * std::max(std::abs(next), 1e-300)) {
      res.q = next;
      res.converged = true;
      res.iterations = i + 1;
      return res;
    }
    q = next;
  }
  res.q = q;
  res.iterations = max_iter;
  return res;
}

FixedPointResult fixed_point_bisect(const PhysicalParams& p, const DerivedParams& dp,
                                    const DrivePoint& d, double seed, double half_width) {
  FixedPointResult res;
  auto h = [&](double q) { return fixed_point_residual(p, dp, d, q); };
  double lo = seed - half_width, hi = seed + half_width;
  // Shrink toward the seed until the bracket straddles a sign change.
  double flo, fhi;
  try {
    flo = h(lo);
    fhi = h(hi);
  } catch (const std::domain_error&) {
    return res;
  }
  if (flo * fhi > 0.0) return res;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = h(mid);
    if (flo * fm <= 0.0) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
    res.iterations = i + 1;
    if (hi - lo <= 1e-16 * std::max(std::abs(lo), std::abs(hi))) break;
  }
  res.q = 0.5 * (lo + hi);
  res.converged = true;
  return res;
}

}  // namespace nexusloop
