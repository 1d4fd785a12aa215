// Compares the serial reference kernels against their OpenMP versions:
// control-plane scan and Monte Carlo covariance accumulation.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nexusloop/commands.hpp"
#include "nexusloop/dynamics.hpp"
#include "nexusloop/map.hpp"

using namespace nexusloop;
namespace chrono = std::chrono;

namespace {

double seconds(chrono::steady_clock::time_point a, chrono::steady_clock::time_point b) {
  return chrono::duration<double>(b - a).count();
}

}  // namespace

int main() {
  apply_thread_cap_from_env();
  int threads = 1;
#ifdef _OPENMP
#pragma omp parallel
  {
#pragma omp single
    threads = omp_get_num_threads();
  }
#endif
  std::printf("threads: %d\n", threads);

  const PhysicalParams p = default_device(FreqConvention::Angular);
  const DerivedParams dp = derive_params(p);
  const LoopSpec spec = default_loop(p);

  {
    const int n = 96;
    const double p_lo = 0.0, p_hi = 36e-6;
    const double d_lo = -0.24 * p.omega_m, d_hi = 0.93 * p.omega_m;
    auto t0 = chrono::steady_clock::now();
    RegionMap serial = scan_region(p, dp, p_lo, p_hi, d_lo, d_hi, n, n, false);
    auto t1 = chrono::steady_clock::now();
    RegionMap par = scan_region(p, dp, p_lo, p_hi, d_lo, d_hi, n, n, true);
    auto t2 = chrono::steady_clock::now();
    bool identical = serial.cells.size() == par.cells.size();
    for (std::size_t i = 0; identical && i < serial.cells.size(); ++i)
      identical = serial.cells[i].real_roots == par.cells[i].real_roots &&
                  serial.cells[i].branch_stable == par.cells[i].branch_stable;
    std::printf("scan_region %dx%d      serial %8.3f s   omp %8.3f s   speedup %5.2fx   identical %s\n",
                n, n, seconds(t0, t1), seconds(t1, t2), seconds(t0, t1) / seconds(t1, t2),
                identical ? "yes" : "NO");
  }

  {
    const DrivePoint d = loop_point(spec, 0.0);
    const auto states = steady_states(p, dp, d);
    const SteadyState* pick = nullptr;
    for (const auto& ss : states)
      if (ss.physical && ss.stable && !ss.marginal) pick = &ss;
    if (!pick) {
      std::printf("mc: no stable state at the bench point\n");
      return 0;
    }
    const long n_traj = 64;
    auto t0 = chrono::steady_clock::now();
    McEstimate serial = stochastic_covariance(p, dp, d, *pick, DiffusionMode::Diagonal, n_traj, 7,
                                              0.0, false);
    auto t1 = chrono::steady_clock::now();
    McEstimate par =
        stochastic_covariance(p, dp, d, *pick, DiffusionMode::Diagonal, n_traj, 7, 0.0, true);
    auto t2 = chrono::steady_clock::now();
    const bool identical = (serial.v_hat - par.v_hat).norm() == 0.0;
    std::printf("stochastic_covariance  serial %8.3f s   omp %8.3f s   speedup %5.2fx   identical %s\n",
                seconds(t0, t1), seconds(t1, t2), seconds(t0, t1) / seconds(t1, t2),
                identical ? "yes" : "NO");
  }
  return 0;
}
