#include "nexusloop/map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nexusloop {

CellClass classify_point(const PhysicalParams& p, const DerivedParams& dp, const DrivePoint& d) {
  CellClass c;
  c.q_low = c.q_mid = c.q_high = std::numeric_limits<double>::quiet_NaN();
  const auto states = steady_states(p, dp, d);
  c.real_roots = static_cast<int>(states.size());
  std::vector<double> absq;
  for (const auto& ss : states) {
    if (!ss.physical) {
      ++c.unphysical;
      continue;
    }
    if (ss.branch_stable) ++c.branch_stable;
    if (ss.stable) ++c.rh_stable;
    absq.push_back(std::abs(ss.q_s));
  }
  std::sort(absq.begin(), absq.end());
  if (!absq.empty()) c.q_low = absq.front();
  if (absq.size() == 3) c.q_mid = absq[1];
  if (absq.size() >= 2) c.q_high = absq.back();
  return c;
}

namespace {

// Bisect the discriminant sign change between two drive points that lie on
// a grid edge; returns the crossing location along the edge.
FoldPoint refine_fold(const PhysicalParams& p, const DerivedParams& dp, DrivePoint lo,
                      DrivePoint hi) {
  auto disc = [&](const DrivePoint& d) {
    return cubic_discriminant(cubic_coefficients(p, dp, d));
  };
  double flo = disc(lo);
  for (int i = 0; i < 60; ++i) {
    DrivePoint mid{(lo.power + hi.power) / 2.0, (lo.detuning + hi.detuning) / 2.0};
    const double fm = disc(mid);
    if ((flo <= 0.0) == (fm <= 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    const double span = std::abs(hi.power - lo.power) + std::abs(hi.detuning - lo.detuning);
    const double size = std::abs(hi.power) + std::abs(hi.detuning) + 1e-300;
    if (span < 1e-6 * size) break;
  }
  return {(lo.power + hi.power) / 2.0, (lo.detuning + hi.detuning) / 2.0};
}

}  // namespace

RegionMap scan_region(const PhysicalParams& p, const DerivedParams& dp, double p_min, double p_max,
                      double delta_min, double delta_max, int n_p, int n_delta, bool parallel) {
  if (n_p < 1 || n_delta < 1) throw std::invalid_argument("scan_region: resolution must be >= 1");
  RegionMap map;
  map.p_axis.resize(n_p);
  map.delta_axis.resize(n_delta);
  for (int i = 0; i < n_p; ++i)
    map.p_axis[i] = n_p == 1 ? p_min : p_min + (p_max - p_min) * i / (n_p - 1);
  for (int j = 0; j < n_delta; ++j)
    map.delta_axis[j] = n_delta == 1 ? delta_min : delta_min + (delta_max - delta_min) * j / (n_delta - 1);

  map.cells.resize(static_cast<std::size_t>(n_p) * n_delta);
  const long total = static_cast<long>(n_p) * n_delta;
#pragma omp parallel for schedule(static) if (parallel)
  for (long idx = 0; idx < total; ++idx) {
    const int i = static_cast<int>(idx / n_delta);
    const int j = static_cast<int>(idx % n_delta);
    map.cells[idx] = classify_point(p, dp, {map.p_axis[i], map.delta_axis[j]});
  }

  // Fold points where the real-root count changes across a grid edge.
  for (int i = 0; i < n_p; ++i)
    for (int j = 0; j < n_delta; ++j) {
      const CellClass& c = map.at(i, j);
      if (i + 1 < n_p) {
        const CellClass& r = map.at(i + 1, j);
        if ((c.real_roots == 3) != (r.real_roots == 3))
          map.fold_points.push_back(refine_fold(p, dp, {map.p_axis[i], map.delta_axis[j]},
                                                {map.p_axis[i + 1], map.delta_axis[j]}));
      }
      if (j + 1 < n_delta) {
        const CellClass& u = map.at(i, j + 1);
        if ((c.real_roots == 3) != (u.real_roots == 3))
          map.fold_points.push_back(refine_fold(p, dp, {map.p_axis[i], map.delta_axis[j]},
                                                {map.p_axis[i], map.delta_axis[j + 1]}));
      }
    }
  return map;
}

namespace {

struct SliceWidth {
  double width = 0;
  double center = 0;
  int intervals = 0;
};

SliceWidth scan_slice(const CubicFamily& family, double a_min, double a_max, double b, int n) {
  SliceWidth out;
  auto disc = [&](double a) { return cubic_discriminant(family(a, b)); };
  double prev = disc(a_min);
  double a_prev = a_min;
  std::vector<std::pair<double, double>> intervals;
  double open = std::numeric_limits<double>::quiet_NaN();
  if (prev > 0.0) open = a_min;
  for (int i = 1; i < n; ++i) {
    const double a = a_min + (a_max - a_min) * i / (n - 1);
    const double f = disc(a);
    if ((prev > 0.0) != (f > 0.0)) {
      // refine the crossing
      double lo = a_prev, hi = a, flo = prev;
      for (int it = 0; it < 60; ++it) {
        const double mid = (lo + hi) / 2.0;
        const double fm = disc(mid);
        if ((flo > 0.0) == (fm > 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      const double cross = (lo + hi) / 2.0;
      if (f > 0.0) {
        open = cross;
      } else {
        intervals.emplace_back(open, cross);
        open = std::numeric_limits<double>::quiet_NaN();
      }
    }
    prev = f;
    a_prev = a;
  }
  if (!std::isnan(open)) intervals.emplace_back(open, a_max);
  out.intervals = static_cast<int>(intervals.size());
  if (!intervals.empty()) {
    // widest interval
    auto widest = std::max_element(intervals.begin(), intervals.end(),
                                   [](const auto& x, const auto& y) {
                                     return x.second - x.first < y.second - y.first;
                                   });
    out.width = widest->second - widest->first;
    out.center = (widest->first + widest->second) / 2.0;
  }
  return out;
}

// Coarse scan of the whole slice; when that misses and a hint from a
// neighbouring slice exists, rescan a zoomed window around it (thin
// tongue tails fall between coarse grid points).
SliceWidth slice_width(const CubicFamily& family, double a_min, double a_max, double b, int n,
                       const SliceWidth* hint = nullptr) {
  SliceWidth out = scan_slice(family, a_min, a_max, b, n);
  if (out.width == 0.0 && hint && hint->width > 0.0) {
    const double coarse_cell = (a_max - a_min) / (n - 1);
    const double w = std::max(4.0 * hint->width, 4.0 * coarse_cell);
    const double lo = std::max(a_min, hint->center - w);
    const double hi = std::min(a_max, hint->center + w);
    if (hi > lo) {
      const SliceWidth fine = scan_slice(family, lo, hi, b, n);
      if (fine.width > 0.0) out = fine;
    }
  }
  return out;
}

}  // namespace

NexusPoint locate_cusp(const CubicFamily& family, double a_min, double a_max, double b_min,
                       double b_max, int scan_resolution) {
  // Find the widest slice and a zero-width slice to bracket the closure.
  const int nb = 65;
  double best_width = 0, b_best = b_min;
  double b_empty = std::numeric_limits<double>::quiet_NaN();
  bool saw_multi = false;
  std::vector<std::pair<double, SliceWidth>> slices;
  for (int j = 0; j < nb; ++j) {
    const double b = b_min + (b_max - b_min) * j / (nb - 1);
    const SliceWidth s = slice_width(family, a_min, a_max, b, scan_resolution);
    slices.emplace_back(b, s);
    if (s.intervals > 1) saw_multi = true;
    if (s.width > best_width) {
      best_width = s.width;
      b_best = b;
    }
  }
  if (saw_multi) throw MultipleTongueError("locate_cusp: more than one tongue in the box");
  if (best_width == 0.0) throw NoCuspError("locate_cusp: no three-root region in the box");

  // Nearest empty slice on either side of the widest one brackets the cusp.
  for (const auto& [b, s] : slices) {
    if (s.width == 0.0 &&
        (std::isnan(b_empty) || std::abs(b - b_best) < std::abs(b_empty - b_best)))
      b_empty = b;
  }
  if (std::isnan(b_empty))
    throw NoCuspError("locate_cusp: tongue does not close inside the box");

  double b_lo = b_empty, b_hi = b_best;  // width(b_lo) = 0, width(b_hi) > 0
  SliceWidth last_pos = slice_width(family, a_min, a_max, b_hi, scan_resolution);
  while (std::abs(b_hi - b_lo) > 1e-14 * (std::abs(b_hi) + std::abs(b_lo) + 1.0)) {
    const double mid = (b_lo + b_hi) / 2.0;
    const SliceWidth s = slice_width(family, a_min, a_max, mid, scan_resolution, &last_pos);
    if (s.width > 0.0) {
      b_hi = mid;
      last_pos = s;
    } else {
      b_lo = mid;
    }
    if (last_pos.width < 1e-3 * best_width) break;
  }
  NexusPoint n;
  n.power = last_pos.center;
  n.detuning = b_hi;
  n.tolerance = std::abs(b_hi - b_lo);
  return n;
}

NexusPoint locate_nexus(const PhysicalParams& p, const DerivedParams& dp, double p_min,
                        double p_max, double delta_min, double delta_max) {
  CubicFamily fam = [&](double power, double delta) {
    return cubic_coefficients(p, dp, {std::max(power, 0.0), delta});
  };
  return locate_cusp(fam, p_min, p_max, delta_min, delta_max);
}

int winding_number(const std::vector<std::pair<double, double>>& loop, double x0, double y0) {
  if (loop.size() < 3) return 0;
  double xmin = loop[0].first, xmax = xmin, ymin = loop[0].second, ymax = ymin;
  for (const auto& [x, y] : loop) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  const double sx = xmax - xmin > 0 ? xmax - xmin : 1.0;
  const double sy = ymax - ymin > 0 ? ymax - ymin : 1.0;
  double total = 0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const auto& a = loop[i];
    const auto& b = loop[(i + 1) % loop.size()];
    const double ax = (a.first - x0) / sx, ay = (a.second - y0) / sy;
    const double bx = (b.first - x0) / sx, by = (b.second - y0) / sy;
    total += std::atan2(ax * by - ay * bx, ax * bx + ay * by);
  }
  return static_cast<int>(std::lround(total / (2.0 * M_PI)));
}

}  // namespace nexusloop
