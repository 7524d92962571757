#pragma once

// Root barrier on the lattice via the explicit obstacle scheme
//
//   u(l+1, x) = min( v(x), ½ (u(l, x−h) + u(l, x+h)) ),   u(0,·) = U_μ,  v = U_ν,
//
// where u(l,·) is the potential of the walk stopped at level l. Alongside the
// potentials the scheme tracks live and stopped mass: at (l,x) a fraction of
// the live mass keeps moving so that the next potential stays below v, the
// rest stops. The barrier is {(l,x) : v(x) − u(l,x) ≤ tol}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "shadows/errors.hpp"
#include "shadows/grid.hpp"
#include "shadows/measure.hpp"
#include "shadows/potential.hpp"
#include "shadows/shadow.hpp"

namespace shadows {

struct RootOptions {
  /// Barrier membership threshold, relative to max|v| on the grid.
  double barrier_tol = 1e-12;
  /// The level loop ends once live mass drops below this.
  double live_eps = 1e-13;
  /// Convex-order pre-check tolerance.
  double order_tol = kPotentialTol;
  /// Keep every row of u; off keeps only the last one (embedding sub-solves).
  bool keep_surface = true;
};

/// Per-level stopped sets of grid positions.
class Barrier {
 public:
  Barrier() = default;
  Barrier(std::vector<std::vector<Interval>> levels, double dt) : levels_(std::move(levels)), dt_(dt) {}

  std::size_t levels() const { return levels_.size(); }
  double dt() const { return dt_; }
  /// Stopped components at a level; beyond the last level the last one holds.
  std::span<const Interval> at(std::size_t level) const {
    if (levels_.empty()) return {};
    return levels_[std::min(level, levels_.size() - 1)];
  }

  bool contains(std::size_t level, double x) const {
    for (const auto& c : at(level))
      if (x >= c.lo - 1e-12 && x <= c.hi + 1e-12) return true;
    return false;
  }

  /// Stopped sets translated away from `center` by `shift`: x ↦ x ± shift on
  /// either side, so a component straddling the center splits in two.
  Barrier shifted_outward(double shift, double center) const {
    std::vector<std::vector<Interval>> out;
    for (const auto& lvl : levels_) {
      std::vector<Interval> row;
      for (const auto& c : lvl) {
        if (c.hi < center) {
          row.push_back({c.lo - shift, c.hi - shift});
        } else if (c.lo > center) {
          row.push_back({c.lo + shift, c.hi + shift});
        } else {
          row.push_back({c.lo - shift, center - shift});
          row.push_back({center + shift, c.hi + shift});
        }
      }
      out.push_back(std::move(row));
    }
    return Barrier(std::move(out), dt_);
  }

  std::span<const std::vector<Interval>> all() const { return levels_; }

 private:
  std::vector<std::vector<Interval>> levels_;
  double dt_ = 0.0;
};

/// Output of the obstacle scheme.
struct RootSolution {
  GridSpec grid;
  DiscreteMeasure mu;  // μ moved onto the lattice
  DiscreteMeasure nu;  // ν moved onto the lattice
  std::vector<double> v;
  std::vector<std::vector<double>> u;  // levels 0..L, or only L without keep_surface
  // stop probabilities per level, deduplicated: row stop_rows[stop_row_of[l]]
  std::vector<std::vector<double>> stop_rows;
  std::vector<std::uint32_t> stop_row_of;
  std::vector<double> stopped_at_level;        // mass stopped at each level
  std::vector<double> live_at_level;           // live mass arriving at each level
  std::vector<double> stopped_total;           // final stopped mass per grid index
  Barrier barrier;
  double barrier_tol = 0.0;
  double terminal_gap = 0.0;  // max_x (v − u(L, x))

  std::size_t levels() const { return stop_row_of.size(); }
  /// Time by which every computed level has been processed.
  double horizon() const { return static_cast<double>(levels()) * grid.dt(); }

  /// Beyond the last computed level the last row applies.
  double stop_probability(std::size_t level, std::size_t j) const {
    return stop_rows[stop_row_of[std::min(level, stop_row_of.size() - 1)]][j];
  }

  /// Same, addressed by lattice index k; everything off the grid stops.
  double stop_probability_at(std::size_t level, std::int64_t k) const {
    if (k < grid.k_min || k > grid.k_max) return 1.0;
    return stop_probability(level, static_cast<std::size_t>(k - grid.k_min));
  }

  /// E[τ] from the stopped-mass budget, Σ_l l·Δ·stopped(l).
  double expected_tau() const {
    double e = 0.0;
    for (std::size_t l = 0; l < stopped_at_level.size(); ++l)
      e += static_cast<double>(l) * grid.dt() * stopped_at_level[l];
    return e;
  }
};

namespace detail {

inline std::vector<Interval> runs_to_intervals(const std::vector<bool>& in, const GridSpec& g) {
  std::vector<Interval> out;
  std::size_t j = 0;
  while (j < in.size()) {
    if (!in[j]) {
      ++j;
      continue;
    }
    std::size_t e = j;
    while (e + 1 < in.size() && in[e + 1]) ++e;
    out.push_back({g.x(j), g.x(e)});
    j = e + 1;
  }
  return out;
}

}  // namespace detail

/// Runs the obstacle scheme from U_μ towards U_ν on `grid`.
inline RootSolution root_solve(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const GridSpec& grid,
                               const RootOptions& opt = {}) {
  if (!order_leq(mu, nu, Order::convex, opt.order_tol * std::max(1.0, nu.mass() * (nu.max() - nu.min()))))
    throw DomainError("root_solve: mu is not dominated by nu in convex order; no embedding exists");
  RootSolution s;
  s.grid = grid;
  s.mu = to_grid(mu, grid);
  s.nu = to_grid(nu, grid);
  const std::size_t n = grid.size();
  const auto uv = potential_of(s.nu), um = potential_of(s.mu);
  s.v.resize(n);
  std::vector<double> u(n);
  double vmax = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    s.v[j] = uv(grid.x(j));
    u[j] = std::min(um(grid.x(j)), s.v[j]);
    vmax = std::max(vmax, std::abs(s.v[j]));
  }
  s.barrier_tol = opt.barrier_tol * std::max(1.0, vmax);
  std::vector<double> live = grid_weights(s.mu, grid);
  s.stopped_total.assign(n, 0.0);
  std::vector<std::vector<Interval>> barrier_rows;
  std::vector<double> moving(n), next(n), stop(n);
  std::vector<bool> in_barrier(n);

  for (std::size_t level = 0;; ++level) {
    double live_mass = 0.0, stopped_here = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      live_mass += live[j];
      const double gap = s.v[j] - u[j];
      in_barrier[j] = gap <= s.barrier_tol || j == 0 || j + 1 == n;
      if (in_barrier[j]) {
        moving[j] = 0.0;
        stop[j] = 1.0;
      } else {
        moving[j] = std::min(live[j], gap / grid.h);
        stop[j] = live[j] > 0.0 ? 1.0 - moving[j] / live[j] : 0.0;
      }
      const double halted = live[j] - moving[j];
      s.stopped_total[j] += halted;
      stopped_here += halted;
    }
    if (opt.keep_surface || s.u.empty())
      s.u.push_back(u);
    else
      s.u.back() = u;
    if (s.stop_rows.empty() || s.stop_rows.back() != stop) s.stop_rows.push_back(stop);
    s.stop_row_of.push_back(static_cast<std::uint32_t>(s.stop_rows.size() - 1));
    s.live_at_level.push_back(live_mass);
    s.stopped_at_level.push_back(stopped_here);
    barrier_rows.push_back(detail::runs_to_intervals(in_barrier, grid));
    if (live_mass - stopped_here <= opt.live_eps || level + 1 >= grid.n_levels) break;

    next[0] = s.v[0];
    next[n - 1] = s.v[n - 1];
    for (std::size_t j = 1; j + 1 < n; ++j) next[j] = std::min(s.v[j], 0.5 * (u[j - 1] + u[j + 1]));
    u.swap(next);
    std::fill(live.begin(), live.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (moving[j] == 0.0) continue;
      if (j > 0) live[j - 1] += 0.5 * moving[j];
      if (j + 1 < n) live[j + 1] += 0.5 * moving[j];
    }
  }
  s.barrier = Barrier(std::move(barrier_rows), grid.dt());
  double gap = 0.0;
  for (std::size_t j = 0; j < n; ++j) gap = std::max(gap, s.v[j] - s.u.back()[j]);
  s.terminal_gap = gap;
  return s;
}

/// Result of pushing an initial lattice measure through the first `levels`
/// levels of a solved scheme: mass stopped before that level and mass still
/// live when it is reached.
struct Propagation {
  std::vector<double> stopped;
  std::vector<double> live;
};

/// Linear propagation with the scheme's stop fractions. Summing over a
/// decomposition of μ reproduces the scheme's own mass flow.
inline Propagation propagate(const RootSolution& s, const std::vector<double>& initial, std::size_t levels) {
  const std::size_t n = s.grid.size();
  Propagation p{std::vector<double>(n, 0.0), initial};
  std::vector<double> next(n);
  std::size_t lo = n, hi = 0;
  for (std::size_t j = 0; j < n; ++j)
    if (initial[j] != 0.0) {
      lo = std::min(lo, j);
      hi = std::max(hi, j);
    }
  if (lo > hi) return p;
  for (std::size_t level = 0; level < levels; ++level) {
    std::fill(next.begin() + static_cast<std::ptrdiff_t>(lo > 0 ? lo - 1 : 0),
              next.begin() + static_cast<std::ptrdiff_t>(std::min(hi + 2, n)), 0.0);
    bool any = false;
    for (std::size_t j = lo; j <= hi; ++j) {
      const double a = p.live[j];
      if (a == 0.0) continue;
      const double q = s.stop_probability(level, j);
      p.stopped[j] += a * q;
      const double m = a * (1.0 - q);
      if (m <= 0.0) continue;
      any = true;
      if (j > 0) next[j - 1] += 0.5 * m;
      if (j + 1 < n) next[j + 1] += 0.5 * m;
    }
    const std::size_t nlo = lo > 0 ? lo - 1 : 0, nhi = std::min(hi + 1, n - 1);
    for (std::size_t j = nlo; j <= nhi; ++j) p.live[j] = next[j];
    lo = nlo;
    hi = nhi;
    if (!any) {
      std::fill(p.live.begin(), p.live.end(), 0.0);
      break;
    }
  }
  return p;
}

/// Diagnostics for the surface invariants; every entry is a worst-case
/// violation (0 when the invariant holds exactly).
struct SurfaceDiagnostics {
  double monotone_in_level = 0.0;  // max (u(l) − u(l+1))
  double above_obstacle = 0.0;     // max (u − v)
  double nonconvex = 0.0;          // max −(second difference)
  double barrier_nesting = 0.0;    // 1 if some stopped point leaves the set later
  double mass_budget = 0.0;        // max |stopped so far + live − total|
};

inline SurfaceDiagnostics check_surface(const RootSolution& s) {
  SurfaceDiagnostics d;
  detail::require(s.u.size() == s.levels(), "check_surface: solution was computed without keep_surface");
  const std::size_t n = s.grid.size();
  const double total = s.mu.mass();
  double stopped = 0.0;
  for (std::size_t l = 0; l < s.levels(); ++l) {
    const auto& row = s.u[l];
    for (std::size_t j = 0; j < n; ++j) {
      d.above_obstacle = std::max(d.above_obstacle, row[j] - s.v[j]);
      if (l + 1 < s.levels()) d.monotone_in_level = std::max(d.monotone_in_level, row[j] - s.u[l + 1][j]);
      if (j > 0 && j + 1 < n)
        d.nonconvex = std::max(d.nonconvex, -(row[j - 1] - 2.0 * row[j] + row[j + 1]));
    }
    if (l + 1 < s.levels())
      for (const auto& c : s.barrier.at(l))
        for (auto j = *s.grid.index_of(c.lo); j <= *s.grid.index_of(c.hi); ++j)
          if (!s.barrier.contains(l + 1, s.grid.x(j))) d.barrier_nesting = 1.0;
    d.mass_budget = std::max(d.mass_budget, std::abs(stopped + s.live_at_level[l] - total));
    stopped += s.stopped_at_level[l];
  }
  return d;
}

/// Law of the stopping position for each source atom of the gridded μ.
/// Mass still live after the last computed level is booked where it stands.
inline Coupling root_coupling(const RootSolution& s) {
  std::vector<CouplingRow> rows;
  const std::size_t n = s.grid.size();
  for (const auto& a : s.mu.atoms()) {
    std::vector<double> e(n, 0.0);
    e[*s.grid.index_of(a.x)] = 1.0;
    auto p = propagate(s, e, s.levels());
    for (std::size_t j = 0; j < n; ++j) p.stopped[j] += p.live[j];
    rows.push_back({a.x, a.w, normalized(from_grid_weights(p.stopped, s.grid))});
  }
  return Coupling(std::move(rows));
}

}  // namespace shadows
