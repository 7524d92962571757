#pragma once

// Random-walk simulation of barrier stopping times. The walk moves ±h per
// level of length Δ = h². Paths are split into fixed blocks, each with its own
// mt19937_64 seeded from (seed, block index), so the output does not depend
// on the number of worker threads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "shadows/errors.hpp"
#include "shadows/grid.hpp"
#include "shadows/measure.hpp"
#include "shadows/parallel.hpp"
#include "shadows/root.hpp"
#include "shadows/solvers.hpp"
#include "shadows/time_change.hpp"

namespace shadows {

struct SimOptions {
  std::size_t n_paths = 100000;
  std::uint64_t seed = 1;
  std::size_t block = 4096;
  unsigned workers = 0;
  std::size_t max_levels = 0;  // 0: the grid's level cap
};

struct StoppedSample {
  double start = 0.0;
  std::size_t level = 0;  // τ / Δ
  double position = 0.0;  // B_τ
  double pivot = 0.0;     // B_{λ∧τ} (interpolated), else B₀
  std::vector<double> at_level;  // B_{T_l} per requested level; NaN unless τ ≥ T_l
};

struct SampleSet {
  GridSpec grid;
  TimeChangeSpec spec;
  std::vector<double> levels;
  std::vector<StoppedSample> paths;
  std::size_t cap_hits = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  double tau(std::size_t i) const { return static_cast<double>(paths[i].level) * grid.dt(); }
};

namespace detail {

inline double unit(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

/// Inverse-CDF sampler over the atoms of a measure.
class AtomSampler {
 public:
  explicit AtomSampler(const DiscreteMeasure& m) : atoms_(m.atoms().begin(), m.atoms().end()) {
    double c = 0.0;
    for (const auto& a : atoms_) cdf_.push_back(c += a.w);
  }
  std::size_t draw(std::mt19937_64& g) const {
    const double u = unit(g) * cdf_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), atoms_.size() - 1);
  }
  double x(std::size_t i) const { return atoms_[i].x; }

 private:
  std::vector<Atom> atoms_;
  std::vector<double> cdf_;
};

inline std::int64_t lattice(double x, double h) { return std::llround(x / h); }

/// Walks from lattice index k, starting at `level`. `stop(level, k)`
/// gives the stop probability, `seen(level, k)` observes each level reached.
/// Returns false if the cap was hit.
template <class Stop, class Seen>
bool walk(std::mt19937_64& g, std::int64_t& k, std::size_t& level, std::size_t cap, Stop&& stop, Seen&& seen) {
  for (;; ++level) {
    seen(level, k);
    const double q = stop(level, k);
    if (q >= 1.0 || (q > 0.0 && unit(g) < q)) return true;
    if (level >= cap) return false;
    k += (g() >> 63) ? 1 : -1;
  }
}

template <class PathFn>
SampleSet run_blocks(const GridSpec& grid, TimeChangeSpec spec, std::vector<double> levels, const SimOptions& opt,
                     PathFn&& path) {
  detail::require(opt.n_paths > 0 && opt.block > 0, "simulate: need a positive number of paths");
  SampleSet out;
  out.grid = grid;
  out.spec = std::move(spec);
  out.levels = std::move(levels);
  out.seed = opt.seed;
  out.paths.resize(opt.n_paths);
  const std::size_t n_blocks = (opt.n_paths + opt.block - 1) / opt.block;
  std::vector<std::size_t> caps(n_blocks, 0);
  parallel_for(
      n_blocks,
      [&](std::size_t b) {
        std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                          static_cast<std::uint32_t>(b)};
        std::mt19937_64 g(seq);
        const std::size_t end = std::min(opt.n_paths, (b + 1) * opt.block);
        for (std::size_t i = b * opt.block; i < end; ++i) {
          auto& s = out.paths[i];
          s.at_level.assign(out.levels.size(), std::numeric_limits<double>::quiet_NaN());
          if (!path(g, s)) ++caps[b];
        }
      },
      opt.workers);
  for (auto c : caps) out.cap_hits += c;
  if (static_cast<double>(out.cap_hits) > 0.01 * static_cast<double>(opt.n_paths))
    out.warnings.push_back("level cap hit on " + std::to_string(out.cap_hits) + " of " +
                           std::to_string(opt.n_paths) + " paths");
  return out;
}

inline std::vector<std::size_t> level_indices(const std::vector<double>& ts, const GridSpec& g) {
  std::vector<std::size_t> out;
  for (double t : ts) {
    detail::require(t >= 0.0 && std::isfinite(t), "simulate: requested levels must be finite and nonnegative");
    out.push_back(g.level_of(t));
  }
  return out;
}

}  // namespace detail

/// Paths of the lattice Root embedding; B_{T_l} is recorded at the requested
/// times `levels` (Root levels are times).
inline SampleSet simulate_root(const RootSolution& r, const std::vector<double>& levels, const SimOptions& opt) {
  const auto& g = r.grid;
  const std::size_t cap = opt.max_levels ? opt.max_levels : g.n_levels;
  const detail::AtomSampler start(r.mu);
  const auto idx = detail::level_indices(levels, g);
  return detail::run_blocks(g, RootSpec{}, levels, opt, [&](std::mt19937_64& rng, StoppedSample& s) {
    s.start = s.pivot = start.x(start.draw(rng));
    std::int64_t k = detail::lattice(s.start, g.h);
    std::size_t level = 0;
    const bool ok = detail::walk(
        rng, k, level, cap, [&](std::size_t l, std::int64_t kk) { return r.stop_probability_at(l, kk); },
        [&](std::size_t l, std::int64_t kk) {
          for (std::size_t i = 0; i < idx.size(); ++i)
            if (idx[i] == l) s.at_level[i] = static_cast<double>(kk) * g.h;
        });
    s.level = level;
    s.position = static_cast<double>(k) * g.h;
    return ok;
  });
}

/// First entry into the barrier's stopped sets, no randomization. Used with
/// modified barriers.
inline SampleSet simulate_barrier(const Barrier& b, const DiscreteMeasure& mu, const GridSpec& g,
                                  const std::vector<double>& levels, const SimOptions& opt) {
  detail::require(std::abs(b.dt() - g.dt()) <= 1e-15, "simulate: barrier and grid have different time steps");
  const std::size_t cap = opt.max_levels ? opt.max_levels : g.n_levels;
  const auto mu_h = to_grid(mu, g);
  const detail::AtomSampler start(mu_h);
  const auto idx = detail::level_indices(levels, g);
  return detail::run_blocks(g, RootSpec{}, levels, opt, [&](std::mt19937_64& rng, StoppedSample& s) {
    s.start = s.pivot = start.x(start.draw(rng));
    std::int64_t k = detail::lattice(s.start, g.h);
    std::size_t level = 0;
    const bool ok = detail::walk(
        rng, k, level, cap,
        [&](std::size_t l, std::int64_t kk) {
          return (kk <= g.k_min || kk >= g.k_max || b.contains(l, static_cast<double>(kk) * g.h)) ? 1.0 : 0.0;
        },
        [&](std::size_t l, std::int64_t kk) {
          for (std::size_t i = 0; i < idx.size(); ++i)
            if (idx[i] == l) s.at_level[i] = static_cast<double>(kk) * g.h;
        });
    s.level = level;
    s.position = static_cast<double>(k) * g.h;
    return ok;
  });
}

/// Every path stops at time t regardless of position.
inline SampleSet simulate_fixed_time(const DiscreteMeasure& mu, const GridSpec& g, double t,
                                     const std::vector<double>& levels, const SimOptions& opt) {
  const std::size_t stop_level = g.level_of(t);
  const auto mu_h = to_grid(mu, g);
  const detail::AtomSampler start(mu_h);
  const auto idx = detail::level_indices(levels, g);
  return detail::run_blocks(g, RootSpec{}, levels, opt, [&](std::mt19937_64& rng, StoppedSample& s) {
    s.start = s.pivot = start.x(start.draw(rng));
    std::int64_t k = detail::lattice(s.start, g.h);
    std::size_t level = 0;
    detail::walk(
        rng, k, level, stop_level, [&](std::size_t l, std::int64_t) { return l >= stop_level ? 1.0 : 0.0; },
        [&](std::size_t l, std::int64_t kk) {
          for (std::size_t i = 0; i < idx.size(); ++i)
            if (idx[i] == l) s.at_level[i] = static_cast<double>(kk) * g.h;
        });
    s.level = level;
    s.position = static_cast<double>(k) * g.h;
    return true;
  });
}

/// Left-monotone paths: the start picks a coupling row, whose conditional is
/// then embedded by that row's Root sub-barrier. `levels` are LM levels l;
/// B_{T_l} = B₀ on {exp(−B₀) ≥ l} and τ ≥ T_l = 0 there.
inline SampleSet simulate_lm(const LmSolution& s, const std::vector<double>& levels, const SimOptions& opt) {
  detail::require(s.plans.size() == s.coupling.rows().size(), "simulate: LM solution was built without plans");
  const std::size_t cap = opt.max_levels ? opt.max_levels : s.grid.n_levels;
  const detail::AtomSampler start(s.coupling.source_marginal());
  const double h = s.grid.h;
  return detail::run_blocks(s.grid, LeftMonotoneSpec{}, levels, opt, [&](std::mt19937_64& rng, StoppedSample& p) {
    const std::size_t row = start.draw(rng);
    p.start = p.pivot = start.x(row);
    for (std::size_t i = 0; i < levels.size(); ++i)
      if (time_change(LeftMonotoneSpec{}, {p.start, p.start}, levels[i]) == 0.0) p.at_level[i] = p.start;
    const auto& plan = s.plans[row];
    std::int64_t k = detail::lattice(p.start, h);
    std::size_t level = 0;
    const bool ok = detail::walk(
        rng, k, level, cap, [&](std::size_t l, std::int64_t kk) { return plan.stop_probability_at(l, kk); },
        [](std::size_t, std::int64_t) {});
    p.level = level;
    p.position = static_cast<double>(k) * h;
    return ok;
  });
}

/// Root up to level λ, then the LM stage from B_{λ∧τ}. `levels` are levels of
/// the interpolated time change (l ≤ λ behaves like Root time).
inline SampleSet simulate_interpolated(const InterpolatedSolution& s, const std::vector<double>& levels,
                                       const SimOptions& opt) {
  const auto& r = s.root;
  const auto& g = r.grid;
  detail::require(s.degenerate || s.plans.size() == s.lm_stage.rows().size(),
                  "simulate: interpolated solution was built without plans");
  const std::size_t cap = opt.max_levels ? opt.max_levels : g.n_levels;
  const detail::AtomSampler start(r.mu);
  std::vector<std::size_t> row_of(g.size(), 0);
  const auto stage = s.lm_stage.rows();
  for (std::size_t i = 0; i < stage.size(); ++i) row_of[*g.index_of(stage[i].x)] = i;
  std::vector<double> early;  // requested levels inside the Root stage, as indices
  for (double l : levels) early.push_back(l <= s.spec.lambda ? static_cast<double>(g.level_of(l)) : -1.0);
  return detail::run_blocks(g, s.spec, levels, opt, [&](std::mt19937_64& rng, StoppedSample& p) {
    p.start = start.x(start.draw(rng));
    std::int64_t k = detail::lattice(p.start, g.h);
    std::size_t level = 0;
    const std::size_t root_cap = s.degenerate ? cap : std::min(cap, s.level);
    auto seen = [&](std::size_t l, std::int64_t kk) {
      for (std::size_t i = 0; i < early.size(); ++i)
        if (early[i] == static_cast<double>(l)) p.at_level[i] = static_cast<double>(kk) * g.h;
    };
    const bool stopped = detail::walk(
        rng, k, level, root_cap,
        [&](std::size_t l, std::int64_t kk) {
          return (!s.degenerate && l >= s.level) ? 0.0 : r.stop_probability_at(l, kk);
        },
        seen);
    p.pivot = static_cast<double>(k) * g.h;
    bool ok = stopped || !s.degenerate;
    if (!stopped && !s.degenerate) {
      // alive at level λ: the LM stage takes over from B_λ
      for (std::size_t i = 0; i < levels.size(); ++i)
        if (levels[i] > s.spec.lambda && time_change(s.spec, {p.start, p.pivot}, levels[i]) <= s.spec.lambda)
          p.at_level[i] = p.pivot;
      const auto& plan = s.plans[row_of[*g.index_of(p.pivot)]];
      std::size_t sub = 0;
      ok = detail::walk(
          rng, k, sub, cap - std::min(cap, level),
          [&](std::size_t l, std::int64_t kk) { return plan.stop_probability_at(l, kk); },
          [](std::size_t, std::int64_t) {});
      level += sub;
    }
    p.level = level;
    p.position = static_cast<double>(k) * g.h;
    return ok;
  });
}

/// Joint law of (B₀, B_τ) from samples, with rows for every atom of the
/// gridded source μ_h weighted by μ_h. Atoms that no path started from keep a
/// point-mass conditional and are listed in `missing`.
inline Coupling empirical_coupling(const SampleSet& s, const DiscreteMeasure& mu_h, std::size_t* missing = nullptr) {
  const auto& g = s.grid;
  std::vector<std::vector<double>> hits(g.size());
  for (const auto& p : s.paths) {
    auto& row = hits[*g.index_of(p.start)];
    if (row.empty()) row.assign(g.size(), 0.0);
    row[*g.index_of(p.position)] += 1.0;
  }
  std::vector<CouplingRow> rows;
  std::size_t miss = 0;
  for (const auto& a : mu_h.atoms()) {
    const auto& h = hits[*g.index_of(a.x)];
    if (h.empty()) {
      ++miss;
      rows.push_back({a.x, a.w, DiscreteMeasure::dirac(a.x)});
    } else {
      rows.push_back({a.x, a.w, normalized(from_grid_weights(h, g))});
    }
  }
  if (missing) *missing = miss;
  return Coupling(std::move(rows));
}

}  // namespace shadows
