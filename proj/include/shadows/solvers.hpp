#pragma once

// Left-monotone, interpolated and multi-marginal solvers on top of the Root
// scheme and the shadow engine. All work happens on the lattice: μ and ν are
// moved onto the grid first, couplings have the gridded μ as source.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "shadows/errors.hpp"
#include "shadows/grid.hpp"
#include "shadows/measure.hpp"
#include "shadows/parallel.hpp"
#include "shadows/root.hpp"
#include "shadows/shadow.hpp"
#include "shadows/time_change.hpp"

namespace shadows {

/// Smallest lattice window holding x and supp(target); the window edges are
/// absorbing, which is harmless because nothing is embedded beyond them.
inline GridSpec hull_grid(double x, const DiscreteMeasure& target, double h) {
  GridSpec g;
  g.h = h;
  g.k_min = static_cast<std::int64_t>(std::floor(std::min(x, target.min()) / h + 1e-9));
  g.k_max = static_cast<std::int64_t>(std::ceil(std::max(x, target.max()) / h - 1e-9));
  const double span = target.max() - target.min();
  const double var = std::max({target.variance(), 0.25 * span * span, g.dt()});
  g.n_levels = static_cast<std::size_t>(std::ceil(60.0 * var / g.dt())) + 100;
  return g;
}

/// Root sub-solves embedding each conditional of `c` from its source point.
inline std::vector<RootSolution> embedding_plans(const Coupling& c, double h) {
  const auto rows = c.rows();
  std::vector<RootSolution> plans(rows.size());
  RootOptions opt;
  opt.keep_surface = false;
  parallel_for(rows.size(), [&](std::size_t i) {
    const auto& r = rows[i];
    plans[i] = root_solve(DiscreteMeasure::dirac(r.x), r.conditional, hull_grid(r.x, r.conditional, h), opt);
  });
  return plans;
}

struct LmSolution {
  GridSpec grid;
  DiscreteMeasure mu, nu;  // gridded
  Coupling coupling;       // left curtain
  std::vector<RootSolution> plans;  // one per coupling row
};

inline LmSolution lm_solve(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const GridSpec& grid,
                           bool build_plans = true, double tol = kPotentialTol) {
  LmSolution s;
  s.grid = grid;
  s.mu = to_grid(mu, grid);
  s.nu = to_grid(nu, grid);
  s.coupling = left_curtain(s.mu, s.nu, 0, tol);
  if (build_plans) s.plans = embedding_plans(s.coupling, grid.h);
  return s;
}

struct InterpolatedSolution {
  InterpolatedSpec spec;     // λ snapped to the lattice
  std::size_t level = 0;     // λ / Δ
  bool degenerate = false;   // every path has stopped by λ; no LM stage
  RootSolution root;
  DiscreteMeasure eta;       // Law(B_{λ∧τ_r})
  Coupling lm_stage;         // left curtain of (η, ν)
  Coupling coupling;         // (B₀, B_ρ)
  std::vector<RootSolution> plans;  // one per lm_stage row
};

/// Root up to level λ, then the left curtain from Law(B_{λ∧τ_r}) to ν.
/// Pass a precomputed Root solution of the same (μ, ν, grid) to reuse it.
inline InterpolatedSolution interpolate_solve(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double lambda,
                                              const GridSpec& grid, const RootSolution* root = nullptr,
                                              bool build_plans = true, double tol = kPotentialTol) {
  detail::require(lambda > 0.0 && std::isfinite(lambda), "interpolate: lambda must be positive and finite");
  InterpolatedSolution s;
  s.root = root ? *root : root_solve(mu, nu, grid);
  const auto& r = s.root;
  const std::size_t n = grid.size();
  s.level = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(lambda / grid.dt())));
  s.spec.lambda = static_cast<double>(s.level) * grid.dt();
  s.degenerate = s.level >= r.levels();

  std::vector<std::vector<double>> reach;  // per source: law of B_{λ∧τ}
  std::vector<double> eta(n, 0.0);
  for (const auto& a : r.mu.atoms()) {
    std::vector<double> e(n, 0.0);
    e[*grid.index_of(a.x)] = 1.0;
    auto p = propagate(r, e, std::min(s.level, r.levels()));
    for (std::size_t j = 0; j < n; ++j) {
      p.stopped[j] += p.live[j];
      eta[j] += a.w * p.stopped[j];
    }
    reach.push_back(std::move(p.stopped));
  }
  s.eta = from_grid_weights(eta, grid);
  if (s.degenerate) {
    std::vector<CouplingRow> id;
    for (const auto& a : s.eta.atoms()) id.push_back({a.x, a.w, DiscreteMeasure::dirac(a.x)});
    s.lm_stage = Coupling(std::move(id));
  } else {
    s.lm_stage = left_curtain(s.eta, r.nu, 0, tol);
  }

  const auto stage = s.lm_stage.rows();
  std::vector<std::size_t> row_of(n, stage.size());
  for (std::size_t i = 0; i < stage.size(); ++i) row_of[*grid.index_of(stage[i].x)] = i;
  std::vector<CouplingRow> rows;
  std::size_t src = 0;
  for (const auto& a : r.mu.atoms()) {
    std::vector<double> target(n, 0.0);
    const auto& pr = reach[src++];
    for (std::size_t j = 0; j < n; ++j) {
      if (pr[j] == 0.0 || row_of[j] == stage.size()) continue;
      for (const auto& c : stage[row_of[j]].conditional.atoms()) target[*grid.index_of(c.x)] += pr[j] * c.w;
    }
    rows.push_back({a.x, a.w, normalized(from_grid_weights(target, grid))});
  }
  s.coupling = Coupling(std::move(rows));
  if (build_plans && !s.degenerate) s.plans = embedding_plans(s.lm_stage, grid.h);
  return s;
}

/// Multi-marginal left-monotone couplings for μ ≤_c ν₁ ≤_c … ≤_c ν_n. Source
/// atoms are processed left to right; the piece of atom k at stage i is the
/// shadow of its stage-(i−1) piece in what atoms 1..k−1 left of ν_i.
inline std::vector<Coupling> multi_marginal_lm(const DiscreteMeasure& mu, const std::vector<DiscreteMeasure>& nus,
                                               double tol = kPotentialTol) {
  detail::require(!nus.empty(), "multi_marginal_lm: need at least one target");
  const double order_tol = tol * detail::spread_scale(nus.back());
  for (std::size_t i = 0; i < nus.size(); ++i)
    if (!order_leq(i == 0 ? mu : nus[i - 1], nus[i], Order::convex, order_tol))
      throw DomainError("multi_marginal_lm: convex order fails between stage " + std::to_string(i) + " and stage " +
                        std::to_string(i + 1));
  std::vector<DiscreteMeasure> remaining = nus;
  std::vector<std::vector<CouplingRow>> rows(nus.size());
  for (const auto& a : mu.atoms()) {
    DiscreteMeasure piece = DiscreteMeasure::dirac(a.x, a.w);
    for (std::size_t i = 0; i < nus.size(); ++i) {
      try {
        piece = shadow(piece, remaining[i], tol);
      } catch (const InfeasibleError& e) {
        throw InfeasibleError("multi_marginal_lm stage " + std::to_string(i + 1) + ": " + e.what());
      }
      remaining[i] = subtract(remaining[i], piece, 1e-10 * std::max(1.0, nus[i].mass()));
      rows[i].push_back({a.x, a.w, normalized(piece)});
    }
  }
  std::vector<Coupling> out;
  for (auto& r : rows) out.emplace_back(std::move(r));
  return out;
}

}  // namespace shadows
