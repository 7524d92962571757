#pragma once

// Empirical checks on simulated stopping times: the shadow-residual identity
//   Law(B_τ; τ ≥ T_l) = S^ν(Law(B_{T_l}; τ ≥ T_l)),
// the embedding itself, and the λ-sweep between Root and left-monotone.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "shadows/measure.hpp"
#include "shadows/potential.hpp"
#include "shadows/report.hpp"
#include "shadows/root.hpp"
#include "shadows/shadow.hpp"
#include "shadows/simulate.hpp"
#include "shadows/solvers.hpp"

namespace shadows {

struct ToleranceModel {
  double c1 = 2.0;
  double c2 = 5.0;
  double operator()(std::size_t n_paths, double h) const {
    return c1 * h + c2 / std::sqrt(static_cast<double>(n_paths));
  }
};

namespace detail {

inline std::string level_label(const std::string& what, double l) {
  std::ostringstream os;
  os << what << "[l=" << l << "]";
  return os.str();
}

}  // namespace detail

/// Per requested level: W1 between Law(B_τ; τ ≥ T_l) and the shadow in ν of
/// Law(B_{T_l}; τ ≥ T_l), both empirical with weight 1/n per path. Levels
/// with fewer than `min_paths` surviving paths are skipped with a note.
inline Report verify_shadow_residual(const SampleSet& s, const DiscreteMeasure& nu, double tol,
                                     std::size_t min_paths = 100) {
  Report r;
  r.name = "shadow_residual";
  const double w = 1.0 / static_cast<double>(s.paths.size());
  for (std::size_t i = 0; i < s.levels.size(); ++i) {
    std::vector<Atom> src, dst;
    for (const auto& p : s.paths) {
      if (std::isnan(p.at_level[i])) continue;
      src.push_back({p.at_level[i], w});
      dst.push_back({p.position, w});
    }
    if (src.size() < min_paths) {
      r.notes.push_back(detail::level_label("skipped", s.levels[i]) + ": only " + std::to_string(src.size()) +
                        " paths satisfy tau >= T_l");
      continue;
    }
    const DiscreteMeasure source(std::move(src)), target(std::move(dst));
    const auto sh = shadow_unchecked(source, nu);
    r.add(detail::level_label("residual", s.levels[i]), wasserstein1(target, sh, 1e-6), tol);
  }
  return r;
}

/// (a) W1 of the terminal law to ν, (b) E[τ] against Var ν − Var μ within
/// 3 standard errors plus 2h, (c) share of paths with τ > 0 that start where
/// U_μ = U_ν, against 1/√n. Pass the lattice versions of μ and ν.
inline Report verify_embedding(const SampleSet& s, const DiscreteMeasure& mu, const DiscreteMeasure& nu, double tol,
                               double tol_barrier = kPotentialTol) {
  Report r;
  r.name = "embedding";
  const std::size_t n = s.paths.size();
  const double w = 1.0 / static_cast<double>(n);
  std::vector<Atom> term;
  double mean = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    term.push_back({s.paths[i].position, w});
    const double t = s.tau(i);
    mean += t * w;
    sq += t * t * w;
  }
  r.add("terminal_w1", wasserstein1(DiscreteMeasure(std::move(term)), nu, 1e-6), tol);
  const double se = std::sqrt(std::max(0.0, sq - mean * mean) / static_cast<double>(n));
  const double budget = nu.variance() - mu.variance();
  r.add("expected_tau", std::abs(mean - budget), 3.0 * se + 2.0 * s.grid.h,
        "mean " + std::to_string(mean) + " vs " + std::to_string(budget));
  const auto um = potential_of(mu), uv = potential_of(nu);
  const double scale = tol_barrier * detail::spread_scale(nu);
  std::size_t bad = 0;
  for (const auto& p : s.paths)
    if (p.level > 0 && std::abs(um(p.start) - uv(p.start)) <= scale) ++bad;
  r.add("moved_from_contact", static_cast<double>(bad) * w, 1.0 / std::sqrt(static_cast<double>(n)));
  if (!s.warnings.empty()) r.notes.insert(r.notes.end(), s.warnings.begin(), s.warnings.end());
  return r;
}

struct SweepPoint {
  double lambda = 0.0;  // snapped
  double d_r = 0.0;     // distance to the Root coupling
  double d_lm = 0.0;    // distance to the left-curtain coupling
  double d_r_mc = std::numeric_limits<double>::quiet_NaN();
  double d_lm_mc = std::numeric_limits<double>::quiet_NaN();
};

struct SweepResult {
  double horizon = 0.0;
  std::vector<SweepPoint> points;
};

/// Distances of the λ-interpolated coupling to the Root and left-curtain
/// couplings. A non-finite λ stands for the Root horizon. With n_paths > 0
/// the same distances are also measured on simulated (B₀, B_τ).
inline SweepResult convergence_sweep(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                     const std::vector<double>& lambdas, const GridSpec& grid,
                                     std::size_t n_paths = 0, std::uint64_t seed = 1) {
  SweepResult out;
  const auto root = root_solve(mu, nu, grid);
  out.horizon = root.horizon();
  const auto rc = root_coupling(root);
  const auto lm = left_curtain(root.mu, root.nu);
  for (double lam : lambdas) {
    const double l = std::isfinite(lam) ? lam : out.horizon;
    const auto in = interpolate_solve(mu, nu, l, grid, &root, n_paths > 0);
    SweepPoint p;
    p.lambda = in.spec.lambda;
    p.d_r = coupling_distance(in.coupling, rc);
    p.d_lm = coupling_distance(in.coupling, lm);
    if (n_paths > 0) {
      SimOptions opt;
      opt.n_paths = n_paths;
      opt.seed = seed;
      const auto emp = empirical_coupling(simulate_interpolated(in, {}, opt), root.mu);
      p.d_r_mc = coupling_distance(emp, rc);
      p.d_lm_mc = coupling_distance(emp, lm);
    }
    out.points.push_back(p);
  }
  return out;
}

}  // namespace shadows
