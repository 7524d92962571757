#pragma once

// Space-time lattice for the random-walk approximation of Brownian motion:
// positions k·h for integer k, time step Δ = h².

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shadows/errors.hpp"
#include "shadows/measure.hpp"

namespace shadows {

struct GridSpec {
  double h = 0.05;
  std::int64_t k_min = 0;
  std::int64_t k_max = 0;
  std::size_t n_levels = 0;  // hard cap on time levels

  double dt() const { return h * h; }
  std::size_t size() const { return static_cast<std::size_t>(k_max - k_min + 1); }
  double x(std::size_t j) const { return static_cast<double>(k_min + static_cast<std::int64_t>(j)) * h; }
  double x_min() const { return static_cast<double>(k_min) * h; }
  double x_max() const { return static_cast<double>(k_max) * h; }

  /// Grid index of a lattice position, if x is one (within 1e-9·h).
  std::optional<std::size_t> index_of(double x) const {
    const double k = std::round(x / h);
    if (std::abs(x - k * h) > 1e-9 * h) return std::nullopt;
    const auto ki = static_cast<std::int64_t>(k);
    if (ki < k_min || ki > k_max) return std::nullopt;
    return static_cast<std::size_t>(ki - k_min);
  }

  std::size_t level_of(double t) const { return static_cast<std::size_t>(std::llround(t / dt())); }

  /// Grid covering supp(μ) ∪ supp(ν) with a margin of `margin_factor`·spread
  /// on either side. A zero level cap picks
  /// 50·max(Var ν − Var μ, spread(ν)²/4)/Δ + 100.
  static GridSpec covering(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double h,
                           double margin_factor = 2.0, std::size_t n_levels = 0) {
    detail::require(h > 0.0 && std::isfinite(h), "grid step h must be positive");
    detail::require(!mu.empty() && !nu.empty(), "grid needs nonempty measures");
    const double lo = std::min(mu.min(), nu.min());
    const double hi = std::max(mu.max(), nu.max());
    const double spread = std::max(hi - lo, 1.0);
    GridSpec g;
    g.h = h;
    g.k_min = static_cast<std::int64_t>(std::floor((lo - margin_factor * spread) / h)) - 1;
    g.k_max = static_cast<std::int64_t>(std::ceil((hi + margin_factor * spread) / h)) + 1;
    if (n_levels == 0) {
      // exit from an interval of width L takes ~L² even when the variance gap
      // is small, so the support spread also bounds the horizon from below
      const double span = nu.max() - nu.min();
      const double budget = std::max({nu.variance() - mu.variance(), 0.25 * span * span, g.dt()});
      n_levels = static_cast<std::size_t>(std::ceil(50.0 * budget / g.dt())) + 100;
    }
    g.n_levels = n_levels;
    return g;
  }
};

/// Moves a measure onto the lattice with the martingale kernel: atoms at a
/// lattice point stay, others split between the two neighbouring points with
/// the barycenter preserved.
inline DiscreteMeasure to_grid(const DiscreteMeasure& m, const GridSpec& g) {
  std::vector<Atom> out;
  for (const auto& a : m.atoms()) {
    const double k = std::round(a.x / g.h);
    if (std::abs(a.x - k * g.h) <= 1e-9 * g.h) {
      out.push_back({k * g.h, a.w});
      continue;
    }
    const double lo = std::floor(a.x / g.h), hi = lo + 1.0;
    const double t = (a.x - lo * g.h) / g.h;
    out.push_back({lo * g.h, a.w * (1.0 - t)});
    out.push_back({hi * g.h, a.w * t});
  }
  DiscreteMeasure r(std::move(out));
  for (const auto& a : r.atoms())
    if (!g.index_of(a.x))
      throw DomainError("to_grid: atom at x=" + std::to_string(a.x) + " falls outside the grid [" +
                        std::to_string(g.x_min()) + ", " + std::to_string(g.x_max()) + "]");
  return r;
}

/// Dense weight vector over grid indices for a lattice measure.
inline std::vector<double> grid_weights(const DiscreteMeasure& m, const GridSpec& g) {
  std::vector<double> w(g.size(), 0.0);
  for (const auto& a : m.atoms()) {
    const auto j = g.index_of(a.x);
    if (!j) throw DomainError("grid_weights: atom at x=" + std::to_string(a.x) + " is not a grid point");
    w[*j] += a.w;
  }
  return w;
}

inline DiscreteMeasure from_grid_weights(const std::vector<double>& w, const GridSpec& g, double drop_below = 0.0) {
  std::vector<Atom> atoms;
  for (std::size_t j = 0; j < w.size(); ++j)
    if (w[j] > drop_below) atoms.push_back({g.x(j), w[j]});
  return DiscreteMeasure(std::move(atoms));
}

}  // namespace shadows
