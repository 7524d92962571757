#pragma once

// Kellerer dilation K^F: points of F stay put, every other point is split onto
// its nearest neighbours x⁻ < x < x⁺ in F with barycenter x.

#include <string>
#include <utility>
#include <vector>

#include "shadows/errors.hpp"
#include "shadows/measure.hpp"
#include "shadows/shadow.hpp"

namespace shadows {

/// m K^F. Every atom must lie in F or strictly between two points of F.
inline DiscreteMeasure dilate(const DiscreteMeasure& m, const ClosedSet& f) {
  std::vector<Atom> out;
  out.reserve(2 * m.size());
  for (const auto& a : m.atoms()) {
    if (f.contains(a.x)) {
      out.push_back(a);
      continue;
    }
    const auto [lo, hi] = f.neighbors(a.x);
    if (!std::isfinite(lo) || !std::isfinite(hi))
      throw DomainError("dilate: atom at x=" + std::to_string(a.x) + " lies outside the hull [" +
                        std::to_string(f.min()) + ", " + std::to_string(f.max()) + "] of F");
    const double span = hi - lo;
    out.push_back({lo, a.w * (hi - a.x) / span});
    out.push_back({hi, a.w * (a.x - lo) / span});
  }
  return DiscreteMeasure(std::move(out));
}

struct DecompositionReport {
  DiscreteMeasure nu;                    // Σ w_i μ_i K^{F_i}
  std::vector<double> prefix_discrepancy;  // per prefix k
  double max_discrepancy = 0.0;
};

/// Compares S^ν(Σ_{i≤k} w_i μ_i) with Σ_{i≤k} w_i μ_i K^{F_i} for every
/// prefix k, where ν = Σ_i w_i μ_i K^{F_i} and F_1 ⊇ F_2 ⊇ ….
inline DecompositionReport shadow_decomposition_check(const std::vector<std::pair<double, DiscreteMeasure>>& mus,
                                                      const std::vector<ClosedSet>& fs,
                                                      double tol = kPotentialTol) {
  detail::require(mus.size() == fs.size() && !mus.empty(),
                  "shadow_decomposition_check: need one closed set per stage");
  for (std::size_t i = 1; i < fs.size(); ++i)
    if (!fs[i].is_subset_of(fs[i - 1]))
      throw DomainError("shadow_decomposition_check: closed sets are not decreasing at stage " +
                        std::to_string(i + 1));
  std::vector<DiscreteMeasure> images;
  DecompositionReport r;
  for (std::size_t i = 0; i < mus.size(); ++i) {
    images.push_back(scale(dilate(mus[i].second, fs[i]), mus[i].first));
    r.nu = add(r.nu, images.back());
  }
  DiscreteMeasure source, expected;
  for (std::size_t k = 0; k < mus.size(); ++k) {
    source = add(source, scale(mus[k].second, mus[k].first));
    expected = add(expected, images[k]);
    const double d = max_atom_discrepancy(shadow(source, r.nu, tol), expected);
    r.prefix_discrepancy.push_back(d);
    r.max_discrepancy = std::max(r.max_discrepancy, d);
  }
  return r;
}

}  // namespace shadows
