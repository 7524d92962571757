#pragma once

// Shadows S^ν(η): the ≤_c-smallest ξ with η ≤_c ξ ≤₊ ν. The main route uses
// the potential identity U_S = U_ν − conv(U_ν − U_η); an LP over ν's atoms
// gives an independent brute-force answer. Obstructed shadows and the
// left-curtain coupling are built by iterating shadows.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "shadows/errors.hpp"
#include "shadows/lp.hpp"
#include "shadows/measure.hpp"
#include "shadows/potential.hpp"
#include "shadows/report.hpp"

namespace shadows {

/// Largest convex minorant of a piecewise-linear function.
///
/// Lower hull of the breakpoints (monotone chain), then hull vertices whose
/// subdifferential misses [left_slope, right_slope] are dropped and the rays
/// keep the input's terminal slopes. Requires left_slope <= right_slope,
/// otherwise no affine minorant exists.
inline PiecewiseLinearFn convex_envelope(const PiecewiseLinearFn& f) {
  const double sl = f.left_slope(), sr = f.right_slope();
  if (sl > sr + kPotentialTol)
    throw DomainError("convex_envelope: terminal slopes (" + std::to_string(sl) + ", " + std::to_string(sr) +
                      ") admit no convex minorant");
  const auto xs = f.breakpoints();
  const auto ys = f.values();
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2], b = hull.back();
      const double cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
      if (cross > 0.0) break;
      hull.pop_back();
    }
    hull.push_back(i);
  }
  // edge[k] = slope between hull[k-1] and hull[k]
  const std::size_t k = hull.size();
  auto edge = [&](std::size_t j) {
    if (j == 0) return -std::numeric_limits<double>::infinity();
    if (j == k) return std::numeric_limits<double>::infinity();
    return (ys[hull[j]] - ys[hull[j - 1]]) / (xs[hull[j]] - xs[hull[j - 1]]);
  };
  std::size_t first = 0;
  while (first + 1 < k && edge(first + 1) < sl) ++first;
  std::size_t last = k - 1;
  while (last > first && edge(last) > sr) --last;
  std::vector<double> hx, hy;
  for (std::size_t j = first; j <= last; ++j) {
    hx.push_back(xs[hull[j]]);
    hy.push_back(ys[hull[j]]);
  }
  return PiecewiseLinearFn(std::move(hx), std::move(hy), sl, std::max(sl, sr));
}

namespace detail {

inline double spread_scale(const DiscreteMeasure& m) {
  return m.empty() ? 1.0 : std::max(1.0, m.mass() * std::max({1.0, std::abs(m.min()), std::abs(m.max())}));
}

/// Clamps weights that exceed ν's by at most tol and drops stray atoms
/// outside supp(ν) lighter than tol.
inline DiscreteMeasure snap_below(const DiscreteMeasure& s, const DiscreteMeasure& nu, double tol) {
  std::vector<Atom> atoms;
  for (const auto& a : s.atoms()) {
    const double cap = nu.weight_at(a.x);
    if (cap == 0.0 && a.w <= tol) continue;
    atoms.push_back({a.x, (a.w > cap && a.w <= cap + tol) ? cap : a.w});
  }
  return DiscreteMeasure(std::move(atoms));
}

}  // namespace detail

/// Potential-formula shadow without the feasibility postconditions. When no
/// ξ with η ≤_c ξ ≤₊ ν exists, the result still satisfies ≤₊ ν and has η's
/// mass, but its barycenter may differ from η's. Used on empirical data.
inline DiscreteMeasure shadow_unchecked(const DiscreteMeasure& eta, const DiscreteMeasure& nu,
                                        double tol = kPotentialTol) {
  if (eta.empty()) return {};
  if (eta.mass() > nu.mass() * (1.0 + tol) + tol)
    throw InfeasibleError("shadow: mass(eta)=" + std::to_string(eta.mass()) + " exceeds mass(nu)=" +
                          std::to_string(nu.mass()));
  const auto unu = potential_of(nu);
  const auto env = convex_envelope(difference(unu, potential_of(eta)));
  const auto us = difference(unu, env);
  const double scale = detail::spread_scale(nu);
  return detail::snap_below(measure_from_potential(us, tol * scale), nu, tol);
}

/// Shadow of η in ν with hard postconditions: mass and barycenter of η,
/// S ≤₊ ν and η ≤_c S. Throws InfeasibleError naming the failed check.
inline DiscreteMeasure shadow(const DiscreteMeasure& eta, const DiscreteMeasure& nu, double tol = kPotentialTol) {
  DiscreteMeasure s;
  try {
    s = shadow_unchecked(eta, nu, tol);
  } catch (const DomainError& e) {
    throw InfeasibleError(std::string("shadow: ") + e.what());
  }
  const double scale = detail::spread_scale(nu);
  if (std::abs(s.mass() - eta.mass()) > tol * scale)
    throw InfeasibleError("shadow infeasible: mass check failed (" + std::to_string(s.mass()) + " vs " +
                          std::to_string(eta.mass()) + ")");
  if (std::abs(s.first_moment() - eta.first_moment()) > tol * scale)
    throw InfeasibleError("shadow infeasible: barycenter check failed (" + std::to_string(s.barycenter()) + " vs " +
                          std::to_string(eta.barycenter()) + ")");
  if (!order_leq(s, nu, Order::positive, tol))
    throw InfeasibleError("shadow infeasible: submeasure check S <=+ nu failed");
  const auto ue = potential_of(eta), us = potential_of(s);
  for (double x : merged_positions(eta, s))
    if (ue(x) > us(x) + tol * scale)
      throw InfeasibleError("shadow infeasible: convex-order check eta <=c S failed at x=" + std::to_string(x));
  return s;
}

/// Brute-force shadow: minimize Σ x² ξ(x) over ξ on ν's atoms with
/// ξ ≤ ν atomwise, mass and first moment of η, and U_η ≤ U_ξ at every
/// breakpoint. The shadow is the unique minimizer since ∫x² separates
/// ≤_c-comparable measures.
inline DiscreteMeasure shadow_lp_oracle(const DiscreteMeasure& eta, const DiscreteMeasure& nu,
                                        std::size_t max_atoms = 200) {
  if (eta.empty()) return {};
  detail::require(nu.size() <= max_atoms, "shadow_lp_oracle: nu has too many atoms for the dense oracle");
  const auto atoms = nu.atoms();
  const std::size_t n = atoms.size();
  lp::Problem p;
  p.cost.resize(n);
  p.upper.resize(n);
  lp::Constraint mass{std::vector<double>(n, 1.0), lp::Sense::eq, eta.mass()};
  lp::Constraint moment{std::vector<double>(n), lp::Sense::eq, eta.first_moment()};
  for (std::size_t j = 0; j < n; ++j) {
    p.cost[j] = atoms[j].x * atoms[j].x;
    p.upper[j] = atoms[j].w;
    moment.coef[j] = atoms[j].x;
  }
  p.rows.push_back(std::move(mass));
  p.rows.push_back(std::move(moment));
  const auto ue = potential_of(eta);
  for (double b : merged_positions(eta, nu)) {
    lp::Constraint c{std::vector<double>(n), lp::Sense::geq, ue(b)};
    for (std::size_t j = 0; j < n; ++j) c.coef[j] = std::abs(atoms[j].x - b);
    p.rows.push_back(std::move(c));
  }
  const auto res = lp::solve(p);
  if (res.status != lp::Status::optimal) throw InfeasibleError("shadow_lp_oracle: linear program is infeasible");
  std::vector<Atom> out;
  for (std::size_t j = 0; j < n; ++j)
    if (res.x[j] > 1e-13) out.push_back({atoms[j].x, std::min(res.x[j], atoms[j].w)});
  return DiscreteMeasure(std::move(out));
}

struct AssociativityReport {
  DiscreteMeasure joint;     // S^ν(η₁ + η₂)
  DiscreteMeasure stepwise;  // S^ν(η₁) + S^{ν − S^ν(η₁)}(η₂)
  double discrepancy = 0.0;
};

inline AssociativityReport shadow_associativity_check(const DiscreteMeasure& eta1, const DiscreteMeasure& eta2,
                                                      const DiscreteMeasure& nu, double tol = kPotentialTol) {
  AssociativityReport r;
  r.joint = shadow(add(eta1, eta2), nu, tol);
  const auto s1 = shadow(eta1, nu, tol);
  const auto rest = subtract(nu, s1, tol);
  r.stepwise = add(s1, shadow(eta2, rest, tol));
  r.discrepancy = max_atom_discrepancy(r.joint, r.stepwise);
  return r;
}

/// Nested shadows S^{ν_i}(… S^{ν_1}(η) …) for i = 1..n.
inline std::vector<DiscreteMeasure> obstructed_shadow(const DiscreteMeasure& eta,
                                                      const std::vector<DiscreteMeasure>& nus,
                                                      double tol = kPotentialTol) {
  std::vector<DiscreteMeasure> stages;
  DiscreteMeasure cur = eta;
  for (std::size_t i = 0; i < nus.size(); ++i) {
    try {
      cur = shadow(cur, nus[i], tol);
    } catch (const InfeasibleError& e) {
      throw InfeasibleError("obstructed shadow stage " + std::to_string(i + 1) + ": " + e.what());
    }
    stages.push_back(cur);
  }
  return stages;
}

// ---------------------------------------------------------------------------
// Couplings

struct CouplingRow {
  double x;                     // source atom
  double w;                     // source weight
  DiscreteMeasure conditional;  // law of the target given the source, mass 1
};

/// Joint law of (source, target) given by source atoms and conditionals.
class Coupling {
 public:
  Coupling() = default;
  explicit Coupling(std::vector<CouplingRow> rows) : rows_(std::move(rows)) {
    std::sort(rows_.begin(), rows_.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
  }

  std::span<const CouplingRow> rows() const { return rows_; }

  DiscreteMeasure source_marginal() const {
    std::vector<Atom> a;
    for (const auto& r : rows_) a.push_back({r.x, r.w});
    return DiscreteMeasure(std::move(a));
  }

  DiscreteMeasure target_marginal() const { return target_marginal_below(std::numeric_limits<double>::infinity()); }

  /// Law of the target restricted to sources <= q.
  DiscreteMeasure target_marginal_below(double q) const {
    std::vector<Atom> a;
    for (const auto& r : rows_) {
      if (r.x > q && !same_position(r.x, q)) continue;
      for (const auto& c : r.conditional.atoms()) a.push_back({c.x, c.w * r.w});
    }
    return DiscreteMeasure(std::move(a));
  }

  /// max over rows of |barycenter(conditional) − source|.
  double martingale_defect() const {
    double d = 0.0;
    for (const auto& r : rows_) d = std::max(d, std::abs(r.conditional.barycenter() - r.x));
    return d;
  }

 private:
  std::vector<CouplingRow> rows_;
};

/// Σ_x w(x) · W1(conditional_a(x), conditional_b(x)); the couplings must share
/// source atoms.
inline double coupling_distance(const Coupling& a, const Coupling& b) {
  const auto ra = a.rows(), rb = b.rows();
  detail::require(ra.size() == rb.size(), "coupling_distance: couplings have different source atoms");
  double d = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    detail::require(same_position(ra[i].x, rb[i].x, 1e-9), "coupling_distance: source atoms differ");
    d += ra[i].w * wasserstein1(ra[i].conditional, rb[i].conditional, 1e-6);
  }
  return d;
}

/// Conditional (piece / weight) renormalized to mass 1.
inline DiscreteMeasure normalized(const DiscreteMeasure& piece) {
  const double m = piece.mass();
  detail::require(m > 0.0, "cannot normalize an empty measure");
  return scale(piece, 1.0 / m);
}

namespace detail {

/// Two-point martingale kernel from x onto its nearest atoms of ν; δ_x when
/// x is an atom or outside ν's hull.
inline DiscreteMeasure nearest_split(double x, const DiscreteMeasure& nu) {
  const auto at = nu.atoms();
  auto hi = std::lower_bound(at.begin(), at.end(), x, [](const Atom& a, double v) { return a.x < v; });
  if (hi == at.end() || hi == at.begin() || same_position(hi->x, x)) return DiscreteMeasure::dirac(x);
  const double b = hi->x, a = std::prev(hi)->x;
  return DiscreteMeasure({{a, (b - x) / (b - a)}, {b, (x - a) / (b - a)}});
}

/// Removes a barycenter defect left by rounding: weight moves between the
/// atoms nearest to x on either side, mass unchanged.
inline DiscreteMeasure recenter(const DiscreteMeasure& c, double x) {
  const double defect = c.barycenter() - x;
  if (defect == 0.0) return c;
  std::vector<Atom> at(c.atoms().begin(), c.atoms().end());
  auto hi = std::upper_bound(at.begin(), at.end(), x, [](double v, const Atom& a) { return v < a.x; });
  if (hi == at.begin() || hi == at.end()) return c;
  auto lo = std::prev(hi);
  // shifting t from lo to hi moves the barycenter by t·(hi − lo)
  const double t = -defect / (hi->x - lo->x);
  if (lo->w - t < 0.0 || hi->w + t < 0.0) return c;
  lo->w -= t;
  hi->w += t;
  return DiscreteMeasure(std::move(at));
}

}  // namespace detail

/// Left-curtain coupling of atomic μ ≤_c ν: S_i = S^ν(μ|(−∞, x_i]) and the
/// conditional at x_i is (S_i − S_{i−1}) / μ({x_i}). `n_quantiles` is only
/// relevant for non-atomic sources and is ignored here. Atoms lighter than
/// 1e-12·mass(μ) get the nearest two-point split instead, since the difference
/// of shadows is pure rounding at that scale. For light atoms above that the
/// increments at rounding level are dropped and the row is recentred on x.
inline Coupling left_curtain(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int n_quantiles = 0,
                             double tol = kPotentialTol) {
  (void)n_quantiles;
  const double tiny = 1e-12 * std::max(1.0, mu.mass());
  const double noise = 1e-13 * std::max(1.0, nu.mass());  // rounding level of shadow weights
  std::vector<CouplingRow> rows;
  DiscreteMeasure prev;
  std::vector<Atom> cumulative;
  for (const auto& a : mu.atoms()) {
    cumulative.push_back(a);
    const auto cur = shadow(DiscreteMeasure(cumulative), nu, tol);
    if (a.w <= tiny) {
      rows.push_back({a.x, a.w, detail::nearest_split(a.x, nu)});
    } else {
      std::vector<Atom> piece;
      for (double x : merged_positions(cur, prev)) {
        const double d = cur.weight_at(x) - prev.weight_at(x);
        if (d > noise) piece.push_back({x, d});
      }
      rows.push_back({a.x, a.w, detail::recenter(normalized(DiscreteMeasure(std::move(piece))), a.x)});
    }
    prev = cur;
  }
  return Coupling(std::move(rows));
}

}  // namespace shadows
