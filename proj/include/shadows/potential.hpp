#pragma once

// Piecewise-linear functions and potential functions U(x) = ∫|y - x| dm(y)
// of atomic measures, with the convex and positive order tests built on them.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "shadows/errors.hpp"
#include "shadows/measure.hpp"

namespace shadows {

/// Continuous piecewise-linear function on ℝ: linear interpolation between
/// breakpoints and affine continuation with the terminal slopes outside.
/// Convexity is not required (convex_envelope consumes nonconvex input).
class PiecewiseLinearFn {
 public:
  PiecewiseLinearFn(std::vector<double> xs, std::vector<double> ys, double left_slope, double right_slope)
      : xs_(std::move(xs)), ys_(std::move(ys)), left_slope_(left_slope), right_slope_(right_slope) {
    detail::require(!xs_.empty() && xs_.size() == ys_.size(),
                    "piecewise-linear function needs matching, nonempty breakpoints and values");
    for (std::size_t i = 1; i < xs_.size(); ++i)
      detail::require(xs_[i] > xs_[i - 1], "piecewise-linear breakpoints must be strictly increasing");
    detail::require(std::isfinite(left_slope_) && std::isfinite(right_slope_), "terminal slopes must be finite");
  }

  /// Same, with the interior segment slopes supplied (one per gap) instead of
  /// being recovered from the values.
  PiecewiseLinearFn(std::vector<double> xs, std::vector<double> ys, double left_slope, double right_slope,
                    std::vector<double> interior_slopes)
      : PiecewiseLinearFn(std::move(xs), std::move(ys), left_slope, right_slope) {
    detail::require(interior_slopes.size() + 1 == xs_.size(), "piecewise-linear function: one slope per gap");
    seg_slopes_ = std::move(interior_slopes);
  }

  static PiecewiseLinearFn zero() { return PiecewiseLinearFn({0.0}, {0.0}, 0.0, 0.0); }

  std::span<const double> breakpoints() const { return xs_; }
  std::span<const double> values() const { return ys_; }
  double left_slope() const { return left_slope_; }
  double right_slope() const { return right_slope_; }

  double operator()(double x) const {
    if (x <= xs_.front()) return ys_.front() + left_slope_ * (x - xs_.front());
    if (x >= xs_.back()) return ys_.back() + right_slope_ * (x - xs_.back());
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs_.begin());
    const double t = (x - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
    return ys_[i - 1] + t * (ys_[i] - ys_[i - 1]);
  }

  /// Slopes of all pieces from left to right: left terminal, interior segments, right terminal.
  std::vector<double> slopes() const {
    std::vector<double> s;
    s.reserve(xs_.size() + 1);
    s.push_back(left_slope_);
    if (!seg_slopes_.empty())
      s.insert(s.end(), seg_slopes_.begin(), seg_slopes_.end());
    else
      for (std::size_t i = 1; i < xs_.size(); ++i) s.push_back((ys_[i] - ys_[i - 1]) / (xs_[i] - xs_[i - 1]));
    s.push_back(right_slope_);
    return s;
  }

  /// Right slope minus left slope at each breakpoint.
  std::vector<double> slope_jumps() const {
    const auto s = slopes();
    std::vector<double> j(xs_.size());
    for (std::size_t i = 0; i < xs_.size(); ++i) j[i] = s[i + 1] - s[i];
    return j;
  }

  bool is_convex(double tol = kPotentialTol) const {
    for (double j : slope_jumps())
      if (j < -tol) return false;
    return true;
  }

 private:
  std::vector<double> xs_;
  std::vector<double> ys_;
  double left_slope_;
  double right_slope_;
  std::vector<double> seg_slopes_;  // empty: derived from the values
};

/// Sorted union of breakpoints.
inline std::vector<double> merged_breakpoints(const PiecewiseLinearFn& f, const PiecewiseLinearFn& g) {
  std::vector<double> xs(f.breakpoints().begin(), f.breakpoints().end());
  xs.insert(xs.end(), g.breakpoints().begin(), g.breakpoints().end());
  std::sort(xs.begin(), xs.end());
  std::vector<double> out;
  for (double x : xs)
    if (out.empty() || !same_position(out.back(), x)) out.push_back(x);
  return out;
}

/// f - g, exact on the merged breakpoints.
inline PiecewiseLinearFn difference(const PiecewiseLinearFn& f, const PiecewiseLinearFn& g) {
  auto xs = merged_breakpoints(f, g);
  std::vector<double> ys(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = f(xs[i]) - g(xs[i]);
  return PiecewiseLinearFn(std::move(xs), std::move(ys), f.left_slope() - g.left_slope(),
                           f.right_slope() - g.right_slope());
}

/// U_m(x) = Σ w_i |x_i - x|, with breakpoints at the atoms of m. The empty
/// measure maps to the zero function.
inline PiecewiseLinearFn potential_of(const DiscreteMeasure& m) {
  if (m.empty()) return PiecewiseLinearFn::zero();
  const auto atoms = m.atoms();
  const double total = m.mass();
  std::vector<double> xs(atoms.size()), ys(atoms.size()), slopes(atoms.size() - 1);
  double u0 = 0.0;
  for (const auto& a : atoms) u0 += a.w * (a.x - atoms.front().x);
  xs[0] = atoms[0].x;
  ys[0] = u0;
  double below = 0.0;  // mass at or left of the current breakpoint
  for (std::size_t i = 1; i < atoms.size(); ++i) {
    below += atoms[i - 1].w;
    xs[i] = atoms[i].x;
    slopes[i - 1] = 2.0 * below - total;
    ys[i] = ys[i - 1] + slopes[i - 1] * (atoms[i].x - atoms[i - 1].x);
  }
  return PiecewiseLinearFn(std::move(xs), std::move(ys), -total, total, std::move(slopes));
}

/// Inverse of potential_of: one atom per breakpoint with weight half the
/// slope jump. Jumps below -tol mean the input is not convex.
inline DiscreteMeasure measure_from_potential(const PiecewiseLinearFn& f, double tol = kPotentialTol,
                                              double drop_below = 1e-14) {
  const auto jumps = f.slope_jumps();
  const auto xs = f.breakpoints();
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (jumps[i] < -tol)
      throw DomainError("measure_from_potential: function is not convex at x=" + std::to_string(xs[i]) +
                        " (slope jump " + std::to_string(jumps[i]) + ")");
    const double w = 0.5 * jumps[i];
    if (w > drop_below) atoms.push_back({xs[i], w});
  }
  return DiscreteMeasure(std::move(atoms));
}

enum class Order { convex, positive };

/// Convex order (a ≤_c b) or positive order (a ≤₊ b).
///
/// Convex: requires equal mass and barycenter, then compares potentials at the
/// merged breakpoints (their difference is piecewise linear and vanishes at ±∞).
/// Positive: atomwise weight domination.
inline bool order_leq(const DiscreteMeasure& a, const DiscreteMeasure& b, Order kind, double tol = kPotentialTol) {
  if (kind == Order::positive) {
    for (const auto& at : a.atoms())
      if (at.w > b.weight_at(at.x) + tol) return false;
    return true;
  }
  const double ma = a.mass(), mb = b.mass();
  const double scale = std::max(1.0, std::max(ma, mb));
  if (std::abs(ma - mb) > tol * scale) return false;
  if (std::abs(a.first_moment() - b.first_moment()) > tol * scale * std::max(1.0, std::abs(a.barycenter())))
    return false;
  const auto ua = potential_of(a), ub = potential_of(b);
  for (double x : merged_positions(a, b))
    if (ua(x) > ub(x) + tol) return false;
  return true;
}

}  // namespace shadows
