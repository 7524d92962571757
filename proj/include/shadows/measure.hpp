#pragma once

// Finite atomic measures on the real line, closed sets, and the elementary
// algebra on them (sums, scaling, restriction, Wasserstein-1 distance).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "shadows/errors.hpp"

namespace shadows {

/// Positions closer than this (relative to max(1,|x|)) are the same atom.
inline constexpr double kPositionTol = 1e-12;
/// Default absolute tolerance on potential values and weights.
inline constexpr double kPotentialTol = 1e-9;

inline bool same_position(double a, double b, double tol = kPositionTol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

struct Atom {
  double x;
  double w;
  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Nonnegative measure with finitely many atoms. Atoms are kept sorted by
/// position with strictly positive weights; the value is immutable once built.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;

  explicit DiscreteMeasure(std::vector<Atom> atoms) {
    for (const auto& a : atoms) {
      detail::require(std::isfinite(a.x) && std::isfinite(a.w),
                      "measure atom has non-finite position or weight");
      detail::require(a.w >= 0.0, "measure atom has negative weight " + std::to_string(a.w) +
                                      " at x=" + std::to_string(a.x));
    }
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.x < b.x; });
    atoms_.reserve(atoms.size());
    for (const auto& a : atoms) {
      if (a.w == 0.0) continue;
      if (!atoms_.empty() && same_position(atoms_.back().x, a.x)) {
        atoms_.back().w += a.w;
      } else {
        atoms_.push_back(a);
      }
    }
  }

  DiscreteMeasure(std::initializer_list<Atom> atoms) : DiscreteMeasure(std::vector<Atom>(atoms)) {}

  static DiscreteMeasure dirac(double x, double w = 1.0) { return DiscreteMeasure({Atom{x, w}}); }

  /// Equal weights 1/n (times `mass`) on the given positions.
  static DiscreteMeasure uniform(std::span<const double> xs, double mass = 1.0) {
    std::vector<Atom> atoms;
    atoms.reserve(xs.size());
    for (double x : xs) atoms.push_back({x, mass / static_cast<double>(xs.size())});
    return DiscreteMeasure(std::move(atoms));
  }

  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  const Atom& operator[](std::size_t i) const { return atoms_[i]; }

  double mass() const {
    double m = 0.0;
    for (const auto& a : atoms_) m += a.w;
    return m;
  }

  double first_moment() const {
    double m = 0.0;
    for (const auto& a : atoms_) m += a.w * a.x;
    return m;
  }

  /// Mean position; zero for the empty measure.
  double barycenter() const {
    const double m = mass();
    return m > 0.0 ? first_moment() / m : 0.0;
  }

  double second_moment() const {
    double m = 0.0;
    for (const auto& a : atoms_) m += a.w * a.x * a.x;
    return m;
  }

  /// Variance of the normalized measure.
  double variance() const {
    const double m = mass();
    if (m <= 0.0) return 0.0;
    const double c = barycenter();
    double s = 0.0;
    for (const auto& a : atoms_) s += a.w * (a.x - c) * (a.x - c);
    return s / m;
  }

  double min() const { return atoms_.front().x; }
  double max() const { return atoms_.back().x; }

  /// Weight of the atom at x (0 if none).
  double weight_at(double x) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x,
                               [](const Atom& a, double v) { return a.x < v && !same_position(a.x, v); });
    if (it != atoms_.end() && same_position(it->x, x)) return it->w;
    return 0.0;
  }

  std::vector<double> positions() const {
    std::vector<double> xs;
    xs.reserve(atoms_.size());
    for (const auto& a : atoms_) xs.push_back(a.x);
    return xs;
  }

  /// Drops atoms with weight <= min_weight.
  DiscreteMeasure pruned(double min_weight) const {
    std::vector<Atom> kept;
    for (const auto& a : atoms_)
      if (a.w > min_weight) kept.push_back(a);
    return DiscreteMeasure(std::move(kept));
  }

  std::string to_string() const {
    std::ostringstream os;
    os.precision(12);
    os << "{";
    for (std::size_t i = 0; i < atoms_.size(); ++i) os << (i ? ", " : "") << atoms_[i].w << "@" << atoms_[i].x;
    os << "}";
    return os.str();
  }

  friend bool operator==(const DiscreteMeasure&, const DiscreteMeasure&) = default;

 private:
  std::vector<Atom> atoms_;
};

/// Largest atomwise weight difference over the union of supports.
inline double max_atom_discrepancy(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  double d = 0.0;
  std::size_t i = 0, j = 0;
  const auto A = a.atoms(), B = b.atoms();
  while (i < A.size() || j < B.size()) {
    if (j == B.size() || (i < A.size() && A[i].x < B[j].x && !same_position(A[i].x, B[j].x))) {
      d = std::max(d, A[i++].w);
    } else if (i == A.size() || (!same_position(A[i].x, B[j].x) && B[j].x < A[i].x)) {
      d = std::max(d, B[j++].w);
    } else {
      d = std::max(d, std::abs(A[i++].w - B[j++].w));
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Closed sets

struct Interval {
  double lo;
  double hi;
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Finite union of disjoint closed intervals (points are degenerate intervals).
class ClosedSet {
 public:
  explicit ClosedSet(std::vector<Interval> comps) {
    detail::require(!comps.empty(), "closed set must be nonempty");
    for (const auto& c : comps)
      detail::require(std::isfinite(c.lo) && std::isfinite(c.hi) && c.lo <= c.hi,
                      "closed set component [" + std::to_string(c.lo) + "," + std::to_string(c.hi) +
                          "] is not a valid interval");
    std::sort(comps.begin(), comps.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (const auto& c : comps) {
      if (!comps_.empty() && c.lo <= comps_.back().hi) {
        comps_.back().hi = std::max(comps_.back().hi, c.hi);
      } else {
        comps_.push_back(c);
      }
    }
  }

  static ClosedSet points(std::span<const double> xs) {
    std::vector<Interval> c;
    for (double x : xs) c.push_back({x, x});
    return ClosedSet(std::move(c));
  }
  static ClosedSet points(std::initializer_list<double> xs) {
    return points(std::span<const double>(xs.begin(), xs.size()));
  }

  std::span<const Interval> components() const { return comps_; }
  double min() const { return comps_.front().lo; }
  double max() const { return comps_.back().hi; }

  bool contains(double x) const {
    auto it = std::upper_bound(comps_.begin(), comps_.end(), x,
                               [](double v, const Interval& c) { return v < c.lo; });
    if (it != comps_.end() && same_position(it->lo, x)) return true;
    if (it == comps_.begin()) return false;
    --it;
    return x <= it->hi || same_position(it->hi, x);
  }

  /// sup(F ∩ (-inf, x]) and inf(F ∩ [x, inf)); infinite when empty.
  std::pair<double, double> neighbors(double x) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    double below = -inf, above = inf;
    for (const auto& c : comps_) {
      if (c.lo <= x) below = std::min(c.hi, x);
      if (c.hi >= x) {
        above = std::max(c.lo, x);
        break;
      }
    }
    return {below, above};
  }

  /// True if every component of *this lies inside one component of `other`.
  bool is_subset_of(const ClosedSet& other) const {
    for (const auto& c : comps_) {
      bool inside = false;
      for (const auto& o : other.comps_) {
        if ((o.lo <= c.lo || same_position(o.lo, c.lo)) && (c.hi <= o.hi || same_position(c.hi, o.hi))) {
          inside = true;
          break;
        }
      }
      if (!inside) return false;
    }
    return true;
  }

  friend bool operator==(const ClosedSet&, const ClosedSet&) = default;

 private:
  std::vector<Interval> comps_;
};

/// (-inf, bound] when `upper_closed`, otherwise [bound, inf).
struct HalfLine {
  double bound;
  bool upper_closed = true;
  bool contains(double x) const { return upper_closed ? x <= bound : x >= bound; }
};

// ---------------------------------------------------------------------------
// Algebra

inline DiscreteMeasure add(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  std::vector<Atom> atoms(a.atoms().begin(), a.atoms().end());
  atoms.insert(atoms.end(), b.atoms().begin(), b.atoms().end());
  return DiscreteMeasure(std::move(atoms));
}

inline DiscreteMeasure scale(const DiscreteMeasure& a, double c) {
  detail::require(c >= 0.0 && std::isfinite(c), "scale factor must be a finite nonnegative number");
  std::vector<Atom> atoms;
  for (const auto& at : a.atoms()) atoms.push_back({at.x, at.w * c});
  return DiscreteMeasure(std::move(atoms));
}

template <typename Pred>
  requires std::predicate<Pred, double>
DiscreteMeasure restrict_to(const DiscreteMeasure& a, Pred&& inside) {
  std::vector<Atom> atoms;
  for (const auto& at : a.atoms())
    if (inside(at.x)) atoms.push_back(at);
  return DiscreteMeasure(std::move(atoms));
}

inline DiscreteMeasure restrict_to(const DiscreteMeasure& a, const ClosedSet& s) {
  return restrict_to(a, [&](double x) { return s.contains(x); });
}

inline DiscreteMeasure restrict_to(const DiscreteMeasure& a, const HalfLine& s) {
  return restrict_to(a, [&](double x) { return s.contains(x) || same_position(x, s.bound); });
}

/// a - b, where b must be a submeasure of a up to `tol`; residuals within
/// `tol` of zero are dropped.
inline DiscreteMeasure subtract(const DiscreteMeasure& a, const DiscreteMeasure& b, double tol = kPotentialTol) {
  std::vector<Atom> out;
  std::size_t j = 0;
  const auto B = b.atoms();
  for (const auto& at : a.atoms()) {
    double w = at.w;
    while (j < B.size() && B[j].x < at.x && !same_position(B[j].x, at.x)) {
      if (B[j].w > tol)
        throw DomainError("subtract: atom at x=" + std::to_string(B[j].x) + " is not in the minuend");
      ++j;
    }
    if (j < B.size() && same_position(B[j].x, at.x)) w -= B[j++].w;
    if (w < -tol)
      throw DomainError("subtract: result has negative weight " + std::to_string(w) + " at x=" +
                        std::to_string(at.x));
    if (w > tol) out.push_back({at.x, w});
  }
  for (; j < B.size(); ++j)
    if (B[j].w > tol) throw DomainError("subtract: atom at x=" + std::to_string(B[j].x) + " is not in the minuend");
  return DiscreteMeasure(std::move(out));
}

/// Sorted union of atom positions of a and b.
inline std::vector<double> merged_positions(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  std::vector<double> xs;
  xs.reserve(a.size() + b.size());
  for (const auto& at : a.atoms()) xs.push_back(at.x);
  for (const auto& at : b.atoms()) xs.push_back(at.x);
  std::sort(xs.begin(), xs.end());
  std::vector<double> out;
  for (double x : xs)
    if (out.empty() || !same_position(out.back(), x)) out.push_back(x);
  return out;
}

/// Wasserstein-1 distance, computed as the integral of |F_a - F_b| over the
/// merged breakpoint grid. Masses must agree within `tol`.
inline double wasserstein1(const DiscreteMeasure& a, const DiscreteMeasure& b, double tol = kPotentialTol) {
  const double ma = a.mass(), mb = b.mass();
  if (std::abs(ma - mb) > tol * std::max(1.0, std::max(ma, mb)))
    throw DomainError("wasserstein1: unequal masses " + std::to_string(ma) + " and " + std::to_string(mb));
  const auto A = a.atoms(), B = b.atoms();
  std::size_t i = 0, j = 0;
  double fa = 0.0, fb = 0.0, total = 0.0;
  double prev = 0.0;
  bool started = false;
  while (i < A.size() || j < B.size()) {
    double x;
    if (j == B.size() || (i < A.size() && A[i].x <= B[j].x))
      x = A[i].x;
    else
      x = B[j].x;
    if (started) total += std::abs(fa - fb) * (x - prev);
    while (i < A.size() && same_position(A[i].x, x)) fa += A[i++].w;
    while (j < B.size() && same_position(B[j].x, x)) fb += B[j++].w;
    prev = x;
    started = true;
  }
  return total;
}

}  // namespace shadows
