#pragma once

// Time changes T_l and their level processes X_t, linked by
//   X_t ≥ l  ⇔  T_l ≤ t.
// Root:          T_l = l,  X_t = t.
// Left-monotone: T_l = 0 if exp(−B₀) ≥ l, else ∞;  X_t = exp(−B₀).
// Interpolated:  Root up to level λ, then the left-monotone rule driven by
//                the position B_{λ∧τ} reached at that level:
//                T_l = l (l ≤ λ);  λ if exp(−B_{λ∧τ}) ≥ l − λ, else ∞  (l > λ)
//                X_t = t (t < λ);  λ + exp(−B_{λ∧τ})                  (t ≥ λ)

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "shadows/errors.hpp"
#include "shadows/measure.hpp"

namespace shadows {

struct RootSpec {};
struct LeftMonotoneSpec {};
struct InterpolatedSpec {
  double lambda = 0.0;
};
struct MultiMarginalSpec {
  std::vector<DiscreteMeasure> targets;
};

using TimeChangeSpec = std::variant<RootSpec, LeftMonotoneSpec, InterpolatedSpec, MultiMarginalSpec>;

inline std::string spec_name(const TimeChangeSpec& s) {
  switch (s.index()) {
    case 0: return "root";
    case 1: return "lm";
    case 2: return "interpolated";
    default: return "multi";
  }
}

/// What a path has to reveal for T_l and X_t to be evaluated.
struct PathKey {
  double start = 0.0;  // B₀
  double pivot = 0.0;  // B_{λ∧τ}; only read by the interpolated spec
};

inline constexpr double kNever = std::numeric_limits<double>::infinity();

inline double time_change(const TimeChangeSpec& spec, const PathKey& p, double l) {
  if (std::holds_alternative<RootSpec>(spec)) return l;
  if (const auto* in = std::get_if<InterpolatedSpec>(&spec)) {
    if (l <= in->lambda) return l;
    return std::exp(-p.pivot) >= l - in->lambda ? in->lambda : kNever;
  }
  return std::exp(-p.start) >= l ? 0.0 : kNever;
}

inline double level_process(const TimeChangeSpec& spec, const PathKey& p, double t) {
  if (std::holds_alternative<RootSpec>(spec)) return t;
  if (const auto* in = std::get_if<InterpolatedSpec>(&spec)) return t < in->lambda ? t : in->lambda + std::exp(-p.pivot);
  return std::exp(-p.start);
}

/// X_t = sup{l ∈ levels : T_l ≤ t} from a time change sampled on a sorted
/// level grid (−∞ when no level qualifies).
inline double level_from_time_change(const std::function<double(double)>& t_of_l, const std::vector<double>& levels,
                                     double t) {
  double best = -kNever;
  for (double l : levels)
    if (t_of_l(l) <= t) best = std::max(best, l);
  return best;
}

/// T_l = inf{t ∈ times : X_t ≥ l} from a level process sampled on a sorted
/// time grid (∞ when no time qualifies).
inline double time_change_from_level(const std::function<double(double)>& x_of_t, const std::vector<double>& times,
                                     double l) {
  for (double t : times)
    if (x_of_t(t) >= l) return t;
  return kNever;
}

/// Counts grid pairs (l, t) where X_t ≥ l and T_l ≤ t disagree.
inline std::size_t adjoint_violations(const TimeChangeSpec& spec, const PathKey& p, const std::vector<double>& levels,
                                      const std::vector<double>& times) {
  std::size_t bad = 0;
  for (double l : levels)
    for (double t : times)
      if ((level_process(spec, p, t) >= l) != (time_change(spec, p, l) <= t)) ++bad;
  return bad;
}

}  // namespace shadows
