#pragma once

// Dense two-phase simplex (Bland's rule) for small linear programs. It backs
// the brute-force shadow oracle, so it favours robustness over speed.

#include <cmath>
#include <limits>
#include <vector>

#include "shadows/errors.hpp"

namespace shadows::lp {

enum class Sense { leq, geq, eq };

struct Constraint {
  std::vector<double> coef;
  Sense sense;
  double rhs;
};

/// minimize cost·x  s.t.  rows,  0 <= x <= upper.
struct Problem {
  std::vector<double> cost;
  std::vector<Constraint> rows;
  std::vector<double> upper;  // empty = unbounded above
};

enum class Status { optimal, infeasible, unbounded };

struct Result {
  Status status = Status::infeasible;
  std::vector<double> x;
  double objective = 0.0;
};

namespace detail {

inline constexpr double kPivotTol = 1e-9;

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), a_((rows + 1) * (cols + 1), 0.0), basis_(rows) {}

  double& at(std::size_t r, std::size_t c) { return a_[r * (n_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, n_); }
  double& obj(std::size_t c) { return at(m_, c); }
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t r, std::size_t c) {
    const double p = at(r, c);
    for (std::size_t j = 0; j <= n_; ++j) at(r, j) /= p;
    at(r, c) = 1.0;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) at(i, j) -= f * at(r, j);
      at(i, c) = 0.0;
    }
    basis_[r] = c;
  }

  /// Loads reduced costs for `cost` (indexed by column) given the current basis.
  void set_objective(const std::vector<double>& cost) {
    for (std::size_t j = 0; j <= n_; ++j) obj(j) = j < n_ ? cost[j] : 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) obj(j) -= cb * at(i, j);
    }
  }

  /// Runs simplex iterations on the loaded objective; columns with
  /// allowed[j] == false never enter. Returns false when unbounded.
  bool optimize(const std::vector<bool>& allowed, double eps) {
    for (std::size_t iter = 0; iter < 100000; ++iter) {
      std::size_t enter = n_;
      for (std::size_t j = 0; j < n_; ++j) {
        if (allowed[j] && obj(j) < -eps) {
          enter = j;
          break;
        }
      }
      if (enter == n_) return true;
      std::size_t leave = m_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = at(i, enter);
        if (a <= kPivotTol) continue;  // tiny pivots are rounding noise
        const double ratio = std::max(rhs(i), 0.0) / a;
        if (ratio < best - 1e-14 || (std::abs(ratio - best) <= 1e-14 && leave < m_ && basis_[i] < basis_[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave == m_) return false;
      pivot(leave, enter);
    }
    throw std::runtime_error("simplex iteration limit reached");
  }

 private:
  std::size_t m_, n_;
  std::vector<double> a_;
  std::vector<std::size_t> basis_;
};

}  // namespace detail

inline Result solve(const Problem& p, double eps = 1e-11) {
  const std::size_t n = p.cost.size();
  std::vector<Constraint> rows = p.rows;
  for (std::size_t j = 0; j < p.upper.size(); ++j) {
    if (!std::isfinite(p.upper[j])) continue;
    Constraint c{std::vector<double>(n, 0.0), Sense::leq, p.upper[j]};
    c.coef[j] = 1.0;
    rows.push_back(std::move(c));
  }
  for (auto& r : rows) {
    shadows::detail::require(r.coef.size() == n, "lp: constraint width does not match cost vector");
    if (r.rhs < 0.0) {
      for (double& v : r.coef) v = -v;
      r.rhs = -r.rhs;
      if (r.sense == Sense::leq)
        r.sense = Sense::geq;
      else if (r.sense == Sense::geq)
        r.sense = Sense::leq;
    }
  }

  std::size_t n_slack = 0, n_art = 0;
  for (const auto& r : rows) {
    if (r.sense != Sense::eq) ++n_slack;
    if (r.sense != Sense::leq) ++n_art;
  }
  const std::size_t m = rows.size();
  const std::size_t cols = n + n_slack + n_art;
  detail::Tableau t(m, cols);
  std::size_t s = n, a = n + n_slack;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t.at(i, j) = rows[i].coef[j];
    t.rhs(i) = rows[i].rhs;
    switch (rows[i].sense) {
      case Sense::leq:
        t.at(i, s) = 1.0;
        t.basis()[i] = s++;
        break;
      case Sense::geq:
        t.at(i, s++) = -1.0;
        t.at(i, a) = 1.0;
        t.basis()[i] = a++;
        break;
      case Sense::eq:
        t.at(i, a) = 1.0;
        t.basis()[i] = a++;
        break;
    }
  }

  std::vector<bool> allowed(cols, true);
  Result res;
  if (n_art > 0) {
    std::vector<double> phase1(cols, 0.0);
    for (std::size_t j = n + n_slack; j < cols; ++j) phase1[j] = 1.0;
    t.set_objective(phase1);
    t.optimize(allowed, eps);
    double infeas = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      if (t.basis()[i] >= n + n_slack) infeas += t.rhs(i);
    if (infeas > 1e-9) return res;
    // Drive zero-level artificials out of the basis where possible.
    for (std::size_t i = 0; i < m; ++i) {
      if (t.basis()[i] < n + n_slack) continue;
      for (std::size_t j = 0; j < n + n_slack; ++j) {
        if (std::abs(t.at(i, j)) > 1e-9) {
          t.pivot(i, j);
          break;
        }
      }
    }
    for (std::size_t j = n + n_slack; j < cols; ++j) allowed[j] = false;
  }
  std::vector<double> cost(cols, 0.0);
  for (std::size_t j = 0; j < n; ++j) cost[j] = p.cost[j];
  t.set_objective(cost);
  if (!t.optimize(allowed, eps)) {
    res.status = Status::unbounded;
    return res;
  }
  res.status = Status::optimal;
  res.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (t.basis()[i] < n) res.x[t.basis()[i]] = t.rhs(i);
  for (std::size_t j = 0; j < n; ++j) res.objective += p.cost[j] * res.x[j];
  return res;
}

}  // namespace shadows::lp
