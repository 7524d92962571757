// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "instances.hpp"
#include "shadows/shadows.hpp"

using namespace shadows;
namespace ts = testing_support;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

const DiscreteMeasure kTwo{{-1, 0.5}, {1, 0.5}};
const DiscreteMeasure kThree{{-2, 1.0 / 3}, {0, 1.0 / 3}, {2, 1.0 / 3}};

SimOptions opts(std::size_t n, std::uint64_t seed) {
  SimOptions o;
  o.n_paths = n;
  o.seed = seed;
  return o;
}

double check_value(const Report& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return c.value;
  return std::numeric_limits<double>::quiet_NaN();
}

bool check_pass(const Report& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return c.pass;
  return false;
}

// 1 -----------------------------------------------------------------------
void shadow_oracle(Outcome& o) {
  const auto t0 = Clock::now();
  std::mt19937_64 g(1001);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto [eta, nu] = ts::feasible_pair(g, 30);
    worst = std::max(worst, max_atom_discrepancy(shadow(eta, nu), shadow_lp_oracle(eta, nu)));
  }
  const double t = seconds_since(t0);
  o.detail << "200 pairs, max atom discrepancy " << worst << ", " << t << " s";
  o.require(worst <= 1e-8, "discrepancy <= 1e-8");
  o.require(t < 10.0, "runtime < 10 s");
}

// 2 -----------------------------------------------------------------------
void associativity_and_decomposition(Outcome& o) {
  const auto t0 = Clock::now();
  std::mt19937_64 g(1002);
  std::uniform_real_distribution<double> frac(0.1, 0.9);
  double assoc = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto [eta, nu] = ts::feasible_pair(g, 20);
    std::vector<Atom> p1, p2;
    for (const auto& a : eta.atoms()) {
      const double f = frac(g);
      p1.push_back({a.x, a.w * f});
      p2.push_back({a.x, a.w * (1 - f)});
    }
    assoc = std::max(assoc, shadow_associativity_check(DiscreteMeasure(p1), DiscreteMeasure(p2), nu).discrepancy);
  }
  std::uniform_int_distribution<int> stages(1, 5);
  double decomp = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::vector<ClosedSet> fs{ts::random_set(g)};
    const int k = stages(g);
    for (int s = 1; s < k; ++s) fs.push_back(ts::random_subset(g, fs.back()));
    std::vector<std::pair<double, DiscreteMeasure>> mus;
    for (int s = 0; s < k; ++s) mus.push_back({1.0 / k, ts::random_inside(g, fs[s], 4)});
    decomp = std::max(decomp, shadow_decomposition_check(mus, fs).max_discrepancy);
  }
  const double t = seconds_since(t0);
  o.detail << "associativity max " << assoc << ", decomposition max " << decomp << ", " << t << " s";
  o.require(assoc <= 1e-8, "associativity <= 1e-8");
  o.require(decomp <= 1e-8, "decomposition <= 1e-8");
  o.require(t < 10.0, "runtime < 10 s");
}

// 3 -----------------------------------------------------------------------
void analytic_root(Outcome& o) {
  const auto t0 = Clock::now();
  const auto mu = DiscreteMeasure::dirac(0);
  const auto r = root_solve(mu, kTwo, GridSpec::covering(mu, kTwo, 0.05));
  const std::size_t n = 100000;
  const double tol = ToleranceModel{}(n, r.grid.h);
  const auto s = simulate_root(r, {}, opts(n, 3));
  const auto rep = verify_embedding(s, r.mu, r.nu, tol, r.barrier_tol);
  const double t = seconds_since(t0);
  o.detail << "|E tau - 1| " << check_value(rep, "expected_tau") << " (allowed 3SE+2h), terminal W1 "
           << check_value(rep, "terminal_w1") << " (tol " << tol << "), " << t << " s";
  o.require(check_pass(rep, "expected_tau"), "E tau within 3SE + 2h");
  o.require(check_pass(rep, "terminal_w1"), "terminal W1 <= tol");
  o.require(t < 30.0, "runtime < 30 s");
}

// 4 -----------------------------------------------------------------------
void shadow_residual(Outcome& o) {
  const auto t0 = Clock::now();
  const std::size_t n = 100000;
  const double h = 0.05;
  const double tol = ToleranceModel{}(n, h);
  const auto mu = DiscreteMeasure::dirac(0);
  const auto nu = io::normal_quantiles(0, 1, 64);
  const auto r = root_solve(mu, nu, GridSpec::covering(mu, nu, h));
  const auto s = simulate_root(r, {0.0, 0.25, 0.5, 1.0, 2.0}, opts(n, 4));
  const auto rep = verify_shadow_residual(s, r.nu, tol);
  o.detail << "Root N(0,1): max residual " << rep.max_value() << " over " << rep.checks.size() << " levels (tol "
           << tol << ")";
  for (const auto& note : rep.notes) o.detail << "; " << note;
  o.require(rep.pass() && !rep.checks.empty(), "Root residual <= tol");

  // negative controls, on the two-point target
  const auto r2 = root_solve(mu, kTwo, GridSpec::covering(mu, kTwo, h));
  const auto fixed = simulate_fixed_time(mu, r2.grid, 0.1, {0.0}, opts(n, 5));
  const auto fixed_rep = verify_shadow_residual(fixed, r2.nu, tol);
  o.detail << "; fixed-time control residual[l=0] " << fixed_rep.max_value();
  o.require(!fixed_rep.pass(), "fixed-time control fails");
  const auto shifted = simulate_barrier(r2.barrier.shifted_outward(2 * h, 0.0), mu, r2.grid, {0.0}, opts(n, 6));
  const auto shifted_rep = verify_embedding(shifted, r2.mu, r2.nu, tol, r2.barrier_tol);
  o.detail << "; shifted-barrier control |E tau - budget| " << check_value(shifted_rep, "expected_tau");
  o.require(!check_pass(shifted_rep, "expected_tau"), "shifted-barrier control fails (b)");
  const double t = seconds_since(t0);
  o.detail << "; " << t << " s";
  o.require(t < 60.0, "runtime < 60 s");
}

// 5 -----------------------------------------------------------------------
void left_monotone(Outcome& o) {
  const std::size_t n = 100000;
  const auto grid = GridSpec::covering(kTwo, kThree, 0.05);
  const double tol = ToleranceModel{}(n, grid.h);
  const auto lm = lm_solve(kTwo, kThree, grid);
  const auto s = simulate_lm(lm, {std::exp(-1.0), std::exp(1.0)}, opts(n, 7));
  std::size_t missing = 0;
  const auto emp = empirical_coupling(s, lm.mu, &missing);
  double worst_row = 0.0;
  for (std::size_t i = 0; i < emp.rows().size(); ++i)
    worst_row = std::max(worst_row, wasserstein1(emp.rows()[i].conditional, lm.coupling.rows()[i].conditional, 1e-9));
  o.detail << "max conditional W1 " << worst_row << " (tol " << tol << ")";
  o.require(missing == 0 && worst_row <= tol, "conditional W1 <= tol");

  double exact = 0.0;
  for (const auto& a : kTwo.atoms())
    exact = std::max(exact, max_atom_discrepancy(lm.coupling.target_marginal_below(a.x),
                                                 shadow(restrict_to(kTwo, HalfLine{a.x}), kThree)));
  o.detail << "; exact restricted identity " << exact;
  o.require(exact <= 1e-8, "exact restricted identity <= 1e-8");
  // levels e^{-1} and e condition on {B0 <= 1} and {B0 <= -1}
  const auto rep = verify_shadow_residual(s, kThree, tol);
  o.detail << "; empirical restricted identity " << rep.max_value();
  o.require(rep.pass() && rep.checks.size() == 2, "empirical restricted identity <= tol");
}

// 6 -----------------------------------------------------------------------
void interpolation(Outcome& o) {
  const auto t0 = Clock::now();
  const double h = 0.05;
  const auto mu = io::normal_quantiles(0, 1, 64);
  const auto nu = io::normal_quantiles(0, 2, 64);
  const auto grid = GridSpec::covering(mu, nu, h);
  const std::vector<double> lambdas{h * h, 0.1, 0.5, 1.0, 2.0, 5.0, std::numeric_limits<double>::infinity()};
  const std::size_t n = 100000;
  const auto sw = convergence_sweep(mu, nu, lambdas, grid, n, 8);
  const auto& first = sw.points.front();
  const auto& last = sw.points.back();
  o.detail << "horizon " << sw.horizon << "; d_lm " << first.d_lm << " vs " << last.d_lm << ", d_r " << last.d_r
           << " vs " << first.d_r << " (exact); simulated d_lm " << first.d_lm_mc << " vs " << last.d_lm_mc
           << ", d_r " << last.d_r_mc << " vs " << first.d_r_mc;
  o.require(first.d_lm <= last.d_lm / 3.0, "d_lm(smallest) <= d_lm(largest)/3");
  o.require(last.d_r <= first.d_r / 3.0, "d_r(largest) <= d_r(smallest)/3");
  o.require(first.d_lm_mc <= last.d_lm_mc / 3.0, "simulated d_lm ratio");
  o.require(last.d_r_mc <= first.d_r_mc / 3.0, "simulated d_r ratio");
  const double t = seconds_since(t0);
  o.detail << "; " << t << " s";
  o.require(t < 300.0, "runtime < 5 min");
}

// 7 -----------------------------------------------------------------------
void multi_marginal(Outcome& o) {
  const auto nu2 = dilate(kThree, ClosedSet::points({-3, 0, 3}));
  const std::vector<DiscreteMeasure> nus{kThree, nu2};
  const auto stages = multi_marginal_lm(kTwo, nus);
  double worst = 0.0;
  for (const auto& a : kTwo.atoms()) {
    const auto obs = obstructed_shadow(restrict_to(kTwo, HalfLine{a.x}), nus);
    for (std::size_t i = 0; i < nus.size(); ++i)
      worst = std::max(worst, max_atom_discrepancy(stages[i].target_marginal_below(a.x), obs[i]));
  }
  o.detail << "max discrepancy " << worst;
  o.require(worst <= 1e-8, "restricted marginals = obstructed shadows");
}

// 8 -----------------------------------------------------------------------
void invariant_suites(Outcome& o) {
  constexpr int N = 500;
  std::mt19937_64 g(1008);
  auto suite = [&](const std::string& name, const std::function<bool()>& one) {
    int bad = 0;
    for (int i = 0; i < N; ++i)
      if (!one()) ++bad;
    o.detail << " " << name << " " << (N - bad) << "/" << N << ";";
    o.require(bad == 0, name);
  };

  suite("potential round trip", [&] {
    const auto m = ts::random_measure(g, 50, 1.0, false);
    const auto back = measure_from_potential(potential_of(m));
    if (back.size() != m.size()) return false;
    for (std::size_t i = 0; i < m.size(); ++i)
      if (std::abs(back[i].x - m[i].x) > 1e-12 * std::max(1.0, std::abs(m[i].x)) ||
          std::abs(back[i].w - m[i].w) > 1e-12 * std::max(1.0, m[i].w))
        return false;
    return true;
  });
  suite("potential asymptotes", [&] {
    const auto m = ts::random_measure(g, 30, 1.5, false);
    const auto u = potential_of(m);
    const double far = std::max(std::abs(m.min()), std::abs(m.max())) + 1e6 * (m.max() - m.min() + 1.0);
    for (double x : {-far, far}) {
      const double asym = m.mass() * std::abs(x - m.barycenter());
      if (std::abs(u(x) - asym) > 1e-9 * std::max(1.0, asym)) return false;
    }
    return true;
  });
  suite("W1 metric", [&] {
    const auto a = ts::random_measure(g, 12), b = ts::random_measure(g, 12), c = ts::random_measure(g, 12);
    return wasserstein1(a, b) == wasserstein1(b, a) &&
           wasserstein1(a, b) <= wasserstein1(a, c) + wasserstein1(c, b) + 1e-12;
  });
  suite("convex order consistency", [&] {
    const auto a = ts::random_measure(g, 10);
    const auto b = ts::random_two_point_dilation(g, a);
    bool by_potential = true;
    for (double x : merged_positions(a, b))
      if (ts::brute_potential(a, x) > ts::brute_potential(b, x) + 1e-9) by_potential = false;
    return by_potential && order_leq(a, b, Order::convex);
  });
  suite("shadow sandwich", [&] {
    const auto [eta, nu] = ts::feasible_pair(g, 20);
    const auto s = shadow(eta, nu);
    return std::abs(s.mass() - eta.mass()) <= 1e-10 && std::abs(s.barycenter() - eta.barycenter()) <= 1e-10 &&
           order_leq(eta, s, Order::convex) && order_leq(s, nu, Order::positive);
  });
  suite("left-curtain rows", [&] {
    const auto nu = ts::random_measure(g, 15);
    const auto c = left_curtain(ts::random_contraction(g, nu), nu);
    return c.martingale_defect() <= 1e-9 && max_atom_discrepancy(c.target_marginal(), nu) <= 1e-9;
  });
  suite("dilation kernel", [&] {
    const auto f = ts::random_set(g);
    const auto m = ts::random_inside(g, f, 10);
    const auto d = dilate(m, f);
    return std::abs(d.mass() - m.mass()) <= 1e-14 && std::abs(d.first_moment() - m.first_moment()) <= 1e-12 &&
           max_atom_discrepancy(dilate(d, f), d) <= 1e-15;
  });
  suite("barrier nesting and mass budget", [&] {
    const auto nu = ts::random_measure(g, 8);
    const auto mu = ts::random_contraction(g, nu);
    const auto s = root_solve(mu, nu, GridSpec::covering(mu, nu, 0.25));
    const auto d = check_surface(s);
    const double scale = 1e-12 * std::max(1.0, *std::max_element(s.v.begin(), s.v.end()));
    return d.barrier_nesting == 0.0 && d.mass_budget <= 1e-9 && d.monotone_in_level <= scale &&
           d.nonconvex <= scale && d.above_obstacle <= 0.0;
  });
  suite("level/time-change adjoint", [&] {
    std::uniform_real_distribution<double> x(-3, 3), lam(0.1, 3);
    std::vector<double> grid_pts;
    for (int i = 0; i <= 100; ++i) grid_pts.push_back(0.1 * i);
    const PathKey p{x(g), x(g)};
    for (const TimeChangeSpec& s : {TimeChangeSpec{RootSpec{}}, TimeChangeSpec{LeftMonotoneSpec{}},
                                    TimeChangeSpec{InterpolatedSpec{lam(g)}}})
      if (adjoint_violations(s, p, grid_pts, grid_pts) != 0) return false;
    return true;
  });
  suite("serialization round trip", [&] {
    const auto m = ts::random_measure(g, 20, 1.0, false);
    return io::measure_from_json(io::json::parse(io::measure_to_json(m).dump())) == m &&
           io::measure_from_csv(io::measure_to_csv(m)) == m;
  });
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"shadow equals LP oracle", shadow_oracle},
      {"associativity and decomposition", associativity_and_decomposition},
      {"analytic Root case", analytic_root},
      {"shadow-residual verification", shadow_residual},
      {"left-monotone characterization", left_monotone},
      {"interpolation convergence", interpolation},
      {"multi-marginal obstructed shadows", multi_marginal},
      {"invariant suites", invariant_suites},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    if (!o.pass) ++failed;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
