// Command-line front end: shadows, curtains, dilations, barrier solvers,
// simulation and verification.
//
// Exit codes: 0 success, 1 a verification check failed, 2 usage or domain error.

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shadows/shadows.hpp"

using namespace shadows;
using io::json;

namespace {

struct Globals {
  double tol = kPotentialTol;
  std::uint64_t seed = 1;
  double grid_h = 0.05;
  double grid_span = 2.0;
  std::string format = "json";
  std::string plot;
  std::string out;
};

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(g.out);
  if (!f) throw DomainError("cannot write " + g.out);
  f << text;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw DomainError("cannot write " + path);
  f << text;
}

std::string measure_text(const Globals& g, const DiscreteMeasure& m) {
  return g.format == "csv" ? io::measure_to_csv(m) : io::measure_to_json(m).dump(2);
}

json coupling_json(const Coupling& c) {
  json rows = json::array();
  for (const auto& r : c.rows())
    rows.push_back({{"x", r.x}, {"w", r.w}, {"conditional", io::measure_to_json(r.conditional)["atoms"]}});
  return {{"format_version", io::kFormatVersion}, {"rows", rows}};
}

std::string coupling_text(const Globals& g, const Coupling& c) {
  return g.format == "csv" ? io::coupling_to_csv(c) : coupling_json(c).dump(2);
}

GridSpec make_grid(const Globals& g, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  detail::require(g.grid_span >= 0.0, "--grid-span must be nonnegative");
  return GridSpec::covering(mu, nu, g.grid_h, g.grid_span);
}

svg::Series potential_series(const std::string& label, const DiscreteMeasure& m, double lo, double hi) {
  svg::Series s{label, {}, {}};
  const auto u = potential_of(m);
  for (int i = 0; i <= 400; ++i) {
    const double x = lo + (hi - lo) * i / 400.0;
    s.x.push_back(x);
    s.y.push_back(u(x));
  }
  return s;
}

void plot_barrier(const std::string& path, const Barrier& b, const GridSpec& grid, std::size_t max_level) {
  svg::Plot p("Root barrier", "x", "t");
  std::vector<svg::Rect> rects;
  const std::size_t n = std::min(b.levels(), max_level);
  const std::size_t stride = std::max<std::size_t>(1, n / 400);
  for (std::size_t l = 0; l < n; l += stride)
    for (const auto& c : b.at(l)) {
      const double lo = std::max(c.lo, grid.x_min()), hi = std::min(c.hi, grid.x_max());
      rects.push_back({lo - grid.h / 2, l * grid.dt(), hi + grid.h / 2, (l + stride) * grid.dt()});
    }
  p.regions("stopped", std::move(rects));
  p.write(path);
}

int report_exit(const Globals& g, const std::vector<Report>& reports, json extra = json::object()) {
  json out = extra;
  out["format_version"] = io::kFormatVersion;
  bool pass = true;
  json rs = json::array();
  for (const auto& r : reports) {
    rs.push_back(io::report_to_json(r));
    pass = pass && r.pass();
  }
  out["reports"] = rs;
  out["pass"] = pass;
  emit(g, out.dump(2));
  return pass ? 0 : 1;
}

std::vector<double> default_levels() { return {0.0, 0.25, 0.5, 1.0, 2.0}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shadows, barrier embeddings and their verification"};
  app.fallthrough();
  app.require_subcommand(1);
  Globals g;
  app.add_option("--tol", g.tol, "numerical tolerance for shadow checks")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--grid-h", g.grid_h, "lattice step h (time step h^2)")->check(CLI::PositiveNumber);
  app.add_option("--grid-span", g.grid_span, "grid margin as a multiple of the support spread");
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--plot", g.plot, "write an SVG plot to this path");
  app.add_option("--out", g.out, "write the main output here instead of stdout");

  std::string eta_f, nu_f, mu_f, m_f, set_f, barrier_f, samples_f, pipeline = "root", barrier_out, surface_out;
  std::vector<std::string> nus_f;
  std::vector<double> levels, lambdas;
  double lambda = 1.0, stop_time = 0.1;
  std::size_t paths = 100000, sweep_paths = 0;
  bool oracle = false;

  auto* sh = app.add_subcommand("shadow", "shadow of eta in nu");
  sh->add_option("--eta", eta_f)->required();
  sh->add_option("--nu", nu_f)->required();
  sh->add_flag("--oracle", oracle, "also solve the linear-programming oracle and report the gap");

  auto* cu = app.add_subcommand("curtain", "left-curtain coupling");
  cu->add_option("--mu", mu_f)->required();
  cu->add_option("--nu", nu_f)->required();

  auto* di = app.add_subcommand("dilate", "Kellerer dilation of m onto a closed set");
  di->add_option("--m", m_f)->required();
  di->add_option("--F", set_f, "closed set JSON")->required();

  auto* ro = app.add_subcommand("root", "Root barrier by the obstacle scheme");
  ro->add_option("--mu", mu_f)->required();
  ro->add_option("--nu", nu_f)->required();
  ro->add_option("--barrier-out", barrier_out, "barrier CSV path (default: main output)");
  ro->add_option("--surface-out", surface_out, "surface CSV path");

  auto* lm = app.add_subcommand("lm", "left-monotone embedding: coupling and per-source plans");
  lm->add_option("--mu", mu_f)->required();
  lm->add_option("--nu", nu_f)->required();

  auto* in = app.add_subcommand("interpolate", "Root up to lambda, then left-monotone");
  in->add_option("--mu", mu_f)->required();
  in->add_option("--nu", nu_f)->required();
  in->add_option("--lambda", lambda)->required()->check(CLI::PositiveNumber);
  in->add_option("--barrier-out", barrier_out, "barrier CSV of the Root stage");

  auto* mm = app.add_subcommand("multi", "multi-marginal left-monotone couplings");
  mm->add_option("--mu", mu_f)->required();
  mm->add_option("--nu", nus_f, "targets in convex order")->required();

  auto* si = app.add_subcommand("simulate", "simulate stopped random walks");
  si->add_option("--pipeline", pipeline)->check(CLI::IsMember({"root", "lm", "interpolate", "barrier", "fixed"}));
  si->add_option("--stop-time", stop_time, "stopping time for pipeline fixed")->check(CLI::NonNegativeNumber);
  si->add_option("--mu", mu_f)->required();
  si->add_option("--nu", nu_f, "target (all pipelines except barrier)");
  si->add_option("--barrier", barrier_f, "barrier CSV (pipeline barrier)");
  si->add_option("--lambda", lambda)->check(CLI::PositiveNumber);
  si->add_option("--paths", paths)->check(CLI::PositiveNumber);
  si->add_option("--levels", levels, "levels at which to record B_{T_l}");

  auto* ve = app.add_subcommand("verify", "shadow-residual and embedding checks");
  ve->add_option("--pipeline", pipeline)->check(CLI::IsMember({"root", "lm", "interpolate"}));
  ve->add_option("--samples", samples_f, "samples JSON from simulate (instead of a pipeline run)");
  ve->add_option("--mu", mu_f)->required();
  ve->add_option("--nu", nu_f)->required();
  ve->add_option("--lambda", lambda)->check(CLI::PositiveNumber);
  ve->add_option("--paths", paths)->check(CLI::PositiveNumber);
  ve->add_option("--levels", levels);

  auto* sw = app.add_subcommand("sweep", "lambda sweep between Root and left-monotone");
  sw->add_option("--mu", mu_f)->required();
  sw->add_option("--nu", nu_f)->required();
  sw->add_option("--lambdas", lambdas, "lambda values; inf stands for the Root horizon");
  sw->add_option("--paths", sweep_paths, "paths per lambda for simulated distances (0: exact only)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sh->parsed()) {
      const auto eta = io::read_measure(eta_f), nu = io::read_measure(nu_f);
      const auto s = shadow(eta, nu, g.tol);
      if (!g.plot.empty()) {
        const double lo = std::min(eta.min(), nu.min()) - 1, hi = std::max(eta.max(), nu.max()) + 1;
        svg::Plot p("Potentials", "x", "U(x)");
        p.line(potential_series("eta", eta, lo, hi));
        p.line(potential_series("shadow", s, lo, hi));
        p.line(potential_series("nu", nu, lo, hi));
        p.write(g.plot);
      }
      if (g.format == "csv") {
        emit(g, io::measure_to_csv(s));
        return 0;
      }
      Report r;
      r.name = "shadow";
      r.add("mass_gap", std::abs(s.mass() - eta.mass()), g.tol * detail::spread_scale(nu));
      r.add("barycenter_gap", std::abs(s.first_moment() - eta.first_moment()), g.tol * detail::spread_scale(nu));
      if (oracle) r.add("lp_oracle_gap", max_atom_discrepancy(s, shadow_lp_oracle(eta, nu)), 1e-8);
      emit(g, json{{"format_version", io::kFormatVersion},
                   {"shadow", io::measure_to_json(s)},
                   {"report", io::report_to_json(r)}}
                  .dump(2));
      return r.pass() ? 0 : 1;
    }

    if (cu->parsed()) {
      const auto c = left_curtain(io::read_measure(mu_f), io::read_measure(nu_f), 0, g.tol);
      emit(g, coupling_text(g, c));
      return 0;
    }

    if (di->parsed()) {
      emit(g, measure_text(g, dilate(io::read_measure(m_f), io::read_closed_set(set_f))));
      return 0;
    }

    if (ro->parsed()) {
      const auto mu = io::read_measure(mu_f), nu = io::read_measure(nu_f);
      const auto s = root_solve(mu, nu, make_grid(g, mu, nu));
      const auto bar = io::barrier_to_csv(s.barrier);
      if (!surface_out.empty()) write_file(surface_out, io::surface_to_csv(s));
      if (!g.plot.empty()) plot_barrier(g.plot, s.barrier, s.grid, s.levels());
      if (!barrier_out.empty() || g.format == "csv") {
        if (!barrier_out.empty()) write_file(barrier_out, bar);
        if (barrier_out.empty()) emit(g, bar);
      }
      const auto d = check_surface(s);
      const json summary = {{"format_version", io::kFormatVersion},
                            {"grid", io::grid_to_json(s.grid)},
                            {"levels", s.levels()},
                            {"horizon", s.horizon()},
                            {"terminal_gap", s.terminal_gap},
                            {"expected_tau", s.expected_tau()},
                            {"variance_budget", s.nu.variance() - s.mu.variance()},
                            {"surface",
                             {{"monotone_in_level", d.monotone_in_level},
                              {"above_obstacle", d.above_obstacle},
                              {"nonconvex", d.nonconvex},
                              {"barrier_nesting", d.barrier_nesting},
                              {"mass_budget", d.mass_budget}}}};
      if (g.format == "json" && barrier_out.empty()) {
        json j = summary;
        j["barrier_csv"] = bar;
        emit(g, j.dump(2));
      } else {
        std::cerr << summary.dump(2) << "\n";
      }
      return 0;
    }

    if (lm->parsed()) {
      const auto mu = io::read_measure(mu_f), nu = io::read_measure(nu_f);
      const auto s = lm_solve(mu, nu, make_grid(g, mu, nu), true, g.tol);
      if (g.format == "csv") {
        emit(g, io::coupling_to_csv(s.coupling));
        return 0;
      }
      json plans = json::array();
      const auto rows = s.coupling.rows();
      for (std::size_t i = 0; i < rows.size(); ++i)
        plans.push_back({{"source_x", rows[i].x},
                         {"levels", s.plans[i].levels()},
                         {"expected_tau", s.plans[i].expected_tau()},
                         {"terminal_gap", s.plans[i].terminal_gap}});
      json j = coupling_json(s.coupling);
      j["plans"] = plans;
      emit(g, j.dump(2));
      return 0;
    }

    if (in->parsed()) {
      const auto mu = io::read_measure(mu_f), nu = io::read_measure(nu_f);
      const auto s = interpolate_solve(mu, nu, lambda, make_grid(g, mu, nu), nullptr, false, g.tol);
      std::vector<std::vector<Interval>> stage;
      for (std::size_t l = 0; l < std::min(s.level, s.root.levels()); ++l) {
        const auto at = s.root.barrier.at(l);
        stage.emplace_back(at.begin(), at.end());
      }
      const Barrier truncated(std::move(stage), s.root.grid.dt());
      if (!barrier_out.empty()) write_file(barrier_out, io::barrier_to_csv(truncated));
      if (!g.plot.empty()) plot_barrier(g.plot, truncated, s.root.grid, truncated.levels());
      if (g.format == "csv") {
        emit(g, io::coupling_to_csv(s.coupling));
        return 0;
      }
      json j = coupling_json(s.coupling);
      j["lambda"] = s.spec.lambda;
      j["lambda_requested"] = lambda;
      j["degenerate"] = s.degenerate;
      j["eta"] = io::measure_to_json(s.eta);
      emit(g, j.dump(2));
      return 0;
    }

    if (mm->parsed()) {
      const auto mu = io::read_measure(mu_f);
      std::vector<DiscreteMeasure> nus;
      for (const auto& f : nus_f) nus.push_back(io::read_measure(f));
      const auto cs = multi_marginal_lm(mu, nus, g.tol);
      if (g.format == "csv") {
        std::string s;
        for (std::size_t i = 0; i < cs.size(); ++i) s += "# stage " + std::to_string(i + 1) + "\n" + io::coupling_to_csv(cs[i]);
        emit(g, s);
        return 0;
      }
      json stages = json::array();
      for (const auto& c : cs) stages.push_back(coupling_json(c));
      emit(g, json{{"format_version", io::kFormatVersion}, {"stages", stages}}.dump(2));
      return 0;
    }

    SimOptions opt;
    opt.n_paths = paths;
    opt.seed = g.seed;

    if (si->parsed() || ve->parsed()) {
      const auto mu = io::read_measure(mu_f);
      if (pipeline != "barrier" && nu_f.empty()) throw DomainError("--nu is required for pipeline " + pipeline);
      const bool lm_spec = pipeline == "lm";
      if (levels.empty()) levels = lm_spec ? std::vector<double>{std::exp(1.0), 1.0, std::exp(-1.0)} : default_levels();
      std::optional<SampleSet> samples;
      DiscreteMeasure mu_h, nu_h;
      if (!samples_f.empty()) {
        json j;
        try {
          j = json::parse(io::detail::slurp(samples_f));
        } catch (const json::parse_error& e) {
          throw DomainError(samples_f + ": invalid JSON (" + e.what() + ")");
        }
        samples = io::samples_from_json(j, samples_f);
        mu_h = to_grid(mu, samples->grid);
        nu_h = to_grid(io::read_measure(nu_f), samples->grid);
      } else if (pipeline == "fixed") {
        const auto grid = make_grid(g, mu, io::read_measure(nu_f));
        samples = simulate_fixed_time(mu, grid, stop_time, levels, opt);
      } else if (pipeline == "barrier") {
        if (barrier_f.empty()) throw DomainError("--barrier is required for pipeline barrier");
        DiscreteMeasure span = mu;
        if (!nu_f.empty()) span = io::read_measure(nu_f);
        const auto grid = make_grid(g, mu, span);
        const auto b = io::barrier_from_csv(io::detail::slurp(barrier_f), grid.dt(), barrier_f);
        samples = simulate_barrier(b, mu, grid, levels, opt);
      } else {
        const auto nu = io::read_measure(nu_f);
        const auto grid = make_grid(g, mu, nu);
        if (pipeline == "root") {
          const auto r = root_solve(mu, nu, grid);
          samples = simulate_root(r, levels, opt);
          mu_h = r.mu, nu_h = r.nu;
        } else if (pipeline == "lm") {
          const auto s = lm_solve(mu, nu, grid, true, g.tol);
          samples = simulate_lm(s, levels, opt);
          mu_h = s.mu, nu_h = s.nu;
        } else {
          const auto s = interpolate_solve(mu, nu, lambda, grid, nullptr, true, g.tol);
          samples = simulate_interpolated(s, levels, opt);
          mu_h = s.root.mu, nu_h = s.root.nu;
        }
      }
      if (si->parsed()) {
        emit(g, io::samples_to_json(*samples).dump());
        return 0;
      }
      const double tol = ToleranceModel{}(samples->paths.size(), samples->grid.h);
      auto res = verify_shadow_residual(*samples, nu_h, tol);
      auto emb = verify_embedding(*samples, mu_h, nu_h, tol);
      if (!g.plot.empty()) {
        svg::Plot p("Shadow residual per level", "level", "W1");
        svg::Series s{"residual", {}, {}}, t{"tolerance", {}, {}};
        for (const auto& c : res.checks) {
          s.x.push_back(static_cast<double>(s.x.size()));
          s.y.push_back(c.value);
          t.x.push_back(static_cast<double>(t.x.size()));
          t.y.push_back(c.tolerance);
        }
        p.line(s);
        p.line(t);
        p.write(g.plot);
      }
      return report_exit(g, {res, emb},
                         {{"seed", samples->seed}, {"grid", io::grid_to_json(samples->grid)},
                          {"spec", spec_name(samples->spec)}, {"n_paths", samples->paths.size()}});
    }

    if (sw->parsed()) {
      const auto mu = io::read_measure(mu_f), nu = io::read_measure(nu_f);
      const auto grid = make_grid(g, mu, nu);
      if (lambdas.empty()) lambdas = {grid.dt(), 0.1, 0.5, 1.0, 2.0, 5.0, std::numeric_limits<double>::infinity()};
      const auto r = convergence_sweep(mu, nu, lambdas, grid, sweep_paths, g.seed);
      if (!g.plot.empty()) {
        svg::Plot p("Distance to Root and left-monotone couplings", "log10 lambda", "W1 on joint law");
        svg::Series a{"d_r", {}, {}}, b{"d_lm", {}, {}};
        for (const auto& pt : r.points) {
          a.x.push_back(std::log10(pt.lambda));
          a.y.push_back(pt.d_r);
          b.x.push_back(std::log10(pt.lambda));
          b.y.push_back(pt.d_lm);
        }
        p.line(a);
        p.line(b);
        p.write(g.plot);
      }
      emit(g, g.format == "csv" ? io::sweep_to_csv(r) : io::sweep_to_json(r).dump(2));
      return 0;
    }
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
