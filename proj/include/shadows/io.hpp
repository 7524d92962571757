#pragma once

// File formats. JSON documents carry "format_version": 1.
//   measure   {"format_version":1,"atoms":[{"x":..,"w":..},..]}  or CSV "x,w"
//   normal    {"quantile_of":"normal","params":{"mean":m,"sd":s},"n":64}
//   closed    {"format_version":1,"components":[[lo,hi],..]}
//   coupling  CSV source_x,source_w,target_x,mass
//   barrier   CSV level_index,interval_lo,interval_hi
//   surface   CSV level,x,u,v
// Malformed input raises DomainError naming the offending field.

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "shadows/errors.hpp"
#include "shadows/measure.hpp"
#include "shadows/report.hpp"
#include "shadows/root.hpp"
#include "shadows/shadow.hpp"
#include "shadows/simulate.hpp"
#include "shadows/verify.hpp"

namespace shadows::io {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

namespace detail {

inline const json& field(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw DomainError(where + ": missing field \"" + key + "\"");
  return j.at(key);
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw DomainError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw DomainError(where + ": value is not finite");
  return v;
}

inline void check_version(const json& j, const std::string& where) {
  const auto& v = field(j, "format_version", where);
  if (!v.is_number_integer() || v.get<int>() != kFormatVersion)
    throw DomainError(where + ".format_version: unsupported version (expected " + std::to_string(kFormatVersion) +
                      ")");
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline bool looks_like_csv(const std::string& path, const std::string& text) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) return true;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) return c != '{' && c != '[';
  return false;
}

inline std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

inline double parse_cell(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw DomainError(where + ": \"" + s + "\" is not a number");
  }
  while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
  if (used != s.size() || !std::isfinite(v)) throw DomainError(where + ": \"" + s + "\" is not a number");
  return v;
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Measures

/// Atoms at the mid-quantiles (i + ½)/n of a normal law, weight 1/n each.
inline DiscreteMeasure normal_quantiles(double mean, double sd, int n) {
  shadows::detail::require(sd > 0.0 && std::isfinite(sd), "normal quantiles: sd must be positive");
  shadows::detail::require(n > 0, "normal quantiles: n must be positive");
  const boost::math::normal_distribution<double> d(mean, sd);
  std::vector<Atom> atoms;
  for (int i = 0; i < n; ++i) atoms.push_back({quantile(d, (i + 0.5) / n), 1.0 / n});
  return DiscreteMeasure(std::move(atoms));
}

inline DiscreteMeasure measure_from_json(const json& j, const std::string& where = "measure") {
  if (j.is_object() && j.contains("quantile_of")) {
    const auto& kind = j.at("quantile_of");
    if (!kind.is_string() || kind.get<std::string>() != "normal")
      throw DomainError(where + ".quantile_of: only \"normal\" is supported");
    if (j.contains("format_version")) detail::check_version(j, where);
    const auto& p = detail::field(j, "params", where);
    const double mean = p.contains("mean") ? detail::number(p.at("mean"), where + ".params.mean") : 0.0;
    const double sd = p.contains("sd") ? detail::number(p.at("sd"), where + ".params.sd") : 1.0;
    if (sd <= 0.0) throw DomainError(where + ".params.sd: must be positive");
    const auto& n = detail::field(j, "n", where);
    if (!n.is_number_integer() || n.get<long long>() <= 0) throw DomainError(where + ".n: expected a positive integer");
    return normal_quantiles(mean, sd, n.get<int>());
  }
  detail::check_version(j, where);
  const auto& atoms = detail::field(j, "atoms", where);
  if (!atoms.is_array()) throw DomainError(where + ".atoms: expected an array");
  std::vector<Atom> out;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const std::string at = where + ".atoms[" + std::to_string(i) + "]";
    const double x = detail::number(detail::field(atoms[i], "x", at), at + ".x");
    const double w = detail::number(detail::field(atoms[i], "w", at), at + ".w");
    if (w < 0.0) throw DomainError(at + ".w: weight is negative");
    out.push_back({x, w});
  }
  return DiscreteMeasure(std::move(out));
}

inline json measure_to_json(const DiscreteMeasure& m) {
  json atoms = json::array();
  for (const auto& a : m.atoms()) atoms.push_back({{"x", a.x}, {"w", a.w}});
  return {{"format_version", kFormatVersion}, {"atoms", atoms}};
}

inline DiscreteMeasure measure_from_csv(const std::string& text, const std::string& where = "measure") {
  auto rows = detail::csv_rows(text);
  if (!rows.empty() && !rows[0].empty() && rows[0][0] == "x") rows.erase(rows.begin());
  std::vector<Atom> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string at = where + " row " + std::to_string(i + 1);
    if (rows[i].size() != 2) throw DomainError(at + ": expected 2 columns x,w");
    const double x = detail::parse_cell(rows[i][0], at + " column x");
    const double w = detail::parse_cell(rows[i][1], at + " column w");
    if (w < 0.0) throw DomainError(at + " column w: weight is negative");
    out.push_back({x, w});
  }
  return DiscreteMeasure(std::move(out));
}

inline std::string measure_to_csv(const DiscreteMeasure& m) {
  std::string s = "x,w\n";
  for (const auto& a : m.atoms()) s += detail::fmt(a.x) + "," + detail::fmt(a.w) + "\n";
  return s;
}

inline DiscreteMeasure read_measure(const std::string& path) {
  const auto text = detail::slurp(path);
  if (detail::looks_like_csv(path, text)) return measure_from_csv(text, path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DomainError(path + ": invalid JSON (" + e.what() + ")");
  }
  return measure_from_json(j, path);
}

// ---------------------------------------------------------------------------
// Closed sets

inline ClosedSet closed_set_from_json(const json& j, const std::string& where = "closed set") {
  if (j.contains("format_version")) detail::check_version(j, where);
  const auto& comps = detail::field(j, "components", where);
  if (!comps.is_array() || comps.empty()) throw DomainError(where + ".components: expected a nonempty array");
  std::vector<Interval> out;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const std::string at = where + ".components[" + std::to_string(i) + "]";
    if (!comps[i].is_array() || comps[i].size() != 2) throw DomainError(at + ": expected [lo, hi]");
    const double lo = detail::number(comps[i][0], at + "[0]"), hi = detail::number(comps[i][1], at + "[1]");
    if (lo > hi) throw DomainError(at + ": lo exceeds hi");
    out.push_back({lo, hi});
  }
  return ClosedSet(std::move(out));
}

inline json closed_set_to_json(const ClosedSet& f) {
  json comps = json::array();
  for (const auto& c : f.components()) comps.push_back({c.lo, c.hi});
  return {{"format_version", kFormatVersion}, {"components", comps}};
}

inline ClosedSet read_closed_set(const std::string& path) {
  json j;
  try {
    j = json::parse(detail::slurp(path));
  } catch (const json::parse_error& e) {
    throw DomainError(path + ": invalid JSON (" + e.what() + ")");
  }
  return closed_set_from_json(j, path);
}

// ---------------------------------------------------------------------------
// Couplings

inline std::string coupling_to_csv(const Coupling& c) {
  std::string s = "source_x,source_w,target_x,mass\n";
  for (const auto& r : c.rows())
    for (const auto& a : r.conditional.atoms())
      s += detail::fmt(r.x) + "," + detail::fmt(r.w) + "," + detail::fmt(a.x) + "," + detail::fmt(a.w * r.w) + "\n";
  return s;
}

/// Inverse of coupling_to_csv; `mass` is the joint mass of (source, target).
inline Coupling coupling_from_csv(const std::string& text, const std::string& where = "coupling") {
  auto rows = detail::csv_rows(text);
  if (!rows.empty() && !rows[0].empty() && rows[0][0] == "source_x") rows.erase(rows.begin());
  std::vector<CouplingRow> out;
  std::vector<std::vector<Atom>> pieces;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string at = where + " row " + std::to_string(i + 1);
    if (rows[i].size() != 4) throw DomainError(at + ": expected 4 columns source_x,source_w,target_x,mass");
    const double sx = detail::parse_cell(rows[i][0], at + " column source_x");
    const double sw = detail::parse_cell(rows[i][1], at + " column source_w");
    const double tx = detail::parse_cell(rows[i][2], at + " column target_x");
    const double m = detail::parse_cell(rows[i][3], at + " column mass");
    if (sw <= 0.0) throw DomainError(at + " column source_w: must be positive");
    if (m < 0.0) throw DomainError(at + " column mass: must be nonnegative");
    if (out.empty() || !same_position(out.back().x, sx)) {
      out.push_back({sx, sw, {}});
      pieces.emplace_back();
    }
    pieces.back().push_back({tx, m / sw});
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].conditional = DiscreteMeasure(std::move(pieces[i]));
  return Coupling(std::move(out));
}

// ---------------------------------------------------------------------------
// Root output

inline std::string barrier_to_csv(const Barrier& b) {
  std::string s = "level_index,interval_lo,interval_hi\n";
  for (std::size_t l = 0; l < b.levels(); ++l)
    for (const auto& c : b.at(l)) s += std::to_string(l) + "," + detail::fmt(c.lo) + "," + detail::fmt(c.hi) + "\n";
  return s;
}

inline Barrier barrier_from_csv(const std::string& text, double dt, const std::string& where = "barrier") {
  auto rows = detail::csv_rows(text);
  if (!rows.empty() && !rows[0].empty() && rows[0][0] == "level_index") rows.erase(rows.begin());
  std::vector<std::vector<Interval>> levels;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string at = where + " row " + std::to_string(i + 1);
    if (rows[i].size() != 3) throw DomainError(at + ": expected 3 columns level_index,interval_lo,interval_hi");
    const double l = detail::parse_cell(rows[i][0], at + " column level_index");
    if (l < 0.0 || l != std::floor(l)) throw DomainError(at + " column level_index: expected a nonnegative integer");
    const double lo = detail::parse_cell(rows[i][1], at + " column interval_lo");
    const double hi = detail::parse_cell(rows[i][2], at + " column interval_hi");
    if (lo > hi) throw DomainError(at + ": interval_lo exceeds interval_hi");
    const auto li = static_cast<std::size_t>(l);
    if (li >= levels.size()) levels.resize(li + 1);
    levels[li].push_back({lo, hi});
  }
  return Barrier(std::move(levels), dt);
}

inline std::string surface_to_csv(const RootSolution& s) {
  std::string out = "level,x,u,v\n";
  for (std::size_t l = 0; l < s.u.size(); ++l)
    for (std::size_t j = 0; j < s.grid.size(); ++j)
      out += std::to_string(l) + "," + detail::fmt(s.grid.x(j)) + "," + detail::fmt(s.u[l][j]) + "," +
             detail::fmt(s.v[j]) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Reports and samples

inline json report_to_json(const Report& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    json e = {{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}};
    if (!c.note.empty()) e["note"] = c.note;
    checks.push_back(e);
  }
  return {{"format_version", kFormatVersion}, {"name", r.name},   {"pass", r.pass()},
          {"checks", checks},                 {"notes", r.notes}, {"max_value", r.max_value()}};
}

inline json grid_to_json(const GridSpec& g) {
  return {{"h", g.h}, {"x_min", g.x_min()}, {"x_max", g.x_max()}, {"n_levels", g.n_levels}};
}

inline json samples_to_json(const SampleSet& s) {
  json paths = json::array();
  for (const auto& p : s.paths) {
    json lv = json::array();
    for (double b : p.at_level) lv.push_back(std::isnan(b) ? json(nullptr) : json(b));
    paths.push_back({p.start, p.level, p.position, p.pivot, lv});
  }
  json j = {{"format_version", kFormatVersion},
            {"spec", spec_name(s.spec)},
            {"grid", grid_to_json(s.grid)},
            {"levels", s.levels},
            {"seed", s.seed},
            {"cap_hits", s.cap_hits},
            {"warnings", s.warnings},
            {"paths", paths}};
  if (const auto* in = std::get_if<InterpolatedSpec>(&s.spec)) j["lambda"] = in->lambda;
  return j;
}

inline SampleSet samples_from_json(const json& j, const std::string& where = "samples") {
  detail::check_version(j, where);
  SampleSet s;
  const auto& g = detail::field(j, "grid", where);
  s.grid.h = detail::number(detail::field(g, "h", where + ".grid"), where + ".grid.h");
  if (s.grid.h <= 0.0) throw DomainError(where + ".grid.h: must be positive");
  s.grid.k_min = std::llround(detail::number(detail::field(g, "x_min", where + ".grid"), where + ".grid.x_min") / s.grid.h);
  s.grid.k_max = std::llround(detail::number(detail::field(g, "x_max", where + ".grid"), where + ".grid.x_max") / s.grid.h);
  s.grid.n_levels = static_cast<std::size_t>(detail::number(detail::field(g, "n_levels", where + ".grid"), where + ".grid.n_levels"));
  const auto& spec = detail::field(j, "spec", where);
  if (!spec.is_string()) throw DomainError(where + ".spec: expected a string");
  const auto name = spec.get<std::string>();
  if (name == "root") {
    s.spec = RootSpec{};
  } else if (name == "lm") {
    s.spec = LeftMonotoneSpec{};
  } else if (name == "interpolated") {
    s.spec = InterpolatedSpec{detail::number(detail::field(j, "lambda", where), where + ".lambda")};
  } else {
    throw DomainError(where + ".spec: unknown time change \"" + name + "\"");
  }
  const auto& lv = detail::field(j, "levels", where);
  if (!lv.is_array()) throw DomainError(where + ".levels: expected an array");
  for (std::size_t i = 0; i < lv.size(); ++i) s.levels.push_back(detail::number(lv[i], where + ".levels[" + std::to_string(i) + "]"));
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("cap_hits")) s.cap_hits = j.at("cap_hits").get<std::size_t>();
  const auto& paths = detail::field(j, "paths", where);
  if (!paths.is_array() || paths.empty()) throw DomainError(where + ".paths: expected a nonempty array");
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const std::string at = where + ".paths[" + std::to_string(i) + "]";
    const auto& p = paths[i];
    if (!p.is_array() || p.size() != 5 || !p[4].is_array() || p[4].size() != s.levels.size())
      throw DomainError(at + ": expected [start, level, position, pivot, [B_T_l...]]");
    StoppedSample q;
    q.start = detail::number(p[0], at + "[0]");
    if (!p[1].is_number_unsigned()) throw DomainError(at + "[1]: expected a nonnegative integer level");
    q.level = p[1].get<std::size_t>();
    q.position = detail::number(p[2], at + "[2]");
    q.pivot = detail::number(p[3], at + "[3]");
    for (std::size_t k = 0; k < p[4].size(); ++k)
      q.at_level.push_back(p[4][k].is_null() ? std::numeric_limits<double>::quiet_NaN()
                                             : detail::number(p[4][k], at + "[4][" + std::to_string(k) + "]"));
    if (!s.grid.index_of(q.start) || !s.grid.index_of(q.position))
      throw DomainError(at + ": start or position is not a grid point");
    s.paths.push_back(std::move(q));
  }
  return s;
}

inline json sweep_to_json(const SweepResult& r) {
  json pts = json::array();
  for (const auto& p : r.points) {
    json e = {{"lambda", p.lambda}, {"d_r", p.d_r}, {"d_lm", p.d_lm}};
    if (!std::isnan(p.d_r_mc)) {
      e["d_r_mc"] = p.d_r_mc;
      e["d_lm_mc"] = p.d_lm_mc;
    }
    pts.push_back(e);
  }
  return {{"format_version", kFormatVersion}, {"horizon", r.horizon}, {"points", pts}};
}

inline std::string sweep_to_csv(const SweepResult& r) {
  std::string s = "lambda,d_r,d_lm,d_r_mc,d_lm_mc\n";
  for (const auto& p : r.points)
    s += detail::fmt(p.lambda) + "," + detail::fmt(p.d_r) + "," + detail::fmt(p.d_lm) + "," +
         (std::isnan(p.d_r_mc) ? "" : detail::fmt(p.d_r_mc)) + "," +
         (std::isnan(p.d_lm_mc) ? "" : detail::fmt(p.d_lm_mc)) + "\n";
  return s;
}

}  // namespace shadows::io
