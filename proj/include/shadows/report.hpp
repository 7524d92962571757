#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace shadows {

/// One named numerical check: `value` compared against `tolerance`.
struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  std::string note;
};

struct Report {
  std::string name;
  std::vector<Check> checks;
  std::vector<std::string> notes;

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }

  double max_value() const {
    double m = 0.0;
    for (const auto& c : checks) m = std::max(m, c.value);
    return m;
  }

  void add(std::string check_name, double value, double tolerance, std::string note = {}) {
    checks.push_back({std::move(check_name), value, tolerance, value <= tolerance, std::move(note)});
  }
};

}  // namespace shadows
