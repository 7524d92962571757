// Root and left-monotone embeddings of N(0,1) into N(0,4), both discretized
// with 64 atoms, and the couplings in between.

#include <cmath>
#include <iomanip>
#include <iostream>
#include <limits>

#include "shadows/shadows.hpp"

using namespace shadows;

int main() {
  const auto mu = io::normal_quantiles(0, 1, 64), nu = io::normal_quantiles(0, 2, 64);
  const auto grid = GridSpec::covering(mu, nu, 0.05);
  const auto inf = std::numeric_limits<double>::infinity();
  const auto r = convergence_sweep(mu, nu, {grid.dt(), 0.1, 0.5, 1, 2, 5, inf}, grid);
  std::cout << "Root horizon " << r.horizon << "\n\n" << std::setw(10) << "lambda" << std::setw(12) << "d_root"
            << std::setw(12) << "d_lm" << "\n";
  for (const auto& p : r.points)
    std::cout << std::setw(10) << p.lambda << std::setw(12) << p.d_r << std::setw(12) << p.d_lm << "\n";
}
