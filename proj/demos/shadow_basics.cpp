// Shadows, the left curtain and a Kellerer dilation on small atomic measures.

#include <iostream>

#include "shadows/shadows.hpp"

using namespace shadows;

int main() {
  const DiscreteMeasure nu{{-2, 1.0 / 3}, {0, 1.0 / 3}, {2, 1.0 / 3}};
  const DiscreteMeasure mu{{-1, 0.5}, {1, 0.5}};

  const auto s = shadow(DiscreteMeasure::dirac(-1, 0.5), nu);
  std::cout << "shadow of 1/2 delta_-1 in nu: " << s.to_string() << "\n";
  std::cout << "LP oracle:                    " << shadow_lp_oracle(DiscreteMeasure::dirac(-1, 0.5), nu).to_string()
            << "\n\n";

  std::cout << "left curtain of mu into nu:\n";
  const auto curtain = left_curtain(mu, nu);
  for (const auto& r : curtain.rows()) std::cout << "  " << r.x << " -> " << r.conditional.to_string() << "\n";

  const auto nu2 = dilate(nu, ClosedSet::points({-3, 0, 3}));
  std::cout << "\nnu dilated onto {-3, 0, 3}: " << nu2.to_string() << "\n";
  const auto stages = multi_marginal_lm(mu, {nu, nu2});
  for (std::size_t i = 0; i < stages.size(); ++i) {
    std::cout << "stage " << i + 1 << ":\n";
    for (const auto& r : stages[i].rows()) std::cout << "  " << r.x << " -> " << r.conditional.to_string() << "\n";
  }
}
