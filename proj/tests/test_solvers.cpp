#include <gtest/gtest.h>

#include <random>

#include "instances.hpp"
#include "shadows/dilation.hpp"
#include "shadows/io.hpp"
#include "shadows/solvers.hpp"

using namespace shadows;

namespace {

const DiscreteMeasure kTwo{{-1, 0.5}, {1, 0.5}};
const DiscreteMeasure kThree{{-2, 1.0 / 3}, {0, 1.0 / 3}, {2, 1.0 / 3}};

}  // namespace

TEST(LmSolve, Examples) {
  const auto grid = GridSpec::covering(kTwo, kThree, 0.05);
  const auto s = lm_solve(kTwo, kThree, grid);
  ASSERT_EQ(s.coupling.rows().size(), 2u);
  EXPECT_LE(max_atom_discrepancy(s.coupling.rows()[0].conditional, DiscreteMeasure{{-2, 0.5}, {0, 0.5}}), 1e-12);
  EXPECT_LE(max_atom_discrepancy(s.coupling.rows()[1].conditional,
                                 DiscreteMeasure{{-2, 1.0 / 6}, {0, 1.0 / 6}, {2, 2.0 / 3}}),
            1e-12);
  ASSERT_EQ(s.plans.size(), 2u);
  // each plan embeds its row's conditional from the row's source
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& plan = s.plans[i];
    EXPECT_EQ(plan.mu, DiscreteMeasure::dirac(s.coupling.rows()[i].x));
    const auto c = root_coupling(plan);
    EXPECT_LE(wasserstein1(c.rows()[0].conditional, s.coupling.rows()[i].conditional, 1e-9), 1e-6);
  }

  const auto point = lm_solve(DiscreteMeasure::dirac(0), kThree, grid);
  EXPECT_LE(max_atom_discrepancy(point.coupling.rows()[0].conditional, kThree), 1e-12);

  const auto same = lm_solve(kThree, kThree, grid);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_LE(max_atom_discrepancy(same.coupling.rows()[i].conditional, DiscreteMeasure::dirac(same.coupling.rows()[i].x)),
              1e-12);
    EXPECT_EQ(same.plans[i].levels(), 1u);
  }
}

TEST(LmSolve, MarginalAndMartingaleOnRandomPairs) {
  std::mt19937_64 g(71);
  for (int it = 0; it < 500; ++it) {
    const auto nu = testing_support::random_measure(g, 12);
    const auto mu = testing_support::random_contraction(g, nu);
    const auto s = lm_solve(mu, nu, GridSpec::covering(mu, nu, 0.25), false);
    EXPECT_LE(max_atom_discrepancy(s.coupling.target_marginal(), s.nu), 1e-9) << "instance " << it;
    EXPECT_LE(s.coupling.martingale_defect(), 1e-9) << "instance " << it;
  }
}

TEST(HullGrid, CoversSourceAndTarget) {
  const auto g = hull_grid(0.3, kThree, 0.1);
  EXPECT_LE(g.x_min(), -2.0 + 1e-12);
  EXPECT_GE(g.x_max(), 2.0 - 1e-12);
  EXPECT_TRUE(g.index_of(0.3).has_value());
  EXPECT_GT(g.n_levels, static_cast<std::size_t>(kThree.variance() / g.dt()));
}

TEST(Interpolate, TwoPointTargetIsLambdaIndependent) {
  const auto mu = DiscreteMeasure::dirac(0);
  const auto grid = GridSpec::covering(mu, kTwo, 0.05);
  const auto root = root_solve(mu, kTwo, grid);
  const auto rc = root_coupling(root);
  for (double lam : {0.0025, 0.1, 0.5, 1.0, 3.0}) {
    const auto in = interpolate_solve(mu, kTwo, lam, grid, &root, false);
    EXPECT_LE(coupling_distance(in.coupling, rc), 1e-9) << "lambda " << lam;
    EXPECT_LE(max_atom_discrepancy(in.coupling.rows()[0].conditional, kTwo), 1e-9);
  }
}

TEST(Interpolate, BeyondHorizonIsTheRootCoupling) {
  const auto nu = io::normal_quantiles(0, 1, 16);
  const DiscreteMeasure mu{{-0.5, 0.5}, {0.5, 0.5}};
  const auto grid = GridSpec::covering(mu, nu, 0.1);
  const auto root = root_solve(mu, nu, grid);
  const auto in = interpolate_solve(mu, nu, root.horizon() + 1.0, grid, &root);
  EXPECT_TRUE(in.degenerate);
  EXPECT_TRUE(in.plans.empty());
  EXPECT_EQ(coupling_distance(in.coupling, root_coupling(root)), 0.0);
  EXPECT_LE(wasserstein1(in.eta, root.nu, 1e-9), 1e-6);
}

TEST(Interpolate, SnapsLambdaToTheLattice) {
  const auto mu = DiscreteMeasure::dirac(0);
  const auto grid = GridSpec::covering(mu, kTwo, 0.05);
  const auto a = interpolate_solve(mu, kTwo, 0.0026, grid, nullptr, false);
  EXPECT_EQ(a.level, 1u);
  EXPECT_DOUBLE_EQ(a.spec.lambda, grid.dt());
  const auto b = interpolate_solve(mu, kTwo, 1e-9, grid, nullptr, false);
  EXPECT_EQ(b.level, 1u);
  const auto c = interpolate_solve(mu, kTwo, 0.1, grid, nullptr, false);
  EXPECT_EQ(c.level, 40u);
  EXPECT_THROW(interpolate_solve(mu, kTwo, 0.0, grid), DomainError);
  EXPECT_THROW(interpolate_solve(mu, kTwo, std::numeric_limits<double>::infinity(), grid), DomainError);
}

TEST(Interpolate, IntermediateLawSitsBetweenMarginals) {
  std::mt19937_64 g(72);
  std::uniform_real_distribution<double> lam(0.05, 3.0);
  for (int it = 0; it < 200; ++it) {
    const auto nu = testing_support::random_measure(g, 8);
    const auto mu = testing_support::random_contraction(g, nu);
    const auto grid = GridSpec::covering(mu, nu, 0.25);
    const auto in = interpolate_solve(mu, nu, lam(g), grid, nullptr, false);
    EXPECT_NEAR(in.eta.mass(), 1.0, 1e-9);
    EXPECT_TRUE(order_leq(in.root.mu, in.eta, Order::convex, 1e-8)) << "instance " << it;
    EXPECT_TRUE(order_leq(in.eta, in.root.nu, Order::convex, 1e-8)) << "instance " << it;
    EXPECT_LE(in.coupling.martingale_defect(), 1e-6) << "instance " << it;
    EXPECT_LE(wasserstein1(in.coupling.target_marginal(), in.root.nu, 1e-9), 1e-6) << "instance " << it;
  }
}

TEST(MultiMarginal, SingleTargetIsTheLeftCurtain) {
  const auto stages = multi_marginal_lm(kTwo, {kThree});
  ASSERT_EQ(stages.size(), 1u);
  EXPECT_LE(coupling_distance(stages[0], left_curtain(kTwo, kThree)), 1e-12);
}

TEST(MultiMarginal, RestrictedMarginalsAreObstructedShadows) {
  const auto nu2 = dilate(kThree, ClosedSet::points({-3, 0, 3}));
  const std::vector<DiscreteMeasure> nus{kThree, nu2};
  const auto stages = multi_marginal_lm(kTwo, nus);
  ASSERT_EQ(stages.size(), 2u);
  for (const auto& r : kTwo.atoms()) {
    const auto obs = obstructed_shadow(restrict_to(kTwo, HalfLine{r.x}), nus);
    for (std::size_t i = 0; i < 2; ++i)
      EXPECT_LE(max_atom_discrepancy(stages[i].target_marginal_below(r.x), obs[i]), 1e-8);
  }
  EXPECT_LE(max_atom_discrepancy(stages[1].target_marginal(), nu2), 1e-9);
}

TEST(MultiMarginal, PointSourceFollowsTheChain) {
  const std::vector<DiscreteMeasure> nus{kTwo, DiscreteMeasure{{-2, 0.5}, {2, 0.5}}};
  const auto stages = multi_marginal_lm(DiscreteMeasure{{0, 0.5}, {0, 0.5}}, nus);
  const auto obs = obstructed_shadow(DiscreteMeasure::dirac(0), nus);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_LE(max_atom_discrepancy(stages[i].target_marginal(), obs[i]), 1e-12);
}

TEST(MultiMarginal, RandomChains) {
  std::mt19937_64 g(73);
  for (int it = 0; it < 500; ++it) {
    const auto nu2 = testing_support::random_measure(g, 10);
    const auto nu1 = testing_support::random_contraction(g, nu2);
    const auto mu = testing_support::random_contraction(g, nu1);
    const std::vector<DiscreteMeasure> nus{nu1, nu2};
    const auto stages = multi_marginal_lm(mu, nus);
    for (const auto& r : mu.atoms()) {
      const auto obs = obstructed_shadow(restrict_to(mu, HalfLine{r.x}), nus);
      for (std::size_t i = 0; i < 2; ++i)
        EXPECT_LE(max_atom_discrepancy(stages[i].target_marginal_below(r.x), obs[i]), 1e-8) << "instance " << it;
    }
  }
}

TEST(MultiMarginal, OrderViolationNamesTheStage) {
  try {
    multi_marginal_lm(kTwo, {kThree, kTwo});
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("stage 2"), std::string::npos);
  }
}
