#include <gtest/gtest.h>

#include <random>

#include "instances.hpp"
#include "shadows/dilation.hpp"

using namespace shadows;

using testing_support::random_inside;
using testing_support::random_set;
using testing_support::random_subset;

TEST(Dilate, Examples) {
  const auto f = ClosedSet::points({-1, 1});
  EXPECT_EQ(dilate(DiscreteMeasure::dirac(1), f), DiscreteMeasure::dirac(1));
  EXPECT_EQ(dilate(DiscreteMeasure::dirac(0), f), (DiscreteMeasure{{-1, 0.5}, {1, 0.5}}));
  const auto d = dilate(DiscreteMeasure{{0, 0.5}, {2, 0.5}}, ClosedSet::points({-1, 1, 3}));
  EXPECT_LE(max_atom_discrepancy(d, DiscreteMeasure{{-1, 0.25}, {1, 0.5}, {3, 0.25}}), 1e-15);
  // inside an interval component the atom stays put
  EXPECT_EQ(dilate(DiscreteMeasure::dirac(0.3), ClosedSet({{0, 1}})), DiscreteMeasure::dirac(0.3));
}

TEST(Dilate, OutsideHullIsDomainError) {
  EXPECT_THROW(dilate(DiscreteMeasure::dirac(5), ClosedSet::points({-1, 1})), DomainError);
  EXPECT_THROW(dilate(DiscreteMeasure::dirac(-1.5), ClosedSet({{-1, 1}})), DomainError);
}

TEST(Dilate, KernelInvariants) {
  std::mt19937_64 g(51);
  for (int it = 0; it < 500; ++it) {
    const auto f = random_set(g);
    const auto m = random_inside(g, f, 10);
    const auto d = dilate(m, f);
    EXPECT_NEAR(d.mass(), m.mass(), 1e-14);
    EXPECT_NEAR(d.first_moment(), m.first_moment(), 1e-12);
    for (const auto& a : d.atoms()) EXPECT_TRUE(f.contains(a.x));
    EXPECT_LE(max_atom_discrepancy(dilate(d, f), d), 1e-15);
    EXPECT_TRUE(order_leq(m, d, Order::convex));
    // single atom: barycenter exact
    const double x = m[0].x;
    EXPECT_NEAR(dilate(DiscreteMeasure::dirac(x), f).barycenter(), x, 1e-12);
  }
}

TEST(Dilate, CoarserSetGivesLargerImage) {
  std::mt19937_64 g(52);
  for (int it = 0; it < 500; ++it) {
    const auto f = random_set(g);
    const auto sub = random_subset(g, f);
    const auto m = random_inside(g, f, 8);
    EXPECT_TRUE(order_leq(dilate(m, f), dilate(m, sub), Order::convex)) << "instance " << it;
  }
}

TEST(ShadowDecomposition, Examples) {
  const std::vector<std::pair<double, DiscreteMeasure>> mus{{0.5, DiscreteMeasure::dirac(0)},
                                                            {0.5, DiscreteMeasure::dirac(0)}};
  EXPECT_THROW(shadow_decomposition_check(mus, {ClosedSet::points({-2, 2}), ClosedSet::points({-1, 1})}),
               DomainError);
  const auto r = shadow_decomposition_check(mus, {ClosedSet::points({-2, -1, 1, 2}), ClosedSet::points({-2, 2})});
  EXPECT_LE(r.prefix_discrepancy[0], 1e-9);
  EXPECT_LE(r.max_discrepancy, 1e-9);
  const auto single = shadow_decomposition_check({{1.0, DiscreteMeasure{{-0.5, 0.5}, {0.5, 0.5}}}},
                                                 {ClosedSet::points({-1, 1})});
  EXPECT_LE(single.max_discrepancy, 1e-12);
}

TEST(ShadowDecomposition, RandomDecreasingFamilies) {
  std::mt19937_64 g(53);
  std::uniform_int_distribution<int> stages(1, 5);
  for (int it = 0; it < 500; ++it) {
    std::vector<ClosedSet> fs{random_set(g)};
    const int k = stages(g);
    for (int i = 1; i < k; ++i) fs.push_back(random_subset(g, fs.back()));
    std::vector<std::pair<double, DiscreteMeasure>> mus;
    for (int i = 0; i < k; ++i) mus.push_back({1.0 / k, random_inside(g, fs[i], 4)});
    EXPECT_LE(shadow_decomposition_check(mus, fs).max_discrepancy, 1e-8) << "instance " << it;
  }
}
