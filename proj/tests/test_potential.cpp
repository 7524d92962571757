#include <gtest/gtest.h>

#include <random>

#include "instances.hpp"
#include "shadows/potential.hpp"

using namespace shadows;
using testing_support::brute_potential;
using testing_support::random_measure;

TEST(Potential, Examples) {
  EXPECT_DOUBLE_EQ(potential_of(DiscreteMeasure::dirac(0))(2.0), 2.0);
  const auto u = potential_of(DiscreteMeasure{{-1, 0.5}, {1, 0.5}});
  EXPECT_DOUBLE_EQ(u(0.0), 1.0);
  EXPECT_DOUBLE_EQ(u(1.0), 1.0);
  const auto half = potential_of(DiscreteMeasure::dirac(3, 0.5));
  EXPECT_DOUBLE_EQ(half(3.0), 0.0);
  EXPECT_DOUBLE_EQ(half(5.0), 1.0);
  EXPECT_DOUBLE_EQ(half.left_slope(), -0.5);
}

TEST(Potential, FromPotentialExamples) {
  EXPECT_EQ(measure_from_potential(PiecewiseLinearFn({0.0}, {0.0}, -1, 1)), DiscreteMeasure::dirac(0));
  // slopes −1 → −0.5 → 0.5 → 1 give jumps 0.5, 1, 0.5
  const auto m = measure_from_potential(PiecewiseLinearFn({-1, 0, 1}, {1, 0.5, 1}, -1, 1));
  const DiscreteMeasure expected{{-1, 0.25}, {0, 0.5}, {1, 0.25}};
  EXPECT_LE(max_atom_discrepancy(m, expected), 1e-15);
  EXPECT_THROW(measure_from_potential(PiecewiseLinearFn({-1, 0, 1}, {0, 1, 0}, -1, 1)), DomainError);
}

TEST(Potential, MatchesDirectSumAndRoundTrips) {
  std::mt19937_64 g(21);
  std::uniform_real_distribution<double> y(-8, 8);
  for (int it = 0; it < 500; ++it) {
    const auto m = random_measure(g, 50, 1.0 + it % 3, it % 2 == 0);
    const auto u = potential_of(m);
    for (int k = 0; k < 20; ++k) {
      const double x = y(g);
      EXPECT_NEAR(u(x), brute_potential(m, x), 1e-12);
    }
    const auto back = measure_from_potential(u);
    ASSERT_EQ(back.size(), m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
      EXPECT_NEAR(back[i].x, m[i].x, 1e-12 * std::max(1.0, std::abs(m[i].x)));
      EXPECT_NEAR(back[i].w, m[i].w, 1e-12 * std::max(1.0, m[i].w));
    }
    EXPECT_TRUE(u.is_convex());
  }
}

TEST(Potential, Asymptotes) {
  std::mt19937_64 g(22);
  for (int it = 0; it < 500; ++it) {
    const auto m = random_measure(g, 30, 1.5, false);
    const auto u = potential_of(m);
    const double spread = m.max() - m.min() + 1.0;
    const double far = std::max(std::abs(m.min()), std::abs(m.max())) + 1e6 * spread;
    for (double x : {-far, far}) {
      const double asym = m.mass() * std::abs(x - m.barycenter());
      EXPECT_NEAR(u(x) - asym, 0.0, 1e-9 * std::max(1.0, asym));
    }
  }
}

TEST(Order, Examples) {
  const auto d0 = DiscreteMeasure::dirac(0);
  const DiscreteMeasure two{{-1, 0.5}, {1, 0.5}};
  EXPECT_TRUE(order_leq(d0, two, Order::convex));
  EXPECT_FALSE(order_leq(two, d0, Order::convex));
  EXPECT_TRUE(order_leq(DiscreteMeasure{{-1, 0.25}, {1, 0.25}}, two, Order::positive));
  EXPECT_FALSE(order_leq(DiscreteMeasure::dirac(0, 0.5), two, Order::convex));
}

TEST(Order, ConvexOrderAgreesWithPotentialsAtBreakpoints) {
  std::mt19937_64 g(23);
  for (int it = 0; it < 500; ++it) {
    const auto a = random_measure(g, 10);
    const auto b = it % 2 ? testing_support::random_two_point_dilation(g, a) : testing_support::random_contraction(g, a);
    bool by_potential = true;
    for (double x : merged_positions(a, b))
      if (brute_potential(a, x) > brute_potential(b, x) + 1e-9) by_potential = false;
    EXPECT_EQ(order_leq(a, b, Order::convex), by_potential);
    if (it % 2) { EXPECT_TRUE(by_potential); }
  }
}

TEST(Order, PositiveOrderWithEqualMassMeansEquality) {
  std::mt19937_64 g(24);
  for (int it = 0; it < 500; ++it) {
    const auto b = random_measure(g, 10);
    const auto a = testing_support::random_submeasure(g, b, 1.0);
    ASSERT_TRUE(order_leq(a, b, Order::positive));
    if (std::abs(a.mass() - b.mass()) <= 1e-12) { EXPECT_EQ(a, b); }
    EXPECT_TRUE(order_leq(b, b, Order::positive));
  }
}
