#include <gtest/gtest.h>

#include <cmath>

#include "phbhm/error.hpp"
#include "phbhm/geometry.hpp"

using namespace phbhm;

TEST(PaulTrap, SingleIonAtCenter) {
  auto g = solve_paul_trap_positions(1);
  ASSERT_EQ(g.size(), 1);
  EXPECT_EQ(g.positions[0], 0.0);
}

TEST(PaulTrap, TwoIonsAnalytic) {
  // z = 1/(2z)^2 gives z = (1/2)^(2/3).
  auto g = solve_paul_trap_positions(2);
  const double z = std::pow(0.5, 2.0 / 3.0);
  EXPECT_NEAR(g.positions[0], -z, 1e-12);
  EXPECT_NEAR(g.positions[1], z, 1e-12);
  EXPECT_NEAR(g.min_spacing, 2 * z, 1e-12);
}

TEST(PaulTrap, ThreeIonsAnalytic) {
  // Outer ion: z = 1/z^2 + 1/(2z)^2 = 5/(4 z^2).
  auto g = solve_paul_trap_positions(3);
  const double z = std::cbrt(1.25);
  EXPECT_NEAR(g.positions[0], -z, 1e-12);
  EXPECT_NEAR(g.positions[1], 0.0, 1e-12);
  EXPECT_NEAR(g.positions[2], z, 1e-12);
}

TEST(PaulTrap, LargeChainProperties) {
  for (int n : {4, 10, 25, 50, 100}) {
    auto g = solve_paul_trap_positions(n);
    EXPECT_LE(paul_force_residual(g.positions), 1e-12) << n;
    for (int i = 0; i + 1 < n; ++i) EXPECT_LT(g.positions[i], g.positions[i + 1]);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(g.positions[i], -g.positions[n - 1 - i], 1e-10);
    const double edge = g.positions[1] - g.positions[0];
    const double center = g.positions[n / 2] - g.positions[n / 2 - 1];
    EXPECT_LE(center, edge);
    EXPECT_NEAR(g.min_spacing, center, 1e-12);
  }
}

TEST(PaulTrap, ZeroIonsRejected) {
  try {
    solve_paul_trap_positions(0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidInput);
  }
}

TEST(Microtrap, UniformGrid) {
  auto g = microtrap_positions(3);
  EXPECT_EQ(g.positions, (std::vector<double>{0, 1, 2}));
  EXPECT_EQ(g.min_spacing, 1.0);
  EXPECT_EQ(microtrap_positions(1).min_spacing, 1.0);
  auto big = microtrap_positions(50);
  EXPECT_EQ(big.positions.back(), 49.0);
  EXPECT_THROW(microtrap_positions(0), Error);
}

TEST(HoppingScale, SubstitutionAndWarning) {
  auto h = hopping_scale(0.02, 12.5e6);
  EXPECT_NEAR(h.t, 125e3, 1e-6);
  EXPECT_FALSE(h.rwa_warning);
  EXPECT_TRUE(hopping_scale(0.4, 1.0).rwa_warning);
  EXPECT_THROW(hopping_scale(-1.0, 1.0), Error);
  EXPECT_THROW(hopping_scale(0.1, 0.0), Error);
}
