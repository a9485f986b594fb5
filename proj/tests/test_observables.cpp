#include <gtest/gtest.h>

#include <cmath>

#include "phbhm/error.hpp"
#include "phbhm/exact_diag.hpp"
#include "phbhm/observables.hpp"

using namespace phbhm;

namespace {
// Product Fock state measurements.
RawMeasurements fock(const std::vector<int>& occ) {
  const int n = static_cast<int>(occ.size());
  RawMeasurements r;
  r.hop = Eigen::MatrixXd::Zero(n, n);
  r.dens = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    r.density.push_back(occ[i]);
    r.density_sq.push_back(occ[i] * occ[i]);
    r.hop(i, i) = occ[i];
    for (int j = 0; j < n; ++j) r.dens(i, j) = occ[i] * occ[j];
  }
  return r;
}
}  // namespace

TEST(Observables, OrderParametersOnFockStates) {
  auto mott = build_report(fock({1, 1, 1, 1}), {});
  EXPECT_EQ(mott.tonks_O, 0.0);
  EXPECT_DOUBLE_EQ(mott.attractive_O, 0.25);
  for (double f : mott.fluctuations) EXPECT_EQ(f, 0.0);
  auto two = build_report(fock({2, 2, 2}), {});
  EXPECT_DOUBLE_EQ(two.tonks_O, 2.0);
  auto cluster = build_report(fock({0, 5, 0, 0, 0}), {}, {.rescaled_hop = false});
  EXPECT_DOUBLE_EQ(cluster.attractive_O, 25.0 / 25.0);
}

TEST(Observables, DivisionGuardNamesSite) {
  try {
    build_report(fock({1, 0, 2}), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DivisionGuard);
    EXPECT_EQ(e.value(), 2.0);
    EXPECT_NE(std::string(e.what()).find("n_2"), std::string::npos);
  }
}

TEST(Observables, ExactCondensateProperties) {
  // U = 0 ground state of N=4, N_ph=4; C^aa -> 1 - O(1/N_ph).
  auto m = build_model(microtrap_positions(4), 0.0, 4, 4);
  SectorBasis b(4, 4, 4);
  auto ed = ed_ground_state(m, b, 1);
  auto rep = build_report(measure_exact(b, ed.pairs[0].vector), {});
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(rep.caa(i, i), 1.0, 1e-12);
    double row = 0;
    for (int j = 0; j < 4; ++j) {
      row += rep.cnn(i, j);
      EXPECT_NEAR(rep.caa(i, j), rep.caa(j, i), 1e-12);
      EXPECT_NEAR(rep.caa(i, j), rep.caa(3 - i, 3 - j), 1e-8);
      // Staggered condensate: magnitude near one, sign alternating.
      EXPECT_GT(std::abs(rep.caa(i, j)), 0.75);
      EXPECT_LE(std::abs(rep.caa(i, j)), 1.0 + 1e-12);
    }
    EXPECT_NEAR(row, 0.0, 1e-10);
  }
}

TEST(Observables, TwoSiteCondensateClosedForm) {
  // Two sites, two phonons, U=0, flat: (a+_1 - a+_2)^2 |0> / 2 gives
  // n = 1, <n^2> = 3/2, <a+_1 a_2> = -1.
  BuildOptions o;
  o.flat_onsite = true;
  auto m = build_model(microtrap_positions(2), 0.0, 2, 2, o);
  SectorBasis b(2, 2, 2);
  auto rep = build_report(measure_exact(b, ed_ground_state(m, b, 1).pairs[0].vector), {});
  EXPECT_NEAR(rep.density[0], 1.0, 1e-12);
  EXPECT_NEAR(rep.fluctuations[0], std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(rep.hop_raw(0, 1), -1.0, 1e-12);
  EXPECT_NEAR(rep.caa(0, 1), -1.0, 1e-12);
  EXPECT_NEAR(rep.cnn(0, 1), -0.5, 1e-12);
}

TEST(Observables, SpinCorrelator) {
  auto raw = fock({3, 2, 3, 2});
  raw.hop(0, 1) = raw.hop(1, 0) = 0.6;
  ReportMetadata md;
  EXPECT_THROW(spin_correlator(build_report(raw, md), 1), Error);
  md.pattern = SitePattern::AlternatingOddEven;
  auto rep = build_report(raw, md);
  auto s = spin_correlator(rep, 1);
  EXPECT_NEAR(s[0], 3.0 / 3.0, 1e-15);
  EXPECT_NEAR(s[1], 0.6 / std::sqrt(6.0), 1e-15);
  auto s2 = spin_correlator(rep, 2);
  EXPECT_NEAR(s2[1], 2.0 / 2.0, 1e-15);
  EXPECT_EQ(default_reference_site(50), 26);
}
