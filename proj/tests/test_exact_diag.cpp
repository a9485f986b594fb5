#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "oracles.hpp"
#include "phbhm/error.hpp"
#include "phbhm/exact_diag.hpp"

using namespace phbhm;

TEST(SectorBasis, SmallEnumeration) {
  SectorBasis b(2, 2, 2);
  ASSERT_EQ(b.dimension(), 3);
  EXPECT_EQ(b.state(0)[0], 2);
  EXPECT_EQ(b.state(1)[0], 1);
  EXPECT_EQ(b.state(2)[1], 2);
  EXPECT_EQ(SectorBasis(3, 3, 3).dimension(), 10);
  EXPECT_EQ(SectorBasis(6, 12, 12).dimension(), 6188);
}

TEST(SectorBasis, CountsMatchBruteForce) {
  for (int n = 1; n <= 6; ++n)
    for (int nph = 0; nph <= 12; ++nph)
      for (int cap = 1; cap <= 12; ++cap) {
        const auto want = oracle::brute_count(n, nph, cap);
        if (want == 0) {
          EXPECT_THROW(SectorBasis(n, nph, cap), Error);
          continue;
        }
        EXPECT_EQ(SectorBasis::count(n, nph, cap), want);
        if (want > 3000) continue;
        SectorBasis b(n, nph, cap);
        ASSERT_EQ(b.dimension(), want);
        std::set<std::vector<std::uint8_t>> seen;
        for (std::int64_t k = 0; k < b.dimension(); ++k) {
          auto s = b.state(k);
          int sum = 0;
          for (auto v : s) {
            EXPECT_LE(v, cap);
            sum += v;
          }
          EXPECT_EQ(sum, nph);
          EXPECT_EQ(b.index_of(s), k);
          seen.emplace(s.begin(), s.end());
        }
        EXPECT_EQ(static_cast<std::int64_t>(seen.size()), want);
      }
}

TEST(SectorBasis, EmptySectorError) {
  try {
    SectorBasis(2, 5, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySector);
  }
}

namespace {
BoseHubbardModel two_site(double u, int nph, int nmax, bool flat) {
  BuildOptions o;
  o.flat_onsite = flat;
  return build_model(microtrap_positions(2), u, nph, nmax, o);
}
}  // namespace

TEST(ExactDiag, OnePhononTwoSites) {
  auto m = two_site(5.0, 1, 1, false);  // eps = [-1, -1]
  SectorBasis b(2, 1, 1);
  EXPECT_NEAR(ed_ground_state(m, b, 1).pairs[0].energy, -2.0, 1e-12);
  auto flat = two_site(5.0, 1, 1, true);
  EXPECT_NEAR(ed_gap(flat, b), 2.0, 1e-12);
}

TEST(ExactDiag, StrongCouplingPerturbative) {
  const double U = 1000.0;
  auto m = two_site(U, 2, 2, true);
  SectorBasis b(2, 2, 2);
  const double e0 = ed_ground_state(m, b, 1).pairs[0].energy;
  // Symmetric 2x2 block [[0, 2], [2, 2U]]; second order gives -2 t^2 / U.
  EXPECT_NEAR(e0, U - std::sqrt(U * U + 4.0), 1e-12);
  EXPECT_NEAR(e0, -2.0 / U, 1e-8);
}

TEST(ExactDiag, NonInteractingMatchesOneParticle) {
  for (auto geo : {microtrap_positions(5), solve_paul_trap_positions(6)}) {
    const int nph = 4;
    auto m = build_model(geo, 0.0, nph, nph);
    SectorBasis b(geo.size(), nph, nph);
    EXPECT_NEAR(ed_ground_state(m, b, 1).pairs[0].energy, nph * oracle::one_particle_lowest(m), 1e-10);
  }
}

TEST(ExactDiag, MatchesIndependentDenseBuild) {
  auto m = build_model(solve_paul_trap_positions(4), 1.7, 5, 3);
  m.onsite_interaction = {1.7, -0.4, 2.5, 0.3};
  SectorBasis b(4, 5, 3);
  auto ref = oracle::dense_sector(m, 5, 3);
  SectorHamiltonian h(m, b);
  Eigen::MatrixXd dense = h.to_dense();
  EXPECT_EQ((dense - dense.transpose()).cwiseAbs().maxCoeff(), 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ref.H);
  auto r = ed_ground_state(m, b, 3);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(r.pairs[k].energy, es.eigenvalues()(k), 1e-10);
}

TEST(ExactDiag, SparseRouteMatchesOracleAndThreads) {
  auto m = build_model(solve_paul_trap_positions(7), 2.0, 7, 7);
  SectorBasis b(7, 7, 7);
  SectorHamiltonian h1(m, b, 1), h3(m, b, 3);
  ASSERT_NE(h1.storage(), SectorHamiltonian::Storage::Dense);
  auto ref = oracle::dense_sector(m, 7, 7);
  ASSERT_EQ(static_cast<std::int64_t>(ref.states.size()), b.dimension());
  std::vector<std::int64_t> map(ref.states.size());
  for (size_t k = 0; k < ref.states.size(); ++k) {
    std::vector<std::uint8_t> occ(ref.states[k].begin(), ref.states[k].end());
    map[k] = b.index_of(occ);
  }
  Eigen::VectorXd xr = Eigen::VectorXd::LinSpaced(b.dimension(), -1.0, 2.0);
  Eigen::VectorXd x(b.dimension()), y1(b.dimension()), y3(b.dimension());
  for (size_t k = 0; k < map.size(); ++k) x(map[k]) = xr(k);
  const std::span<const double> xs(x.data(), x.size());
  h1.apply(xs, {y1.data(), static_cast<size_t>(y1.size())});
  h3.apply(xs, {y3.data(), static_cast<size_t>(y3.size())});
  EXPECT_EQ((y1 - y3).cwiseAbs().maxCoeff(), 0.0);
  Eigen::VectorXd yr = ref.H * xr;
  for (size_t k = 0; k < map.size(); ++k) EXPECT_NEAR(y1(map[k]), yr(k), 1e-11);
}

TEST(ExactDiag, UniformShiftCovariance) {
  auto m = build_model(microtrap_positions(5), 1.3, 5, 5);
  SectorBasis b(5, 5, 5);
  auto r0 = ed_ground_state(m, b, 2);
  auto shifted = m;
  for (double& e : shifted.onsite_energy) e += 0.75;
  auto r1 = ed_ground_state(shifted, b, 2);
  for (int k = 0; k < 2; ++k) EXPECT_NEAR(r1.pairs[k].energy - r0.pairs[k].energy, 0.75 * 5, 1e-10);
  EXPECT_NEAR(std::abs(r0.pairs[0].vector.dot(r1.pairs[0].vector)), 1.0, 1e-9);
}

TEST(ExactDiag, ReflectionSymmetricDensity) {
  auto m = build_model(solve_paul_trap_positions(5), 2.0, 4, 4);
  SectorBasis b(5, 4, 4);
  auto r = ed_ground_state(m, b, 1);
  ASSERT_FALSE(r.degenerate);
  auto meas = measure_exact(b, r.pairs[0].vector);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(meas.density[i], meas.density[4 - i], 1e-8);
  double sum = 0;
  for (double n : meas.density) sum += n;
  EXPECT_NEAR(sum, 4.0, 1e-12);
  for (int i = 0; i < 5; ++i) {
    double row = 0;
    for (int j = 0; j < 5; ++j) row += meas.dens(i, j) - meas.density[i] * meas.density[j];
    EXPECT_NEAR(row, 0.0, 1e-10);
    EXPECT_NEAR(meas.hop(i, i), meas.density[i], 1e-12);
  }
}

TEST(ExactDiag, ClassicalAlternatingDegeneracy) {
  auto m = build_model(microtrap_positions(4), 1.0, 8, 8);
  std::fill(m.hopping.begin(), m.hopping.end(), 0.0);
  std::fill(m.onsite_energy.begin(), m.onsite_energy.end(), 0.0);
  m = apply_site_pattern(m, SitePattern::AlternatingOddEven, 1.0, 2.0);
  SectorBasis b(4, 8, 8);
  auto r = ed_ground_state(m, b, 1);
  EXPECT_EQ(r.ground_degeneracy, 6);
  EXPECT_TRUE(r.degenerate);

  auto m2 = build_model(microtrap_positions(2), 1.0, 4, 4);
  std::fill(m2.hopping.begin(), m2.hopping.end(), 0.0);
  std::fill(m2.onsite_energy.begin(), m2.onsite_energy.end(), 0.0);
  m2 = apply_site_pattern(m2, SitePattern::AlternatingOddEven, 1.0, 2.0);
  EXPECT_NEAR(ed_gap(m2, SectorBasis(2, 4, 4)), 0.0, 1e-12);
}

TEST(ExactDiag, GapNeedsTwoStates) {
  auto m = two_site(1.0, 0, 1, false);
  try {
    ed_gap(m, SectorBasis(2, 0, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UndefinedGap);
  }
}

// Strongly diagonal-dominant sector where a preconditioned search started only
// from random vectors used to settle on an excited state.
TEST(ExactDiag, AlternatingLargeUGroundStateIsLowest) {
  const double u = 40.0;
  SectorBasis b(6, 12, 12);
  std::vector<double> e;
  for (double ratio : {2.45, 2.5, 2.55, 2.7, 2.8, 2.85}) {
    auto m = apply_site_pattern(build_model(microtrap_positions(6), u, 12, 12), SitePattern::AlternatingOddEven,
                                u, ratio * u);
    SectorHamiltonian h(m, b);
    const double dmin = *std::min_element(h.diagonal().begin(), h.diagonal().end());
    auto r = ed_ground_state(m, b, 2);
    EXPECT_LE(r.pairs[0].energy, dmin) << "ratio " << ratio;
    e.push_back(r.pairs[0].energy);
  }
  // E0 is nondecreasing and concave in the even-site interaction.
  for (size_t k = 1; k < e.size(); ++k) EXPECT_GE(e[k], e[k - 1] - 1e-9);
  EXPECT_GE(e[1], 0.5 * (e[0] + e[2]) - 1e-9);
  EXPECT_LT(e[5] - e[0], 10.0);
}
