#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lgbh/density.hpp"

namespace {

using lgbh::DensityProfile;
using lgbh::Harmonic;
constexpr double pi = std::numbers::pi;

TEST(DensityProfile, InsertsConstantTermAndSorts) {
  DensityProfile p(3.0, {{2, 0.1, 0.0}, {1, 0.2, 0.5}});
  ASSERT_EQ(p.harmonics().size(), 3u);
  EXPECT_EQ(p.harmonics()[0], (Harmonic{0, 1.0, 0.0}));
  EXPECT_EQ(p.harmonics()[1].k, 1);
  EXPECT_EQ(p.max_order(), 2);
}

TEST(DensityProfile, RejectsDuplicatesAndBadRadius) {
  EXPECT_THROW(DensityProfile(1.0, {{1, 0.1, 0}, {1, 0.2, 0}}), lgbh::ValidationError);
  EXPECT_THROW(DensityProfile(0.0, {}), lgbh::ValidationError);
  EXPECT_THROW(DensityProfile(1.0, {{-1, 0.1, 0}}), lgbh::ValidationError);
}

TEST(DensityAt, Examples) {
  DensityProfile constant(4.0, {});
  EXPECT_EQ(lgbh::density_at(constant, 1.0, 0.3), 1.0);
  EXPECT_EQ(lgbh::density_at(constant, 6.0, 0.3), 0.0);
  DensityProfile chain(4.0, {{1, 1.0, 0.0}});
  EXPECT_EQ(lgbh::density_at(chain, 2.0, 0.0), 2.0);
  EXPECT_EQ(lgbh::density_at(chain, 1.5 * 4.0, 0.0), 0.0);
  EXPECT_EQ(lgbh::density_at(chain, 4.0, 0.0), 2.0);  // boundary belongs to the disk
}

TEST(ValidateNonnegative, Examples) {
  EXPECT_NEAR(lgbh::validate_nonnegative(DensityProfile(4.0, {{1, 1.0, 0.0}})), 0.0, 1e-15);
  EXPECT_THROW(lgbh::validate_nonnegative(DensityProfile(4.0, {{1, 1.2, 0.0}})), lgbh::NonPhysicalDensity);
  const DensityProfile ladder(4.0, {{1, 0.75, 0.9 * pi}, {2, 0.25, 1.1 * pi}});
  EXPECT_GE(lgbh::validate_nonnegative(ladder), 0.0);
}

TEST(ValidateNonnegative, ErrorCarriesMinimum) {
  try {
    lgbh::validate_nonnegative(DensityProfile(4.0, {{1, 1.2, 0.3}}));
    FAIL();
  } catch (const lgbh::NonPhysicalDensity& e) {
    EXPECT_NEAR(e.minimum(), -0.2, 1e-12);
  }
}

TEST(ValidateNonnegative, SearchMatchesFineGrid) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> c(0.0, 0.6), ph(0.0, 2 * pi);
  for (int trial = 0; trial < 30; ++trial) {
    DensityProfile p(4.0, {{1, c(rng), ph(rng)}, {2, c(rng), ph(rng)}, {5, c(rng), ph(rng)}});
    double grid = 1e300;
    for (int i = 0; i < 200000; ++i) grid = std::min(grid, p.angular(2 * pi * i / 200000));
    const double found = lgbh::angular_minimum(p);
    EXPECT_LE(found, grid + 1e-12);
    EXPECT_GE(found, grid - 1e-6);
  }
}

TEST(ValidateNonnegative, TouchingZeroAcceptedWithPhase) {
  // 1 + cos(phi + 0.9 pi) touches zero at a non-grid angle.
  EXPECT_NO_THROW(lgbh::validate_nonnegative(DensityProfile(4.0, {{1, 1.0, 0.9 * pi}})));
}

TEST(Rotation, CovariantWithAngleShift) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> c(-0.5, 0.5), ph(-pi, pi);
  for (int trial = 0; trial < 50; ++trial) {
    DensityProfile p(4.0, {{1, c(rng), ph(rng)}, {3, c(rng), ph(rng)}, {4, c(rng), ph(rng)}});
    const double alpha = ph(rng), r = 2.0, phi = ph(rng);
    EXPECT_NEAR(lgbh::density_at(lgbh::rotate(p, alpha), r, phi), lgbh::density_at(p, r, phi - alpha), 1e-13);
  }
}

TEST(Validation, MonotoneUnderModulationScaling) {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> c(0.0, 0.7), ph(-pi, pi), s(0.0, 1.0);
  int accepted = 0;
  for (int trial = 0; trial < 60; ++trial) {
    DensityProfile p(4.0, {{1, c(rng), ph(rng)}, {2, c(rng), ph(rng)}});
    try {
      lgbh::validate_nonnegative(p);
    } catch (const lgbh::NonPhysicalDensity&) {
      continue;
    }
    ++accepted;
    EXPECT_NO_THROW(lgbh::validate_nonnegative(lgbh::scale_modulation(p, s(rng))));
  }
  EXPECT_GT(accepted, 10);
}

}  // namespace
