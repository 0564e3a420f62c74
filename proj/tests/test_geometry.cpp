#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "clogsim/geometry.hpp"

using namespace clogsim;

namespace {

constexpr MicroConfig kA = MicroConfig::ConfigA;
constexpr MicroConfig kB = MicroConfig::ConfigB;

// Closed forms evaluated directly, without going through the library branches.
double oracle_length_a(double r) { return 2 * M_PI * (std::sqrt(2.0) - r) / (std::sqrt(2.0) - 1); }
double oracle_length_b(double r) { return r * (2 * M_PI - 8 * std::acos(1 / r)); }
double oracle_volume_a(double r) {
  const double rd = (std::sqrt(2.0) - r) / (std::sqrt(2.0) - 1);
  return 4 * (1 + rd * rd * (M_PI / 4 - 1));
}
double oracle_volume_b(double r) {
  return 4 * (std::sqrt(r * r - 1) + 0.5 * r * r * (M_PI / 2 - 2 * std::acos(1 / r)));
}

std::vector<double> radius_grid(int n) {
  std::vector<double> g;
  for (int k = 1; k <= n; ++k) g.push_back(kSqrt2 * k / n);
  return g;
}

}  // namespace

TEST(Geometry, LengthAtUnitRadiusIsTwoPiInBothConfigs) {
  EXPECT_NEAR(interface_length(1.0, kA), 2 * M_PI, 1e-14);
  EXPECT_NEAR(interface_length(1.0, kB), 2 * M_PI, 1e-14);
}

TEST(Geometry, LengthVanishesAtClog) {
  EXPECT_NEAR(interface_length(kSqrt2, kA), 0.0, 1e-12);
  EXPECT_NEAR(interface_length(kSqrt2, kB), 0.0, 1e-12);
}

TEST(Geometry, LengthBranchValues) {
  EXPECT_NEAR(interface_length(1.2, kA), oracle_length_a(1.2), 1e-14);
  EXPECT_NEAR(interface_length(1.2, kA), 3.2493, 5e-4);
  EXPECT_NEAR(interface_length(1.1, kB), oracle_length_b(1.1), 1e-14);
  EXPECT_NEAR(interface_length(1.1, kB), 3.1301468, 1e-6);
  EXPECT_DOUBLE_EQ(interface_length(0.3, kB), 2 * M_PI * 0.3);
}

TEST(Geometry, VoidAreaValues) {
  EXPECT_NEAR(void_area(0.88, kA), 4 - M_PI * 0.88 * 0.88, 1e-14);
  EXPECT_NEAR(void_area(0.88, kA), 1.5672, 1e-4);
  EXPECT_NEAR(void_area(kRMin, kA), 4.0, 1e-11);
  EXPECT_NEAR(void_area(1.1, kB), 4 - oracle_volume_b(1.1), 1e-14);
  EXPECT_NEAR(void_area(1.1, kB), 0.446, 1e-3);
  EXPECT_NEAR(void_area(kSqrt2, kA), 0.0, 1e-12);
  EXPECT_NEAR(void_area(kSqrt2, kB), 0.0, 1e-12);
}

TEST(Geometry, SolidVolumeValues) {
  EXPECT_NEAR(solid_volume(1.0, kB), M_PI, 1e-14);
  EXPECT_NEAR(solid_volume(1.0, kA), M_PI, 1e-14);
  EXPECT_NEAR(solid_volume(kSqrt2, kB), 4.0, 1e-12);
  EXPECT_NEAR(solid_volume(kSqrt2, kA), 4.0, 1e-12);
  EXPECT_NEAR(solid_volume(1.2, kA), oracle_volume_a(1.2), 1e-14);
  EXPECT_NEAR(solid_volume(1.2, kA), 3.7704, 1e-4);
}

TEST(Geometry, PorosityValues) {
  EXPECT_NEAR(porosity(0.88, kA), 0.3918, 5e-4);
  EXPECT_NEAR(porosity(kRMin, kB), 1.0, 1e-11);
  EXPECT_NEAR(porosity(kSqrt2, kA), 0.0, 1e-12);
}

TEST(Geometry, RadiusRateCoefficient) {
  EXPECT_NEAR(radius_rate_coefficient(0.5, kA, 1.0), 2 * M_PI, 1e-14);
  EXPECT_NEAR(radius_rate_coefficient(1.0, kB, 1.0), 2 * M_PI, 1e-14);
  const double a_branch = 2 * M_PI * (std::sqrt(2.0) - 1) / (8 * (1 - M_PI / 4));
  EXPECT_NEAR(radius_rate_coefficient(1.3, kA, 1.0), a_branch, 1e-13);
  EXPECT_NEAR(radius_rate_coefficient(1.05, kA, 1.0), a_branch, 1e-13);
  EXPECT_NEAR(radius_rate_coefficient(1.3, kA, 0.5), 0.5 * a_branch, 1e-13);
  for (int k = 1; k < 1000; ++k) {
    const double r = 1.0 + (kSqrt2 - 1.0) * k / 1000.0;
    EXPECT_NEAR(radius_rate_coefficient(r, kB, 1.0), 1.0, 1e-12) << r;
    EXPECT_NEAR(config_b_gamma(r, 1.0) * interface_length(r, kB), 1.0, 1e-12) << r;
  }
}

TEST(Geometry, DomainErrors) {
  EXPECT_THROW(interface_length(0.0, kA), DomainError);
  EXPECT_THROW(void_area(-0.1, kB), DomainError);
  EXPECT_THROW(solid_volume(1.5, kA), DomainError);
  EXPECT_THROW(porosity(std::nan(""), kA), DomainError);
  EXPECT_THROW(radius_rate_coefficient(kSqrt2, kA, 1.0), DomainError);
}

TEST(Geometry, ConfigNamesRoundTrip) {
  EXPECT_EQ(parse_micro_config(to_string(kA)), kA);
  EXPECT_EQ(parse_micro_config("B"), kB);
  EXPECT_THROW(parse_micro_config("C"), ConfigError);
}

TEST(GeometryProperty, PartitionOnDenseGrid) {
  for (const auto c : {kA, kB}) {
    for (const double r : radius_grid(1000)) {
      EXPECT_NEAR(void_area(r, c) + solid_volume(r, c), 4.0, 1e-12) << r;
    }
  }
}

// One-sided limits at r = 1: the clipped-grain closed forms evaluated at 1
// against the circular branch.
TEST(GeometryProperty, ContinuityAtUnitRadius) {
  for (const auto c : {kA, kB}) {
    EXPECT_NEAR(detail::clipped_length(1.0, c), interface_length(1.0, c), 1e-12);
    EXPECT_NEAR(detail::clipped_area(1.0, c), void_area(1.0, c), 1e-12);
    EXPECT_NEAR(detail::clipped_volume(1.0, c), solid_volume(1.0, c), 1e-12);
  }
}

// Just above 1 the configuration-B length has a square-root onset, so the
// gap to the circular value shrinks like sqrt(r - 1).
TEST(GeometryProperty, ApproachFromAbove) {
  for (const double eps : {1e-4, 1e-8, 1e-12}) {
    EXPECT_NEAR(interface_length(1.0 + eps, kA), 2 * M_PI, 20 * eps + 1e-12);
    EXPECT_NEAR(interface_length(1.0 + eps, kB), 2 * M_PI, 40 * std::sqrt(eps));
    EXPECT_NEAR(void_area(1.0 + eps, kB), 4 - M_PI, 40 * eps + 1e-12);
  }
}

TEST(GeometryProperty, StrictMonotonicity) {
  for (const auto c : {kA, kB}) {
    const auto g = radius_grid(1000);
    for (std::size_t k = 1; k < g.size(); ++k) {
      EXPECT_LT(void_area(g[k], c), void_area(g[k - 1], c)) << g[k];
      EXPECT_GT(solid_volume(g[k], c), solid_volume(g[k - 1], c)) << g[k];
    }
  }
}

TEST(GeometryProperty, RandomRadiiStayInRange) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ud(kRMin, kSqrt2);
  for (int k = 0; k < 2000; ++k) {
    const double r = ud(rng);
    for (const auto c : {kA, kB}) {
      const double phi = porosity(r, c);
      EXPECT_GE(phi, 0.0);
      EXPECT_LT(phi, 1.0);
      EXPECT_GE(interface_length(r, c), 0.0);
    }
  }
}
