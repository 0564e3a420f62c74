#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "clogsim/coefftable.hpp"
#include "support.hpp"

using namespace clogsim;

namespace {

CoeffTable small_table() {
  CoeffTable t;
  t.radii = {kRMin, 0.5, 1.0, 1.2};
  t.tau = {1.0, 0.8, 0.0, 0.0};
  return t;
}

}  // namespace

TEST(TableRadii, PartitionAtDefaultSpacing) {
  const auto r = table_radii(0.02);
  EXPECT_EQ(r.front(), kRMin);
  EXPECT_EQ(r.back(), kSqrt2 - 0.01);
  EXPECT_GE(r.size(), 65u);
  EXPECT_LE(r.size(), 80u);
  EXPECT_NE(std::find(r.begin(), r.end(), 1.0), r.end());
  for (std::size_t i = 1; i < r.size(); ++i) EXPECT_GT(r[i], r[i - 1]);
  EXPECT_THROW(table_radii(0.0), DomainError);
  EXPECT_THROW(table_radii(0.2), DomainError);
}

TEST(Interpolation, KnotsMidpointsAndClamp) {
  const auto t = small_table();
  EXPECT_EQ(interpolate_tau(t, 0.5), 0.8);
  EXPECT_EQ(interpolate_tau(t, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(interpolate_tau(t, 0.75), 0.4);
  EXPECT_EQ(interpolate_tau(t, kSqrt2), 0.0);
  EXPECT_EQ(interpolate_tau(t, 1.3), t.tau.back());
  EXPECT_THROW(interpolate_tau(t, 0.5 * kRMin), DomainError);
}

TEST(Serialization, RoundTripIsExact) {
  auto t = small_table();
  t.tau[1] = 0.1 + 0.2;  // not exactly representable in short decimal
  std::stringstream ss;
  write_table(ss, t);
  const auto back = read_table(ss);
  EXPECT_EQ(back.radii, t.radii);
  EXPECT_EQ(back.tau, t.tau);
  EXPECT_EQ(back.config, t.config);
  EXPECT_EQ(back.h_used, t.h_used);
  std::stringstream again;
  write_table(again, back);
  std::stringstream first;
  write_table(first, t);
  EXPECT_EQ(again.str(), first.str());
}

TEST(Serialization, HeaderLines) {
  std::stringstream ss;
  write_table(ss, small_table());
  std::string l1, l2, l3, l4;
  std::getline(ss, l1);
  std::getline(ss, l2);
  std::getline(ss, l3);
  std::getline(ss, l4);
  EXPECT_EQ(l1, "clogsim-table 1");
  EXPECT_EQ(l2, "config A");
  EXPECT_EQ(l3.rfind("h ", 0), 0u);
  EXPECT_EQ(l4.rfind("tol ", 0), 0u);
}

TEST(Serialization, RejectsMalformedFiles) {
  std::istringstream wrong_version("clogsim-table 9\nconfig A\nh 0.05\ntol 1e-10\n0 1\n1 0\n");
  EXPECT_THROW(read_table(wrong_version), ConfigError);
  std::istringstream bad_row("clogsim-table 1\nconfig A\nh 0.05\ntol 1e-10\n0 one\n");
  EXPECT_THROW(read_table(bad_row), ConfigError);
  std::istringstream unsorted("clogsim-table 1\nconfig A\nh 0.05\ntol 1e-10\n0.5 1\n0.2 0.9\n");
  EXPECT_THROW(read_table(unsorted), ConfigError);
  std::istringstream out_of_range("clogsim-table 1\nconfig A\nh 0.05\ntol 1e-10\n0.5 1.5\n0.6 0.9\n");
  EXPECT_THROW(read_table(out_of_range), ConfigError);
}

TEST(Serialization, ConfigMismatchOnLoad) {
  const auto dir = fixtures::scratch_dir("table_mismatch");
  const std::string path = (dir / "t.txt").string();
  save_table(small_table(), path);
  const MicroConfig b = MicroConfig::ConfigB, a = MicroConfig::ConfigA;
  EXPECT_THROW(load_table(path, &b), ConfigError);
  EXPECT_NO_THROW(load_table(path, &a));
  EXPECT_THROW(load_table((dir / "missing.txt").string()), ConfigError);
}

TEST(BuiltTable, InvariantsForBothConfigs) {
  for (const auto c : {MicroConfig::ConfigA, MicroConfig::ConfigB}) {
    const auto& t = fixtures::default_table(c);
    EXPECT_NO_THROW(check_table(t));
    EXPECT_TRUE(tau_monotone(t));
    EXPECT_GE(t.tau.front(), 0.999);
    EXPECT_EQ(t.config, c);
    EXPECT_EQ(t.h_used, 0.05);
  }
}

// The nodes bracketing contact: 1e-6 short of it and at it.
TEST(BuiltTable, ContinuousAcrossContact) {
  const auto& t = fixtures::default_table(MicroConfig::ConfigA);
  const auto it = std::find(t.radii.begin(), t.radii.end(), 1.0);
  ASSERT_NE(it, t.radii.end());
  const std::size_t k = static_cast<std::size_t>(it - t.radii.begin());
  EXPECT_LE(std::abs(t.tau[k - 1] - t.tau[k]), 0.02);
  EXPECT_LE(std::abs(t.tau[k + 1] - t.tau[k]), 0.02);
}

TEST(BuiltTable, HeldOutInterpolationError) {
  const auto& t = fixtures::default_table(MicroConfig::ConfigA);
  for (const double r : {0.013, 0.11, 0.37, 0.55, 0.73, 0.91, 0.97, 0.985, 0.995, 0.9995, 1.1, 1.3}) {
    const double direct = cell_coefficient(r, MicroConfig::ConfigA, t.h_used).tau_hat;
    EXPECT_LE(std::abs(interpolate_tau(t, r) - direct), 0.02) << r;
  }
}

TEST(BuiltTable, DeterministicAcrossThreadCounts) {
  const auto serial = build_table(MicroConfig::ConfigB, 0.1, 0.1, 1);
  const auto parallel = build_table(MicroConfig::ConfigB, 0.1, 0.1, 4);
  std::stringstream a, b;
  write_table(a, serial);
  write_table(b, parallel);
  EXPECT_EQ(a.str(), b.str());
}
