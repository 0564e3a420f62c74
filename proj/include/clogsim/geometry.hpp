#pragma once

// Closed-form geometry of the evolving periodicity cell Y = [-1,1]^2 with a
// centred solid grain of "radius" r. For r <= 1 the grain is a disc; for
// 1 < r <= sqrt(2) it is clipped by the cell according to one of two
// closures (ConfigA: arcs tangent to the cell sides; ConfigB: arcs of the
// growing circle cut by the cell). The cell clogs at r = sqrt(2).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "clogsim/errors.hpp"

namespace clogsim {

enum class MicroConfig { ConfigA, ConfigB };

inline constexpr double kSqrt2 = std::numbers::sqrt2;
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kCellArea = 4.0;
/// Smallest admissible grain radius.
inline constexpr double kRMin = 1e-6;

inline std::string_view to_string(MicroConfig c) { return c == MicroConfig::ConfigA ? "A" : "B"; }

inline MicroConfig parse_micro_config(std::string_view s) {
  if (s == "A" || s == "a" || s == "ConfigA") return MicroConfig::ConfigA;
  if (s == "B" || s == "b" || s == "ConfigB") return MicroConfig::ConfigB;
  throw ConfigError("unknown micro configuration '" + std::string(s) + "' (expected A or B)");
}

namespace detail {

inline void check_radius(double r, const char* what) {
  if (!(r >= kRMin) || r > kSqrt2) {
    throw DomainError(std::string(what) + ": radius " + std::to_string(r) +
                      " outside [r_min, sqrt(2)]");
  }
}

// acos(1/r) for r >= 1, guarded against 1/r rounding slightly above 1.
inline double acos_inv(double r) { return std::acos(std::min(1.0, 1.0 / r)); }

}  // namespace detail

/// Radius of the corner arcs in configuration A, r_d = (sqrt2 - r)/(sqrt2 - 1).
inline double config_a_arc_radius(double r) { return (kSqrt2 - r) / (kSqrt2 - 1.0); }

namespace detail {

// Closed forms of the clipped-grain branch, also valid at r = 1 where they
// meet the circular branch.
inline double clipped_length(double r, MicroConfig config) {
  if (config == MicroConfig::ConfigA) return 2.0 * kPi * config_a_arc_radius(r);
  return std::max(0.0, r * (2.0 * kPi - 8.0 * acos_inv(r)));
}

inline double clipped_volume(double r, MicroConfig config) {
  if (config == MicroConfig::ConfigA) {
    const double rd = config_a_arc_radius(r);
    return kCellArea * (1.0 + rd * rd * (kPi / 4.0 - 1.0));
  }
  const double v = kCellArea * (std::sqrt(std::max(0.0, r * r - 1.0)) + 0.5 * r * r * (kPi / 2.0 - 2.0 * acos_inv(r)));
  return std::min(kCellArea, v);
}

inline double clipped_area(double r, MicroConfig config) {
  if (config == MicroConfig::ConfigA) {
    const double rd = config_a_arc_radius(r);
    return kCellArea * (1.0 - kPi / 4.0) * rd * rd;
  }
  return std::max(0.0, kCellArea - clipped_volume(r, config));
}

}  // namespace detail

/// Length of the grain interface Gamma(r) inside the cell.
inline double interface_length(double r, MicroConfig config) {
  detail::check_radius(r, "interface_length");
  return r <= 1.0 ? 2.0 * kPi * r : detail::clipped_length(r, config);
}

/// Area occupied by the solid grain inside the cell.
inline double solid_volume(double r, MicroConfig config) {
  detail::check_radius(r, "solid_volume");
  return r <= 1.0 ? kPi * r * r : detail::clipped_volume(r, config);
}

/// Void area A(r) = |Y_0(r)| = 4 - V(r).
inline double void_area(double r, MicroConfig config) {
  detail::check_radius(r, "void_area");
  return r <= 1.0 ? kCellArea - kPi * r * r : detail::clipped_area(r, config);
}

/// Porosity phi = A/|Y|.
inline double porosity(double r, MicroConfig config) { return void_area(r, config) / kCellArea; }

/// gamma(r) = alpha / (2 r (pi - 4 acos(1/r))), the configuration-B growth factor.
inline double config_b_gamma(double r, double alpha) {
  detail::check_radius(r, "config_b_gamma");
  if (r <= 1.0 || r >= kSqrt2) throw DomainError("config_b_gamma: requires 1 < r < sqrt(2)");
  return alpha / (2.0 * r * (kPi - 4.0 * detail::acos_inv(r)));
}

/// Multiplier m(r) in dr/dt = m(r) (sum_i a_i u_i - beta v).
///
/// r <= 1: 2 pi alpha. ConfigA, r > 1: 2 pi alpha_bar/(sqrt2 - 1) with
/// alpha_bar = alpha (sqrt2-1)^2 / (8 (1 - pi/4)), constant on the branch.
/// ConfigB, r > 1: gamma(r) L(r), which reduces to alpha.
inline double radius_rate_coefficient(double r, MicroConfig config, double alpha) {
  detail::check_radius(r, "radius_rate_coefficient");
  if (r >= kSqrt2) throw DomainError("radius_rate_coefficient: cell is clogged (r >= sqrt(2))");
  if (r <= 1.0) return 2.0 * kPi * alpha;
  if (config == MicroConfig::ConfigA) {
    const double alpha_bar =
        alpha * (kSqrt2 - 1.0) * (kSqrt2 - 1.0) / (8.0 * (1.0 - kPi / 4.0));
    return 2.0 * kPi * alpha_bar / (kSqrt2 - 1.0);
  }
  return config_b_gamma(r, alpha) * interface_length(r, config);
}

}  // namespace clogsim
