#pragma once

// Tabulated tortuosity tau(r) over a radius partition, with linear
// interpolation and a plain-text file format.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "clogsim/cellsolver.hpp"
#include "clogsim/errors.hpp"
#include "clogsim/geometry.hpp"

namespace clogsim {

inline constexpr int kTableVersion = 1;
/// Distance below sqrt(2) of the last table node.
inline constexpr double kTableClogGap = 0.01;

struct CoeffTable {
  MicroConfig config = MicroConfig::ConfigA;
  std::vector<double> radii;
  std::vector<double> tau;
  double h_used = 0.05;
  double tol = kCellSolverTol;

  std::size_t size() const { return radii.size(); }
};

/// Radius nodes: r_min, then multiples of delta_r up to 1, extra nodes just
/// below 1 where tau falls steeply (the last one 1e-6 short of contact), then
/// multiples of delta_r above 1 and finally sqrt(2) - 0.01.
inline std::vector<double> table_radii(double delta_r) {
  if (!(delta_r > 0.0) || delta_r > 0.1) throw DomainError("table: delta_r must lie in (0, 0.1]");
  std::vector<double> r{kRMin};
  const int m1 = static_cast<int>(std::llround(1.0 / delta_r));
  const double step = 1.0 / m1;
  for (int k = 1; k < m1; ++k) r.push_back(k * step);
  for (const double f : {0.5, 0.25, 0.05}) {
    const double x = 1.0 - f * step;
    if (x > r.back()) r.push_back(x);
  }
  r.push_back(1.0 - 1e-6);
  r.push_back(1.0);
  const double last = kSqrt2 - kTableClogGap;
  for (int k = 1;; ++k) {
    const double x = 1.0 + k * step;
    if (x >= last - 0.25 * step) break;
    r.push_back(x);
  }
  r.push_back(last);
  return r;
}

inline void check_table(const CoeffTable& t) {
  if (t.radii.size() != t.tau.size() || t.radii.size() < 2) throw ConfigError("table: inconsistent sizes");
  for (std::size_t i = 1; i < t.radii.size(); ++i) {
    if (!(t.radii[i] > t.radii[i - 1])) throw ConfigError("table: radii not strictly increasing");
  }
  for (const double v : t.tau) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("table: tau value outside [0, 1]");
  }
}

inline bool tau_monotone(const CoeffTable& t) {
  for (std::size_t i = 1; i < t.tau.size(); ++i) {
    if (t.tau[i] > t.tau[i - 1]) return false;
  }
  return true;
}

namespace detail {

inline std::vector<double> solve_radii(const std::vector<double>& radii, MicroConfig config, double h, int jobs) {
  std::vector<double> tau(radii.size(), 0.0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  const auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= radii.size()) return;
      try {
        tau[i] = cell_coefficient(radii[i], config, h).tau_hat;
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        if (!failure) {
          try {
            throw SolverError("table: cell solve failed at r=" + std::to_string(radii[i]) + ": " + e.what());
          } catch (...) {
            failure = std::current_exception();
          }
        }
        next = radii.size();
      }
    }
  };
  jobs = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int k = 1; k < jobs; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return tau;
}

}  // namespace detail

/// Builds the table; parallel over radii. If tau is not monotone at h the
/// table is rebuilt at h/2, and a second violation is an error.
inline CoeffTable build_table(MicroConfig config, double delta_r = 0.02, double h = 0.05, int jobs = 0) {
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  CoeffTable t;
  t.config = config;
  t.radii = table_radii(delta_r);
  for (int attempt = 0; attempt < 2; ++attempt) {
    t.h_used = h;
    t.tau = detail::solve_radii(t.radii, config, h, jobs);
    if (tau_monotone(t)) {
      check_table(t);
      return t;
    }
    h *= 0.5;
  }
  throw SolverError("table: tau not monotone in r even at h=" + std::to_string(t.h_used));
}

/// Piecewise-linear tau(r); clamped to the last value beyond the last node.
inline double interpolate_tau(const CoeffTable& t, double r) {
  if (!(r >= t.radii.front())) {
    throw DomainError("interpolate_tau: r=" + std::to_string(r) + " below first table node");
  }
  if (r >= t.radii.back()) return t.tau.back();
  const auto it = std::upper_bound(t.radii.begin(), t.radii.end(), r);
  const std::size_t i = static_cast<std::size_t>(it - t.radii.begin()) - 1;
  if (r == t.radii[i]) return t.tau[i];
  const double s = (r - t.radii[i]) / (t.radii[i + 1] - t.radii[i]);
  return t.tau[i] + s * (t.tau[i + 1] - t.tau[i]);
}

inline void write_table(std::ostream& os, const CoeffTable& t) {
  char buf[96];
  os << "clogsim-table " << kTableVersion << '\n';
  os << "config " << to_string(t.config) << '\n';
  std::snprintf(buf, sizeof buf, "h %.17g\ntol %.17g\n", t.h_used, t.tol);
  os << buf;
  for (std::size_t i = 0; i < t.radii.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", t.radii[i], t.tau[i]);
    os << buf;
  }
}

inline CoeffTable read_table(std::istream& is) {
  CoeffTable t;
  std::string line, key;
  const auto header = [&](const char* want) {
    if (!std::getline(is, line)) throw ConfigError(std::string("table: missing '") + want + "' line");
    std::istringstream ls(line);
    ls >> key;
    if (key != want) throw ConfigError("table: expected '" + std::string(want) + "', got '" + line + "'");
    std::string rest;
    ls >> rest;
    return rest;
  };
  const std::string ver = header("clogsim-table");
  if (ver != std::to_string(kTableVersion)) throw ConfigError("table: unsupported version '" + ver + "'");
  t.config = parse_micro_config(header("config"));
  try {
    t.h_used = std::stod(header("h"));
    t.tol = std::stod(header("tol"));
  } catch (const std::invalid_argument&) {
    throw ConfigError("table: malformed numeric header");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    double r, v;
    if (!(ls >> r >> v)) throw ConfigError("table: malformed row '" + line + "'");
    t.radii.push_back(r);
    t.tau.push_back(v);
  }
  check_table(t);
  return t;
}

inline void save_table(const CoeffTable& t, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("table: cannot write '" + path + "'");
  write_table(os, t);
}

/// Loads a table; with `expected` set, refuses a table built for the other
/// configuration.
inline CoeffTable load_table(const std::string& path, const MicroConfig* expected = nullptr) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("table: cannot read '" + path + "'");
  CoeffTable t = read_table(is);
  if (expected && *expected != t.config) {
    throw ConfigError("table: '" + path + "' was built for config " + std::string(to_string(t.config)) +
                      " but the simulation uses config " + std::string(to_string(*expected)));
  }
  return t;
}

}  // namespace clogsim
