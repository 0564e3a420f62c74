#pragma once

// Simulation configuration: flat key = value text with [sections] and
// comma-separated arrays. '#' starts a comment. See configs/base.cfg.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "clogsim/errors.hpp"
#include "clogsim/geometry.hpp"
#include "clogsim/kinetics.hpp"
#include "clogsim/macrosolver.hpp"
#include "clogsim/profiles.hpp"

namespace clogsim {

struct SimConfig {
  SpeciesParams species;
  MicroConfig config = MicroConfig::ConfigA;
  BoundarySchedule schedule;
  int M = 100;
  double dt = 1e-3;
  double T = 3.0;
  double record_interval = 0.01;
  std::vector<double> field_times{0.5, 1.0, 1.5, 2.0, 2.5};
  ProfileSpec u0 = parse_profile("const c=0");
  ProfileSpec v0 = parse_profile("const c=0");
  ProfileSpec r0 = parse_profile("const c=0.1");
  std::uint64_t seed = 7;
  std::string table_path;  // empty: build the table
  double table_dr = 0.02;
  double table_h = 0.05;
  std::string out_dir = "out";
  bool plot = false;

  void validate() const {
    species.validate();
    if (M < 1) throw ConfigError("config: grid.M must be >= 1");
    if (!(dt > 0.0)) throw ConfigError("config: time.dt must be > 0");
    if (!(T > 0.0)) throw ConfigError("config: time.T must be > 0");
    if (!(record_interval > 0.0)) throw ConfigError("config: time.record_interval must be > 0");
    if (!(schedule.t0 >= 0.0)) throw ConfigError("config: time.t0 must be >= 0");
    if (schedule.u_b.size() != static_cast<std::size_t>(species.N)) {
      throw ConfigError("config: species.u_b needs " + std::to_string(species.N) + " entries");
    }
    for (const double x : schedule.u_b) {
      if (!(x >= 0.0)) throw ConfigError("config: species.u_b must be >= 0");
    }
    if (!table_path.empty() && !std::filesystem::exists(table_path)) {
      throw ConfigError("config: table file '" + table_path + "' does not exist");
    }
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (trim(v.substr(used)).empty()) return x;
  } catch (const std::logic_error&) {
  }
  throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
}

inline std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  return out;
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: '" + key + "' expects a boolean, got '" + v + "'");
}

inline std::vector<double> kernel(const std::string& key, const std::vector<double>& raw, int N) {
  const auto n = static_cast<std::size_t>(N);
  if (raw.size() == 1) return std::vector<double>(n * n, raw[0]);
  if (raw.size() == n * n) return raw;
  throw ConfigError("config: '" + key + "' needs 1 or N*N values");
}

}  // namespace detail

/// Applies one "section.key" assignment. Kernel entries are kept raw until
/// finalize_config() knows N.
class ConfigBuilder {
 public:
  void set(const std::string& key, const std::string& raw_value) {
    const std::string v = detail::trim(raw_value);
    values_[key] = v;
  }

  SimConfig build(const std::string& base_dir = "") const {
    SimConfig c;
    using namespace detail;
    std::vector<double> ka{0.1}, kb{100.0};
    for (const auto& [key, v] : values_) {
      if (key == "species.N") {
        c.species.N = static_cast<int>(to_double(key, v));
      } else if (key == "species.d") {
        c.species.d = to_doubles(key, v);
      } else if (key == "species.a") {
        c.species.a = to_doubles(key, v);
      } else if (key == "species.beta_i") {
        c.species.beta_i = to_doubles(key, v);
      } else if (key == "species.u_b") {
        c.schedule.u_b = to_doubles(key, v);
      } else if (key == "kinetics.kappa") {
        c.species.kappa = to_double(key, v);
      } else if (key == "kinetics.alpha") {
        c.species.alpha = to_double(key, v);
      } else if (key == "kinetics.kernel_alpha") {
        ka = to_doubles(key, v);
      } else if (key == "kinetics.kernel_beta") {
        kb = to_doubles(key, v);
      } else if (key == "kinetics.loss_mode") {
        c.species.loss_mode = parse_loss_mode(v);
      } else if (key == "kinetics.growth_only") {
        c.species.growth_only = to_bool(key, v);
      } else if (key == "kinetics.curvature_alpha") {
        c.species.curvature_alpha = to_double(key, v);
      } else if (key == "geometry.config") {
        c.config = parse_micro_config(v);
      } else if (key == "geometry.table") {
        c.table_path = v.empty() ? v : resolve(base_dir, v);
      } else if (key == "geometry.table_dr") {
        c.table_dr = to_double(key, v);
      } else if (key == "geometry.table_h") {
        c.table_h = to_double(key, v);
      } else if (key == "grid.M") {
        c.M = static_cast<int>(to_double(key, v));
      } else if (key == "time.dt") {
        c.dt = to_double(key, v);
      } else if (key == "time.T") {
        c.T = to_double(key, v);
      } else if (key == "time.t0") {
        c.schedule.t0 = to_double(key, v);
      } else if (key == "time.record_interval") {
        c.record_interval = to_double(key, v);
      } else if (key == "time.field_times") {
        c.field_times = to_doubles(key, v);
      } else if (key == "initial.u0") {
        c.u0 = parse_profile(v);
      } else if (key == "initial.v0") {
        c.v0 = parse_profile(v);
      } else if (key == "initial.r0") {
        c.r0 = parse_profile(v);
      } else if (key == "initial.seed") {
        c.seed = static_cast<std::uint64_t>(to_double(key, v));
      } else if (key == "output.dir") {
        c.out_dir = v;
      } else if (key == "output.plot") {
        c.plot = to_bool(key, v);
      } else {
        throw ConfigError("config: unknown key '" + key + "'");
      }
    }
    c.species.kernel_alpha = kernel("kinetics.kernel_alpha", ka, c.species.N);
    c.species.kernel_beta = kernel("kinetics.kernel_beta", kb, c.species.N);
    return c;
  }

  /// Reads "[section]" headers and "key = value" lines.
  void read(std::istream& is, const std::string& origin = "config") {
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError(origin + ":" + std::to_string(lineno) + ": bad section header");
        section = detail::trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
      }
      const std::string key = detail::trim(line.substr(0, eq));
      set(section.empty() ? key : section + "." + key, line.substr(eq + 1));
    }
  }

 private:
  std::map<std::string, std::string> values_;

  static std::string resolve(const std::string& base, const std::string& p) {
    if (base.empty() || std::filesystem::path(p).is_absolute()) return p;
    return (std::filesystem::path(base) / p).lexically_normal().string();
  }
};

inline SimConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot read '" + path + "'");
  ConfigBuilder b;
  b.read(is, path);
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("config override '" + o + "' is not key=value");
    b.set(detail::trim(o.substr(0, eq)), o.substr(eq + 1));
  }
  return b.build(std::filesystem::path(path).parent_path().string());
}

}  // namespace clogsim
