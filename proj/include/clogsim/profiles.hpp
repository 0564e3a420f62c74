#pragma once

// Named initial profiles on the macro grid, written as
// "<kind> key=value ...", e.g. "quad c=1.38" or "normal mean=0.3 var=0.8 seed=7".
//   const   c          c
//   linear  c          c x
//   quad    c          c x^2
//   normal  mean var   i.i.d. nodal samples
//   uniform lo hi      i.i.d. nodal samples, default [0, sqrt 2]

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "clogsim/errors.hpp"
#include "clogsim/geometry.hpp"

namespace clogsim {

struct ProfileSpec {
  std::string kind = "const";
  std::map<std::string, double> params;
  std::optional<std::uint64_t> seed;

  double get(const std::string& key, double fallback) const {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }

  std::string text() const {
    std::ostringstream os;
    os << kind;
    for (const auto& [k, v] : params) os << ' ' << k << '=' << v;
    if (seed) os << " seed=" << *seed;
    return os.str();
  }
};

inline ProfileSpec parse_profile(const std::string& text) {
  std::istringstream is(text);
  ProfileSpec p;
  if (!(is >> p.kind)) throw ConfigError("profile: empty specification");
  static const std::map<std::string, std::vector<std::string>> allowed{
      {"const", {"c"}}, {"linear", {"c"}}, {"quad", {"c"}}, {"normal", {"mean", "var"}}, {"uniform", {"lo", "hi"}}};
  const auto kind = allowed.find(p.kind);
  if (kind == allowed.end()) throw ConfigError("profile: unknown kind '" + p.kind + "'");
  std::string tok;
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ConfigError("profile: expected key=value, got '" + tok + "'");
    const std::string key = tok.substr(0, eq);
    const std::string val = tok.substr(eq + 1);
    try {
      if (key == "seed") {
        p.seed = std::stoull(val);
        continue;
      }
      bool known = false;
      for (const auto& k : kind->second) known = known || k == key;
      if (!known) throw ConfigError("profile: '" + p.kind + "' has no parameter '" + key + "'");
      std::size_t used = 0;
      p.params[key] = std::stod(val, &used);
      if (used != val.size()) throw std::invalid_argument(val);
    } catch (const std::logic_error&) {
      throw ConfigError("profile: bad value in '" + tok + "'");
    }
  }
  if (p.kind == "normal" && p.get("var", 0.8) < 0.0) throw ConfigError("profile: negative variance");
  return p;
}

/// Nodal values x_j = j/M, j = 0..M. `seed` is used when the profile has none.
inline std::vector<double> evaluate_profile(const ProfileSpec& p, int M, std::uint64_t seed) {
  std::vector<double> out(static_cast<std::size_t>(M) + 1);
  std::mt19937_64 rng(p.seed.value_or(seed));
  for (int j = 0; j <= M; ++j) {
    const double x = static_cast<double>(j) / M;
    double v = 0.0;
    if (p.kind == "const") {
      v = p.get("c", 0.0);
    } else if (p.kind == "linear") {
      v = p.get("c", 1.0) * x;
    } else if (p.kind == "quad") {
      v = p.get("c", 1.0) * x * x;
    } else if (p.kind == "normal") {
      std::normal_distribution<double> nd(p.get("mean", 0.3), std::sqrt(p.get("var", 0.8)));
      v = nd(rng);
    } else if (p.kind == "uniform") {
      std::uniform_real_distribution<double> ud(p.get("lo", 0.0), p.get("hi", kSqrt2));
      v = ud(rng);
    } else {
      throw ConfigError("profile: unknown kind '" + p.kind + "'");
    }
    out[static_cast<std::size_t>(j)] = v;
  }
  return out;
}

/// Radius profile clamped to [r_min, sqrt(2) - 1e-3].
inline std::vector<double> radius_profile(const ProfileSpec& p, int M, std::uint64_t seed) {
  auto r = evaluate_profile(p, M, seed);
  for (double& x : r) x = std::clamp(x, kRMin, kSqrt2 - 1e-3);
  return r;
}

}  // namespace clogsim
