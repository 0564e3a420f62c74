#pragma once

// Derived quantities of macro states: masses, porosity, clog events and
// storage-capacity indicators.

#include <string_view>
#include <vector>

#include "clogsim/geometry.hpp"
#include "clogsim/macrosolver.hpp"

namespace clogsim {

struct Masses {
  std::vector<double> U;  // per species, int u_i dx
  double V = 0.0;         // int v dx

  double total() const {
    double s = V;
    for (const double x : U) s += x;
    return s;
  }
};

/// 1^T B_l a: exact integral of the hat-function interpolant.
inline double integrate(const MacroGrid& g, const std::vector<double>& nodal) {
  const auto w = hat_integrals(g);
  double s = 0.0;
  for (std::size_t j = 0; j < nodal.size(); ++j) s += w[j] * nodal[j];
  return s;
}

inline Masses masses(const MacroGrid& g, const MacroState& s) {
  Masses m;
  for (const auto& ui : s.u) m.U.push_back(integrate(g, ui));
  m.V = integrate(g, s.v);
  return m;
}

inline std::vector<double> porosity_field(const MacroState& s, MicroConfig config) {
  std::vector<double> phi(s.r.size());
  for (std::size_t j = 0; j < s.r.size(); ++j) phi[j] = porosity(s.r[j], config);
  return phi;
}

enum class ClogTrigger { RadiusThreshold, AreaFloor };

inline std::string_view to_string(ClogTrigger t) {
  return t == ClogTrigger::RadiusThreshold ? "RadiusThreshold" : "AreaFloor";
}

struct ClogEvent {
  int node = 0;
  double x = 0.0;
  double time = 0.0;  // midpoint of the crossing step
  ClogTrigger trigger = ClogTrigger::AreaFloor;
};

/// Nodes that became clogged between prev and next.
inline std::vector<ClogEvent> detect_clogs(const MacroGrid& g, const MacroState& prev, const MacroState& next) {
  std::vector<ClogEvent> ev;
  const double tmid = 0.5 * (prev.t + next.t);
  for (std::size_t j = 0; j < next.clogged.size(); ++j) {
    if (next.clogged[j] && !prev.clogged[j]) {
      const auto trig = next.r[j] >= kSqrt2 ? ClogTrigger::RadiusThreshold : ClogTrigger::AreaFloor;
      ev.push_back({static_cast<int>(j), g.x(static_cast<int>(j)), tmid, trig});
    }
  }
  return ev;
}

struct StorageIndicators {
  std::vector<double> sc_local;  // v(x,t) - v(x,0)
  double sc_global = 0.0;
};

inline StorageIndicators storage_indicators(const MacroGrid& g, const MacroState& s, const MacroState& initial) {
  StorageIndicators sc;
  sc.sc_local.resize(s.v.size());
  for (std::size_t j = 0; j < s.v.size(); ++j) sc.sc_local[j] = s.v[j] - initial.v[j];
  sc.sc_global = integrate(g, sc.sc_local);
  return sc;
}

}  // namespace clogsim
