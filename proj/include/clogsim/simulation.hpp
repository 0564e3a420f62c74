#pragma once

// Time integration of a macro problem from t = 0 to T with output landing
// times, mass records and clog-event collection.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "clogsim/errors.hpp"
#include "clogsim/macrosolver.hpp"
#include "clogsim/observables.hpp"

namespace clogsim {

struct RunSettings {
  double dt = 1e-3;
  double T = 3.0;
  double record_interval = 0.01;    // cadence of mass records
  std::vector<double> field_times;  // full-field snapshots (T is always added)
};

struct MassRecord {
  double t = 0.0;
  Masses m;
  double sc_global = 0.0;
};

enum class RunStatus { Completed, AllClogged };

inline std::string_view to_string(RunStatus s) { return s == RunStatus::Completed ? "Completed" : "AllClogged"; }

struct RunResult {
  RunStatus status = RunStatus::Completed;
  MacroState initial;
  MacroState final_state;
  std::vector<MassRecord> masses;
  std::vector<MacroState> fields;
  std::vector<ClogEvent> clogs;
  double clipped_mass = 0.0;
  double peak_mass = 0.0;  // max over records of the total mass
  long steps = 0;
  long rejections = 0;
};

inline MacroState initial_state(const MacroGrid& g, const std::vector<std::vector<double>>& u0,
                                const std::vector<double>& v0, const std::vector<double>& r0, MicroConfig config) {
  MacroState s;
  s.u = u0;
  s.v = v0;
  s.r = r0;
  const auto n = static_cast<std::size_t>(g.nodes());
  for (const auto& ui : u0) {
    if (ui.size() != n) throw ConfigError("initial state: species profile has wrong length");
  }
  if (v0.size() != n || r0.size() != n) throw ConfigError("initial state: profile has wrong length");
  s.clogged.assign(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    for (const auto& ui : u0) {
      if (!(ui[j] >= 0.0)) throw ConfigError("initial state: negative concentration");
    }
    if (!(v0[j] >= 0.0)) throw ConfigError("initial state: negative deposit");
    if (!(r0[j] >= kRMin && r0[j] <= kSqrt2)) throw ConfigError("initial state: radius outside [r_min, sqrt 2]");
    if (void_area(r0[j], config) <= kAreaMin) s.clogged[j] = 1;
  }
  return s;
}

using StepObserver = std::function<void(const MacroState& prev, const MacroState& next, const StepInfo& info)>;

inline RunResult run(const MacroGrid& g, const MacroProblem& prob, const MacroState& init, const RunSettings& set,
                     const StepObserver& observer = {}) {
  if (!(set.dt > 0.0) || !(set.T > 0.0)) throw ConfigError("run: dt and T must be positive");
  if (!(set.record_interval > 0.0)) throw ConfigError("run: record interval must be positive");
  RunResult res;
  res.initial = init;
  const double eps = 1e-9 * set.dt;

  std::vector<double> fixed = set.field_times;
  fixed.push_back(set.T);
  if (prob.schedule.t0 > 0.0 && prob.schedule.t0 < set.T) fixed.push_back(prob.schedule.t0);
  std::sort(fixed.begin(), fixed.end());
  std::vector<double> field_times = set.field_times;
  field_times.push_back(set.T);
  std::sort(field_times.begin(), field_times.end());
  field_times.erase(std::unique(field_times.begin(), field_times.end()), field_times.end());
  std::size_t next_field = 0;

  const auto record = [&](const MacroState& s) {
    MassRecord rec{s.t, masses(g, s), storage_indicators(g, s, init).sc_global};
    res.peak_mass = std::max(res.peak_mass, rec.m.total());
    res.masses.push_back(std::move(rec));
  };
  const auto maybe_field = [&](const MacroState& s) {
    while (next_field < field_times.size() && std::abs(field_times[next_field] - s.t) <= eps) {
      res.fields.push_back(s);
      ++next_field;
    }
    while (next_field < field_times.size() && field_times[next_field] < s.t - eps) ++next_field;
  };

  MacroState cur = init;
  record(cur);
  maybe_field(cur);
  long rec_index = 1;
  while (cur.t < set.T - eps) {
    // Next landing time: mass-record grid, field times, inlet switch, T.
    double target = rec_index * set.record_interval;
    for (const double f : fixed) {
      if (f > cur.t + eps) {
        target = std::min(target, f);
        break;
      }
    }
    target = std::min(target, set.T);
    double dt = std::min(set.dt, target - cur.t);
    if (target - cur.t - dt <= eps) dt = target - cur.t;
    StepInfo info;
    MacroState next;
    try {
      next = step(g, cur, dt, prob, &info);
    } catch (const SolverError& e) {
      throw SolverError("run: step from t=" + std::to_string(cur.t) + " failed: " + e.what());
    }
    if (info.halvings == 0 && dt == target - cur.t) next.t = target;
    if (std::abs(next.t - target) <= eps) next.t = target;
    res.steps += 1;
    res.rejections += info.halvings;
    res.clipped_mass += info.clipped_mass;
    for (const auto& ev : detect_clogs(g, cur, next)) res.clogs.push_back(ev);
    if (observer) observer(cur, next, info);
    cur = std::move(next);
    while (rec_index * set.record_interval <= cur.t + eps) {
      if (std::abs(rec_index * set.record_interval - cur.t) <= eps) record(cur);
      ++rec_index;
    }
    maybe_field(cur);
    if (std::all_of(cur.clogged.begin(), cur.clogged.end(), [](std::uint8_t c) { return c != 0; })) {
      res.status = RunStatus::AllClogged;
      break;
    }
  }
  if (res.masses.back().t != cur.t) record(cur);
  if (res.fields.empty() || res.fields.back().t != cur.t) res.fields.push_back(cur);
  res.final_state = std::move(cur);
  return res;
}

}  // namespace clogsim
