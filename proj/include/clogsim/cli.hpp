#pragma once

// Command-line front end: clogsim table|cell|run|sweep. Kept in a header so
// tests can drive cli_main() directly.

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "clogsim/cellmesh.hpp"
#include "clogsim/cellsolver.hpp"
#include "clogsim/coefftable.hpp"
#include "clogsim/config.hpp"
#include "clogsim/errors.hpp"
#include "clogsim/output.hpp"
#include "clogsim/profiles.hpp"
#include "clogsim/simulation.hpp"

namespace clogsim {

/// Relative paths go under $CLOGSIM_OUT when it is set.
inline std::filesystem::path output_path(const std::string& p) {
  std::filesystem::path path(p);
  const char* root = std::getenv("CLOGSIM_OUT");
  if (root && *root && path.is_relative()) return std::filesystem::path(root) / path;
  return path;
}

/// Simulation inputs resolved from a config: grid, problem, initial state.
struct PreparedRun {
  SimConfig cfg;
  CoeffTable table;
  MacroGrid grid{1};
  MacroProblem problem;
  MacroState init;
  RunSettings settings;
};

/// Builds the table into out_dir/table.txt when the config names none.
inline std::unique_ptr<PreparedRun> prepare_run(const SimConfig& cfg, const std::filesystem::path& out_dir,
                                                std::ostream& log) {
  cfg.validate();
  auto p = std::make_unique<PreparedRun>();
  p->cfg = cfg;
  if (cfg.table_path.empty()) {
    p->table = build_table(cfg.config, cfg.table_dr, cfg.table_h);
    std::filesystem::create_directories(out_dir);
    save_table(p->table, (out_dir / "table.txt").string());
    log << "built table (" << p->table.size() << " nodes) -> " << (out_dir / "table.txt").string() << '\n';
  } else {
    p->table = load_table(cfg.table_path, &cfg.config);
  }
  p->grid = MacroGrid(cfg.M);
  p->problem.params = cfg.species;
  p->problem.config = cfg.config;
  p->problem.schedule = cfg.schedule;
  p->problem.table = &p->table;
  const auto u0 = evaluate_profile(cfg.u0, cfg.M, cfg.seed);
  const auto v0 = evaluate_profile(cfg.v0, cfg.M, cfg.seed);
  const auto r0 = radius_profile(cfg.r0, cfg.M, cfg.seed);
  p->init = initial_state(p->grid, std::vector<std::vector<double>>(static_cast<std::size_t>(cfg.species.N), u0), v0,
                          r0, cfg.config);
  p->settings.dt = cfg.dt;
  p->settings.T = cfg.T;
  p->settings.record_interval = cfg.record_interval;
  p->settings.field_times = cfg.field_times;
  return p;
}

namespace detail {

struct RunArgs {
  std::string config_path;
  std::string table;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> profiles;
  std::vector<std::string> sets;
  std::string out;
  bool plot = false;
  std::optional<double> T, dt;
  std::optional<int> M;
};

inline std::vector<std::string> run_overrides(const RunArgs& a) {
  std::vector<std::string> o = a.sets;
  for (const auto& p : a.profiles) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) throw ConfigError("--profile expects name=spec, got '" + p + "'");
    const std::string name = detail::trim(p.substr(0, eq));
    if (name != "u0" && name != "v0" && name != "r0") throw ConfigError("--profile name must be u0, v0 or r0");
    o.push_back("initial." + name + "=" + p.substr(eq + 1));
  }
  if (a.seed) o.push_back("initial.seed=" + std::to_string(*a.seed));
  if (a.T) o.push_back("time.T=" + fmt17(*a.T));
  if (a.dt) o.push_back("time.dt=" + fmt17(*a.dt));
  if (a.M) o.push_back("grid.M=" + std::to_string(*a.M));
  return o;
}

inline SimConfig load_run_config(const RunArgs& a) {
  SimConfig cfg = load_config(a.config_path, run_overrides(a));
  if (!a.table.empty()) cfg.table_path = a.table;
  if (a.plot) cfg.plot = true;
  if (!a.out.empty()) cfg.out_dir = a.out;
  return cfg;
}

inline int cmd_table(const std::string& config, double dr, double h, const std::string& out, int jobs,
                     std::ostream& os) {
  const MicroConfig c = parse_micro_config(config);
  const CoeffTable t = build_table(c, dr, h, jobs);
  const auto path = output_path(out);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  save_table(t, path.string());
  double lo = t.tau.front(), hi = t.tau.front();
  for (const double x : t.tau) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "table config %s: %zu nodes, tau in [%.6g, %.6g], h=%g -> %s\n",
                std::string(to_string(c)).c_str(), t.size(), lo, hi, t.h_used, path.string().c_str());
  os << buf;
  return 0;
}

inline int cmd_cell(double r, const std::string& config, double h, const std::string& out, std::ostream& os) {
  const MicroConfig c = parse_micro_config(config);
  auto mesh = std::make_shared<const CellMesh>(build_cell_mesh(r, c, h));
  const auto w1 = solve_corrector(mesh, 1);
  const auto w2 = solve_corrector(mesh, 2);
  const auto eff = effective_coefficient(w1, w2);
  const auto dir = output_path(out);
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "mesh.txt", std::ios::binary);
    if (!f) throw ConfigError("cell: cannot write mesh.txt");
    write_mesh(f, *mesh);
  }
  {
    std::ofstream f(dir / "w1.txt", std::ios::binary);
    if (!f) throw ConfigError("cell: cannot write w1.txt");
    write_mesh(f, *mesh, &w1.values);
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "cell r=%.17g config %s h=%g: %zu vertices, %zu triangles, tau_hat=%.17g\n", r,
                std::string(to_string(c)).c_str(), h, mesh->vertices.size(), mesh->triangles.size(), eff.tau_hat);
  os << buf;
  return 0;
}

inline int cmd_run(const RunArgs& a, std::ostream& os) {
  const SimConfig cfg = load_run_config(a);
  const auto dir = output_path(cfg.out_dir);
  const auto p = prepare_run(cfg, dir, os);
  const RunResult res = run(p->grid, p->problem, p->init, p->settings);
  write_run_outputs(dir, p->grid, res, cfg.config, cfg.species.N, cfg.plot);
  char buf[240];
  std::snprintf(buf, sizeof buf, "run %s: t=%.6g, %ld steps, %ld halvings, %zu clog events, clipped mass %.3g -> %s\n",
                std::string(to_string(res.status)).c_str(), res.final_state.t, res.steps, res.rejections,
                res.clogs.size(), res.clipped_mass, dir.string().c_str());
  os << buf;
  return 0;
}

struct SweepMember {
  std::string profile;
  std::uint64_t seed = 0;
  RunResult result;
};

inline int cmd_sweep(const RunArgs& base, const std::vector<std::string>& r0_profiles, std::optional<double> tp,
                     int jobs, std::ostream& os) {
  if (r0_profiles.empty()) throw ConfigError("sweep: no --r0 profiles given");
  const SimConfig cfg = load_run_config(base);
  const auto dir = output_path(cfg.out_dir);
  std::filesystem::create_directories(dir);

  // One shared table, built once if the config has none.
  SimConfig shared = cfg;
  CoeffTable table;
  if (cfg.table_path.empty()) {
    cfg.validate();
    table = build_table(cfg.config, cfg.table_dr, cfg.table_h);
    save_table(table, (dir / "table.txt").string());
    shared.table_path = (dir / "table.txt").string();
  }
  if (tp) shared.T = *tp;

  std::vector<SweepMember> members(r0_profiles.size());
  std::vector<SimConfig> configs;
  for (std::size_t k = 0; k < r0_profiles.size(); ++k) {
    SimConfig c = shared;
    c.r0 = parse_profile(r0_profiles[k]);
    members[k].profile = r0_profiles[k];
    members[k].seed = c.r0.seed.value_or(c.seed);
    c.out_dir = (dir / ("run_" + std::to_string(k))).string();
    configs.push_back(std::move(c));
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  const auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= configs.size()) return;
      try {
        std::ostringstream sink;
        const auto p = prepare_run(configs[k], configs[k].out_dir, sink);
        members[k].result = run(p->grid, p->problem, p->init, p->settings);
        write_run_outputs(configs[k].out_dir, p->grid, members[k].result, configs[k].config, configs[k].species.N,
                          configs[k].plot);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = configs.size();
      }
    }
  };
  jobs = std::max(1, jobs <= 0 ? static_cast<int>(std::max(1u, std::thread::hardware_concurrency())) : jobs);
  std::vector<std::thread> pool;
  for (int k = 1; k < jobs; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  {
    auto f = detail::open_out(dir / "summary.csv");
    f << "run,profile,seed,n_clogs,first_clog_x,first_clog_t,t_p\n";
    for (std::size_t k = 0; k < members.size(); ++k) {
      const auto& m = members[k];
      f << k << ",\"" << m.profile << "\"," << m.seed << ',' << m.result.clogs.size() << ',';
      if (m.result.clogs.empty()) {
        f << ",";
      } else {
        f << fmt17(m.result.clogs.front().x) << ',' << fmt17(m.result.clogs.front().time);
      }
      f << ',' << fmt17(m.result.final_state.t) << '\n';
    }
  }
  {
    auto f = detail::open_out(dir / "radius_tp.csv");
    f << "x";
    for (std::size_t k = 0; k < members.size(); ++k) f << ",r_" << k;
    f << '\n';
    const MacroGrid g(shared.M);
    for (int j = 0; j < g.nodes(); ++j) {
      f << fmt17(g.x(j));
      for (const auto& m : members) f << ',' << fmt17(m.result.final_state.r[static_cast<std::size_t>(j)]);
      f << '\n';
    }
  }
  if (cfg.plot) {
    std::vector<Series> rs;
    const MacroGrid g(shared.M);
    for (const auto& m : members) {
      Series s{m.profile, {}, {}};
      for (int j = 0; j < g.nodes(); ++j) {
        s.x.push_back(g.x(j));
        s.y.push_back(m.result.final_state.r[static_cast<std::size_t>(j)]);
      }
      rs.push_back(std::move(s));
    }
    write_svg_plot(dir / "radius_tp.svg", "Radius at t_p", "x", "r", rs);
  }
  for (std::size_t k = 0; k < members.size(); ++k) {
    os << "sweep run_" << k << " '" << members[k].profile << "': " << members[k].result.clogs.size()
       << " clog events\n";
  }
  os << "sweep -> " << dir.string() << '\n';
  return 0;
}

inline void add_run_options(CLI::App& sub, RunArgs& a) {
  sub.add_option("config", a.config_path, "Simulation config file")->required()->check(CLI::ExistingFile);
  sub.add_option("--table", a.table, "Coefficient table file (built when omitted)");
  sub.add_option("--seed", a.seed, "Seed for random profiles");
  sub.add_option("--set", a.sets, "Override a config entry, section.key=value");
  sub.add_option("--out", a.out, "Output directory");
  sub.add_flag("--plot", a.plot, "Write SVG plots");
  sub.add_option("--T", a.T, "Final time");
  sub.add_option("--dt", a.dt, "Time step");
  sub.add_option("--M", a.M, "Number of macro intervals");
}

}  // namespace detail

/// Exit codes: 0 ok, 1 configuration or usage error, 2 mesh or solver failure.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"clogsim: two-scale pore clogging simulator"};
  app.set_help_flag("--help", "Print this help message and exit");  // -h is not free: --h is the mesh size
  app.require_subcommand(1);

  std::string t_config = "A", t_out = "table.txt";
  double t_dr = 0.02, t_h = 0.05;
  int t_jobs = 0;
  auto* table = app.add_subcommand("table", "Build a coefficient table");
  table->add_option("--config", t_config, "Micro configuration A or B");
  table->add_option("--dr", t_dr, "Radius spacing");
  table->add_option("--h", t_h, "Cell mesh size");
  table->add_option("--out", t_out, "Output file");
  table->add_option("--jobs", t_jobs, "Worker threads (0: all cores)");

  double c_r = 0.5, c_h = 0.05;
  std::string c_config = "A", c_out = "cell";
  auto* cell = app.add_subcommand("cell", "Solve one cell problem and dump mesh and corrector");
  cell->add_option("--r", c_r, "Grain radius")->required();
  cell->add_option("--config", c_config, "Micro configuration A or B");
  cell->add_option("--h", c_h, "Mesh size");
  cell->add_option("--out", c_out, "Output directory");

  detail::RunArgs r_args;
  auto* run_cmd = app.add_subcommand("run", "Run a macro simulation");
  detail::add_run_options(*run_cmd, r_args);
  run_cmd->add_option("--profile", r_args.profiles, "Initial profile, e.g. 'r0=quad c=1.38'");

  detail::RunArgs s_args;
  std::vector<std::string> s_profiles;
  std::optional<double> s_tp;
  int s_jobs = 0;
  auto* sweep = app.add_subcommand("sweep", "Run a batch over initial radius profiles");
  detail::add_run_options(*sweep, s_args);
  sweep->add_option("--r0", s_profiles, "Initial radius profile (repeatable)");
  sweep->add_option("--tp", s_tp, "Time at which radii are reported (default T)");
  sweep->add_option("--jobs", s_jobs, "Parallel runs (0: all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    if (*table) return detail::cmd_table(t_config, t_dr, t_h, t_out, t_jobs, out);
    if (*cell) return detail::cmd_cell(c_r, c_config, c_h, c_out, out);
    if (*run_cmd) return detail::cmd_run(r_args, out);
    if (*sweep) return detail::cmd_sweep(s_args, s_profiles, s_tp, s_jobs, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const MeshError& e) {
    err << "solver error: " << e.what() << '\n';
    return 2;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace clogsim
