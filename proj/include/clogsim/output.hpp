#pragma once

// CSV and SVG writers for simulation results. Numbers use 17 significant
// digits so reruns can be compared byte for byte.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "clogsim/errors.hpp"
#include "clogsim/observables.hpp"
#include "clogsim/simulation.hpp"

namespace clogsim {

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Short form of a time used in file names, e.g. 2.5 -> "2.5".
inline std::string time_label(double t) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", t);
  return buf;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ConfigError("cannot write '" + p.string() + "'");
  return os;
}

}  // namespace detail

inline void write_masses_csv(const std::filesystem::path& p, const RunResult& res, int N) {
  auto os = detail::open_out(p);
  os << "t";
  for (int i = 1; i <= N; ++i) os << ",U" << i;
  os << ",V,SC_g\n";
  for (const auto& rec : res.masses) {
    os << fmt17(rec.t);
    for (const double u : rec.m.U) os << ',' << fmt17(u);
    os << ',' << fmt17(rec.m.V) << ',' << fmt17(rec.sc_global) << '\n';
  }
}

inline void write_fields_csv(const std::filesystem::path& p, const MacroGrid& g, const MacroState& s,
                             MicroConfig config) {
  auto os = detail::open_out(p);
  os << "x";
  for (int i = 1; i <= s.species(); ++i) os << ",u" << i;
  os << ",v,r,phi\n";
  const auto phi = porosity_field(s, config);
  for (int j = 0; j < s.nodes(); ++j) {
    os << fmt17(g.x(j));
    for (const auto& ui : s.u) os << ',' << fmt17(ui[j]);
    os << ',' << fmt17(s.v[j]) << ',' << fmt17(s.r[j]) << ',' << fmt17(phi[j]) << '\n';
  }
}

inline void write_clogs_csv(const std::filesystem::path& p, const std::vector<ClogEvent>& clogs) {
  auto os = detail::open_out(p);
  os << "x,t,trigger,node\n";
  for (const auto& c : clogs) os << fmt17(c.x) << ',' << fmt17(c.time) << ',' << to_string(c.trigger) << ',' << c.node << '\n';
}

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal line plot with axes, tick labels and a legend.
inline void write_svg_plot(const std::filesystem::path& p, const std::string& title, const std::string& xlabel,
                           const std::string& ylabel, const std::vector<Series>& series) {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series) {
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      x0 = std::min(x0, s.x[k]);
      x1 = std::max(x1, s.x[k]);
      y0 = std::min(y0, s.y[k]);
      y1 = std::max(y1, s.y[k]);
    }
  }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  y0 = std::min(y0, 0.0);
  const double W = 640, H = 420, L = 70, R = 160, T = 40, B = 50;
  const auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  const auto sy = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2"};
  auto os = detail::open_out(p);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" font-family=\"sans-serif\" "
                "font-size=\"12\">\n",
                W, H);
  os << buf << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  std::snprintf(buf, sizeof buf, "<polyline fill=\"none\" stroke=\"black\" points=\"%.2f,%.2f %.2f,%.2f %.2f,%.2f\"/>\n",
                L, T, L, H - B, W - R, H - B);
  os << buf;
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + k * (x1 - x0) / 4, yv = y0 + k * (y1 - y0) / 4;
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">%.3g</text>\n", sx(xv),
                  H - B + 18, xv);
    os << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\">%.3g</text>\n", L - 6, sy(yv) + 4,
                  yv);
    os << buf;
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  os << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2
     << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* col = colors[s % 7];
    os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < series[s].x.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", sx(series[s].x[k]), sy(series[s].y[k]));
      os << buf;
    }
    os << "\"/>\n";
    const double ly = T + 16.0 * static_cast<double>(s);
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" stroke-width=\"2\"/>"
                  "<text x=\"%.2f\" y=\"%.2f\">",
                  W - R + 10, ly, W - R + 30, ly, col, W - R + 36, ly + 4);
    os << buf << series[s].label << "</text>\n";
  }
  os << "</svg>\n";
}

/// masses.csv, fields_<t>.csv (initial state included), clogs.csv and optionally SVG plots in dir.
inline void write_run_outputs(const std::filesystem::path& dir, const MacroGrid& g, const RunResult& res,
                              MicroConfig config, int N, bool plot) {
  std::filesystem::create_directories(dir);
  write_masses_csv(dir / "masses.csv", res, N);
  write_fields_csv(dir / ("fields_" + time_label(res.initial.t) + ".csv"), g, res.initial, config);
  for (const auto& f : res.fields) write_fields_csv(dir / ("fields_" + time_label(f.t) + ".csv"), g, f, config);
  write_clogs_csv(dir / "clogs.csv", res.clogs);
  if (!plot) return;
  std::vector<Series> ms;
  for (int i = 0; i <= N; ++i) {
    Series s{i < N ? "U" + std::to_string(i + 1) : "V", {}, {}};
    for (const auto& rec : res.masses) {
      s.x.push_back(rec.t);
      s.y.push_back(i < N ? rec.m.U[static_cast<std::size_t>(i)] : rec.m.V);
    }
    ms.push_back(std::move(s));
  }
  write_svg_plot(dir / "masses.svg", "Total masses", "t", "mass", ms);
  std::vector<Series> rs;
  for (const auto* f : {&res.initial}) {
    Series s{"t=" + time_label(f->t), {}, {}};
    for (int j = 0; j < f->nodes(); ++j) {
      s.x.push_back(g.x(j));
      s.y.push_back(f->r[j]);
    }
    rs.push_back(std::move(s));
  }
  for (const auto& f : res.fields) {
    if (f.t == res.initial.t) continue;
    Series s{"t=" + time_label(f.t), {}, {}};
    for (int j = 0; j < f.nodes(); ++j) {
      s.x.push_back(g.x(j));
      s.y.push_back(f.r[j]);
    }
    rs.push_back(std::move(s));
  }
  write_svg_plot(dir / "radius.svg", "Radius profiles", "x", "r", rs);
}

}  // namespace clogsim
