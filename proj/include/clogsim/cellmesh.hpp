#pragma once

// Triangulations of the void region Y0(r) of the periodicity cell.
//
// build_cell_boundary() gives the tagged polygonal loops of the void region
// (full cell for r < 1, the corner segment in [0,1]^2 for r >= 1).
// build_cell_mesh() is what the cell solver uses: it meshes a fundamental
// domain of the cell's symmetry group and reflects it, so that mirrored
// vertices exist exactly and opposite cell sides carry matching vertices.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "clogsim/delaunay.hpp"
#include "clogsim/errors.hpp"
#include "clogsim/geometry.hpp"

namespace clogsim {

enum class BoundaryTag : int { OuterEdge = 0, GrainInterface = 1, Symmetry = 2 };

inline std::string_view to_string(BoundaryTag t) {
  switch (t) {
    case BoundaryTag::OuterEdge: return "outer";
    case BoundaryTag::GrainInterface: return "grain";
    case BoundaryTag::Symmetry: return "symmetry";
  }
  return "?";
}

inline BoundaryTag parse_boundary_tag(std::string_view s) {
  if (s == "outer" || s == "0") return BoundaryTag::OuterEdge;
  if (s == "grain" || s == "1") return BoundaryTag::GrainInterface;
  if (s == "symmetry" || s == "2") return BoundaryTag::Symmetry;
  throw ConfigError("unknown boundary tag '" + std::string(s) + "'");
}

/// Closed polygon; tags[k] labels the edge vertices[k] -> vertices[k+1].
struct BoundaryLoop {
  std::vector<Point> vertices;
  std::vector<BoundaryTag> tags;

  void add(Point p, BoundaryTag tag_of_next_edge) {
    vertices.push_back(p);
    tags.push_back(tag_of_next_edge);
  }
};

enum class CellKind { Generic, FullCell, CornerSegment };

struct CellBoundary {
  CellKind kind = CellKind::Generic;
  double r = 0.0;
  MicroConfig config = MicroConfig::ConfigA;
  double h = 0.0;
  Point arc_center;
  double arc_radius = 0.0;
  std::vector<BoundaryLoop> loops;
};

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  BoundaryTag tag = BoundaryTag::OuterEdge;
};

struct CellMesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  /// Triangles whose angles are dictated by a small input corner (cusp).
  std::vector<std::uint8_t> quality_exempt;
  double h = 0.0;

  CellKind kind = CellKind::Generic;
  double r = 0.0;
  MicroConfig config = MicroConfig::ConfigA;
  Point arc_center;
  double arc_radius = 0.0;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }

  double triangle_area(std::size_t t) const {
    const auto& v = triangles[t];
    return 0.5 * orient2d(vertices[v[0]], vertices[v[1]], vertices[v[2]]);
  }

  double area() const {
    double s = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t) s += triangle_area(t);
    return s;
  }

  bool has_tag(BoundaryTag tag) const {
    return std::any_of(boundary_edges.begin(), boundary_edges.end(),
                       [&](const BoundaryEdge& e) { return e.tag == tag; });
  }
};

namespace detail {

inline void check_mesh_size(double h) {
  if (!(h > 0.0) || h > 0.5) throw DomainError("mesh size h must lie in (0, 0.5]");
}

// Grains closer than this to the cell edge are meshed as touching it: the
// ligament would be thinner than the refiner's minimum feature.
inline constexpr double kTouchGap = 1e-9;

inline bool full_cell_radius(double r) { return r < 1.0 - kTouchGap; }

inline void check_mesh_radius(double r) {
  if (!(r >= kRMin) || r > kSqrt2 - 1e-3) {
    throw DomainError("cell mesh radius " + std::to_string(r) + " outside [r_min, sqrt(2)-1e-3]");
  }
}

inline int ceil_div(double len, double h) { return std::max(1, static_cast<int>(std::ceil(len / h - 1e-9))); }

inline int round_up(int n, int m) { return ((n + m - 1) / m) * m; }

// Straight edge from a to b (a included, b excluded), split into pieces <= h.
inline void add_straight(BoundaryLoop& loop, Point a, Point b, double h, BoundaryTag tag) {
  const int k = ceil_div(norm(b - a), h);
  for (int i = 0; i < k; ++i) {
    const double s = static_cast<double>(i) / k;
    Point p = a + s * (b - a);
    // Keep coordinates that are constant along the edge bit-exact.
    if (a.x == b.x) p.x = a.x;
    if (a.y == b.y) p.y = a.y;
    loop.add(p, tag);
  }
}

inline double hole_vertex_count(double r, double h) {
  return round_up(std::max(32, static_cast<int>(std::ceil(2.0 * kPi * r / h - 1e-9))), 8);
}

struct ArcSpec {
  Point center;
  double radius;
  double theta0;  // angle at the cell edge x = 1
  double theta1;  // angle at the cell edge y = 1
};

inline ArcSpec corner_arc(double r, MicroConfig config) {
  if (config == MicroConfig::ConfigA) {
    const double rd = config_a_arc_radius(r);
    return {{1.0 - rd, 1.0 - rd}, rd, 0.0, kPi / 2.0};
  }
  const double a0 = std::atan2(std::sqrt(std::max(0.0, r * r - 1.0)), 1.0);
  return {{0.0, 0.0}, r, a0, kPi / 2.0 - a0};
}

inline Point arc_point(const ArcSpec& arc, double theta) {
  return {arc.center.x + arc.radius * std::cos(theta), arc.center.y + arc.radius * std::sin(theta)};
}

// Endpoint of the arc on the cell edge x = 1, with that coordinate exact.
inline Point arc_end_on_x1(const ArcSpec& arc, MicroConfig config, double r) {
  if (config == MicroConfig::ConfigA) return {1.0, 1.0 - arc.radius};
  return {1.0, std::sqrt(std::max(0.0, r * r - 1.0))};
}

inline int corner_arc_count(const ArcSpec& arc, double h) {
  const double len = arc.radius * (arc.theta1 - arc.theta0);
  return std::max(16, static_cast<int>(std::ceil(len / h - 1e-9)));
}

inline CellMesh from_refinement(const RefineResult& res, const std::vector<BoundaryLoop>& loops) {
  std::vector<BoundaryTag> edge_tags;
  for (const auto& loop : loops) edge_tags.insert(edge_tags.end(), loop.tags.begin(), loop.tags.end());
  CellMesh m;
  m.vertices = res.vertices;
  m.triangles = res.triangles;
  m.quality_exempt = res.exempt;
  for (const auto& s : res.subsegments) m.boundary_edges.push_back({s.a, s.b, edge_tags.at(s.loop_edge)});
  return m;
}

inline CellMesh triangulate_loops(const std::vector<BoundaryLoop>& loops, double h) {
  std::vector<std::vector<Point>> pts;
  for (const auto& loop : loops) {
    if (loop.vertices.size() != loop.tags.size()) throw MeshError("triangulate: loop tag count mismatch");
    pts.push_back(loop.vertices);
  }
  RefineOptions opt;
  opt.max_edge = h;
  DelaunayRefiner refiner(pts, opt);
  CellMesh m = from_refinement(refiner.run(), loops);
  m.h = h;
  return m;
}

// Orients boundary edges so that the domain lies to their left.
inline void orient_boundary_edges(CellMesh& m) {
  std::map<std::pair<int, int>, int> directed;
  for (const auto& t : m.triangles) {
    for (int k = 0; k < 3; ++k) directed[{t[k], t[(k + 1) % 3]}] = 1;
  }
  for (auto& e : m.boundary_edges) {
    if (!directed.count({e.a, e.b})) std::swap(e.a, e.b);
  }
  std::sort(m.boundary_edges.begin(), m.boundary_edges.end(), [](const BoundaryEdge& x, const BoundaryEdge& y) {
    return std::pair{x.a, x.b} < std::pair{y.a, y.b};
  });
}

// Union of the images of `piece` under the given affine maps. Vertices with
// bit-identical coordinates are merged; edges tagged Symmetry become interior.
template <class Map>
CellMesh reflect_union(const CellMesh& piece, const std::vector<Map>& maps) {
  CellMesh out;
  std::map<std::pair<double, double>, int> index;
  const auto clean = [](double v) { return v == 0.0 ? 0.0 : v; };
  std::set<std::pair<int, int>> seen_edges;
  for (const auto& f : maps) {
    std::vector<int> id(piece.vertices.size());
    for (std::size_t i = 0; i < piece.vertices.size(); ++i) {
      Point p = f.apply(piece.vertices[i]);
      p = {clean(p.x), clean(p.y)};
      const auto [it, inserted] = index.emplace(std::pair{p.x, p.y}, static_cast<int>(out.vertices.size()));
      if (inserted) out.vertices.push_back(p);
      id[i] = it->second;
    }
    for (std::size_t t = 0; t < piece.triangles.size(); ++t) {
      const auto& tri = piece.triangles[t];
      if (f.flips) {
        out.triangles.push_back({id[tri[0]], id[tri[2]], id[tri[1]]});
      } else {
        out.triangles.push_back({id[tri[0]], id[tri[1]], id[tri[2]]});
      }
      out.quality_exempt.push_back(piece.quality_exempt.empty() ? 0 : piece.quality_exempt[t]);
    }
    for (const auto& e : piece.boundary_edges) {
      if (e.tag == BoundaryTag::Symmetry) continue;
      const int a = id[e.a];
      const int b = id[e.b];
      if (seen_edges.insert({std::min(a, b), std::max(a, b)}).second) out.boundary_edges.push_back({a, b, e.tag});
    }
  }
  out.h = piece.h;
  orient_boundary_edges(out);
  return out;
}

struct DihedralMap {
  int sx;      // sign applied to x after the optional swap
  int sy;
  bool swap;   // (x, y) -> (y, x) first
  bool flips;  // orientation reversing
  Point apply(Point p) const {
    if (swap) std::swap(p.x, p.y);
    return {sx * p.x, sy * p.y};
  }
};

inline std::vector<DihedralMap> square_group() {
  std::vector<DihedralMap> g;
  for (const bool sw : {false, true}) {
    for (const int sx : {1, -1}) {
      for (const int sy : {1, -1}) g.push_back({sx, sy, sw, sw != (sx * sy < 0)});
    }
  }
  return g;
}

}  // namespace detail

/// Tagged boundary loops of the void region. For r < 1 the outer square and
/// the polygonal hole; for r >= 1 the corner segment in [0,1]^2.
inline CellBoundary build_cell_boundary(double r, MicroConfig config, double h) {
  detail::check_mesh_radius(r);
  detail::check_mesh_size(h);
  CellBoundary b;
  b.r = r;
  b.config = config;
  b.h = h;
  if (detail::full_cell_radius(r)) {
    b.kind = CellKind::FullCell;
    b.arc_center = {0.0, 0.0};
    b.arc_radius = r;
    BoundaryLoop outer;
    const Point c[4] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    for (int k = 0; k < 4; ++k) detail::add_straight(outer, c[k], c[(k + 1) % 4], h, BoundaryTag::OuterEdge);
    BoundaryLoop hole;
    const int n = static_cast<int>(detail::hole_vertex_count(r, h));
    for (int k = 0; k < n; ++k) {
      const double th = -2.0 * kPi * k / n;  // clockwise
      hole.add({r * std::cos(th), r * std::sin(th)}, BoundaryTag::GrainInterface);
    }
    b.loops = {outer, hole};
    return b;
  }
  if (void_area(r, config) / 4.0 < 1e-8) {
    throw MeshError("degenerate corner segment at r=" + std::to_string(r) + ": area below 1e-8");
  }
  b.kind = CellKind::CornerSegment;
  const auto arc = detail::corner_arc(std::max(r, 1.0), config);
  b.arc_center = arc.center;
  b.arc_radius = arc.radius;
  const Point p1 = detail::arc_end_on_x1(arc, config, std::max(r, 1.0));
  const Point p2{p1.y, p1.x};
  BoundaryLoop loop;
  detail::add_straight(loop, p1, {1.0, 1.0}, h, BoundaryTag::OuterEdge);
  detail::add_straight(loop, {1.0, 1.0}, p2, h, BoundaryTag::OuterEdge);
  const int n = detail::corner_arc_count(arc, h);
  for (int k = 0; k < n; ++k) {
    const double th = arc.theta1 - (arc.theta1 - arc.theta0) * k / n;
    loop.add(k == 0 ? p2 : detail::arc_point(arc, th), BoundaryTag::GrainInterface);
  }
  b.loops = {loop};
  return b;
}

/// Conforming quality triangulation of arbitrary tagged loops.
inline CellMesh triangulate(const CellBoundary& boundary, double h) {
  detail::check_mesh_size(h);
  CellMesh m = detail::triangulate_loops(boundary.loops, h);
  m.kind = boundary.kind;
  m.r = boundary.r;
  m.config = boundary.config;
  m.arc_center = boundary.arc_center;
  m.arc_radius = boundary.arc_radius;
  detail::orient_boundary_edges(m);
  return m;
}

/// Mesh of the void region built from a fundamental domain and reflected.
/// r < 1: the octant 0 <= y <= x of the full cell, mapped by the 8 symmetries
/// of the square. r >= 1: the half of the corner segment below the diagonal,
/// mirrored across it.
inline CellMesh build_cell_mesh(double r, MicroConfig config, double h) {
  detail::check_mesh_radius(r);
  detail::check_mesh_size(h);
  CellMesh piece;
  std::vector<detail::DihedralMap> maps;
  BoundaryLoop loop;
  Point center;
  double radius = 0.0;
  CellKind kind;
  if (detail::full_cell_radius(r)) {
    kind = CellKind::FullCell;
    center = {0.0, 0.0};
    radius = r;
    const int n = static_cast<int>(detail::hole_vertex_count(r, h));
    const double d = r * std::sqrt(0.5);
    detail::add_straight(loop, {r, 0.0}, {1.0, 0.0}, h, BoundaryTag::Symmetry);
    detail::add_straight(loop, {1.0, 0.0}, {1.0, 1.0}, h, BoundaryTag::OuterEdge);
    detail::add_straight(loop, {1.0, 1.0}, {d, d}, h, BoundaryTag::Symmetry);
    for (int k = n / 8; k >= 1; --k) {
      const double th = 2.0 * kPi * k / n;
      loop.add(k == n / 8 ? Point{d, d} : Point{r * std::cos(th), r * std::sin(th)}, BoundaryTag::GrainInterface);
    }
    maps = detail::square_group();
  } else {
    if (void_area(r, config) / 4.0 < 1e-8) {
      throw MeshError("degenerate corner segment at r=" + std::to_string(r) + ": area below 1e-8");
    }
    kind = CellKind::CornerSegment;
    const auto arc = detail::corner_arc(std::max(r, 1.0), config);
    center = arc.center;
    radius = arc.radius;
    const Point p1 = detail::arc_end_on_x1(arc, config, std::max(r, 1.0));
    // Arc point on the diagonal; both arc centres lie on the diagonal.
    const double dd = arc.center.x + arc.radius * std::sqrt(0.5);
    const Point dpt{dd, dd};
    detail::add_straight(loop, p1, {1.0, 1.0}, h, BoundaryTag::OuterEdge);
    detail::add_straight(loop, {1.0, 1.0}, dpt, h, BoundaryTag::Symmetry);
    int n = detail::round_up(detail::corner_arc_count(arc, h), 2);
    const double mid = kPi / 4.0;
    for (int k = 0; k < n / 2; ++k) {
      const double th = mid - (mid - arc.theta0) * k / (n / 2);
      loop.add(k == 0 ? dpt : detail::arc_point(arc, th), BoundaryTag::GrainInterface);
    }
    maps = {{1, 1, false, false}, {1, 1, true, true}};
  }
  piece = detail::triangulate_loops({loop}, h);
  CellMesh m = detail::reflect_union(piece, maps);
  m.kind = kind;
  m.r = r;
  m.config = config;
  m.arc_center = center;
  m.arc_radius = radius;
  return m;
}

struct MeshReport {
  bool conforming = true;
  bool positive = true;
  bool duplicate_free = true;
  bool arc_close = true;
  double min_angle = 180.0;         // over non-exempt triangles
  double min_angle_all = 180.0;
  std::size_t exempt_count = 0;
  long euler = 0;
  double area = 0.0;
  std::string message;

  bool ok(double angle_floor = 20.0) const {
    return conforming && positive && duplicate_free && arc_close && min_angle >= angle_floor;
  }
};

/// Checks the structural invariants of a mesh.
inline MeshReport validate(const CellMesh& m) {
  MeshReport rep;
  std::map<std::pair<int, int>, int> edge_count;
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& v = m.triangles[t];
    if (m.triangle_area(t) <= 0.0) {
      rep.positive = false;
      rep.message += "non-positive triangle " + std::to_string(t) + "; ";
    }
    const double ang = min_angle_deg(m.vertices[v[0]], m.vertices[v[1]], m.vertices[v[2]]);
    rep.min_angle_all = std::min(rep.min_angle_all, ang);
    const bool exempt = t < m.quality_exempt.size() && m.quality_exempt[t];
    if (exempt) {
      ++rep.exempt_count;
    } else {
      rep.min_angle = std::min(rep.min_angle, ang);
    }
    for (int k = 0; k < 3; ++k) {
      const int a = v[k], b = v[(k + 1) % 3];
      ++edge_count[{std::min(a, b), std::max(a, b)}];
    }
  }
  std::set<std::pair<int, int>> bset;
  for (const auto& e : m.boundary_edges) bset.insert({std::min(e.a, e.b), std::max(e.a, e.b)});
  for (const auto& [e, c] : edge_count) {
    const bool on_boundary = bset.count(e) > 0;
    if ((on_boundary && c != 1) || (!on_boundary && c != 2)) {
      rep.conforming = false;
      rep.message += "edge (" + std::to_string(e.first) + "," + std::to_string(e.second) + ") used " +
                     std::to_string(c) + " times; ";
    }
  }
  for (const auto& e : bset) {
    if (!edge_count.count(e)) {
      rep.conforming = false;
      rep.message += "boundary edge not in mesh; ";
    }
  }
  std::vector<std::size_t> order(m.vertices.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return std::pair{m.vertices[i].x, m.vertices[i].y} < std::pair{m.vertices[j].x, m.vertices[j].y};
  });
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const Point a = m.vertices[order[i]], b = m.vertices[order[j]];
      if (b.x - a.x > 1e-12) break;
      if (std::abs(b.y - a.y) <= 1e-12) {
        rep.duplicate_free = false;
        rep.message += "duplicate vertices; ";
      }
    }
  }
  if (m.kind != CellKind::Generic) {
    const double tol = m.h * m.h;
    for (const auto& e : m.boundary_edges) {
      if (e.tag != BoundaryTag::GrainInterface) continue;
      for (const int v : {e.a, e.b}) {
        if (std::abs(norm(m.vertices[v] - m.arc_center) - m.arc_radius) > tol) {
          rep.arc_close = false;
        }
      }
    }
  }
  rep.euler = static_cast<long>(m.vertices.size()) - static_cast<long>(edge_count.size()) +
              static_cast<long>(m.triangles.size());
  rep.area = m.area();
  return rep;
}

/// Plain-text dump: header, vertex lines (with an optional value column),
/// triangle lines, boundary lines.
inline void write_mesh(std::ostream& os, const CellMesh& m, const std::vector<double>* values = nullptr) {
  char buf[128];
  os << "vertices " << m.vertices.size() << " triangles " << m.triangles.size() << '\n';
  for (std::size_t i = 0; i < m.vertices.size(); ++i) {
    if (values) {
      std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", m.vertices[i].x, m.vertices[i].y, (*values)[i]);
    } else {
      std::snprintf(buf, sizeof buf, "%.17g %.17g\n", m.vertices[i].x, m.vertices[i].y);
    }
    os << buf;
  }
  for (const auto& t : m.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& e : m.boundary_edges) os << e.a << ' ' << e.b << ' ' << to_string(e.tag) << '\n';
}

/// Reads a dump written by write_mesh. Fills `values` if the vertex lines
/// carry a third column.
inline CellMesh read_mesh(std::istream& is, std::vector<double>* values = nullptr) {
  std::string line, w1, w2;
  std::size_t nv = 0, nt = 0;
  if (!std::getline(is, line)) throw ConfigError("mesh dump: empty input");
  {
    std::istringstream hs(line);
    if (!(hs >> w1 >> nv >> w2 >> nt) || w1 != "vertices" || w2 != "triangles") {
      throw ConfigError("mesh dump: malformed header '" + line + "'");
    }
  }
  CellMesh m;
  if (values) values->clear();
  for (std::size_t i = 0; i < nv; ++i) {
    if (!std::getline(is, line)) throw ConfigError("mesh dump: truncated vertex block");
    std::istringstream ls(line);
    Point p;
    if (!(ls >> p.x >> p.y)) throw ConfigError("mesh dump: bad vertex line '" + line + "'");
    double val;
    if (values && (ls >> val)) values->push_back(val);
    m.vertices.push_back(p);
  }
  for (std::size_t i = 0; i < nt; ++i) {
    if (!std::getline(is, line)) throw ConfigError("mesh dump: truncated triangle block");
    std::istringstream ls(line);
    std::array<int, 3> t{};
    if (!(ls >> t[0] >> t[1] >> t[2])) throw ConfigError("mesh dump: bad triangle line '" + line + "'");
    for (const int v : t) {
      if (v < 0 || static_cast<std::size_t>(v) >= nv) throw ConfigError("mesh dump: vertex index out of range");
    }
    m.triangles.push_back(t);
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    BoundaryEdge e;
    std::string tag;
    if (!(ls >> e.a >> e.b >> tag)) throw ConfigError("mesh dump: bad boundary line '" + line + "'");
    e.tag = parse_boundary_tag(tag);
    m.boundary_edges.push_back(e);
  }
  return m;
}

}  // namespace clogsim
