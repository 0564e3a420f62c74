#pragma once

// Delaunay refinement of a planar straight-line graph given as closed loops.
//
// The triangulation is kept unconstrained Delaunay at all times; boundary
// subsegments are recovered by splitting every encroached subsegment until
// each one is a Gabriel edge (conforming Delaunay). Skinny or oversized
// triangles are then refined by circumcenter insertion. Subsegments incident
// to an input corner with a small angle are split on concentric shells, and
// triangles trapped inside such a corner are left alone, so refinement
// terminates for cusped domains.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "clogsim/errors.hpp"

namespace clogsim {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline bool operator==(Point a, Point b) { return a.x == b.x && a.y == b.y; }

/// Twice the signed area of (a, b, c); positive when counterclockwise.
inline double orient2d(Point a, Point b, Point c) { return cross(b - a, c - a); }

inline Point circumcenter(Point a, Point b, Point c) {
  const Point ab = b - a;
  const Point ac = c - a;
  const double d = 2.0 * cross(ab, ac);
  const double ab2 = dot(ab, ab);
  const double ac2 = dot(ac, ac);
  return {a.x + (ac.y * ab2 - ab.y * ac2) / d, a.y + (ab.x * ac2 - ac.x * ab2) / d};
}

/// Smallest interior angle of a triangle, in degrees.
inline double min_angle_deg(Point a, Point b, Point c) {
  const double la = norm(b - c);
  const double lb = norm(c - a);
  const double lc = norm(a - b);
  const auto angle = [](double opp, double s1, double s2) {
    const double cosv = std::clamp((s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2), -1.0, 1.0);
    return std::acos(cosv);
  };
  const double m = std::min({angle(la, lb, lc), angle(lb, lc, la), angle(lc, la, lb)});
  return m * 180.0 / 3.14159265358979323846;
}

namespace detail {

struct RefineOptions {
  double max_edge = 0.1;           // target edge length h
  double min_angle_deg = 22.0;     // quality target for unconstrained triangles
  double small_input_angle_deg = 60.0;
  double min_feature = 1e-11;      // triangles with shorter edges are never split
  std::size_t max_vertices = 4'000'000;
};

struct RefineResult {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;   // counterclockwise
  std::vector<std::uint8_t> exempt;            // trapped in a small input angle
  struct Seg {
    int a;
    int b;
    int loop_edge;  // index of the originating input edge
  };
  std::vector<Seg> subsegments;
};

class DelaunayRefiner {
 public:
  // loops[k] is a closed polygon; edge i runs from loops[k][i] to loops[k][i+1].
  DelaunayRefiner(const std::vector<std::vector<Point>>& loops, RefineOptions opt)
      : opt_(opt), loops_(loops) {
    init();
  }

  RefineResult run() {
    recover_segments();
    refine();
    return collect();
  }

 private:
  struct Tri {
    std::array<int, 3> v{};
    std::array<int, 3> n{-1, -1, -1};  // n[k]: neighbour across edge opposite v[k]
    bool alive = true;
    bool inside = false;
  };
  struct SegInfo {
    int loop_edge;
  };
  struct VertexInfo {
    int seg0 = -1;  // input edges this vertex lies on
    int seg1 = -1;
    bool input = false;
    bool small_corner = false;
  };

  RefineOptions opt_;
  std::vector<std::vector<Point>> loops_;
  std::vector<std::pair<Point, Point>> input_edges_;
  std::vector<std::pair<int, int>> input_edge_ends_;
  std::vector<Point> pts_;
  std::vector<VertexInfo> vinfo_;
  std::vector<Tri> tris_;
  std::vector<int> vert_tri_;
  std::map<std::pair<int, int>, SegInfo> segs_;
  std::deque<std::pair<int, int>> seg_queue_;
  std::deque<int> tri_queue_;
  std::vector<int> cavity_;
  std::vector<int> mark_;
  int mark_stamp_ = 0;
  int last_tri_ = 0;

  static std::pair<int, int> key(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

  bool is_super(int v) const { return v < 3; }

  void init() {
    double xmin = std::numeric_limits<double>::max(), ymin = xmin;
    double xmax = -xmin, ymax = -xmin;
    for (const auto& loop : loops_) {
      if (loop.size() < 3) throw MeshError("triangulate: boundary loop with fewer than 3 vertices");
      for (Point p : loop) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
      }
    }
    const double span = std::max(xmax - xmin, ymax - ymin);
    const Point c{0.5 * (xmin + xmax), 0.5 * (ymin + ymax)};
    const double s = 50.0 * std::max(span, 1e-3);
    pts_ = {{c.x - 2 * s, c.y - s}, {c.x + 2 * s, c.y - s}, {c.x, c.y + 2 * s}};
    vinfo_.assign(3, VertexInfo{});
    tris_.push_back(Tri{{0, 1, 2}, {-1, -1, -1}, true, false});
    vert_tri_ = {0, 0, 0};

    // Input vertices and edges.
    std::vector<std::vector<int>> ids(loops_.size());
    for (std::size_t k = 0; k < loops_.size(); ++k) {
      for (Point p : loops_[k]) {
        const int id = insert_point(p, last_tri_, nullptr);
        ids[k].push_back(id);
      }
    }
    for (std::size_t k = 0; k < loops_.size(); ++k) {
      const auto& loop = loops_[k];
      const std::size_t n = loop.size();
      for (std::size_t i = 0; i < n; ++i) {
        const int a = ids[k][i];
        const int b = ids[k][(i + 1) % n];
        if (a == b) throw MeshError("triangulate: repeated boundary vertex");
        const int e = static_cast<int>(input_edges_.size());
        input_edges_.emplace_back(loop[i], loop[(i + 1) % n]);
        input_edge_ends_.emplace_back(a, b);
        segs_[key(a, b)] = SegInfo{e};
        attach_segment(a, e);
        attach_segment(b, e);
        vinfo_[a].input = true;
        vinfo_[b].input = true;
      }
      // Interior angle at each input vertex of this loop.
      for (std::size_t i = 0; i < n; ++i) {
        const Point prev = loop[(i + n - 1) % n];
        const Point cur = loop[i];
        const Point next = loop[(i + 1) % n];
        const double ang = std::atan2(std::abs(cross(prev - cur, next - cur)), dot(prev - cur, next - cur));
        // The interior angle may be reflex; only the acute side matters for
        // trapping, so test whether the domain interior lies in the small wedge.
        const Point probe = cur + 1e-6 * ((1.0 / norm(prev - cur)) * (prev - cur) +
                                          (1.0 / norm(next - cur)) * (next - cur));
        const bool wedge_inside = point_in_domain(probe);
        if (ang * 180.0 / 3.14159265358979323846 < opt_.small_input_angle_deg && wedge_inside) {
          vinfo_[ids[k][i]].small_corner = true;
        }
      }
    }
    for (const auto& [k, info] : segs_) seg_queue_.push_back(k);
  }

  void attach_segment(int v, int e) {
    if (vinfo_[v].seg0 < 0 || vinfo_[v].seg0 == e) {
      vinfo_[v].seg0 = e;
    } else {
      vinfo_[v].seg1 = e;
    }
  }

  // Even-odd rule over all input loops.
  bool point_in_domain(Point p) const {
    bool in = false;
    for (const auto& [a, b] : input_edges_) {
      if ((a.y > p.y) != (b.y > p.y)) {
        const double xint = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
        if (p.x < xint) in = !in;
      }
    }
    return in;
  }

  bool compute_inside(const Tri& t) const {
    if (is_super(t.v[0]) || is_super(t.v[1]) || is_super(t.v[2])) return false;
    const Point c = (1.0 / 3.0) * (pts_[t.v[0]] + pts_[t.v[1]] + pts_[t.v[2]]);
    return point_in_domain(c);
  }

  static double incircle(Point a, Point b, Point c, Point d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double alift = adx * adx + ady * ady;
    const double blift = bdx * bdx + bdy * bdy;
    const double clift = cdx * cdx + cdy * cdy;
    return alift * (bdx * cdy - bdy * cdx) + blift * (cdx * ady - cdy * adx) +
           clift * (adx * bdy - ady * bdx);
  }

  bool in_circumcircle(int t, Point p) const {
    const auto& v = tris_[t].v;
    return incircle(pts_[v[0]], pts_[v[1]], pts_[v[2]], p) > 0.0;
  }

  int locate(Point p, int start) const {
    int t = start;
    if (t < 0 || !tris_[t].alive) {
      t = 0;
      while (!tris_[t].alive) ++t;
    }
    std::size_t guard = 0;
    int rot = 0;
    while (true) {
      const auto& tri = tris_[t];
      bool moved = false;
      for (int kk = 0; kk < 3; ++kk) {
        const int k = (kk + rot) % 3;
        const Point a = pts_[tri.v[(k + 1) % 3]];
        const Point b = pts_[tri.v[(k + 2) % 3]];
        if (orient2d(a, b, p) < 0.0 && tri.n[k] >= 0) {
          t = tri.n[k];
          moved = true;
          break;
        }
      }
      if (!moved) return t;
      rot = (rot + 1) % 3;
      if (++guard > 10 * tris_.size() + 100) throw MeshError("triangulate: point location failed");
    }
  }

  void next_stamp() {
    ++mark_stamp_;
    if (mark_.size() < tris_.size()) mark_.resize(tris_.size() + tris_.size() / 2 + 16, 0);
  }

  // Bowyer-Watson cavity of p, grown from the triangle containing p.
  void build_cavity(Point p, int t0) {
    next_stamp();
    cavity_.clear();
    cavity_.push_back(t0);
    mark_[t0] = mark_stamp_;
    // A point on an edge of t0 must take the neighbour across that edge too.
    for (int k = 0; k < 3; ++k) {
      const auto& tri = tris_[t0];
      const Point a = pts_[tri.v[(k + 1) % 3]];
      const Point b = pts_[tri.v[(k + 2) % 3]];
      const int nb = tri.n[k];
      if (nb >= 0 && orient2d(a, b, p) == 0.0 && mark_[nb] != mark_stamp_) {
        mark_[nb] = mark_stamp_;
        cavity_.push_back(nb);
      }
    }
    for (std::size_t i = 0; i < cavity_.size(); ++i) {
      const int t = cavity_[i];
      for (int k = 0; k < 3; ++k) {
        const int nb = tris_[t].n[k];
        if (nb < 0 || mark_[nb] == mark_stamp_) continue;
        if (in_circumcircle(nb, p)) {
          mark_[nb] = mark_stamp_;
          cavity_.push_back(nb);
        }
      }
    }
    // Enforce star-shapedness: every cavity boundary edge must see p on its left.
    bool changed = true;
    const std::size_t forced = cavity_.size();
    (void)forced;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < cavity_.size(); ++i) {
        const int t = cavity_[i];
        if (t == t0) continue;
        const auto& tri = tris_[t];
        for (int k = 0; k < 3; ++k) {
          const int nb = tri.n[k];
          if (nb >= 0 && mark_[nb] == mark_stamp_) continue;
          const Point a = pts_[tri.v[(k + 1) % 3]];
          const Point b = pts_[tri.v[(k + 2) % 3]];
          if (orient2d(a, b, p) <= 0.0) {
            mark_[t] = 0;
            cavity_.erase(cavity_.begin() + static_cast<std::ptrdiff_t>(i));
            changed = true;
            break;
          }
        }
        if (changed) break;
      }
    }
  }

  // Inserts p; returns its vertex id. Cavity triangles are reported through
  // `removed_edges` (edges of destroyed triangles) when requested.
  int insert_point(Point p, int hint, std::vector<std::pair<int, int>>* touched_edges) {
    const int t0 = locate(p, hint);
    for (int k = 0; k < 3; ++k) {
      if (pts_[tris_[t0].v[k]] == p) return tris_[t0].v[k];
    }
    build_cavity(p, t0);
    const int id = static_cast<int>(pts_.size());
    pts_.push_back(p);
    vinfo_.push_back(VertexInfo{});
    vert_tri_.push_back(-1);

    struct BEdge {
      int a, b, outer;
    };
    std::vector<BEdge> boundary;
    for (const int t : cavity_) {
      const auto& tri = tris_[t];
      for (int k = 0; k < 3; ++k) {
        const int a = tri.v[(k + 1) % 3];
        const int b = tri.v[(k + 2) % 3];
        if (touched_edges) touched_edges->emplace_back(a, b);
        const int nb = tri.n[k];
        if (nb >= 0 && mark_[nb] == mark_stamp_) continue;
        boundary.push_back({a, b, nb});
      }
    }
    for (const int t : cavity_) tris_[t].alive = false;

    // Fan from p. Edge (a,b) becomes triangle (a,b,p).
    std::map<int, int> by_start;  // vertex a -> new triangle whose edge starts at a
    std::vector<int> created;
    created.reserve(boundary.size());
    for (const auto& e : boundary) {
      const int nt = static_cast<int>(tris_.size());
      Tri tri;
      tri.v = {e.a, e.b, id};
      tri.n[2] = e.outer;
      tris_.push_back(tri);
      if (e.outer >= 0) {
        auto& o = tris_[e.outer];
        for (int k = 0; k < 3; ++k) {
          const int oa = o.v[(k + 1) % 3];
          const int ob = o.v[(k + 2) % 3];
          if (oa == e.b && ob == e.a) o.n[k] = nt;
        }
      }
      by_start[e.a] = nt;
      created.push_back(nt);
    }
    for (const int nt : created) {
      auto& tri = tris_[nt];
      // Edge (b, p) is opposite v[0]=a; neighbour is the triangle starting at b.
      tri.n[0] = by_start.at(tri.v[1]);
      // Edge (p, a) is opposite v[1]=b; neighbour is the triangle ending at a.
      const int prev = [&] {
        for (const int o : created) {
          if (tris_[o].v[1] == tri.v[0]) return o;
        }
        throw MeshError("triangulate: broken cavity");
      }();
      tri.n[1] = prev;
      tri.inside = compute_inside(tri);
      vert_tri_[tri.v[0]] = nt;
      vert_tri_[tri.v[1]] = nt;
    }
    vert_tri_[id] = created.front();
    last_tri_ = created.front();
    new_tris_ = std::move(created);
    return id;
  }

  std::vector<int> new_tris_;

  // Triangle containing directed or undirected edge (a, b), with the index k
  // of the vertex opposite to it; -1 if (a, b) is not an edge.
  std::pair<int, int> find_edge(int a, int b) const {
    const int start = vert_tri_[a];
    int t = start;
    std::size_t guard = 0;
    do {
      const auto& tri = tris_[t];
      int ka = -1;
      for (int k = 0; k < 3; ++k) {
        if (tri.v[k] == a) ka = k;
      }
      if (ka < 0) return {-1, -1};
      const int b1 = tri.v[(ka + 1) % 3];
      const int b2 = tri.v[(ka + 2) % 3];
      if (b1 == b) return {t, (ka + 2) % 3};
      if (b2 == b) return {t, (ka + 1) % 3};
      t = tri.n[(ka + 2) % 3];
      if (++guard > 100000) break;
    } while (t >= 0 && t != start);
    return {-1, -1};
  }

  bool encroached(int a, int b) const {
    const auto [t, k] = find_edge(a, b);
    if (t < 0) return true;
    const Point pa = pts_[a];
    const Point pb = pts_[b];
    const auto check = [&](int tri, int kk) {
      const int v = tris_[tri].v[kk];
      if (is_super(v)) return false;
      const Point pv = pts_[v];
      return dot(pa - pv, pb - pv) < 0.0;
    };
    if (check(t, k)) return true;
    const int nb = tris_[t].n[k];
    if (nb >= 0) {
      for (int kk = 0; kk < 3; ++kk) {
        const int v = tris_[nb].v[kk];
        if (v != a && v != b) return check(nb, kk);
      }
    }
    return false;
  }

  bool encroached_by(int a, int b, Point p) const {
    return dot(pts_[a] - p, pts_[b] - p) < 0.0;
  }

  Point split_point(int a, int b) const {
    const Point pa = pts_[a];
    const Point pb = pts_[b];
    const double len = norm(pb - pa);
    const bool sa = vinfo_[a].small_corner;
    const bool sb = vinfo_[b].small_corner;
    if (sa != sb) {
      // Concentric shells: split at a power-of-two distance from the corner.
      const Point from = sa ? pa : pb;
      const Point to = sa ? pb : pa;
      const double d = std::exp2(std::round(std::log2(0.5 * len)));
      const double s = std::clamp(d / len, 0.25, 0.75);
      return from + s * (to - from);
    }
    return 0.5 * (pa + pb);
  }

  void queue_new_triangles() {
    for (const int t : new_tris_) {
      if (tris_[t].inside) tri_queue_.push_back(t);
    }
  }

  void split_segment(int a, int b) {
    const auto it = segs_.find(key(a, b));
    if (it == segs_.end()) return;
    const SegInfo info = it->second;
    const Point m = split_point(a, b);
    const double len = norm(pts_[b] - pts_[a]);
    if (len < opt_.min_feature) throw MeshError("triangulate: segment splitting underflow");
    segs_.erase(it);
    std::vector<std::pair<int, int>> touched;
    const int t_hint = vert_tri_[a];
    const int id = insert_point(m, t_hint, &touched);
    check_vertex_budget();
    vinfo_[id].seg0 = info.loop_edge;
    segs_[key(a, id)] = info;
    segs_[key(id, b)] = info;
    seg_queue_.push_back(key(a, id));
    seg_queue_.push_back(key(id, b));
    for (const auto& [u, v] : touched) {
      if (segs_.count(key(u, v))) seg_queue_.push_back(key(u, v));
    }
    queue_new_triangles();
  }

  void check_vertex_budget() const {
    if (pts_.size() > opt_.max_vertices) {
      throw MeshError("triangulate: vertex budget exhausted; quality target unreachable at h=" +
                      std::to_string(opt_.max_edge));
    }
  }

  void drain_segments() {
    while (!seg_queue_.empty()) {
      const auto [a, b] = seg_queue_.front();
      seg_queue_.pop_front();
      if (!segs_.count(key(a, b))) continue;
      if (encroached(a, b)) split_segment(a, b);
    }
  }

  void recover_segments() {
    drain_segments();
    for (auto& t : tris_) {
      if (t.alive) t.inside = compute_inside(t);
    }
  }

  bool on_segments_sharing_small_corner(int p, int q) const {
    const std::array<int, 2> sp{vinfo_[p].seg0, vinfo_[p].seg1};
    const std::array<int, 2> sq{vinfo_[q].seg0, vinfo_[q].seg1};
    for (const int s1 : sp) {
      if (s1 < 0) continue;
      for (const int s2 : sq) {
        if (s2 < 0 || s1 == s2) continue;
        const auto [a1, b1] = input_edge_ends_[s1];
        const auto [a2, b2] = input_edge_ends_[s2];
        for (const int w : {a1, b1}) {
          if ((w == a2 || w == b2) && vinfo_[w].small_corner) return true;
        }
      }
    }
    return false;
  }

  enum class Verdict { Good, Bad, Exempt };

  Verdict classify(int t) const {
    const auto& v = tris_[t].v;
    const Point a = pts_[v[0]], b = pts_[v[1]], c = pts_[v[2]];
    const std::array<double, 3> len{norm(b - c), norm(c - a), norm(a - b)};
    const int kmin = static_cast<int>(std::min_element(len.begin(), len.end()) - len.begin());
    const double lmax = *std::max_element(len.begin(), len.end());
    const double ang = min_angle_deg(a, b, c);
    const bool skinny = ang < opt_.min_angle_deg;
    if (skinny) {
      const int p = v[(kmin + 1) % 3];
      const int q = v[(kmin + 2) % 3];
      if (on_segments_sharing_small_corner(p, q)) return Verdict::Exempt;
      if (len[kmin] < opt_.min_feature) return Verdict::Exempt;
      return Verdict::Bad;
    }
    return lmax > opt_.max_edge ? Verdict::Bad : Verdict::Good;
  }

  void refine() {
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      if (tris_[t].alive && tris_[t].inside) tri_queue_.push_back(static_cast<int>(t));
    }
    std::vector<std::pair<int, int>> enc;
    while (!tri_queue_.empty()) {
      const int t = tri_queue_.front();
      tri_queue_.pop_front();
      if (!tris_[t].alive || !tris_[t].inside) continue;
      if (classify(t) != Verdict::Bad) continue;
      const auto& v = tris_[t].v;
      const Point c = circumcenter(pts_[v[0]], pts_[v[1]], pts_[v[2]]);
      if (!std::isfinite(c.x) || !std::isfinite(c.y)) continue;

      // Subsegments encroached by the would-be circumcenter.
      enc.clear();
      next_stamp();
      std::vector<int> stack{t};
      mark_[t] = mark_stamp_;
      while (!stack.empty()) {
        const int s = stack.back();
        stack.pop_back();
        const auto& tri = tris_[s];
        for (int k = 0; k < 3; ++k) {
          const int a = tri.v[(k + 1) % 3];
          const int b = tri.v[(k + 2) % 3];
          if (segs_.count(key(a, b))) {
            if (encroached_by(a, b, c)) enc.push_back(key(a, b));
            continue;  // never look across a boundary subsegment
          }
          const int nb = tri.n[k];
          if (nb >= 0 && mark_[nb] != mark_stamp_ && in_circumcircle(nb, c)) {
            mark_[nb] = mark_stamp_;
            stack.push_back(nb);
          }
        }
      }
      if (!enc.empty()) {
        std::sort(enc.begin(), enc.end());
        enc.erase(std::unique(enc.begin(), enc.end()), enc.end());
        for (const auto& [a, b] : enc) split_segment(a, b);
        drain_segments();
        if (tris_[t].alive) tri_queue_.push_back(t);
        continue;
      }
      if (!point_in_domain(c)) continue;
      std::vector<std::pair<int, int>> touched;
      const std::size_t before = pts_.size();
      insert_point(c, t, &touched);
      if (pts_.size() == before) continue;
      check_vertex_budget();
      for (const auto& [a, b] : touched) {
        if (segs_.count(key(a, b))) seg_queue_.push_back(key(a, b));
      }
      queue_new_triangles();
      drain_segments();
    }
  }

  RefineResult collect() const {
    RefineResult out;
    std::vector<int> remap(pts_.size(), -1);
    for (const auto& t : tris_) {
      if (!t.alive || !t.inside) continue;
      std::array<int, 3> tri{};
      for (int k = 0; k < 3; ++k) {
        int& m = remap[t.v[k]];
        if (m < 0) {
          m = static_cast<int>(out.vertices.size());
          out.vertices.push_back(pts_[t.v[k]]);
        }
        tri[k] = m;
      }
      out.triangles.push_back(tri);
    }
    // Exemption flags are recomputed on the final triangles.
    for (const auto& t : tris_) {
      if (!t.alive || !t.inside) continue;
      const int idx = static_cast<int>(&t - tris_.data());
      out.exempt.push_back(classify(idx) == Verdict::Exempt ? 1 : 0);
    }
    for (const auto& [k, info] : segs_) {
      const int a = remap[k.first];
      const int b = remap[k.second];
      if (a < 0 || b < 0) throw MeshError("triangulate: boundary subsegment lost");
      out.subsegments.push_back({a, b, info.loop_edge});
    }
    return out;
  }
};

}  // namespace detail
}  // namespace clogsim
