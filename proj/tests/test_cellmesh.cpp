#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "clogsim/cellmesh.hpp"

using namespace clogsim;

namespace {

// Area of the regular n-gon inscribed in a circle of radius r.
double inscribed_polygon_area(double r, int n) { return 0.5 * n * r * r * std::sin(2 * M_PI / n); }

int count_tag(const CellMesh& m, BoundaryTag tag) {
  int c = 0;
  for (const auto& e : m.boundary_edges) c += e.tag == tag;
  return c;
}

}  // namespace

TEST(CellBoundary, FullCellHasSquareAndHole) {
  const auto b = build_cell_boundary(0.5, MicroConfig::ConfigA, 0.1);
  ASSERT_EQ(b.loops.size(), 2u);
  EXPECT_EQ(b.kind, CellKind::FullCell);
  const auto& hole = b.loops[1];
  EXPECT_GE(hole.vertices.size(), 32u);
  for (const auto& p : hole.vertices) EXPECT_NEAR(norm(p), 0.5, 1e-12);
  bool has_corner[4] = {false, false, false, false};
  for (const auto& p : b.loops[0].vertices) {
    if (std::abs(std::abs(p.x) - 1) < 1e-15 && std::abs(std::abs(p.y) - 1) < 1e-15) {
      has_corner[(p.x > 0) + 2 * (p.y > 0)] = true;
    }
  }
  for (const bool c : has_corner) EXPECT_TRUE(c);
}

TEST(CellBoundary, HoleCountFollowsMeshSize) {
  const auto b = build_cell_boundary(0.9, MicroConfig::ConfigA, 0.05);
  const int n = static_cast<int>(b.loops[1].vertices.size());
  EXPECT_GE(n, static_cast<int>(std::ceil(2 * M_PI * 0.9 / 0.05)));
  EXPECT_EQ(n % 8, 0);
}

TEST(CellBoundary, ConfigACornerSegment) {
  const auto b = build_cell_boundary(1.2, MicroConfig::ConfigA, 0.05);
  ASSERT_EQ(b.loops.size(), 1u);
  EXPECT_EQ(b.kind, CellKind::CornerSegment);
  EXPECT_NEAR(b.arc_radius, (std::sqrt(2.0) - 1.2) / (std::sqrt(2.0) - 1), 1e-15);
  EXPECT_NEAR(b.arc_radius, 0.5172, 1e-4);
  // The corner void of area (1 - pi/4) r_d^2 is the square [1-r_d, 1]^2
  // minus the quarter disc about its inner corner.
  EXPECT_NEAR(b.arc_center.x, 1.0 - b.arc_radius, 1e-15);
  EXPECT_NEAR(b.arc_center.y, 1.0 - b.arc_radius, 1e-15);
  const auto& loop = b.loops[0];
  for (std::size_t k = 0; k < loop.vertices.size(); ++k) {
    if (loop.tags[k] == BoundaryTag::GrainInterface) {
      EXPECT_NEAR(norm(loop.vertices[k] - b.arc_center), b.arc_radius, 1e-12);
    }
  }
}

TEST(CellBoundary, ConfigBArcCenteredAtCellCenter) {
  const auto b = build_cell_boundary(1.2, MicroConfig::ConfigB, 0.05);
  EXPECT_DOUBLE_EQ(b.arc_radius, 1.2);
  EXPECT_DOUBLE_EQ(norm(b.arc_center), 0.0);
}

TEST(CellBoundary, NearClogRadiusNeverCrashes) {
  for (const auto c : {MicroConfig::ConfigA, MicroConfig::ConfigB}) {
    try {
      const auto m = build_cell_mesh(kSqrt2 - 1e-3, c, 0.05);
      EXPECT_TRUE(validate(m).ok()) << validate(m).message;
    } catch (const MeshError&) {
      SUCCEED();
    }
  }
}

TEST(CellBoundary, GrainTouchingCellEdge) {
  for (const double r : {std::nextafter(1.0, 0.0), 1.0 - 1e-10, 1.0}) {
    for (const auto c : {MicroConfig::ConfigA, MicroConfig::ConfigB}) {
      const auto m = build_cell_mesh(r, c, 0.05);
      EXPECT_EQ(m.kind, CellKind::CornerSegment) << r;
      EXPECT_TRUE(validate(m).ok()) << r << ": " << validate(m).message;
    }
  }
  EXPECT_EQ(build_cell_mesh(1.0 - 1e-6, MicroConfig::ConfigA, 0.05).kind, CellKind::FullCell);
}

TEST(CellBoundary, ArgumentChecks) {
  EXPECT_THROW(build_cell_boundary(0.5, MicroConfig::ConfigA, 0.0), DomainError);
  EXPECT_THROW(build_cell_boundary(0.5, MicroConfig::ConfigA, 0.6), DomainError);
  EXPECT_THROW(build_cell_boundary(kSqrt2, MicroConfig::ConfigA, 0.1), DomainError);
  EXPECT_THROW(build_cell_boundary(0.0, MicroConfig::ConfigA, 0.1), DomainError);
}

TEST(Triangulate, UnitSquare) {
  CellBoundary b;
  BoundaryLoop sq;
  const Point c[4] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
  for (const auto& p : c) sq.add(p, BoundaryTag::OuterEdge);
  b.loops = {sq};
  const auto m = triangulate(b, 0.5);
  EXPECT_GE(m.triangles.size(), 2u);
  EXPECT_NEAR(m.area(), 4.0, 1e-10);
  const auto rep = validate(m);
  EXPECT_TRUE(rep.ok()) << rep.message;
  EXPECT_EQ(rep.euler, 1);
}

TEST(Triangulate, HoleAreaMatchesInscribedPolygon) {
  const auto b = build_cell_boundary(0.5, MicroConfig::ConfigA, 0.1);
  const auto m = triangulate(b, 0.1);
  const int n = static_cast<int>(b.loops[1].vertices.size());
  EXPECT_NEAR(m.area(), 4.0 - inscribed_polygon_area(0.5, n), 1e-12);
  EXPECT_NEAR(m.area(), void_area(0.5, MicroConfig::ConfigA), 2.0 * 2 * M_PI * 0.5 / (n * n));
  const auto rep = validate(m);
  EXPECT_TRUE(rep.ok()) << rep.message;
  EXPECT_EQ(rep.euler, 0);
}

// Refinement may split grain chords, so the hole is measured from the grain
// edges themselves (shoelace over the clockwise hole boundary).
TEST(CellMeshBuild, SymmetricFullCellAreaMatchesHolePolygon) {
  const auto m = build_cell_mesh(0.5, MicroConfig::ConfigA, 0.1);
  double hole = 0.0;
  for (const auto& e : m.boundary_edges) {
    if (e.tag == BoundaryTag::GrainInterface) hole -= 0.5 * cross(m.vertices[e.a], m.vertices[e.b]);
  }
  EXPECT_NEAR(m.area(), 4.0 - hole, 1e-12);
  EXPECT_NEAR(hole, M_PI * 0.25, 2.0 * 2 * M_PI * 0.5 / (32.0 * 32.0));
  EXPECT_EQ(count_tag(m, BoundaryTag::Symmetry), 0);
  EXPECT_TRUE(m.has_tag(BoundaryTag::OuterEdge));
}

TEST(CellMeshBuild, MirroredVerticesExist) {
  const auto m = build_cell_mesh(0.5, MicroConfig::ConfigA, 0.05);
  std::set<std::pair<double, double>> pts;
  for (const auto& p : m.vertices) pts.insert({p.x, p.y});
  for (const auto& p : m.vertices) {
    EXPECT_TRUE(pts.count({p.y, p.x})) << p.x << ' ' << p.y;
    EXPECT_TRUE(pts.count({-p.x, p.y})) << p.x << ' ' << p.y;
  }
}

TEST(CellMeshBuild, SegmentHasOneComponent) {
  for (const auto c : {MicroConfig::ConfigA, MicroConfig::ConfigB}) {
    const auto m = build_cell_mesh(1.2, c, 0.05);
    EXPECT_EQ(m.kind, CellKind::CornerSegment);
    const auto rep = validate(m);
    EXPECT_TRUE(rep.ok()) << rep.message;
    EXPECT_EQ(rep.euler, 1);
    for (const auto& p : m.vertices) {
      EXPECT_GE(p.x, -1e-15);
      EXPECT_GE(p.y, -1e-15);
      EXPECT_LE(p.x, 1.0 + 1e-15);
      EXPECT_LE(p.y, 1.0 + 1e-15);
    }
  }
}

TEST(CellMeshProperty, InvariantsOverRadiusSweep) {
  for (const auto c : {MicroConfig::ConfigA, MicroConfig::ConfigB}) {
    for (double r = 0.1; r < 1.36; r += 0.2) {
      for (const double h : {0.1, 0.05}) {
        const auto m = build_cell_mesh(r, c, h);
        const auto rep = validate(m);
        EXPECT_TRUE(rep.ok(20.0)) << "r=" << r << " h=" << h << ": " << rep.message;
        EXPECT_EQ(rep.euler, r < 1.0 ? 0 : 1);
        EXPECT_TRUE(m.has_tag(BoundaryTag::GrainInterface));
        EXPECT_TRUE(m.has_tag(BoundaryTag::OuterEdge));
      }
    }
  }
}

TEST(CellMeshProperty, AreaConvergesQuadratically) {
  struct Case {
    double r;
    MicroConfig c;
    double scale;  // full cell: 1; corner segment: one quarter of the void
  };
  for (const Case cs : {Case{0.5, MicroConfig::ConfigA, 1.0}, Case{0.9, MicroConfig::ConfigA, 1.0},
                        Case{1.2, MicroConfig::ConfigA, 0.25}, Case{1.2, MicroConfig::ConfigB, 0.25}}) {
    const double exact = cs.scale * void_area(cs.r, cs.c);
    double prev = 1e300, first = 0.0;
    for (const double h : {0.2, 0.1, 0.05}) {
      const auto m = build_cell_mesh(cs.r, cs.c, h);
      const double err = std::abs(m.area() - exact);
      EXPECT_LE(err, h * h) << cs.r << ' ' << h;
      EXPECT_LE(err, prev * (1 + 1e-9)) << cs.r << ' ' << h;
      if (h == 0.2) first = err;
      prev = err;
    }
    EXPECT_LT(prev, first) << cs.r;
  }
}

TEST(CellMeshProperty, Deterministic) {
  for (const double r : {0.37, 1.21}) {
    const auto a = build_cell_mesh(r, MicroConfig::ConfigA, 0.05);
    const auto b = build_cell_mesh(r, MicroConfig::ConfigA, 0.05);
    ASSERT_EQ(a.vertices.size(), b.vertices.size());
    ASSERT_EQ(a.triangles, b.triangles);
    for (std::size_t i = 0; i < a.vertices.size(); ++i) EXPECT_TRUE(a.vertices[i] == b.vertices[i]);
  }
}

TEST(MeshDump, RoundTrip) {
  const auto m = build_cell_mesh(0.5, MicroConfig::ConfigA, 0.1);
  std::vector<double> vals(m.vertices.size());
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = 0.1 * static_cast<double>(i) - 3.0;
  std::stringstream ss;
  write_mesh(ss, m, &vals);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, "vertices " + std::to_string(m.vertices.size()) + " triangles " +
                        std::to_string(m.triangles.size()));
  ss.seekg(0);
  std::vector<double> back;
  const auto r = read_mesh(ss, &back);
  ASSERT_EQ(r.vertices.size(), m.vertices.size());
  EXPECT_EQ(r.triangles, m.triangles);
  EXPECT_EQ(back, vals);
  ASSERT_EQ(r.boundary_edges.size(), m.boundary_edges.size());
  for (std::size_t i = 0; i < r.vertices.size(); ++i) EXPECT_TRUE(r.vertices[i] == m.vertices[i]);
  for (std::size_t i = 0; i < r.boundary_edges.size(); ++i) EXPECT_EQ(r.boundary_edges[i].tag, m.boundary_edges[i].tag);
}

TEST(MeshDump, RejectsMalformedInput) {
  std::istringstream bad("nodes 3 triangles 1\n");
  EXPECT_THROW(read_mesh(bad), ConfigError);
  std::istringstream trunc("vertices 3 triangles 1\n0 0\n1 0\n");
  EXPECT_THROW(read_mesh(trunc), ConfigError);
  EXPECT_THROW(parse_boundary_tag("inner"), ConfigError);
}
