#pragma once

// Corrector problems on the void region of the periodicity cell:
//   -Lap w_j = 0 in Y0,  grad w_j . n = -n_j on the grain,  w_j Y-periodic,
// with zero mean. n is the unit normal pointing out of the void region.
// The tortuosity multiplier is tau = 1 + (1/A) int_{Y0} dw_1/dy_1.
//
// For r < 1 the cell mesh is closed into a torus by identifying matching
// vertices on opposite sides. For r >= 1 the void region splits into corner
// pieces which, across neighbouring cells, form closed islands around the
// cell corners; the corner segment is reflected across x = 1 and y = 1 into
// such an island and the pure-Neumann problem is solved there.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "clogsim/cellmesh.hpp"
#include "clogsim/errors.hpp"

namespace clogsim {

using SparseMatrix = Eigen::SparseMatrix<double>;

inline constexpr double kCellSolverTol = 1e-10;

struct CorrectorField {
  std::shared_ptr<const CellMesh> mesh;
  std::vector<double> values;  // nodal w_j on mesh->vertices
  int direction = 1;
  double mean = 0.0;           // mean over the solve domain
  double residual = 0.0;       // relative residual of the linear system
};

struct EffectiveCoeff {
  double r = 0.0;
  double tau_hat = 1.0;      // 1 + (1/A) int dw_1/dy_1
  double tau_22 = 1.0;       // 1 + (1/A) int dw_2/dy_2
  double tau_offdiag = 0.0;  // (1/A) int dw_1/dy_2
};

/// Stiffness matrix of the linear triangle p0 p1 p2.
inline std::array<std::array<double, 3>, 3> element_stiffness(Point p0, Point p1, Point p2) {
  const double area2 = orient2d(p0, p1, p2);
  if (std::abs(0.5 * area2) < 1e-14) throw SolverError("singular element: triangle area below 1e-14");
  // Gradients of the barycentric coordinates times 2*area.
  const std::array<Point, 3> g{Point{p1.y - p2.y, p2.x - p1.x}, Point{p2.y - p0.y, p0.x - p2.x},
                               Point{p0.y - p1.y, p1.x - p0.x}};
  std::array<std::array<double, 3>, 3> k{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) k[i][j] = dot(g[i], g[j]) / (2.0 * area2);
  }
  return k;
}

/// Gradient of the linear interpolant of (w0, w1, w2) on p0 p1 p2.
inline Point element_gradient(Point p0, Point p1, Point p2, double w0, double w1, double w2) {
  const double area2 = orient2d(p0, p1, p2);
  return {(w0 * (p1.y - p2.y) + w1 * (p2.y - p0.y) + w2 * (p0.y - p1.y)) / area2,
          (w0 * (p2.x - p1.x) + w1 * (p0.x - p2.x) + w2 * (p1.x - p0.x)) / area2};
}

/// Assembled P1 stiffness matrix. `dof` maps vertices to unknowns (identity
/// when empty), which lets identified vertices share a row.
inline SparseMatrix assemble_laplace(const CellMesh& mesh, const std::vector<int>& dof = {}, int ndof = -1) {
  const int n = ndof >= 0 ? ndof : static_cast<int>(mesh.vertices.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.triangles.size() * 9);
  for (const auto& t : mesh.triangles) {
    const auto k = element_stiffness(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    for (int i = 0; i < 3; ++i) {
      const int gi = dof.empty() ? t[i] : dof[t[i]];
      for (int j = 0; j < 3; ++j) {
        const int gj = dof.empty() ? t[j] : dof[t[j]];
        trip.emplace_back(gi, gj, k[i][j]);
      }
    }
  }
  SparseMatrix K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

/// Outward unit normal (out of the meshed region) of a boundary edge a->b
/// oriented with the region on its left.
inline Point outward_normal(Point a, Point b) {
  const Point d = b - a;
  const double len = norm(d);
  return {d.y / len, -d.x / len};
}

/// Load vector int_{edges with tag} g phi_i ds for g linear along each edge,
/// given as g(edge, endpoint) values.
template <class G>
Eigen::VectorXd boundary_load(const CellMesh& mesh, BoundaryTag tag, G&& g, const std::vector<int>& dof = {},
                              int ndof = -1) {
  const int n = ndof >= 0 ? ndof : static_cast<int>(mesh.vertices.size());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag != tag) continue;
    const Point pa = mesh.vertices[e.a], pb = mesh.vertices[e.b];
    const double len = norm(pb - pa);
    const double ga = g(e, 0), gb = g(e, 1);
    const int ia = dof.empty() ? e.a : dof[e.a];
    const int ib = dof.empty() ? e.b : dof[e.b];
    b[ia] += len * (2.0 * ga + gb) / 6.0;
    b[ib] += len * (ga + 2.0 * gb) / 6.0;
  }
  return b;
}

namespace detail {

struct SolveDomain {
  std::shared_ptr<const CellMesh> mesh;  // mesh the system lives on
  std::vector<int> dof;                  // vertex -> unknown
  int ndof = 0;
  std::size_t restrict_count = 0;        // leading vertices that belong to the cell mesh
};

inline SolveDomain periodic_domain(const std::shared_ptr<const CellMesh>& mesh) {
  SolveDomain d;
  d.mesh = mesh;
  d.restrict_count = mesh->vertices.size();
  const auto& v = mesh->vertices;
  std::map<std::pair<double, double>, int> index;
  for (std::size_t i = 0; i < v.size(); ++i) index[{v[i].x, v[i].y}] = static_cast<int>(i);
  // Representative: move x = 1 to x = -1 and y = 1 to y = -1.
  std::vector<int> rep(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    Point p = v[i];
    if (p.x == 1.0) p.x = -1.0;
    if (p.y == 1.0) p.y = -1.0;
    const auto it = index.find({p.x, p.y});
    if (it == index.end()) {
      throw MeshError("periodic identification: no partner for boundary vertex (" + std::to_string(v[i].x) +
                      ", " + std::to_string(v[i].y) + "); mesh is not side-matched");
    }
    rep[i] = it->second;
  }
  d.dof.assign(v.size(), -1);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (rep[i] == static_cast<int>(i)) d.dof[i] = d.ndof++;
  }
  for (std::size_t i = 0; i < v.size(); ++i) d.dof[i] = d.dof[rep[i]];
  return d;
}

struct IslandMap {
  bool mx;
  bool my;
  bool flips;
  Point apply(Point p) const { return {mx ? 2.0 - p.x : p.x, my ? 2.0 - p.y : p.y}; }
};

inline SolveDomain island_domain(const std::shared_ptr<const CellMesh>& mesh) {
  CellMesh piece = *mesh;
  for (auto& e : piece.boundary_edges) {
    if (e.tag == BoundaryTag::OuterEdge) e.tag = BoundaryTag::Symmetry;
  }
  const std::vector<IslandMap> maps{{false, false, false}, {true, false, true}, {false, true, true}, {true, true, false}};
  auto island = std::make_shared<CellMesh>(reflect_union(piece, maps));
  island->kind = CellKind::Generic;
  SolveDomain d;
  d.mesh = island;
  d.restrict_count = mesh->vertices.size();
  d.ndof = static_cast<int>(island->vertices.size());
  d.dof.resize(island->vertices.size());
  std::iota(d.dof.begin(), d.dof.end(), 0);
  return d;
}

inline SolveDomain plain_domain(const std::shared_ptr<const CellMesh>& mesh) {
  SolveDomain d;
  d.mesh = mesh;
  d.restrict_count = mesh->vertices.size();
  d.ndof = static_cast<int>(mesh->vertices.size());
  d.dof.resize(mesh->vertices.size());
  std::iota(d.dof.begin(), d.dof.end(), 0);
  return d;
}

// Integral of a P1 function and the per-unknown weights of that integral.
inline Eigen::VectorXd integration_weights(const CellMesh& m, const std::vector<int>& dof, int ndof) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(ndof);
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const double a3 = m.triangle_area(t) / 3.0;
    for (const int v : m.triangles[t]) w[dof[v]] += a3;
  }
  return w;
}

}  // namespace detail

/// Solves the corrector problem for direction j in {1, 2}.
inline CorrectorField solve_corrector(std::shared_ptr<const CellMesh> mesh, int j) {
  if (j != 1 && j != 2) throw DomainError("solve_corrector: direction must be 1 or 2");
  detail::SolveDomain dom;
  switch (mesh->kind) {
    case CellKind::FullCell: dom = detail::periodic_domain(mesh); break;
    case CellKind::CornerSegment: dom = detail::island_domain(mesh); break;
    case CellKind::Generic: dom = detail::plain_domain(mesh); break;
  }
  const CellMesh& m = *dom.mesh;
  const SparseMatrix K = assemble_laplace(m, dom.dof, dom.ndof);
  const auto g = [&](const BoundaryEdge& e, int) {
    const Point n = outward_normal(m.vertices[e.a], m.vertices[e.b]);
    return -(j == 1 ? n.x : n.y);
  };
  const Eigen::VectorXd b = boundary_load(m, BoundaryTag::GrainInterface, g, dom.dof, dom.ndof);
  const double bnorm = b.norm();
  if (std::abs(b.sum()) > 1e-10 * std::max(1.0, bnorm)) {
    throw SolverError("solve_corrector: incompatible Neumann data, sum of load = " + std::to_string(b.sum()));
  }

  CorrectorField f;
  f.mesh = mesh;
  f.direction = j;
  const Eigen::VectorXd wts = detail::integration_weights(m, dom.dof, dom.ndof);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dom.ndof);
  if (bnorm > 0.0) {
    // Fix the last unknown to remove the constant nullspace, then shift to zero mean.
    const int n = dom.ndof - 1;
    const SparseMatrix Kr = K.topLeftCorner(n, n);
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(Kr);
    if (ldlt.info() != Eigen::Success) throw SolverError("solve_corrector: factorization failed");
    x.head(n) = ldlt.solve(b.head(n));
    if (ldlt.info() != Eigen::Success) throw SolverError("solve_corrector: solve failed");
    x.array() -= wts.dot(x) / wts.sum();
    f.residual = (K * x - b).norm() / bnorm;
    if (!(f.residual <= kCellSolverTol)) {
      throw SolverError("solve_corrector: relative residual " + std::to_string(f.residual) + " above tolerance");
    }
  }
  f.mean = wts.dot(x) / wts.sum();
  f.values.resize(dom.restrict_count);
  for (std::size_t i = 0; i < dom.restrict_count; ++i) f.values[i] = x[dom.dof[i]];
  return f;
}

/// (1/A) int_{mesh} grad w over the mesh the field lives on.
inline Point mean_gradient(const CorrectorField& f) {
  const CellMesh& m = *f.mesh;
  Point s{0.0, 0.0};
  double area = 0.0;
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& v = m.triangles[t];
    const double a = m.triangle_area(t);
    const Point g = element_gradient(m.vertices[v[0]], m.vertices[v[1]], m.vertices[v[2]], f.values[v[0]],
                                     f.values[v[1]], f.values[v[2]]);
    s = s + a * g;
    area += a;
  }
  return (1.0 / area) * s;
}

/// tau = 1 + (1/A) int dw_1/dy_1 from a direction-1 corrector. On a corner
/// segment the ratio over one segment equals the ratio over the whole cell,
/// because dw_1/dy_1 is invariant under the reflections generating the cell.
inline double tortuosity(const CorrectorField& w1) {
  if (w1.direction != 1) throw DomainError("tortuosity: expects the direction-1 corrector");
  double tau = 1.0 + mean_gradient(w1).x;
  // The exact discrete solution on a corner segment is w = c - y_1, so the
  // sum cancels to roundoff.
  if (std::abs(tau) < 1e-12) tau = 0.0;
  return tau;
}

/// Full effective coefficient record from both correctors.
inline EffectiveCoeff effective_coefficient(const CorrectorField& w1, const CorrectorField& w2) {
  EffectiveCoeff c;
  c.r = w1.mesh->r;
  c.tau_hat = tortuosity(w1);
  const Point g1 = mean_gradient(w1);
  const Point g2 = mean_gradient(w2);
  c.tau_22 = 1.0 + g2.y;
  if (std::abs(c.tau_22) < 1e-12) c.tau_22 = 0.0;
  c.tau_offdiag = g1.y;
  return c;
}

inline EffectiveCoeff cell_coefficient(double r, MicroConfig config, double h) {
  auto mesh = std::make_shared<const CellMesh>(build_cell_mesh(r, config, h));
  return effective_coefficient(solve_corrector(mesh, 1), solve_corrector(mesh, 2));
}

}  // namespace clogsim
