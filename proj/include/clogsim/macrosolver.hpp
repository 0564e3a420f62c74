#pragma once

// Galerkin hat-function discretization of the upscaled 1D system on [0, 1]
// and its linearly implicit time step.
//
// Per species i:
//   [B + dt K_i + dt a_i C] u_i^{n+1} - dt beta_i C v^{n+1} = B u_i^n + dt b_{R,i}(t_n)
// nodal deposit:
//   (1 + dt beta) v^{n+1} - dt sum_i a_i u_i^{n+1} = v^n
// nodal radius (explicit in geometry):
//   r^{n+1} = r^n + dt [m(r^n)(sum_i a_i u_i^{n+1} - beta v^{n+1}) - alpha_curv / r^n]
// v^{n+1} is eliminated into the species equations, which leaves a block
// tridiagonal system with N x N blocks, solved by block LU.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "clogsim/coefftable.hpp"
#include "clogsim/errors.hpp"
#include "clogsim/geometry.hpp"
#include "clogsim/kinetics.hpp"

namespace clogsim {

/// Void-area floor below which a macro node is treated as clogged.
inline constexpr double kAreaMin = 1e-6;

struct MacroGrid {
  int M = 100;
  explicit MacroGrid(int m = 100) : M(m) {
    if (m < 1) throw ConfigError("macro grid: M must be >= 1");
  }
  double h() const { return 1.0 / M; }
  double x(int j) const { return static_cast<double>(j) / M; }
  int nodes() const { return M + 1; }
};

struct MacroState {
  double t = 0.0;
  std::vector<std::vector<double>> u;  // u[i][j]: species i at node j
  std::vector<double> v;
  std::vector<double> r;
  std::vector<std::uint8_t> clogged;

  int species() const { return static_cast<int>(u.size()); }
  int nodes() const { return static_cast<int>(v.size()); }
};

struct BoundarySchedule {
  std::vector<double> u_b{1.0, 1.0, 1.0};
  double t0 = 2.0;
  bool closed = false;  // no inlet at all: zero flux at x = 0 as well

  /// Inlet value of species i for a step starting at t.
  double value(int i, double t) const { return t < t0 ? u_b[static_cast<std::size_t>(i)] : 0.0; }
};

/// Tridiagonal matrix stored by diagonals; lower[0] and upper[n-1] are unused.
struct Tridiag {
  std::vector<double> lower, diag, upper;
  explicit Tridiag(int n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
  int size() const { return static_cast<int>(diag.size()); }

  double at(int i, int j) const {
    if (i == j) return diag[i];
    if (j == i - 1) return lower[i];
    if (j == i + 1) return upper[i];
    return 0.0;
  }

  std::vector<double> apply(const std::vector<double>& x) const {
    const int n = size();
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
      double s = diag[i] * x[i];
      if (i > 0) s += lower[i] * x[i - 1];
      if (i + 1 < n) s += upper[i] * x[i + 1];
      y[i] = s;
    }
    return y;
  }

  void add_element(int e, const std::array<std::array<double, 2>, 2>& k) {
    diag[e] += k[0][0];
    upper[e] += k[0][1];
    lower[e + 1] += k[1][0];
    diag[e + 1] += k[1][1];
  }
};

namespace detail {

// Two-point Gauss rule on [0, 1].
inline constexpr std::array<double, 2> kGaussX{0.21132486540518711775, 0.78867513459481288225};

inline double lerp(double a, double b, double s) { return a + s * (b - a); }

}  // namespace detail

/// B_l = (int psi_j psi_l).
inline Tridiag assemble_mass(const MacroGrid& g) {
  Tridiag B(g.nodes());
  const double h = g.h();
  for (int e = 0; e < g.M; ++e) B.add_element(e, {{{h / 3.0, h / 6.0}, {h / 6.0, h / 3.0}}});
  return B;
}

/// Row sums of B_l, i.e. int psi_j.
inline std::vector<double> hat_integrals(const MacroGrid& g) {
  std::vector<double> w(g.nodes(), g.h());
  w.front() = w.back() = 0.5 * g.h();
  return w;
}

/// int tau(r(x)) psi_j' psi_l' with r interpolated linearly and tau taken
/// from the table, 2-point Gauss per element. Multiply by kappa d_i for K_i.
inline Tridiag assemble_stiffness(const MacroGrid& g, const std::vector<double>& r, const CoeffTable& table) {
  Tridiag K(g.nodes());
  const double h = g.h();
  for (int e = 0; e < g.M; ++e) {
    double dsum = 0.0;
    for (const double s : detail::kGaussX) dsum += 0.5 * interpolate_tau(table, detail::lerp(r[e], r[e + 1], s));
    const double k = dsum / h;
    K.add_element(e, {{{k, -k}, {-k, k}}});
  }
  return K;
}

/// Nodal exchange weight L/A, zero at clogged nodes.
inline std::vector<double> exchange_weights(const std::vector<double>& r, const std::vector<std::uint8_t>& clogged,
                                            MicroConfig config) {
  std::vector<double> w(r.size(), 0.0);
  for (std::size_t j = 0; j < r.size(); ++j) {
    if (clogged[j]) continue;
    w[j] = interface_length(r[j], config) / void_area(r[j], config);
  }
  return w;
}

/// C = (int omega psi_j psi_l) with omega the linear interpolant of the nodal
/// weights L/A; 2-point Gauss is exact for this cubic integrand.
inline Tridiag assemble_exchange(const MacroGrid& g, const std::vector<double>& r,
                                 const std::vector<std::uint8_t>& clogged, MicroConfig config) {
  const std::vector<double> w = exchange_weights(r, clogged, config);
  Tridiag C(g.nodes());
  const double h = g.h();
  for (int e = 0; e < g.M; ++e) {
    std::array<std::array<double, 2>, 2> k{};
    for (const double s : detail::kGaussX) {
      const double om = detail::lerp(w[e], w[e + 1], s);
      const std::array<double, 2> psi{1.0 - s, s};
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) k[a][b] += 0.5 * h * om * psi[a] * psi[b];
      }
    }
    C.add_element(e, k);
  }
  return C;
}

/// b_R[i][l] = int R_i(u_h) psi_l, 2-point Gauss per element.
inline std::vector<std::vector<double>> assemble_reaction(const MacroGrid& g, const MacroState& s,
                                                          const SpeciesParams& p) {
  const int N = p.N;
  std::vector<std::vector<double>> b(N, std::vector<double>(g.nodes(), 0.0));
  std::vector<double> uq(N), R(N);
  const double h = g.h();
  for (int e = 0; e < g.M; ++e) {
    for (const double x : detail::kGaussX) {
      for (int i = 0; i < N; ++i) uq[i] = detail::lerp(s.u[i][e], s.u[i][e + 1], x);
      smoluchowski_rate(uq.data(), p, R.data());
      for (int i = 0; i < N; ++i) {
        b[i][e] += 0.5 * h * R[i] * (1.0 - x);
        b[i][e + 1] += 0.5 * h * R[i] * x;
      }
    }
  }
  return b;
}

struct StepInfo {
  double dt_used = 0.0;
  int halvings = 0;
  double clipped_mass = 0.0;
};

struct MacroProblem {
  SpeciesParams params;
  MicroConfig config = MicroConfig::ConfigA;
  BoundarySchedule schedule;
  const CoeffTable* table = nullptr;
  double max_dr = 0.05;
  int max_halvings = 10;
};

namespace detail {

// Solves the block tridiagonal system; blocks are N x N.
inline std::vector<Eigen::VectorXd> block_thomas(std::vector<Eigen::MatrixXd>& L, std::vector<Eigen::MatrixXd>& D,
                                                 std::vector<Eigen::MatrixXd>& U, std::vector<Eigen::VectorXd>& rhs) {
  const int n = static_cast<int>(D.size());
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu(n);
  lu[0].compute(D[0]);
  for (int j = 1; j < n; ++j) {
    const Eigen::MatrixXd W = L[j] * lu[j - 1].inverse();
    D[j] -= W * U[j - 1];
    rhs[j] -= W * rhs[j - 1];
    lu[j].compute(D[j]);
  }
  std::vector<Eigen::VectorXd> x(n);
  x[n - 1] = lu[n - 1].solve(rhs[n - 1]);
  for (int j = n - 2; j >= 0; --j) x[j] = lu[j].solve(rhs[j] - U[j] * x[j + 1]);
  return x;
}

}  // namespace detail

/// One step of size dt without rejection logic. Returns false when the
/// radius increment limit is exceeded.
inline bool try_step(const MacroGrid& g, const MacroState& s, double dt, const MacroProblem& prob, MacroState& out,
                     double& clipped) {
  const SpeciesParams& p = prob.params;
  const int N = p.N;
  const int n = g.nodes();
  const double beta = p.beta();
  const Tridiag B = assemble_mass(g);
  const Tridiag K = assemble_stiffness(g, s.r, *prob.table);
  const Tridiag C = assemble_exchange(g, s.r, s.clogged, prob.config);
  const auto bR = assemble_reaction(g, s, p);

  std::vector<Eigen::MatrixXd> Lb(n, Eigen::MatrixXd::Zero(N, N)), Db(n, Eigen::MatrixXd::Zero(N, N)),
      Ub(n, Eigen::MatrixXd::Zero(N, N));
  std::vector<Eigen::VectorXd> rhs(n, Eigen::VectorXd::Zero(N));
  const double gamma = dt / (1.0 + dt * beta);
  for (int l = 0; l < n; ++l) {
    for (int j = std::max(0, l - 1); j <= std::min(n - 1, l + 1); ++j) {
      Eigen::MatrixXd& blk = j == l ? Db[l] : (j < l ? Lb[l] : Ub[l]);
      const double b = B.at(l, j), k = K.at(l, j), c = C.at(l, j);
      for (int i = 0; i < N; ++i) {
        const double ai = p.a[i], bi = p.beta_i[i];
        blk(i, i) += b + dt * p.kappa * p.d[i] * k + dt * ai * c;
        if (s.clogged[j]) {
          rhs[l][i] += dt * bi * c * s.v[j];
        } else {
          rhs[l][i] += dt * bi * c * s.v[j] / (1.0 + dt * beta);
          for (int q = 0; q < N; ++q) blk(i, q) -= dt * bi * c * gamma * p.a[q];
        }
        rhs[l][i] += b * s.u[i][j];
      }
    }
    for (int i = 0; i < N; ++i) rhs[l][i] += dt * bR[i][l];
  }
  // Dirichlet inlet at x = 0 by row replacement.
  if (!prob.schedule.closed) {
    Db[0].setIdentity();
    Ub[0].setZero();
    for (int i = 0; i < N; ++i) rhs[0][i] = prob.schedule.value(i, s.t);
  }

  const auto x = detail::block_thomas(Lb, Db, Ub, rhs);

  out.t = s.t + dt;
  out.u.assign(N, std::vector<double>(n));
  out.v.resize(n);
  out.r.resize(n);
  out.clogged = s.clogged;
  const auto w = hat_integrals(g);
  clipped = 0.0;
  for (int j = 0; j < n; ++j) {
    double au = 0.0;
    for (int i = 0; i < N; ++i) {
      const double val = x[j][i];
      if (!std::isfinite(val)) throw SolverError("macro step: non-finite solution at t=" + std::to_string(s.t));
      out.u[i][j] = val;
      au += p.a[i] * val;
    }
    double vn = s.clogged[j] ? s.v[j] : (s.v[j] + dt * au) / (1.0 + dt * beta);
    if (p.growth_only) vn = std::max(vn, s.v[j]);
    out.v[j] = vn;
  }
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < N; ++i) {
      if (out.u[i][j] < 0.0) {
        clipped += -out.u[i][j] * w[j];
        out.u[i][j] = 0.0;
      }
    }
    if (out.v[j] < 0.0) {
      clipped += -out.v[j] * w[j];
      out.v[j] = 0.0;
    }
  }
  for (int j = 0; j < n; ++j) {
    if (s.clogged[j]) {
      out.r[j] = s.r[j];
      continue;
    }
    double au = 0.0;
    for (int i = 0; i < N; ++i) au += p.a[i] * out.u[i][j];
    const double rate = radius_rate(au - beta * out.v[j], s.r[j], prob.config, p);
    const double rn = std::clamp(s.r[j] + dt * rate, kRMin, kSqrt2);
    if (std::abs(rn - s.r[j]) > prob.max_dr) return false;
    out.r[j] = rn;
    if (void_area(rn, prob.config) <= kAreaMin) out.clogged[j] = 1;
  }
  return true;
}

/// Advances by dt, halving it while a radius increment exceeds max_dr.
inline MacroState step(const MacroGrid& g, const MacroState& s, double dt, const MacroProblem& prob,
                       StepInfo* info = nullptr) {
  if (!(dt > 0.0)) throw DomainError("step: dt must be positive");
  if (!prob.table) throw ConfigError("step: no coefficient table");
  MacroState out;
  double clipped = 0.0;
  for (int k = 0; k <= prob.max_halvings; ++k) {
    if (try_step(g, s, dt, prob, out, clipped)) {
      if (info) *info = {dt, k, clipped};
      return out;
    }
    dt *= 0.5;
  }
  throw SolverError("macro step at t=" + std::to_string(s.t) + ": radius increment above " +
                    std::to_string(prob.max_dr) + " after " + std::to_string(prob.max_halvings) + " halvings");
}

}  // namespace clogsim
