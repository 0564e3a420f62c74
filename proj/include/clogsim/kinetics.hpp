#pragma once

// Pointwise reaction laws: Smoluchowski aggregation, Henry-type exchange with
// the deposit, and the deposit / radius rate equations.

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "clogsim/errors.hpp"
#include "clogsim/geometry.hpp"

namespace clogsim {

enum class LossMode { FullLoss, MassConserving };

inline std::string_view to_string(LossMode m) { return m == LossMode::FullLoss ? "full" : "conserving"; }

inline LossMode parse_loss_mode(std::string_view s) {
  if (s == "full" || s == "FullLoss") return LossMode::FullLoss;
  if (s == "conserving" || s == "MassConserving") return LossMode::MassConserving;
  throw ConfigError("unknown loss mode '" + std::string(s) + "' (expected full or conserving)");
}

struct SpeciesParams {
  int N = 3;
  std::vector<double> d{0.3, 0.5, 0.99};
  std::vector<double> a{0.9, 0.5, 0.3};
  std::vector<double> beta_i{1.0, 1.0, 1.0};
  double kappa = 1.0;
  double alpha = 0.53;
  std::vector<double> kernel_alpha = std::vector<double>(9, 0.1);  // N x N, row-major
  std::vector<double> kernel_beta = std::vector<double>(9, 100.0);
  LossMode loss_mode = LossMode::FullLoss;
  bool growth_only = false;
  double curvature_alpha = 0.0;

  double beta() const {
    double s = 0.0;
    for (const double b : beta_i) s += b;
    return s;
  }

  double alpha_ij(int i, int j) const { return kernel_alpha[static_cast<std::size_t>(i * N + j)]; }
  double beta_ij(int i, int j) const { return kernel_beta[static_cast<std::size_t>(i * N + j)]; }

  /// Throws ConfigError unless the parameter invariants hold.
  void validate() const {
    if (N < 1) throw ConfigError("species: N must be >= 1");
    const auto n = static_cast<std::size_t>(N);
    const auto need = [&](const std::vector<double>& v, std::size_t len, const char* name) {
      if (v.size() != len) {
        throw ConfigError(std::string("species: '") + name + "' has " + std::to_string(v.size()) +
                          " entries, expected " + std::to_string(len));
      }
      for (const double x : v) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError(std::string("species: '") + name + "' must be >= 0");
      }
    };
    need(d, n, "d");
    need(a, n, "a");
    need(beta_i, n, "beta_i");
    need(kernel_alpha, n * n, "kernel_alpha");
    need(kernel_beta, n * n, "kernel_beta");
    if (!(kappa > 0.0)) throw ConfigError("species: kappa must be > 0");
    if (!(alpha >= 0.0)) throw ConfigError("species: alpha must be >= 0");
    if (!(curvature_alpha >= 0.0)) throw ConfigError("species: curvature_alpha must be >= 0");
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < N; ++j) {
        if (alpha_ij(i, j) > 1.0) throw ConfigError("species: collision efficiencies must be <= 1");
        if (alpha_ij(i, j) != alpha_ij(j, i) || beta_ij(i, j) != beta_ij(j, i)) {
          throw ConfigError("species: collision kernels must be symmetric");
        }
      }
    }
  }
};

/// R_k = 1/2 sum_{i+j=k} alpha_ij beta_ij u_i u_j - u_k sum_i alpha_ki beta_ki u_i
/// (species are 1-based in the formula, 0-based in the vectors). The loss sum
/// runs over all N species, or only up to N-k in mass-conserving mode.
inline void smoluchowski_rate(const double* u, const SpeciesParams& p, double* out) {
  const int N = p.N;
  for (int k = 1; k <= N; ++k) {
    double gain = 0.0;
    for (int i = 1; i < k; ++i) {
      const int j = k - i;
      gain += p.alpha_ij(i - 1, j - 1) * p.beta_ij(i - 1, j - 1) * u[i - 1] * u[j - 1];
    }
    const int imax = p.loss_mode == LossMode::FullLoss ? N : N - k;
    double loss = 0.0;
    for (int i = 1; i <= imax; ++i) loss += p.alpha_ij(k - 1, i - 1) * p.beta_ij(k - 1, i - 1) * u[i - 1];
    out[k - 1] = 0.5 * gain - u[k - 1] * loss;
  }
}

inline std::vector<double> smoluchowski_rate(const std::vector<double>& u, const SpeciesParams& p) {
  if (u.size() != static_cast<std::size_t>(p.N)) throw DomainError("smoluchowski_rate: size mismatch");
  std::vector<double> r(u.size());
  smoluchowski_rate(u.data(), p, r.data());
  return r;
}

/// a_i u_i - beta_i v for species index i (0-based).
inline double exchange_rate(double u_i, double v, int i, const SpeciesParams& p) {
  return p.a[static_cast<std::size_t>(i)] * u_i - p.beta_i[static_cast<std::size_t>(i)] * v;
}

/// sum_i a_i u_i - beta v, without the growth clamp.
inline double exchange_sum(const double* u, double v, const SpeciesParams& p) {
  double s = 0.0;
  for (int i = 0; i < p.N; ++i) s += p.a[static_cast<std::size_t>(i)] * u[i];
  return s - p.beta() * v;
}

/// d v / d t.
inline double deposition_rhs(const std::vector<double>& u, double v, const SpeciesParams& p) {
  if (u.size() != static_cast<std::size_t>(p.N)) throw DomainError("deposition_rhs: size mismatch");
  const double s = exchange_sum(u.data(), v, p);
  return p.growth_only ? std::max(0.0, s) : s;
}

/// d r / d t = m(r) s - alpha_curv / r, with s the exchange sum.
inline double radius_rate(double s, double r, MicroConfig config, const SpeciesParams& p, bool clogged = false) {
  if (clogged) return 0.0;
  const double rate = radius_rate_coefficient(r, config, p.alpha) * s - p.curvature_alpha / r;
  return p.growth_only ? std::max(0.0, rate) : rate;
}

inline double radius_rhs(const std::vector<double>& u, double v, double r, MicroConfig config,
                         const SpeciesParams& p, bool clogged = false) {
  if (u.size() != static_cast<std::size_t>(p.N)) throw DomainError("radius_rhs: size mismatch");
  if (clogged) return 0.0;
  return radius_rate(exchange_sum(u.data(), v, p), r, config, p);
}

}  // namespace clogsim
