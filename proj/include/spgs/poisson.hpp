#pragma once

// Newtonian potential of a radial density: -Delta phi = u^2 with Green kernel
// 1/(4 pi |x|), so that
//
//   phi(r) = (1/r) int_0^r s^2 u^2(s) ds + int_r^R s u^2(s) ds.
//
// Both integrals are running sums of a fourth-order cumulative rule. The
// Coulomb energy int phi u^2 is assembled with the nodal volume weights and
// differentiated exactly through the adjoint of the running sums.

#include <cmath>
#include <cstddef>
#include <vector>

#include "spgs/errors.hpp"
#include "spgs/radial_core.hpp"

namespace spgs {

/// Green constant of -Delta phi = u^2 in R^3.
struct CoulombConvention {
  static constexpr double green_constant = 1.0 / (4.0 * kPi);
};

namespace detail {

enum class Parity { Even, Odd };

struct CumulativeRow {
  std::size_t col[4];
  double coef[4];
};

// Increment int_{r_i}^{r_{i+1}} g dr of the cubic through four nodes.
inline CumulativeRow cumulative_row(std::size_t i, std::size_t n, double h, Parity parity) {
  const double c = h / 24.0;
  if (i == 0) {
    // g(-h) = +-g(h)
    const double refl = parity == Parity::Even ? -1.0 : 1.0;
    return {{0, 1, 2, 2}, {13 * c, (13 + refl) * c, -1 * c, 0.0}};
  }
  if (i + 1 == n) return {{n - 3, n - 2, n - 1, n}, {1 * c, -5 * c, 19 * c, 9 * c}};
  return {{i - 1, i, i + 1, i + 2}, {-1 * c, 13 * c, 13 * c, -1 * c}};
}

/// out[k] = int_0^{r_k} g dr.
inline std::vector<double> cumulative_integral(std::span<const double> g, double h, Parity parity) {
  const std::size_t n = g.size() - 1;
  std::vector<double> out(g.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = cumulative_row(i, n, h, parity);
    double inc = 0.0;
    for (int k = 0; k < 4; ++k) inc += row.coef[k] * g[row.col[k]];
    acc += inc;
    out[i + 1] = acc;
  }
  return out;
}

/// Transpose of cumulative_integral: returns d<z, C g>/dg.
inline std::vector<double> cumulative_integral_adjoint(std::span<const double> z, double h, Parity parity) {
  const std::size_t n = z.size() - 1;
  std::vector<double> out(z.size(), 0.0);
  double tail = 0.0;  // sum_{k > i} z_k
  for (std::size_t i = n; i-- > 0;) {
    tail += z[i + 1];
    const auto row = cumulative_row(i, n, h, parity);
    for (int k = 0; k < 4; ++k) out[row.col[k]] += row.coef[k] * tail;
  }
  return out;
}

}  // namespace detail

/// phi_u on the nodes of u's grid; phi(0) uses the limit int_0^R s u^2 ds.
inline RadialField solve_poisson(const RadialField& u) {
  const auto& g = u.grid();
  const std::size_t n = g.intervals();
  const double h = g.spacing();
  std::vector<double> inner(g.size()), outer(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.r(i);
    const double u2 = u[i] * u[i];
    inner[i] = r * r * u2;
    outer[i] = r * u2;
  }
  const auto F = detail::cumulative_integral(inner, h, detail::Parity::Even);
  const auto H = detail::cumulative_integral(outer, h, detail::Parity::Odd);
  RadialField phi(g);
  phi[0] = H[n];
  for (std::size_t i = 1; i <= n; ++i) phi[i] = F[i] / g.r(i) + (H[n] - H[i]);
  return phi;
}

/// int phi_u u^2 (nodal volume weights).
inline double coulomb_energy(const RadialField& u, const RadialField& phi) {
  require_same_grid(u.grid(), phi.grid());
  const auto m = nodal_weights(u.grid());
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) sum += m[i] * phi[i] * u[i] * u[i];
  return sum;
}

inline double coulomb_energy(const RadialField& u) { return coulomb_energy(u, solve_poisson(u)); }

/// Exact derivative of coulomb_energy with respect to each sample of u.
/// In the continuum this is 4 m_i phi_i u_i.
inline std::vector<double> coulomb_energy_derivative(const RadialField& u, const RadialField& phi) {
  const auto& g = u.grid();
  const std::size_t n = g.intervals();
  const double h = g.spacing();
  const auto m = nodal_weights(g);

  std::vector<double> y(g.size()), z(g.size(), 0.0), tail(g.size());
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    y[i] = m[i] * u[i] * u[i];
    total += y[i];
    if (i > 0) z[i] = y[i] / g.r(i);
  }
  for (std::size_t i = 0; i < g.size(); ++i) tail[i] = -y[i];
  tail[n] += total;

  const auto dz = detail::cumulative_integral_adjoint(z, h, detail::Parity::Even);
  const auto dt = detail::cumulative_integral_adjoint(tail, h, detail::Parity::Odd);

  std::vector<double> du(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.r(i);
    const double df = m[i] * phi[i] + r * r * dz[i] + r * dt[i];
    du[i] = 2.0 * u[i] * df;
  }
  return du;
}

/// int_{R^3} |grad phi|^2 including the exterior tail 4 pi R phi(R)^2 of the
/// harmonic continuation Q/r.
inline double potential_gradient_energy(const RadialField& phi) {
  const auto& g = phi.grid();
  const double uR = phi[g.intervals()];
  return dirichlet_energy(phi) + kFourPi * g.radius() * uR * uR;
}

/// Oracle for coulomb_energy: the direct double quadrature
/// 4 pi int int s^2 t^2 u^2(s) u^2(t) / max(s, t) ds dt, splitting the inner
/// integral at its kink and using composite Simpson on each piece. O(N^2).
inline double brute_force_coulomb(const RadialField& u) {
  const auto& g = u.grid();
  const std::size_t n = g.intervals();
  if (n > 4096) throw OracleSize("brute-force Coulomb oracle is limited to N <= 4096");
  const double h = g.spacing();
  std::vector<double> rho(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) rho[i] = u[i] * u[i];
  const auto outer_w = simpson_weights(g);

  std::vector<double> w(g.size());
  double total = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double t = g.r(k);
    std::fill(w.begin(), w.end(), 0.0);
    detail::add_simpson_weights(w, 0, k, h);
    double below = 0.0;
    for (std::size_t j = 0; j <= k; ++j) {
      const double s = g.r(j);
      below += w[j] * s * s * rho[j];
    }
    std::fill(w.begin(), w.end(), 0.0);
    detail::add_simpson_weights(w, k, n - k, h);
    double above = 0.0;
    for (std::size_t j = k; j <= n; ++j) above += w[j] * g.r(j) * rho[j];
    const double inner = below / t + above;
    total += outer_w[k] * t * t * rho[k] * inner;
  }
  return kFourPi * total;
}

}  // namespace spgs
