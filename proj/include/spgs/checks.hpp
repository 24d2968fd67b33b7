#pragma once

// Fast property suite behind the `check` subcommand. Each check is
// self-contained and reports a measured quantity next to its bound.

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "spgs/critical.hpp"
#include "spgs/energies.hpp"
#include "spgs/manifolds.hpp"
#include "spgs/poisson.hpp"
#include "spgs/radial_core.hpp"
#include "spgs/solver.hpp"

namespace spgs {

struct CheckResult {
  std::string name;
  bool passed;
  double measured;
  double bound;
};

namespace detail {

inline RadialField gaussian(const RadialGrid& g, double amp = 1.0, double width = 1.0, double center = 0.0) {
  auto u = RadialField::sample(g, [&](double r) { return amp * std::exp(-std::pow((r - center) / width, 2)); });
  u[g.intervals()] = 0.0;
  return u;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace detail

inline std::vector<CheckResult> run_checks(std::uint64_t seed = 0) {
  std::vector<CheckResult> out;
  auto add = [&](std::string name, double measured, double bound) {
    out.push_back({std::move(name), std::isfinite(measured) && measured <= bound, measured, bound});
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const auto g = make_grid(20.0, 2000);
  const auto u = detail::gaussian(g);

  // quadrature: int e^{-2 r^2} dx = (pi/2)^{3/2}
  add("quadrature.gaussian_l2", detail::rel(volume_integrate(u, u), std::pow(kPi / 2.0, 1.5)), 1e-10);

  // Poisson against the O(N^2) oracle
  {
    const auto gs = make_grid(10.0, 512);
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      const auto v = detail::gaussian(gs, 0.5 + unif(rng), 0.7 + 1.5 * unif(rng), 2.0 * unif(rng));
      worst = std::max(worst, detail::rel(coulomb_energy(v), brute_force_coulomb(v)));
    }
    add("poisson.brute_force", worst, 1e-6);
  }

  // phi_{tu} = t^2 phi_u
  {
    const double t = 1.7;
    const auto a = solve_poisson(t * u);
    const auto b = solve_poisson(u);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - t * t * b[i]) / (t * t * b[0]));
    add("poisson.quadratic_scaling", worst, 1e-14);
  }

  // int |grad phi|^2 = int phi u^2
  {
    const auto phi = solve_poisson(u);
    add("poisson.energy_identity", detail::rel(potential_gradient_energy(phi), coulomb_energy(u, phi)), 1e-7);
  }

  // phi >= 0
  {
    double lowest = 0.0;
    for (int k = 0; k < 5; ++k) {
      const auto v = detail::gaussian(g, 1.0, 0.5 + 3.0 * unif(rng), 5.0 * unif(rng));
      for (double x : solve_poisson(v).values()) lowest = std::min(lowest, x);
    }
    add("poisson.positivity", -lowest, 0.0);
  }

  // gradient of I against central differences
  {
    const ProblemSpec spec(Family::subcritical(3.0), Potential::constant(1.0), g);
    const auto dual = energy_derivative(u, spec);
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      const auto dir = detail::gaussian(g, 1.0, 0.5 + unif(rng), 3.0 * unif(rng));
      const double e = 1e-4;
      RadialField up = u, um = u;
      up.axpy(e, dir);
      um.axpy(-e, dir);
      const double fd = (eval_energy(up, spec) - eval_energy(um, spec)) / (2 * e);
      double an = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) an += dual[i] * dir[i];
      worst = std::max(worst, detail::rel(an, fd));
    }
    add("energies.gradient_fd", worst, 1e-6);
  }

  // dilation laws on matched resolution
  {
    const double tau = 1.3;
    const auto ud = dilate(u, tau);
    add("radial_core.dilation_l2", detail::rel(volume_integrate(ud, ud), tau * volume_integrate(u, u)), 1e-4);
  }

  // fiber maximum is the fixed point of the projection
  {
    const ProblemSpec spec(Family::subcritical(3.5), Potential::constant(1.0), g);
    const auto pr = project(u, spec);
    const auto fm = fiber_max(pr.field, spec);
    add("manifolds.projection_fixed_point", std::abs(fm.scale - 1.0), 1e-9);
  }

  // bubble normalization
  {
    const auto gb = make_grid(4.0, 8000);
    const auto v = cutoff_bubble({1e-2, 1.0}, gb);
    add("critical.bubble_l6", std::abs(norm(v, Norm::L(6)) - 1.0), 1e-12);
  }

  // nonexistence certificate dominates its lower bound
  {
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 5; ++k) {
      const auto v = detail::gaussian(g, 0.2 + unif(rng), 0.5 + 2.0 * unif(rng), 4.0 * unif(rng));
      const auto c = nonexistence_certificate(v, Potential::constant(0.5 + unif(rng)));
      worst = std::max(worst, c.lower_bound - c.value);
    }
    add("critical.certificate_positive", worst, 0.0);
  }

  // short solve
  {
    const ProblemSpec spec(Family::subcritical(3.0), Potential::constant(1.0), make_grid(20.0, 1000));
    const auto rep = solve_ground_state(spec, {});
    add("solver.converged_gradient", rep.converged ? rep.residuals.gradient : std::numeric_limits<double>::infinity(), 1e-7);
    add("solver.fiber_max_consistency", std::abs(fiber_max(rep.u_star, spec).level - rep.level), 1e-9);
  }
  return out;
}

}  // namespace spgs
