#pragma once

// Ground states by manifold-projected Sobolev-gradient descent.
//
// Each iteration takes the H^1 Riesz representative of dI, removes its
// component along the H^1 normal of the constraint, steps, takes |.|, and
// projects back with the fiber map (dilation on M, scaling on N and N*).
// Steps are chosen by Armijo backtracking on the projected energy.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "spgs/critical.hpp"
#include "spgs/energies.hpp"
#include "spgs/errors.hpp"
#include "spgs/manifolds.hpp"
#include "spgs/parallel.hpp"
#include "spgs/poisson.hpp"
#include "spgs/radial_core.hpp"

namespace spgs {

inline constexpr const char* kLevelLabel = "variational upper bound consistent with inf-max characterization";

struct SolveOptions {
  std::size_t max_iterations = 5000;
  double tol_gradient = 1e-7;   // H^1 norm of the tangential gradient
  double tol_manifold = 1e-9;   // |constraint| / (a_grad + a_pot)
  double initial_step = 1.0;
  double backtrack_factor = 0.5;
  std::uint64_t seed = 0;
  bool allow_critical_pure = false;
  std::size_t stagnation_window = 50;
  // Barzilai-Borwein step proposals; false gives plain Armijo steps with
  // doubling, a closer discretization of the gradient flow. The pure
  // critical mode always uses the plain steps.
  bool barzilai_borwein = true;

  std::vector<std::string> violations() const {
    std::vector<std::string> out;
    if (max_iterations == 0) out.emplace_back("solver.max_iterations must be positive");
    if (!(tol_gradient > 0.0)) out.emplace_back("solver.tol_gradient must be positive");
    if (!(tol_manifold > 0.0)) out.emplace_back("solver.tol_manifold must be positive");
    if (!(initial_step > 0.0)) out.emplace_back("solver.initial_step must be positive");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
      out.emplace_back("solver.backtrack_factor must lie in (0, 1)");
    if (stagnation_window == 0) out.emplace_back("solver.stagnation_window must be positive");
    return out;
  }
};

struct Residuals {
  double manifold = 0.0;       // |G| / a
  double pohozaev = 0.0;       // |Pohozaev| / |I|
  double gradient = 0.0;       // ||tangential gradient||_{H^1}
  double gradient_full = 0.0;  // ||gradient||_{H^1}
};

struct IterationRecord {
  std::size_t iteration;
  double level;
  double step;
  double gradient;
  bool armijo;  // exact sufficient-decrease condition held
  double mass_radius;
};

struct SolveReport {
  double level = 0.0;
  RadialField u_star;
  RadialField phi_star;
  Residuals residuals;
  Manifold manifold = Manifold::N;
  std::size_t iterations = 0;
  bool converged = false;
  std::optional<NonexistenceCertificate> certificate;
  std::vector<double> probe_bounds;
  std::vector<IterationRecord> history;
  std::string label = kLevelLabel;
};

// ---------------------------------------------------------------------------
// Concentration diagnostics

namespace detail {

// Node density of the positive measure whose total mass is the level on the
// manifold: J-type weights on |u'|^2, V u^2, phi u^2 and u^6.
inline std::vector<double> concentration_density(const RadialField& u, const ProblemSpec& spec) {
  const auto& g = u.grid();
  const auto& fam = spec.family();
  const auto phi = solve_poisson(u);
  const auto du = radial_derivative(u);
  const auto V = spec.potential().on(g);
  double wg, wv, wb, w6 = 0.0;
  if (fam.kind == FamilyKind::Subcritical && spec.potential().is_constant()) {
    const double p = fam.exponent;
    wg = (p - 2) / (2 * p - 1);
    wv = (p - 1) / (2 * p - 1);
    wb = (p - 2) / (2 * (2 * p - 1));
  } else if (fam.kind == FamilyKind::CriticalPure) {
    wg = wv = 1.0 / 3.0;
    wb = 1.0 / 12.0;
  } else {
    const double q1 = fam.exponent + 1.0;
    wg = wv = 0.5 - 1.0 / q1;
    wb = 0.25 - 1.0 / q1;
    if (fam.kind == FamilyKind::CriticalPerturbed) w6 = 1.0 / q1 - 1.0 / 6.0;
  }
  std::vector<double> rho(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.r(i);
    const double x2 = u[i] * u[i];
    rho[i] = r * r * (wg * du[i] * du[i] + wv * V[i] * x2 + wb * phi[i] * x2 + w6 * x2 * x2 * x2);
  }
  return rho;
}

// Normalized cumulative mass at the nodes: 0 at r = 0, exactly 1 at R.
inline std::vector<double> cumulative_mass(const RadialField& u, const ProblemSpec& spec) {
  const auto rho = concentration_density(u, spec);
  std::vector<double> cum(rho.size(), 0.0);
  for (std::size_t i = 1; i < rho.size(); ++i) cum[i] = cum[i - 1] + 0.5 * (rho[i - 1] + rho[i]);
  const double total = cum.back();
  if (!(total > 0.0)) throw ZeroField("concentration profile of the zero field");
  for (double& c : cum) c /= total;
  cum.back() = 1.0;
  return cum;
}

}  // namespace detail

/// nu(B_r) / nu(R^3) for each radius.
inline std::vector<double> concentration_profile(const RadialField& u, const ProblemSpec& spec,
                                                 const std::vector<double>& radii) {
  require_grid(u, spec);
  const auto cum = detail::cumulative_mass(u, spec);
  const auto& g = u.grid();
  std::vector<double> out;
  out.reserve(radii.size());
  for (double r : radii) {
    if (r <= 0.0) {
      out.push_back(0.0);
    } else if (r >= g.radius()) {
      out.push_back(1.0);
    } else {
      const double x = r / g.spacing();
      const auto i = std::min(static_cast<std::size_t>(x), g.intervals() - 1);
      const double f = x - static_cast<double>(i);
      out.push_back(cum[i] + f * (cum[i + 1] - cum[i]));
    }
  }
  return out;
}

/// Smallest radius holding `fraction` of the concentration measure.
inline double mass_radius(const RadialField& u, const ProblemSpec& spec, double fraction = 0.9) {
  require_grid(u, spec);
  const auto cum = detail::cumulative_mass(u, spec);
  const auto& g = u.grid();
  const auto it = std::lower_bound(cum.begin(), cum.end(), fraction);
  const auto i = static_cast<std::size_t>(it - cum.begin());
  if (i == 0) return 0.0;
  const double span = cum[i] - cum[i - 1];
  const double f = span > 0.0 ? (fraction - cum[i - 1]) / span : 1.0;
  return g.r(i - 1) + f * g.spacing();
}

// ---------------------------------------------------------------------------
// Descent

namespace detail {

struct Point {
  RadialField u;
  RadialField phi;
  FiberCoefficients k;
  double level;
};

inline Point make_point(RadialField u, const ProblemSpec& spec) {
  auto phi = solve_poisson(u);
  const auto k = fiber_coefficients(u, phi, spec);
  const double level = energy_from(k, spec.family());
  return {std::move(u), std::move(phi), k, level};
}

struct Direction {
  RadialField tangent;  // H^1 tangential gradient
  double gradient;      // its H^1 norm
  double gradient_full;
};

inline double pair(std::span<const double> dual, const RadialField& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += dual[i] * v[i];
  return s;
}

inline Direction tangential_gradient(const Point& x, const ProblemSpec& spec, Manifold mf) {
  const auto& g = x.u.grid();
  const auto dk = coefficient_derivatives(x.u, x.phi, spec);
  const auto dI = combine(dk, energy_weights(spec.family()));
  const auto dG = combine(dk, manifold_weights(spec.family(), mf));
  const auto grad = h1_riesz(dI, g);
  const auto normal = h1_riesz(dG, g);
  const double nn = pair(dG, normal);
  const double gn = pair(dI, normal);
  RadialField t = grad;
  t.axpy(-gn / nn, normal);
  t[g.intervals()] = 0.0;
  const double full = std::sqrt(std::max(0.0, pair(dI, grad)));
  const double tt = std::sqrt(std::max(0.0, h1_inner(t, t)));
  return {std::move(t), tt, full};
}

inline RadialField project_field(const RadialField& v, const ProblemSpec& spec) { return project(v, spec).field; }

inline Residuals residual_panel(const Point& x, const Direction& dir, const ProblemSpec& spec, Manifold mf) {
  Residuals r;
  r.manifold = std::abs(manifold_value(x.k, spec.family(), mf)) / x.k.a();
  const double poh = pohozaev_from(x.k, virial_potential_term(x.u, spec), spec.family());
  r.pohozaev = std::abs(poh) / std::abs(x.level);
  r.gradient = dir.gradient;
  r.gradient_full = dir.gradient_full;
  return r;
}

}  // namespace detail

/// Deterministic start: exp(-r^2/2) with the Dirichlet node cleared.
inline RadialField initial_guess(const RadialGrid& grid) {
  auto u = RadialField::sample(grid, [](double r) { return std::exp(-0.5 * r * r); });
  u[grid.intervals()] = 0.0;
  return u;
}

/// Minimizes I (or I*) over the natural manifold of `spec`.
inline SolveReport solve_ground_state(const ProblemSpec& spec, const SolveOptions& opts,
                                      std::optional<RadialField> start = std::nullopt) {
  if (auto v = opts.violations(); !v.empty()) throw SpecError(v.front());
  const auto& fam = spec.family();
  const bool pure = fam.kind == FamilyKind::CriticalPure;
  if (pure && !opts.allow_critical_pure)
    throw UnsupportedCombination("the pure critical family has no ground state; enable allow_critical_pure");
  const auto mf = natural_manifold(spec);
  const auto& grid = spec.grid();
  const std::size_t n = grid.intervals();
  if (start) require_grid(*start, spec);

  RadialField u0 = start ? *start : initial_guess(grid);
  for (auto& x : u0.values()) x = std::abs(x);
  u0[n] = 0.0;
  auto x = detail::make_point(detail::project_field(u0, spec), spec);

  std::vector<IterationRecord> history;
  bool converged = false;
  double step = opts.initial_step;
  const double step_cap = 1e4 * opts.initial_step;
  const double flow_cap = 8.0 * opts.initial_step;
  const double armijo_c = 1e-4;
  std::size_t stalled = 0;
  auto dir = detail::tangential_gradient(x, spec, mf);

  std::size_t it = 0;
  for (; it < opts.max_iterations; ++it) {
    const auto panel = detail::residual_panel(x, dir, spec, mf);
    if (!pure && panel.gradient <= opts.tol_gradient && panel.manifold <= opts.tol_manifold) {
      converged = true;
      break;
    }
    const double slope = dir.gradient * dir.gradient;
    const double noise = 1e-13 * (1.0 + std::abs(x.level));
    std::optional<detail::Point> accepted;
    std::optional<detail::Direction> next_dir;
    bool exact = false;
    double alpha = step;
    for (int bt = 0; bt < 60; ++bt, alpha *= opts.backtrack_factor) {
      RadialField v = x.u;
      v.axpy(-alpha, dir.tangent);
      for (auto& s : v.values()) s = std::abs(s);
      v[n] = 0.0;
      if (v.is_zero() || !v.finite()) continue;
      std::optional<detail::Point> y;
      try {
        y = detail::make_point(detail::project_field(v, spec), spec);
      } catch (const ZeroField&) {
        continue;
      }
      if (!std::isfinite(y->level)) continue;
      exact = y->level <= x.level - armijo_c * alpha * slope;
      if (exact) {
        accepted = std::move(y);
        break;
      }
      // Below the rounding floor of I the decrease is invisible; fall back
      // to requiring a smaller gradient.
      if (y->level <= x.level + noise) {
        auto d = detail::tangential_gradient(*y, spec, mf);
        if (d.gradient < dir.gradient) {
          accepted = std::move(y);
          next_dir = std::move(d);
          break;
        }
      }
    }
    if (!accepted) {
      ++stalled;
      step = std::max(step * opts.backtrack_factor, 1e-12 * opts.initial_step);
    } else {
      stalled = accepted->level < x.level ? 0 : stalled + 1;
      if (!next_dir) next_dir = detail::tangential_gradient(*accepted, spec, mf);
      // Barzilai-Borwein proposal for the next step, in the H^1 metric
      RadialField sdiff = accepted->u;
      sdiff.axpy(-1.0, x.u);
      RadialField ydiff = next_dir->tangent;
      ydiff.axpy(-1.0, dir.tangent);
      const double sy = h1_inner(sdiff, ydiff);
      const double ss = h1_inner(sdiff, sdiff);
      if (opts.barzilai_borwein && !pure && sy > 0.0)
        step = std::clamp(ss / sy, 1e-4 * opts.initial_step, step_cap);
      else
        step = alpha == step ? std::min(2.0 * alpha, flow_cap) : alpha;
      x = std::move(*accepted);
      dir = std::move(*next_dir);
    }
    history.push_back({it + 1, x.level, accepted ? alpha : 0.0, dir.gradient, accepted && exact,
                           mass_radius(x.u, spec)});
    if (stalled >= opts.stagnation_window) {
      std::ostringstream diag;
      diag.precision(17);
      diag << "iteration " << it + 1 << ", level " << x.level << ", gradient " << dir.gradient << ", manifold "
           << panel.manifold << ", step " << step;
      if (!pure) throw Stagnation("descent stagnated: no energy decrease over the stagnation window", diag.str());
      break;
    }
  }

  const auto panel = detail::residual_panel(x, dir, spec, mf);
  SolveReport rep{.level = x.level,
                  .u_star = std::move(x.u),
                  .phi_star = std::move(x.phi),
                  .residuals = panel,
                  .manifold = mf,
                  .iterations = it,
                  .converged = converged,
                  .certificate = std::nullopt,
                  .probe_bounds = {},
                  .history = std::move(history)};
  if (pure) rep.certificate = nonexistence_certificate(rep.u_star, spec.potential());
  return rep;
}

// ---------------------------------------------------------------------------
// Consistency experiments

/// Random positive fields: one to three Gaussian bumps.
inline std::vector<RadialField> random_probes(const RadialGrid& grid, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> bumps(1, 3);
  std::uniform_real_distribution<double> center(0.0, grid.radius() / 8.0);
  std::uniform_real_distribution<double> width(0.4, 3.0);
  std::uniform_real_distribution<double> amp(0.2, 2.0);
  std::vector<RadialField> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const int m = bumps(rng);
    std::vector<double> c(m), w(m), a(m);
    for (int j = 0; j < m; ++j) c[j] = center(rng), w[j] = width(rng), a[j] = amp(rng);
    auto u = RadialField::sample(grid, [&](double r) {
      double s = 0.0;
      for (int j = 0; j < m; ++j) s += a[j] * std::exp(-std::pow((r - c[j]) / w[j], 2));
      return s;
    });
    u[grid.intervals()] = 0.0;
    out.push_back(std::move(u));
  }
  return out;
}

/// Fiber maxima of random probes; each is an upper bound for the level.
inline std::vector<double> probe_upper_bounds(const SolveReport& report, const ProblemSpec& spec,
                                              std::size_t n_probes, std::uint64_t seed, unsigned threads = 1) {
  require_grid(report.u_star, spec);
  const auto probes = random_probes(spec.grid(), n_probes, seed);
  std::vector<double> out(n_probes);
  parallel_for(n_probes, threads, [&](std::size_t i) { out[i] = fiber_max(probes[i], spec).level; });
  return out;
}

struct ContinuationPoint {
  double delta;
  double level;
  std::size_t iterations;
};

struct Continuation {
  std::vector<ContinuationPoint> points;  // sorted by delta
  double modulus;                         // max |c(delta) - c(0)| / |delta|
  bool monotone;                          // nondecreasing in delta within 1e-8 (1 + |c|)
};

/// Levels of V + delta. delta = 0 is always included as the reference.
inline Continuation continuation_c_of_V(const Potential& base, std::vector<double> deltas,
                                        const ProblemSpec& templ, const SolveOptions& opts, unsigned threads = 1) {
  if (std::find(deltas.begin(), deltas.end(), 0.0) == deltas.end()) deltas.push_back(0.0);
  std::sort(deltas.begin(), deltas.end());
  deltas.erase(std::unique(deltas.begin(), deltas.end()), deltas.end());
  std::vector<ProblemSpec> specs;
  for (double d : deltas) specs.push_back(templ.with_potential(base.shifted(d)));
  std::vector<ContinuationPoint> pts(deltas.size());
  parallel_for(deltas.size(), threads, [&](std::size_t i) {
    const auto rep = solve_ground_state(specs[i], opts);
    pts[i] = {deltas[i], rep.level, rep.iterations};
  });
  Continuation out{pts, 0.0, true};
  const auto ref = std::find_if(pts.begin(), pts.end(), [](const auto& p) { return p.delta == 0.0; });
  for (const auto& p : pts)
    if (p.delta != 0.0) out.modulus = std::max(out.modulus, std::abs(p.level - ref->level) / std::abs(p.delta));
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i].level < pts[i - 1].level - 1e-8 * (1.0 + std::abs(pts[i - 1].level))) out.monotone = false;
  return out;
}

}  // namespace spgs
