#pragma once

// One-dimensional fibering maps.
//
// Scalar fiber (Nehari manifolds N and N*): t -> I(t u). Its critical point
// solves a + t^2 b = t^{p-1} c + t^4 d, i.e. the monotone split
//   a/t^2 + b = t^{p-3} c + t^2 d,
// whose left side decreases and right side increases for p > 3.
//
// Dilation fiber (manifold M, constant V): tau -> I(u_tau) with
// u_tau(r) = tau^2 u(tau r). The scaling laws a_grad ~ tau^3, a_pot ~ tau,
// b ~ tau^3, c ~ tau^{2p-1} give
//   g(tau) = tau^3/2 a_grad + tau/2 a_pot + tau^3/4 b - tau^{2p-1}/(p+1) c,
// and g'(tau) = 0 splits as a_pot/(2 tau^2) + 3/2 a_grad + 3/4 b = (2p-1)/(p+1) tau^{2p-4} c.

#include <cmath>
#include <functional>

#include "spgs/energies.hpp"
#include "spgs/errors.hpp"
#include "spgs/radial_core.hpp"

namespace spgs {

namespace detail {

// Root of a strictly decreasing f on (0, inf): expand from t = 1 by factors
// of 4 until the sign changes, then bisect to relative width 1e-12.
inline double decreasing_root(const std::function<double(double)>& f) {
  double lo = 1.0, hi = 1.0;
  double flo = f(lo);
  if (flo == 0.0) return 1.0;
  if (flo > 0.0) {
    hi = 4.0;
    while (f(hi) > 0.0) {
      lo = hi;
      hi *= 4.0;
      if (hi > 1e150) throw Error("fiber root bracket diverged");
    }
  } else {
    lo = 0.25;
    while (f(lo) < 0.0) {
      hi = lo;
      lo *= 0.25;
      if (lo < 1e-150) throw Error("fiber root bracket collapsed");
    }
  }
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if (fm > 0.0) lo = mid;
    else hi = mid;
  }
  if (!(f(lo) >= 0.0 && f(hi) <= 0.0)) throw Error("fiber root lost its sign change");
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Scale t > 0 with t u on N (or N*), from the coefficients of u.
inline double scalar_fiber_root(const FiberCoefficients& k, const Family& fam) {
  if (fam.kind == FamilyKind::Subcritical && !(fam.exponent > 3.0))
    throw NonUniqueFiber("Nehari fiber is not unique for p <= 3; use the dilation fiber");
  if (!(k.a() > 0.0)) throw ZeroField("scalar fiber of the zero field");
  const double pc = fam.has_power_term() ? power_exponent(fam) - 4.0 : 0.0;
  const double c = fam.has_power_term() ? k.c : 0.0;
  const double d = fam.has_critical_term() ? k.d : 0.0;
  if (!(c > 0.0 || d > 0.0)) throw ZeroField("scalar fiber has no nonlinear term");
  return detail::decreasing_root([&](double t) { return k.a() / (t * t) + k.b - std::pow(t, pc) * c - t * t * d; });
}

/// I(t u) from the coefficients of u.
inline double scalar_fiber_level(const FiberCoefficients& k, const Family& fam, double t) {
  const double t2 = t * t;
  double val = 0.5 * t2 * k.a() + 0.25 * t2 * t2 * k.b;
  if (fam.has_power_term()) val -= std::pow(t, power_exponent(fam)) * k.c / power_exponent(fam);
  if (fam.has_critical_term()) val -= t2 * t2 * t2 * k.d / 6.0;
  return val;
}

/// Maximizer tau of the dilation fiber g, from the coefficients of u.
inline double dilation_fiber_root(const FiberCoefficients& k, double p) {
  if (!(k.a() > 0.0) || !(k.c > 0.0)) throw ZeroField("dilation fiber of the zero field");
  const double kk = (2 * p - 1) / (p + 1);
  const double left = 1.5 * k.a_grad + 0.75 * k.b;
  return detail::decreasing_root(
      [&](double tau) { return 0.5 * k.a_pot / (tau * tau) + left - kk * std::pow(tau, 2 * p - 4) * k.c; });
}

/// g(tau) = I(u_tau) through the scaling laws.
inline double dilation_fiber_level(const FiberCoefficients& k, double p, double tau) {
  const double t3 = tau * tau * tau;
  return 0.5 * t3 * k.a_grad + 0.5 * tau * k.a_pot + 0.25 * t3 * k.b - std::pow(tau, 2 * p - 1) * k.c / (p + 1);
}

/// g'(tau).
inline double dilation_fiber_slope(const FiberCoefficients& k, double p, double tau) {
  const double t2 = tau * tau;
  return 1.5 * t2 * k.a_grad + 0.5 * k.a_pot + 0.75 * t2 * k.b - (2 * p - 1) / (p + 1) * std::pow(tau, 2 * p - 2) * k.c;
}

/// The manifold that carries the fiber of `spec`: M for subcritical problems
/// with constant V, N for subcritical problems with radial V, N* otherwise.
inline Manifold natural_manifold(const ProblemSpec& spec) {
  switch (spec.family().kind) {
    case FamilyKind::Subcritical:
      return spec.potential().is_constant() ? Manifold::M : Manifold::N;
    default:
      return Manifold::NStar;
  }
}

inline double fiber_scalar(const RadialField& u, const ProblemSpec& spec) {
  require_grid(u, spec);
  if (u.is_zero()) throw ZeroField("scalar fiber of the zero field");
  return scalar_fiber_root(fiber_coefficients(u, spec), spec.family());
}

inline double fiber_dilation(const RadialField& u, const ProblemSpec& spec) {
  require_grid(u, spec);
  if (u.is_zero()) throw ZeroField("dilation fiber of the zero field");
  require_manifold(spec, Manifold::M);
  return dilation_fiber_root(fiber_coefficients(u, spec), spec.family().exponent);
}

struct FiberMax {
  double scale;
  double level;
  Manifold manifold;
};

/// Fiber maximum of u on the natural manifold: an upper bound for the
/// ground-state level.
inline FiberMax fiber_max(const RadialField& u, const ProblemSpec& spec) {
  require_grid(u, spec);
  if (u.is_zero()) throw ZeroField("fiber maximum of the zero field");
  const auto mf = natural_manifold(spec);
  const auto k = fiber_coefficients(u, spec);
  if (mf == Manifold::M) {
    const double p = spec.family().exponent;
    const double tau = dilation_fiber_root(k, p);
    return {tau, dilation_fiber_level(k, p, tau), mf};
  }
  const double t = scalar_fiber_root(k, spec.family());
  return {t, scalar_fiber_level(k, spec.family(), t), mf};
}

struct Projection {
  RadialField field;
  double scale;  // accumulated t or tau
};

/// Puts u on its natural manifold. N/N*: t u. M: on-grid dilation, repeated
/// until the discrete constraint G vanishes to rounding (the interpolation
/// error of each dilation shrinks with |tau - 1|).
inline Projection project(const RadialField& u, const ProblemSpec& spec) {
  const auto mf = natural_manifold(spec);
  const auto& fam = spec.family();
  if (mf != Manifold::M) {
    const double t = fiber_scalar(u, spec);
    return {t * u, t};
  }
  RadialField v = u;
  double total = 1.0;
  for (int it = 0; it < 12; ++it) {
    const auto k = fiber_coefficients(v, spec);
    const double tau = dilation_fiber_root(k, fam.exponent);
    if (std::abs(manifold_value(k, fam, mf)) <= 1e-14 * k.a() || tau == 1.0) break;
    v = dilate(v, tau);
    total *= tau;
  }
  return {std::move(v), total};
}

}  // namespace spgs
