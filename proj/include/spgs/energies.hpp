#pragma once

// Reduced functionals of the Schrodinger-Poisson system and their first
// variations.
//
// Every functional is assembled from five scalars of a field u,
//   a_grad = int |grad u|^2      a_pot = int V u^2
//   b      = int phi_u u^2       c     = int |u|^{p+1}   d = int u^6,
// so fibering maps reduce to polynomials in one scale parameter. All local
// integrals use the nodal volume weights; gradients are exact derivatives of
// the discrete functionals.

#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spgs/errors.hpp"
#include "spgs/poisson.hpp"
#include "spgs/radial_core.hpp"

namespace spgs {

// ---------------------------------------------------------------------------
// Potential

class Potential {
 public:
  static Potential constant(double v) { return Potential(v); }

  /// Radially symmetric V tabulated on the solve grid; v_infinity is the
  /// liminf of V at infinity.
  static Potential radial(RadialField values, double v_infinity) {
    return Potential(std::move(values), v_infinity);
  }

  bool is_constant() const noexcept { return !table_.has_value(); }
  double constant_value() const noexcept { return value_; }
  double v_infinity() const noexcept { return is_constant() ? value_ : v_infinity_; }
  const std::optional<RadialField>& table() const noexcept { return table_; }

  /// V at the nodes of `grid`.
  std::vector<double> on(const RadialGrid& grid) const {
    if (is_constant()) return std::vector<double>(grid.size(), value_);
    require_same_grid(table_->grid(), grid);
    return table_->data();
  }

  /// (grad V(x) | x) = r V'(r) at the nodes; centered differences inside,
  /// one-sided at the ends.
  std::vector<double> radial_virial(const RadialGrid& grid) const {
    std::vector<double> out(grid.size(), 0.0);
    if (is_constant()) return out;
    require_same_grid(table_->grid(), grid);
    const auto& v = *table_;
    const double h = grid.spacing();
    const std::size_t n = grid.intervals();
    for (std::size_t i = 1; i < n; ++i) out[i] = grid.r(i) * (v[i + 1] - v[i - 1]) / (2 * h);
    out[n] = grid.r(n) * (3 * v[n] - 4 * v[n - 1] + v[n - 2]) / (2 * h);
    return out;
  }

  /// V + delta.
  Potential shifted(double delta) const {
    if (is_constant()) return constant(value_ + delta);
    RadialField t = *table_;
    for (double& x : t.values()) x += delta;
    return radial(std::move(t), v_infinity_ + delta);
  }

  /// Hypothesis violations: (V2) positivity/boundedness always, (V3) for
  /// tabulated potentials.
  std::vector<std::string> violations() const {
    std::vector<std::string> out;
    if (is_constant()) {
      if (!(value_ > 0.0) || !std::isfinite(value_))
        out.emplace_back("potential: (V2) lower bound violated, constant V must be positive");
      return out;
    }
    const auto& v = *table_;
    bool v2 = true, below_inf = true, strict = false;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!(v[i] > 0.0) || !std::isfinite(v[i])) v2 = false;
      if (v[i] > v_infinity_) below_inf = false;
      if (v[i] < v_infinity_) strict = true;
    }
    if (!v2) out.emplace_back("potential.values: (V2) lower bound violated, V must be positive and finite");
    if (!(v_infinity_ > 0.0) || !std::isfinite(v_infinity_))
      out.emplace_back("potential.v_infinity: (V2) lower bound violated, must be positive");
    if (!below_inf) out.emplace_back("potential.values: (V3) violated, V exceeds v_infinity");
    if (!strict) out.emplace_back("potential.values: (V3) violated, V < v_infinity must hold somewhere");
    return out;
  }

 private:
  explicit Potential(double v) : value_(v) {}
  Potential(RadialField t, double vinf) : value_(0.0), v_infinity_(vinf), table_(std::move(t)) {}

  double value_;
  double v_infinity_ = 0.0;
  std::optional<RadialField> table_;
};

// ---------------------------------------------------------------------------
// Problem definition

enum class FamilyKind { Subcritical, CriticalPerturbed, CriticalPure };

struct Family {
  FamilyKind kind;
  double exponent = 0.0;  // p, q, or unused

  static Family subcritical(double p) { return {FamilyKind::Subcritical, p}; }
  static Family critical_perturbed(double q) { return {FamilyKind::CriticalPerturbed, q}; }
  static Family critical_pure() { return {FamilyKind::CriticalPure, 0.0}; }

  bool has_power_term() const noexcept { return kind != FamilyKind::CriticalPure; }
  bool has_critical_term() const noexcept { return kind != FamilyKind::Subcritical; }

  std::optional<std::string> violation() const {
    switch (kind) {
      case FamilyKind::Subcritical:
        if (!(exponent > 2.0 && exponent < 5.0)) return "problem.p: subcritical exponent must lie in (2, 5)";
        break;
      case FamilyKind::CriticalPerturbed:
        if (!(exponent > 3.0 && exponent < 5.0)) return "problem.q: perturbation exponent must lie in (3, 5)";
        break;
      case FamilyKind::CriticalPure:
        break;
    }
    return std::nullopt;
  }
};

class ProblemSpec {
 public:
  ProblemSpec(Family family, Potential potential, RadialGrid grid)
      : family_(family), potential_(std::move(potential)), grid_(grid) {
    std::vector<std::string> errs;
    if (auto v = family_.violation()) errs.push_back(*v);
    for (auto& v : potential_.violations()) errs.push_back(std::move(v));
    if (potential_.table()) {
      if (!(potential_.table()->grid() == grid_)) errs.emplace_back("potential.values: table grid differs from solve grid");
    }
    if (!errs.empty()) {
      std::ostringstream os;
      for (std::size_t i = 0; i < errs.size(); ++i) os << (i ? "; " : "") << errs[i];
      throw SpecError(os.str());
    }
  }

  const Family& family() const noexcept { return family_; }
  const Potential& potential() const noexcept { return potential_; }
  const RadialGrid& grid() const noexcept { return grid_; }

  ProblemSpec with_potential(Potential v) const { return ProblemSpec(family_, std::move(v), grid_); }
  ProblemSpec with_grid(const RadialGrid& g) const;

 private:
  Family family_;
  Potential potential_;
  RadialGrid grid_;
};

inline ProblemSpec ProblemSpec::with_grid(const RadialGrid& g) const {
  if (potential_.is_constant()) return ProblemSpec(family_, potential_, g);
  RadialField t = resample(*potential_.table(), g);
  return ProblemSpec(family_, Potential::radial(std::move(t), potential_.v_infinity()), g);
}

// ---------------------------------------------------------------------------
// Fiber coefficients

struct FiberCoefficients {
  double a_grad = 0.0;
  double a_pot = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  double a() const noexcept { return a_grad + a_pot; }
};

/// Power of the subcritical term: p + 1, q + 1, or 0 when absent.
inline double power_exponent(const Family& f) noexcept {
  return f.has_power_term() ? f.exponent + 1.0 : 0.0;
}

inline void require_grid(const RadialField& u, const ProblemSpec& spec) {
  require_same_grid(u.grid(), spec.grid());
}

/// Coefficients of u given its potential phi_u.
inline FiberCoefficients fiber_coefficients(const RadialField& u, const RadialField& phi, const ProblemSpec& spec) {
  require_grid(u, spec);
  const auto& g = u.grid();
  const auto m = nodal_weights(g);
  const auto V = spec.potential().on(g);
  const auto& fam = spec.family();
  const double e = power_exponent(fam);
  FiberCoefficients k;
  k.a_grad = dirichlet_energy(u);
  k.b = coulomb_energy(u, phi);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = u[i];
    const double x2 = x * x;
    k.a_pot += m[i] * V[i] * x2;
    if (fam.has_power_term()) k.c += m[i] * std::pow(std::abs(x), e);
    if (fam.has_critical_term()) k.d += m[i] * x2 * x2 * x2;
  }
  return k;
}

inline FiberCoefficients fiber_coefficients(const RadialField& u, const ProblemSpec& spec) {
  return fiber_coefficients(u, solve_poisson(u), spec);
}

/// I or I* from coefficients.
inline double energy_from(const FiberCoefficients& k, const Family& fam) {
  double val = 0.5 * k.a() + 0.25 * k.b;
  if (fam.has_power_term()) val -= k.c / power_exponent(fam);
  if (fam.has_critical_term()) val -= k.d / 6.0;
  return val;
}

inline double eval_energy(const RadialField& u, const ProblemSpec& spec) {
  return energy_from(fiber_coefficients(u, spec), spec.family());
}

/// Two-field action E(u, phi) (or E*): the phi terms enter as
/// -1/4 int |grad phi|^2 + 1/2 int phi u^2.
inline double eval_action(const RadialField& u, const RadialField& phi, const ProblemSpec& spec) {
  require_grid(u, spec);
  require_same_grid(u.grid(), phi.grid());
  const auto& fam = spec.family();
  auto k = fiber_coefficients(u, phi, spec);
  double val = 0.5 * k.a() - 0.25 * potential_gradient_energy(phi) + 0.5 * k.b;
  if (fam.has_power_term()) val -= k.c / power_exponent(fam);
  if (fam.has_critical_term()) val -= k.d / 6.0;
  return val;
}

// ---------------------------------------------------------------------------
// First variations

/// Derivatives of each coefficient with respect to the samples of u.
/// Entry N is dropped (Dirichlet node); entry 0 vanishes identically.
struct CoefficientDerivatives {
  std::vector<double> a_grad, a_pot, b, c, d;
};

inline CoefficientDerivatives coefficient_derivatives(const RadialField& u, const RadialField& phi,
                                                      const ProblemSpec& spec) {
  const auto& g = u.grid();
  const std::size_t n = g.intervals();
  const auto m = nodal_weights(g);
  const auto V = spec.potential().on(g);
  const auto& fam = spec.family();
  const double e = power_exponent(fam);
  CoefficientDerivatives dk;
  dk.a_grad = dirichlet_energy_derivative(u);
  dk.b = coulomb_energy_derivative(u, phi);
  dk.a_pot.assign(g.size(), 0.0);
  dk.c.assign(g.size(), 0.0);
  dk.d.assign(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = u[i];
    dk.a_pot[i] = 2.0 * m[i] * V[i] * x;
    if (fam.has_power_term()) dk.c[i] = e * m[i] * std::pow(std::abs(x), e - 2.0) * x;
    if (fam.has_critical_term()) dk.d[i] = 6.0 * m[i] * std::pow(x, 5);
  }
  for (auto* v : {&dk.a_grad, &dk.a_pot, &dk.b, &dk.c, &dk.d}) (*v)[n] = 0.0;
  return dk;
}

/// Linear combination of coefficient derivatives.
inline std::vector<double> combine(const CoefficientDerivatives& dk, const FiberCoefficients& w) {
  std::vector<double> out(dk.a_grad.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = w.a_grad * dk.a_grad[i] + w.a_pot * dk.a_pot[i] + w.b * dk.b[i] + w.c * dk.c[i] + w.d * dk.d[i];
  return out;
}

/// Weights that turn coefficient derivatives into dI.
inline FiberCoefficients energy_weights(const Family& fam) {
  FiberCoefficients w{0.5, 0.5, 0.25, 0.0, 0.0};
  if (fam.has_power_term()) w.c = -1.0 / power_exponent(fam);
  if (fam.has_critical_term()) w.d = -1.0 / 6.0;
  return w;
}

/// dI/du_i: the dual (covector) form of the first variation.
inline std::vector<double> energy_derivative(const RadialField& u, const ProblemSpec& spec) {
  const auto phi = solve_poisson(u);
  return combine(coefficient_derivatives(u, phi, spec), energy_weights(spec.family()));
}

/// Inner product of the nodal volume measure.
inline double nodal_inner(const RadialField& a, const RadialField& b) {
  require_same_grid(a.grid(), b.grid());
  const auto m = nodal_weights(a.grid());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += m[i] * a[i] * b[i];
  return s;
}

/// H^1 inner product int grad a . grad b + a b, second-order in w = r u.
inline double h1_inner(const RadialField& a, const RadialField& b) {
  require_same_grid(a.grid(), b.grid());
  const auto& g = a.grid();
  double k = 0.0;
  for (std::size_t i = 0; i < g.intervals(); ++i) {
    const double da = g.r(i + 1) * a[i + 1] - g.r(i) * a[i];
    const double db = g.r(i + 1) * b[i + 1] - g.r(i) * b[i];
    k += da * db;
  }
  return kFourPi * k / g.spacing() + nodal_inner(a, b);
}

/// Riesz representative in h1_inner of a covector: solves (-Delta + 1) g = dual
/// as a tridiagonal system in w = r g with w(0) = w(R) = 0.
inline RadialField h1_riesz(std::span<const double> dual, const RadialGrid& grid) {
  const std::size_t n = grid.intervals();
  const double h = grid.spacing();
  const std::size_t m = n - 1;  // unknowns w_1..w_{N-1}
  const double diag = 2.0 / h + h;
  const double off = -1.0 / h;
  std::vector<double> cprime(m), dprime(m);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = k + 1;
    const double rhs = dual[i] / (kFourPi * grid.r(i));
    if (k == 0) {
      cprime[k] = off / diag;
      dprime[k] = rhs / diag;
    } else {
      const double denom = diag - off * cprime[k - 1];
      cprime[k] = off / denom;
      dprime[k] = (rhs - off * dprime[k - 1]) / denom;
    }
  }
  std::vector<double> w(m);
  w[m - 1] = dprime[m - 1];
  for (std::size_t k = m - 1; k-- > 0;) w[k] = dprime[k] - cprime[k] * w[k + 1];
  RadialField out(grid);
  for (std::size_t k = 0; k < m; ++k) out[k + 1] = w[k] / grid.r(k + 1);
  out[0] = (4.0 * out[1] - out[2]) / 3.0;
  return out;
}

/// L^2 representative in the nodal measure: dual_i / m_i.
inline RadialField l2_riesz(std::span<const double> dual, const RadialGrid& grid) {
  const auto m = nodal_weights(grid);
  const std::size_t n = grid.intervals();
  RadialField out(grid);
  for (std::size_t i = 1; i < n; ++i) out[i] = dual[i] / m[i];
  out[0] = (4.0 * out[1] - out[2]) / 3.0;
  return out;
}

enum class Metric { L2, H1 };

/// Gradient of I. L2: the representative of dI in the nodal measure, which
/// approximates -Delta u + V u + phi_u u - |u|^{p-1} u (family-adjusted).
/// H1: its Riesz representative for h1_inner.
inline RadialField gradient(const RadialField& u, const ProblemSpec& spec, Metric metric) {
  require_grid(u, spec);
  const auto dual = energy_derivative(u, spec);
  return metric == Metric::L2 ? l2_riesz(dual, u.grid()) : h1_riesz(dual, u.grid());
}

// ---------------------------------------------------------------------------
// Manifolds and identities

/// M: dilation (Pohozaev-Nehari) manifold; N: Nehari; NStar: Nehari of I*.
enum class Manifold { M, N, NStar };

inline void require_manifold(const ProblemSpec& spec, Manifold mf) {
  const auto& fam = spec.family();
  switch (mf) {
    case Manifold::M:
      if (fam.kind != FamilyKind::Subcritical)
        throw UnsupportedCombination("manifold M is defined for the subcritical family only");
      if (!spec.potential().is_constant())
        throw UnsupportedCombination("manifold M requires a constant potential");
      break;
    case Manifold::N:
      if (fam.kind != FamilyKind::Subcritical)
        throw UnsupportedCombination("manifold N is defined for the subcritical family only");
      if (!(fam.exponent > 3.0)) throw SpecError("manifold N requires p in (3, 5)");
      break;
    case Manifold::NStar:
      if (fam.kind == FamilyKind::Subcritical)
        throw UnsupportedCombination("manifold N* is defined for the critical families only");
      break;
  }
}

/// Weights w such that the constraint functional equals sum w_k * coeff_k.
inline FiberCoefficients manifold_weights(const Family& fam, Manifold mf) {
  switch (mf) {
    case Manifold::M: {
      const double p = fam.exponent;
      return {1.5, 0.5, 0.75, -(2 * p - 1) / (p + 1), 0.0};
    }
    case Manifold::N:
      return {1.0, 1.0, 1.0, -1.0, 0.0};
    case Manifold::NStar:
      return {1.0, 1.0, 1.0, fam.has_power_term() ? -1.0 : 0.0, -1.0};
  }
  return {};
}

inline double dot(const FiberCoefficients& w, const FiberCoefficients& k) noexcept {
  return w.a_grad * k.a_grad + w.a_pot * k.a_pot + w.b * k.b + w.c * k.c + w.d * k.d;
}

/// G, G~ or G~* evaluated from coefficients.
inline double manifold_value(const FiberCoefficients& k, const Family& fam, Manifold mf) {
  return dot(manifold_weights(fam, mf), k);
}

inline double manifold_residual(const RadialField& u, const ProblemSpec& spec, Manifold mf) {
  require_manifold(spec, mf);
  return manifold_value(fiber_coefficients(u, spec), spec.family(), mf);
}

/// int (grad V(x) | x) u^2.
inline double virial_potential_term(const RadialField& u, const ProblemSpec& spec) {
  const auto m = nodal_weights(u.grid());
  const auto xv = spec.potential().radial_virial(u.grid());
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += m[i] * xv[i] * u[i] * u[i];
  return s;
}

/// Pohozaev residual
///   1/2 int|grad u|^2 + 3/2 int V u^2 + 1/2 int (grad V|x) u^2
///   + 5/4 int phi_u u^2 - 3 int F(u),
/// zero at every exact solution.
inline double pohozaev_from(const FiberCoefficients& k, double virial, const Family& fam) {
  double val = 0.5 * k.a_grad + 1.5 * k.a_pot + 0.5 * virial + 1.25 * k.b;
  if (fam.has_power_term()) val -= 3.0 * k.c / power_exponent(fam);
  if (fam.has_critical_term()) val -= 3.0 * k.d / 6.0;
  return val;
}

inline double pohozaev_residual(const RadialField& u, const ProblemSpec& spec) {
  require_grid(u, spec);
  return pohozaev_from(fiber_coefficients(u, spec), virial_potential_term(u, spec), spec.family());
}

/// J (subcritical) or J* (perturbed critical); both need a constant potential.
inline double J_from(const FiberCoefficients& k, const Family& fam) {
  if (fam.kind == FamilyKind::Subcritical) {
    const double p = fam.exponent;
    return (p - 2) / (2 * p - 1) * k.a_grad + (p - 1) / (2 * p - 1) * k.a_pot + (p - 2) / (2 * (2 * p - 1)) * k.b;
  }
  if (fam.kind == FamilyKind::CriticalPerturbed) {
    const double q1 = fam.exponent + 1.0;
    return (0.5 - 1 / q1) * k.a() + (0.25 - 1 / q1) * k.b + (1 / q1 - 1.0 / 6.0) * k.d;
  }
  throw UnsupportedCombination("J is not defined for the pure critical family");
}

inline double eval_J(const RadialField& u, const ProblemSpec& spec) {
  if (!spec.potential().is_constant()) throw UnsupportedCombination("J is defined for constant potentials only");
  return J_from(fiber_coefficients(u, spec), spec.family());
}

}  // namespace spgs
