#pragma once

// Critical-exponent toolkit: Talenti bubbles, the Sobolev constant, the
// bubble-norm scaling laws, the level certificate c* < S^{3/2}/3, and the
// Pohozaev certificate that rules out nontrivial solutions of the pure
// critical problem.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "spgs/energies.hpp"
#include "spgs/errors.hpp"
#include "spgs/manifolds.hpp"
#include "spgs/radial_core.hpp"

namespace spgs {

/// 3 (pi/2)^{4/3}, the best constant of D^{1,2}(R^3) -> L^6(R^3).
inline double sobolev_constant_exact() { return 3.0 * std::pow(kPi / 2.0, 4.0 / 3.0); }

struct BubbleParams {
  double epsilon;
  double r_cut;  // cutoff is 1 on [0, r_cut] and 0 beyond 2 r_cut
};

/// eps^{1/4} / (eps + r^2)^{1/2}; the normalizing constant is 1 because
/// every consumer renormalizes in L^6.
inline RadialField talenti_bubble(const BubbleParams& params, const RadialGrid& grid) {
  if (!(params.epsilon > 0.0)) throw BubbleError("bubble epsilon must be positive");
  const double e = params.epsilon;
  const double e4 = std::pow(e, 0.25);
  return RadialField::sample(grid, [&](double r) { return e4 / std::sqrt(e + r * r); });
}

/// C^2 quintic cutoff: 1 on [0, r_cut], 0 on [2 r_cut, inf).
inline double smooth_cutoff(double r, double r_cut) {
  const double x = std::clamp((r - r_cut) / r_cut, 0.0, 1.0);
  return 1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
}

/// v_eps = phi u_eps / ||phi u_eps||_6.
inline RadialField cutoff_bubble(const BubbleParams& params, const RadialGrid& grid) {
  if (!(params.r_cut > 0.0) || 2.0 * params.r_cut > grid.radius())
    throw BubbleError("cutoff support [0, 2 r_cut] must fit inside the grid");
  RadialField w = talenti_bubble(params, grid);
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] *= smooth_cutoff(grid.r(i), params.r_cut);
    if (grid.r(i) >= 2.0 * params.r_cut) w[i] = 0.0;
  }
  w *= 1.0 / norm(w, Norm::L(6));
  return w;
}

/// ||grad u||_2^2 / ||u||_6^2.
inline double sobolev_quotient(const RadialField& u) {
  const double n6 = norm(u, Norm::L(6));
  return dirichlet_energy(u) / (n6 * n6);
}

struct SobolevEstimate {
  double S;
  double epsilon;  // minimizing Talenti scale
};

/// Minimizes the Sobolev quotient of the Talenti family over eps. Each
/// profile is shifted by its boundary value so that it vanishes at R; the
/// quotient is dilation invariant in R^3, so the minimum sits where neither
/// the resolution (eps small) nor the truncation (eps large) dominates.
inline SobolevEstimate estimate_S(const RadialGrid& grid) {
  auto q = [&](double log_eps) {
    RadialField u = talenti_bubble({std::exp(log_eps), 1.0}, grid);
    const double edge = u[grid.intervals()];
    for (auto& x : u.values()) x -= edge;
    return sobolev_quotient(u);
  };
  const double h = grid.spacing();
  double lo = std::log(std::pow(4.0 * h, 2.0));
  double hi = std::log(std::pow(grid.radius() / 4.0, 2.0));
  // coarse scan, then golden section around the best sample
  const int samples = 41;
  int best = 0;
  double best_q = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const double x = lo + (hi - lo) * i / (samples - 1);
    const double v = q(x);
    if (v < best_q) best_q = v, best = i;
  }
  const double step = (hi - lo) / (samples - 1);
  double a = lo + step * std::max(0, best - 1);
  double b = lo + step * std::min(samples - 1, best + 1);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = q(x1), f2 = q(x2);
  for (int it = 0; it < 60 && b - a > 1e-6; ++it) {
    if (f1 < f2) {
      b = x2, x2 = x1, f2 = f1;
      x1 = b - gr * (b - a), f1 = q(x1);
    } else {
      a = x1, x1 = x2, f1 = f2;
      x2 = a + gr * (b - a), f2 = q(x2);
    }
  }
  const double xm = f1 < f2 ? x1 : x2;
  const double fm = std::min(f1, f2);
  if (fm < best_q) return {fm, std::exp(xm)};
  return {best_q, std::exp(lo + step * best)};
}

// ---------------------------------------------------------------------------
// Scaling laws of the cut-off bubble

/// Predicted exponent of ||v_eps||_s^s ~ eps^alpha; at s = 3 the law carries
/// an extra |log eps| that the fit divides out.
inline double bubble_norm_exponent(double s) {
  if (s < 3.0) return s / 4.0;
  if (s == 3.0) return 0.75;
  return (6.0 - s) / 4.0;
}

struct ScalingRow {
  double epsilon;
  std::string s;  // exponent, or "grad" for ||grad v||^2 - S
  double value;
  double fitted_slope;
};

struct ScalingFit {
  std::string s;
  double slope;
  double expected;
  double residual;  // rms of the log-log fit
};

struct ScalingTable {
  std::vector<ScalingRow> rows;
  std::vector<ScalingFit> fits;
};

/// Least-squares slope of log y against log x.
inline std::pair<double, double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) mx += std::log(x[i]), my += std::log(y[i]);
  mx /= n, my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  const double slope = sxy / sxx;
  double rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::log(y[i]) - (my + slope * (std::log(x[i]) - mx));
    rss += e * e;
  }
  return {slope, std::sqrt(rss / n)};
}

/// Fits ||v_eps||_s^s against eps for each s, and ||grad v_eps||^2 - S
/// against eps (predicted exponent 1/2).
inline ScalingTable bubble_scaling_table(const std::vector<double>& eps_list, const std::vector<double>& s_list,
                                         double r_cut, const RadialGrid& grid, double S_reference) {
  if (eps_list.size() < 2) throw InsufficientRange("need at least two epsilon values");
  const auto [emin, emax] = std::minmax_element(eps_list.begin(), eps_list.end());
  if (*emax / *emin < 100.0 * (1 - 1e-12)) throw InsufficientRange("epsilon values must span two decades");
  for (double s : s_list)
    if (!(s >= 2.0 && s < 6.0)) throw UnsupportedExponent("scaling exponents must lie in [2, 6)");

  std::vector<RadialField> bubbles;
  for (double e : eps_list) bubbles.push_back(cutoff_bubble({e, r_cut}, grid));

  ScalingTable table;
  auto fit = [&](const std::string& label, const std::vector<double>& y, const std::vector<double>& fit_y,
                 double expected) {
    const auto [slope, res] = loglog_slope(eps_list, fit_y);
    for (std::size_t i = 0; i < eps_list.size(); ++i) table.rows.push_back({eps_list[i], label, y[i], slope});
    table.fits.push_back({label, slope, expected, res});
  };

  for (double s : s_list) {
    std::vector<double> y, fy;
    for (std::size_t i = 0; i < bubbles.size(); ++i) {
      const double v = lebesgue_integral(bubbles[i], s);
      y.push_back(v);
      fy.push_back(s == 3.0 ? v / std::abs(std::log(eps_list[i])) : v);
    }
    std::string label = std::to_string(s);
    label.erase(label.find_last_not_of('0') + 1);
    if (label.back() == '.') label.pop_back();
    fit(label, y, fy, bubble_norm_exponent(s));
  }
  std::vector<double> excess;
  for (const auto& v : bubbles) excess.push_back(dirichlet_energy(v) - S_reference);
  if (std::all_of(excess.begin(), excess.end(), [](double x) { return x > 0.0; })) fit("grad", excess, excess, 0.5);
  return table;
}

// ---------------------------------------------------------------------------
// Level certificate

enum class Verdict { Certified, Inconclusive };

inline const char* to_string(Verdict v) { return v == Verdict::Certified ? "Certified" : "Inconclusive"; }

struct LevelCertificate {
  double best_bound;
  double best_epsilon;
  double threshold;  // S^{3/2} / 3
  double margin;     // threshold - best_bound
  double safety;     // margin required for Certified
  double S_estimate;
  Verdict verdict;
  std::vector<std::pair<double, double>> per_epsilon;  // (eps, max_t I*(t v_eps))
};

/// Relative accuracy of the S estimate; a certificate must clear the
/// threshold by at least this fraction of it.
inline constexpr double kCertificateSafety = 5e-3;

/// Upper bounds max_t I*(t v_eps) for the perturbed critical problem; the
/// smallest is compared against S^{3/2}/3. Inconclusive is a value.
inline LevelCertificate critical_level_certificate(double q, const Potential& potential,
                                                   const std::vector<double>& eps_list, double r_cut,
                                                   const RadialGrid& grid, double S_estimate) {
  const ProblemSpec spec(Family::critical_perturbed(q), potential, grid);
  LevelCertificate out{};
  out.S_estimate = S_estimate;
  out.threshold = std::pow(S_estimate, 1.5) / 3.0;
  out.safety = kCertificateSafety * out.threshold;
  out.best_bound = std::numeric_limits<double>::infinity();
  for (double e : eps_list) {
    const auto v = cutoff_bubble({e, r_cut}, grid);
    const auto k = fiber_coefficients(v, spec);
    const double t = scalar_fiber_root(k, spec.family());
    const double level = scalar_fiber_level(k, spec.family(), t);
    out.per_epsilon.emplace_back(e, level);
    if (level < out.best_bound) out.best_bound = level, out.best_epsilon = e;
  }
  out.margin = out.threshold - out.best_bound;
  out.verdict = out.margin > out.safety ? Verdict::Certified : Verdict::Inconclusive;
  return out;
}

// ---------------------------------------------------------------------------
// Nonexistence certificate

/// For a solution of the pure critical system the Pohozaev and Nehari
/// identities force value = 2 int V u^2 + int (grad V|x) u^2
/// + 3/2 int |grad phi_u|^2 = 0. Under (V2) and (V5), value >= lower_bound
/// = 2 C_1 ||u||_2^2, which is positive for u != 0.
struct NonexistenceCertificate {
  double value;
  double lower_bound;
  bool v5_holds;  // (grad V(x)|x) >= 0 at every node
  bool certifies() const noexcept { return value >= lower_bound && lower_bound > 0.0; }
};

inline NonexistenceCertificate nonexistence_certificate(const RadialField& u, const Potential& potential) {
  const auto& g = u.grid();
  const auto m = nodal_weights(g);
  const auto V = potential.on(g);
  const auto xv = potential.radial_virial(g);
  const double c1 = *std::min_element(V.begin(), V.end());
  double vu2 = 0.0, virial = 0.0, l2 = 0.0;
  bool v5 = true;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double u2 = u[i] * u[i];
    vu2 += m[i] * V[i] * u2;
    virial += m[i] * xv[i] * u2;
    l2 += m[i] * u2;
    if (xv[i] < 0.0) v5 = false;
  }
  const double field = potential_gradient_energy(solve_poisson(u));
  return {2.0 * vu2 + virial + 1.5 * field, 2.0 * c1 * l2, v5};
}

}  // namespace spgs
