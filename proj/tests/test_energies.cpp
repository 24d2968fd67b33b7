#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "spgs/energies.hpp"
#include "spgs/manifolds.hpp"

using namespace spgs;

namespace {

const RadialGrid kGrid = make_grid(20.0, 2000);

RadialField gauss(const RadialGrid& g = kGrid) {
  auto u = RadialField::sample(g, [](double r) { return std::exp(-0.5 * r * r); });
  u[g.intervals()] = 0.0;
  return u;
}

RadialField bump(const RadialGrid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(0.0, 3.0), w(0.6, 2.0), a(0.3, 1.5);
  const double cc = c(rng), ww = w(rng), aa = a(rng);
  auto u = RadialField::sample(g, [&](double r) { return aa * std::exp(-std::pow((r - cc) / ww, 2)); });
  u[g.intervals()] = 0.0;
  return u;
}

ProblemSpec sub(double p, Potential v = Potential::constant(1.0)) { return ProblemSpec(Family::subcritical(p), v, kGrid); }

Potential well(const RadialGrid& g = kGrid) {
  return Potential::radial(RadialField::sample(g, [](double r) { return 1.0 - 0.5 * std::exp(-r * r); }), 1.0);
}

}  // namespace

TEST(ProblemSpec, ExponentRanges) {
  EXPECT_THROW(sub(2.0), SpecError);
  EXPECT_THROW(sub(5.0), SpecError);
  EXPECT_THROW(ProblemSpec(Family::critical_perturbed(3.0), Potential::constant(1.0), kGrid), SpecError);
  EXPECT_NO_THROW(ProblemSpec(Family::critical_pure(), Potential::constant(1.0), kGrid));
}

TEST(ProblemSpec, PotentialHypotheses) {
  EXPECT_THROW(sub(3.0, Potential::constant(0.0)), SpecError);
  auto t = RadialField::sample(kGrid, [](double) { return 1.0; });
  EXPECT_THROW(sub(3.5, Potential::radial(t, 1.0)), SpecError);  // never below v_infinity
  t[3] = 0.0;
  try {
    sub(3.5, Potential::radial(t, 1.0));
    FAIL();
  } catch (const SpecError& e) {
    EXPECT_NE(std::string(e.what()).find("(V2)"), std::string::npos);
  }
}

TEST(Energy, ZeroField) {
  const RadialField z(kGrid);
  EXPECT_EQ(eval_energy(z, sub(3.0)), 0.0);
  EXPECT_EQ(eval_energy(z, ProblemSpec(Family::critical_perturbed(4.0), Potential::constant(1.0), kGrid)), 0.0);
  EXPECT_EQ(eval_energy(z, ProblemSpec(Family::critical_pure(), Potential::constant(1.0), kGrid)), 0.0);
  EXPECT_EQ(eval_action(z, z, sub(3.0)), 0.0);
  EXPECT_EQ(pohozaev_residual(z, sub(3.0)), 0.0);
  EXPECT_EQ(eval_J(z, sub(3.0)), 0.0);
}

TEST(Energy, GaussianAgainstComponentOracles) {
  const double expected = 0.5 * (oracle::gaussian_dirichlet(0.5) + oracle::gaussian_lebesgue(0.5, 2)) +
                          0.25 * oracle::gaussian_coulomb(0.5) - 0.25 * oracle::gaussian_lebesgue(0.5, 4);
  EXPECT_NEAR(eval_energy(gauss(), sub(3.0)), expected, 1e-6);
}

TEST(Energy, PolynomialInScale) {
  const auto u = gauss();
  const auto k = fiber_coefficients(u, sub(3.0));
  for (double t : {0.5, 1.0, 2.0}) {
    const double poly = 0.5 * t * t * k.a() + 0.25 * std::pow(t, 4) * k.b - 0.25 * std::pow(t, 4) * k.c;
    EXPECT_NEAR(eval_energy(t * u, sub(3.0)), poly, 1e-12 * std::abs(poly) + 1e-12);
  }
}

TEST(Energy, CoefficientsAreConsistent) {
  const auto u = gauss();
  const auto k = fiber_coefficients(u, sub(3.0));
  EXPECT_DOUBLE_EQ(k.b, coulomb_energy(u));
  EXPECT_GE(k.a_grad, 0.0);
  EXPECT_GE(k.c, 0.0);
  EXPECT_EQ(k.d, 0.0);
}

TEST(Action, ReducesToEnergy) {
  std::mt19937_64 rng(1);
  const RadialField z(kGrid);
  for (int k = 0; k < 10; ++k) {
    const auto u = bump(kGrid, rng);
    const auto spec = sub(3.0);
    const double I = eval_energy(u, spec);
    EXPECT_NEAR(eval_action(u, solve_poisson(u), spec), I, 1e-6 * (1.0 + std::abs(I)));
    const auto kk = fiber_coefficients(u, spec);
    EXPECT_NEAR(eval_action(u, z, spec), 0.5 * kk.a() - kk.c / 4.0, 1e-12 * kk.a());
  }
}

TEST(Gradient, ZeroAtZero) {
  const auto g = gradient(RadialField(kGrid), sub(3.0), Metric::H1);
  for (double x : g.values()) EXPECT_EQ(x, 0.0);
}

TEST(Gradient, FiniteDifferencesAllFamilies) {
  std::mt19937_64 rng(7);
  const std::vector<ProblemSpec> specs{sub(3.0), sub(2.5), sub(4.0, well()),
                                       ProblemSpec(Family::critical_perturbed(4.0), Potential::constant(1.0), kGrid),
                                       ProblemSpec(Family::critical_pure(), well(), kGrid)};
  for (const auto& spec : specs) {
    for (int k = 0; k < 10; ++k) {
      const auto u = bump(kGrid, rng), v = bump(kGrid, rng);
      const auto dual = energy_derivative(u, spec);
      double an = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) an += dual[i] * v[i];
      double best = INFINITY;
      for (double h : {1e-3, 1e-4, 1e-5}) {
        RadialField up = u, um = u;
        up.axpy(h, v);
        um.axpy(-h, v);
        const double fd = (eval_energy(up, spec) - eval_energy(um, spec)) / (2 * h);
        best = std::min(best, std::abs(an - fd) / std::abs(an));
      }
      EXPECT_LE(best, 1e-6);
    }
  }
}

TEST(Gradient, L2RepresentativeApproximatesStrongForm) {
  const auto g = make_grid(12.0, 2400);
  const auto u = gauss(g);
  const ProblemSpec spec(Family::subcritical(3.0), Potential::constant(1.0), g);
  const auto gr = gradient(u, spec, Metric::L2);
  const auto phi = solve_poisson(u);
  for (std::size_t i = 100; i < 1200; i += 100) {
    const double r = g.r(i);
    const double strong = -(r * r - 3.0) * u[i] + u[i] + phi[i] * u[i] - u[i] * u[i] * u[i];
    EXPECT_NEAR(gr[i], strong, 1e-3) << r;
  }
}

TEST(Manifolds, SyntheticNehariResidual) {
  FiberCoefficients k{0.5, 0.5, 1.0, 2.0, 0.0};
  EXPECT_DOUBLE_EQ(manifold_value(k, Family::subcritical(4.0), Manifold::N), 0.0);
}

TEST(Manifolds, UnsupportedCombinations) {
  const auto u = gauss();
  EXPECT_THROW(manifold_residual(u, sub(3.5, well()), Manifold::M), UnsupportedCombination);
  EXPECT_THROW(manifold_residual(u, sub(3.0), Manifold::N), SpecError);
  EXPECT_THROW(manifold_residual(u, sub(3.5), Manifold::NStar), UnsupportedCombination);
  EXPECT_THROW(eval_J(u, sub(3.5, well())), UnsupportedCombination);
}

TEST(Pohozaev, ConstantPotentialClassicalForm) {
  for (double p : {2.5, 3.0, 4.0}) {
    const auto u = gauss();
    const auto spec = sub(p, Potential::constant(1.0));
    const auto k = fiber_coefficients(u, spec);
    const double classical = 0.5 * k.a_grad + 1.5 * k.a_pot + 1.25 * k.b - 3.0 / (p + 1) * k.c;
    EXPECT_DOUBLE_EQ(pohozaev_residual(u, spec), classical);
  }
}

TEST(Pohozaev, PureCriticalIsHalfTheClassicalForm) {
  const auto u = gauss();
  const auto V = well();
  const ProblemSpec spec(Family::critical_pure(), V, kGrid);
  const auto k = fiber_coefficients(u, spec);
  const double vir = virial_potential_term(u, spec);
  // classical form: int |grad u|^2 + 3 int V u^2 + int (grad V|x) u^2 + 5/2 int phi u^2 - int u^6
  const double classical = k.a_grad + 3.0 * k.a_pot + vir + 2.5 * k.b - k.d;
  EXPECT_NEAR(pohozaev_residual(u, spec), 0.5 * classical, 1e-13 * std::abs(classical));
}

TEST(Pohozaev, GeneralFormIsTheDilationDerivative) {
  // d/dlambda I(u(./lambda)) at lambda = 1, with V held fixed in space
  const auto g = make_grid(20.0, 8000);
  const auto u = gauss(g);
  const ProblemSpec spec(Family::subcritical(3.5), well(g), g);
  auto I = [&](double lam) {
    auto v = dilate(u, 1.0 / lam);
    v *= lam * lam;
    return eval_energy(v, spec);
  };
  const double e = 1e-3;
  const double fd = (I(1 + e) - I(1 - e)) / (2 * e);
  EXPECT_NEAR(pohozaev_residual(u, spec), fd, 1e-5 * std::abs(fd));
}

TEST(J, EqualsEnergyOnManifold) {
  for (double p : {2.5, 3.0, 4.0}) {
    const auto spec = sub(p);
    const auto v = project(gauss(), spec).field;
    const double I = eval_energy(v, spec);
    EXPECT_NEAR(eval_J(v, spec), I, 1e-8 * I);
    EXPECT_GE(eval_J(v, spec), 0.0);
  }
  const ProblemSpec crit(Family::critical_perturbed(4.0), Potential::constant(1.0), kGrid);
  const auto v = project(gauss(), crit).field;
  EXPECT_NEAR(eval_J(v, crit), eval_energy(v, crit), 1e-8 * eval_energy(v, crit));
}
