#include <gtest/gtest.h>

#include "oracles.hpp"
#include "spgs/critical.hpp"

using namespace spgs;

TEST(Sobolev, ExactConstant) {
  EXPECT_NEAR(sobolev_constant_exact(), oracle::sobolev_constant(), 1e-13);
  EXPECT_NEAR(sobolev_constant_exact(), 5.4779, 1e-4);
}

TEST(Sobolev, EstimateOnModerateGrid) {
  const auto est = estimate_S(make_grid(20.0, 2000));
  EXPECT_NEAR(est.S / oracle::sobolev_constant(), 1.0, 5e-3);
  EXPECT_GE(est.S, oracle::sobolev_constant() * (1 - 1e-4));
}

TEST(Bubble, RejectsNonPositiveEpsilon) {
  const auto g = make_grid(2.0, 200);
  EXPECT_THROW(talenti_bubble({0.0, 1.0}, g), BubbleError);
  EXPECT_THROW(cutoff_bubble({-1.0, 1.0}, g), BubbleError);
}

TEST(Bubble, UnscaledExtremalAttainsS) {
  // eps^{1/4} / sqrt(eps + r^2) has the same quotient for every eps
  const auto g = make_grid(400.0, 400000);
  const auto u = talenti_bubble({1.0, 1.0}, g);
  EXPECT_NEAR(sobolev_quotient(u) / oracle::sobolev_constant(), 1.0, 2e-2);
}

TEST(Bubble, CutoffIsNormalizedAndSupported) {
  const auto g = make_grid(3.2, 6400);
  for (double e : {1e-1, 1e-2, 1e-3}) {
    const auto v = cutoff_bubble({e, 1.6}, g);
    EXPECT_NEAR(norm(v, Norm::L(6)), 1.0, 1e-12);
    EXPECT_EQ(v[g.intervals()], 0.0);
    for (std::size_t i = 1; i < g.size(); ++i) EXPECT_LE(v[i], v[i - 1]);
  }
}

TEST(Bubble, SmoothCutoffProfile) {
  EXPECT_EQ(smooth_cutoff(0.0, 1.0), 1.0);
  EXPECT_EQ(smooth_cutoff(1.0, 1.0), 1.0);
  EXPECT_EQ(smooth_cutoff(2.0, 1.0), 0.0);
  EXPECT_EQ(smooth_cutoff(5.0, 1.0), 0.0);
  EXPECT_NEAR(smooth_cutoff(1.5, 1.0), 0.5, 1e-15);
}

TEST(Bubble, DirichletEnergyApproachesS) {
  const auto g = make_grid(3.2, 6400);
  const double S = oracle::sobolev_constant();
  const double a = dirichlet_energy(cutoff_bubble({1e-1, 1.6}, g)) - S;
  const double b = dirichlet_energy(cutoff_bubble({1e-3, 1.6}, g)) - S;
  EXPECT_GT(a, b);
  EXPECT_GT(b, 0.0);
}

TEST(ScalingTable, InputValidation) {
  const auto g = make_grid(3.2, 640);
  EXPECT_THROW(bubble_scaling_table({1e-2}, {2}, 1.6, g, 5.0), InsufficientRange);
  EXPECT_THROW(bubble_scaling_table({1e-2, 5e-2}, {2}, 1.6, g, 5.0), InsufficientRange);
  EXPECT_THROW(bubble_scaling_table({1e-3, 1e-1}, {6}, 1.6, g, 5.0), UnsupportedExponent);
  EXPECT_THROW(bubble_scaling_table({1e-3, 1e-1}, {1.5}, 1.6, g, 5.0), UnsupportedExponent);
}

TEST(ScalingTable, PredictedExponents) {
  EXPECT_DOUBLE_EQ(bubble_norm_exponent(2.0), 0.5);
  EXPECT_DOUBLE_EQ(bubble_norm_exponent(3.0), 0.75);
  EXPECT_DOUBLE_EQ(bubble_norm_exponent(4.0), 0.5);
  EXPECT_DOUBLE_EQ(bubble_norm_exponent(5.0), 0.25);
}

TEST(ScalingTable, RowsAndFits) {
  const auto g = make_grid(3.2, 6400);
  const auto t = bubble_scaling_table({1e-3, 1e-2, 1e-1}, {2, 4}, 1.6, g, oracle::sobolev_constant());
  EXPECT_EQ(t.rows.size(), 9u);
  ASSERT_EQ(t.fits.size(), 3u);
  EXPECT_EQ(t.fits[0].s, "2");
  EXPECT_EQ(t.fits[2].s, "grad");
  for (const auto& f : t.fits) EXPECT_GT(f.slope, 0.0);
}

TEST(LevelCertificate, WideEpsilonRangeCertifies) {
  const auto g = make_grid(2.0, 50000);
  const double S = oracle::sobolev_constant();
  std::vector<double> eps;
  for (double e = 1e-1; e > 0.9e-6; e /= std::sqrt(10.0)) eps.push_back(e);
  const auto c = critical_level_certificate(4.0, Potential::constant(1.0), eps, 1.0, g, S);
  EXPECT_EQ(c.verdict, Verdict::Certified);
  EXPECT_NEAR(c.threshold, oracle::critical_threshold(), 1e-12);
  EXPECT_GT(c.margin, c.safety);
  EXPECT_EQ(c.per_epsilon.size(), eps.size());
}

TEST(LevelCertificate, NarrowWindowIsInconclusive) {
  const auto g = make_grid(2.0, 50000);
  const auto c = critical_level_certificate(4.0, Potential::constant(1.0), {1e-1, 1e-2, 1e-3}, 1.0, g,
                                            oracle::sobolev_constant());
  EXPECT_EQ(c.verdict, Verdict::Inconclusive);
  EXPECT_STREQ(to_string(c.verdict), "Inconclusive");
}

TEST(Nonexistence, CertificateOnSmoothFields) {
  const auto g = make_grid(10.0, 2000);
  const auto u = RadialField::sample(g, [](double r) { return std::exp(-r * r); });
  const auto well = Potential::radial(RadialField::sample(g, [](double r) { return 1.0 - 0.5 * std::exp(-r * r); }), 1.0);
  for (const auto& V : {Potential::constant(1.0), well}) {
    const auto c = nonexistence_certificate(u, V);
    EXPECT_TRUE(c.v5_holds);
    EXPECT_TRUE(c.certifies());
    EXPECT_GT(c.value, c.lower_bound);
  }
  const auto bump = Potential::radial(RadialField::sample(g, [](double r) { return 1.0 + 0.5 * std::exp(-r * r); }), 1.0);
  EXPECT_FALSE(nonexistence_certificate(u, bump).v5_holds);
  EXPECT_FALSE(nonexistence_certificate(RadialField(g), Potential::constant(1.0)).certifies());
}
