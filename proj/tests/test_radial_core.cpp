#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "spgs/radial_core.hpp"

using namespace spgs;

namespace {

RadialField gauss(const RadialGrid& g, double alpha = 0.5) {
  return RadialField::sample(g, [&](double r) { return std::exp(-alpha * r * r); });
}

}  // namespace

TEST(RadialGrid, SpacingAndNodes) {
  const auto g = make_grid(20.0, 2000);
  EXPECT_DOUBLE_EQ(g.spacing(), 0.01);
  EXPECT_EQ(g.size(), 2001u);
  EXPECT_EQ(g.r(0), 0.0);
  EXPECT_EQ(g.r(2000), 20.0);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_LT(g.r(i - 1), g.r(i));
}

TEST(RadialGrid, SixteenIntervals) {
  const auto g = make_grid(1.0, 16);
  for (std::size_t i = 0; i <= 16; ++i) EXPECT_DOUBLE_EQ(g.r(i), i / 16.0);
}

TEST(RadialGrid, RejectsDegenerateInput) {
  EXPECT_THROW(make_grid(0.0, 100), InvalidGrid);
  EXPECT_THROW(make_grid(-1.0, 100), InvalidGrid);
  EXPECT_THROW(make_grid(1.0, 15), InvalidGrid);
}

TEST(VolumeIntegrate, UnitBall) {
  const auto g = make_grid(1.0, 64);
  EXPECT_NEAR(volume_integrate(RadialField::sample(g, [](double) { return 1.0; })), 4.0 * oracle::pi / 3.0, 1e-12);
}

TEST(VolumeIntegrate, Gaussian) {
  const auto g = make_grid(20.0, 2000);
  EXPECT_NEAR(volume_integrate(gauss(g, 1.0)), std::pow(oracle::pi, 1.5), 1e-8);
  EXPECT_EQ(volume_integrate(RadialField(g)), 0.0);
}

TEST(VolumeIntegrate, OddIntervalCountStaysExactForCubics) {
  const auto g = make_grid(1.0, 17);
  // 4 pi int r^2 (1 + r) dr = 4 pi (1/3 + 1/4)
  const auto f = RadialField::sample(g, [](double r) { return 1.0 + r; });
  EXPECT_NEAR(volume_integrate(f), 4.0 * oracle::pi * (1.0 / 3.0 + 0.25), 1e-12);
}

TEST(VolumeIntegrate, GridMismatch) {
  const RadialField a(make_grid(1.0, 16)), b(make_grid(1.0, 32));
  EXPECT_THROW(volume_integrate(a, b), GridMismatch);
}

TEST(VolumeIntegrate, OrderAtLeastThree) {
  // r^2 exp(-r) is not even in r, so the trapezoid rule would only be second order
  auto err = [](std::size_t n) {
    const auto g = make_grid(6.0, n);
    const double exact = 4.0 * oracle::pi * (2.0 - 50.0 * std::exp(-6.0));
    return std::abs(volume_integrate(RadialField::sample(g, [](double r) { return std::exp(-r); })) - exact);
  };
  EXPECT_GE(err(40) / err(80), 8.0);
  EXPECT_GE(err(80) / err(160), 8.0);
}

TEST(Norm, GaussianValues) {
  const auto g = make_grid(20.0, 2000);
  const auto u = gauss(g);
  const double l2 = norm(u, Norm::L(2));
  EXPECT_NEAR(l2 * l2, std::pow(oracle::pi, 1.5), 1e-8);
  const double d = norm(u, Norm::D());
  EXPECT_NEAR(d * d, oracle::gaussian_dirichlet(0.5), 1e-6);
  const double h1 = norm(u, Norm::H1());
  EXPECT_NEAR(h1 * h1, l2 * l2 + d * d, 1e-10);
  EXPECT_NEAR(lebesgue_integral(u, 4.0), oracle::gaussian_lebesgue(0.5, 4.0), 1e-8);
}

TEST(Norm, ZeroField) {
  const RadialField z(make_grid(5.0, 100));
  EXPECT_EQ(norm(z, Norm::L(3)), 0.0);
  EXPECT_EQ(norm(z, Norm::H1()), 0.0);
  EXPECT_EQ(norm(z, Norm::D()), 0.0);
}

TEST(Norm, ExponentRange) {
  const RadialField z(make_grid(5.0, 100));
  EXPECT_THROW(norm(z, Norm::L(0.5)), UnsupportedExponent);
  EXPECT_THROW(norm(z, Norm::L(6.5)), UnsupportedExponent);
  EXPECT_NO_THROW(norm(z, Norm::L(6.0)));
}

TEST(Laplacian, QuadraticPolynomial) {
  for (std::size_t n : {100u, 200u}) {
    const auto g = make_grid(2.0, n);
    const auto lap = laplacian(RadialField::sample(g, [](double r) { return 1.0 - r * r / 6.0; }));
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(lap[i], -1.0, 1e-8) << i;
  }
}

TEST(Laplacian, GaussianSecondOrder) {
  auto err = [](std::size_t n) {
    const auto g = make_grid(10.0, n);
    const auto lap = laplacian(gauss(g));
    double e = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      const double r = g.r(i);
      e = std::max(e, std::abs(lap[i] - (r * r - 3.0) * std::exp(-0.5 * r * r)));
    }
    return e;
  };
  const double e1 = err(500), e2 = err(1000);
  EXPECT_LT(e1, 1e-3);
  EXPECT_GT(e1 / e2, 3.5);
}

TEST(Laplacian, SymmetricUpToClosure) {
  const auto g = make_grid(12.0, 1200);
  const auto u = RadialField::sample(g, [](double r) { return std::exp(-0.5 * r * r) * (1 - r / 12.0); });
  const auto v = RadialField::sample(g, [](double r) { return std::exp(-0.3 * (r - 1) * (r - 1)) * (1 - r / 12.0); });
  const double a = volume_integrate(laplacian(u), v);
  const double b = volume_integrate(u, laplacian(v));
  const double h = g.spacing();
  EXPECT_LE(std::abs(a - b), 10.0 * h * h * norm(u, Norm::H1()) * norm(v, Norm::H1()));
  EXPECT_LT(volume_integrate(laplacian(u), u), 0.0);
}

TEST(Dilate, IdentityAndScale) {
  const auto g = make_grid(20.0, 2000);
  const auto u = gauss(g);
  const auto same = dilate(u, 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(same[i], u[i]);
  EXPECT_THROW(dilate(u, 0.0), InvalidScale);
  EXPECT_THROW(dilate(u, -1.0), InvalidScale);
}

TEST(Dilate, ScalingLaws) {
  const auto g = make_grid(20.0, 2000);
  const auto u = gauss(g);
  const double tau = 2.0, p = 3.0;
  const auto ut = dilate(u, tau);
  EXPECT_NEAR(volume_integrate(ut, ut) / volume_integrate(u, u), tau, 1e-4 * tau);
  EXPECT_NEAR(dirichlet_energy(ut) / dirichlet_energy(u), std::pow(tau, 3), 1e-4 * std::pow(tau, 3));
  EXPECT_NEAR(lebesgue_integral(ut, p + 1) / lebesgue_integral(u, p + 1), std::pow(tau, 2 * p - 1),
              1e-4 * std::pow(tau, 2 * p - 1));
}

TEST(Dilate, VanishesBeyondImage) {
  const auto g = make_grid(4.0, 400);
  const auto u = RadialField::sample(g, [](double r) { return 4.0 - r; });
  const auto ut = dilate(u, 2.0);
  for (std::size_t i = 201; i < g.size(); ++i) EXPECT_EQ(ut[i], 0.0);
}

TEST(Resample, SameGridIsIdentity) {
  const auto g = make_grid(20.0, 500);
  const auto u = gauss(g);
  const auto v = resample(u, g);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(v[i], u[i]);
}

TEST(Resample, FourthOrderAndExactAtSharedNodes) {
  const auto coarse = make_grid(20.0, 500), fine = make_grid(20.0, 2000);
  const auto u = gauss(coarse);
  const auto up = resample(u, fine);
  double e = 0.0;
  for (std::size_t i = 0; i < fine.size(); ++i) e = std::max(e, std::abs(up[i] - std::exp(-0.5 * fine.r(i) * fine.r(i))));
  const double h = coarse.spacing();
  EXPECT_LT(e, 10.0 * std::pow(h, 4));
  const auto back = resample(up, coarse);
  for (std::size_t i = 0; i < coarse.size(); ++i) EXPECT_EQ(back[i], u[i]);
  EXPECT_EQ(up[fine.intervals()], u[coarse.intervals()]);
}

TEST(Resample, RadiusMismatch) {
  EXPECT_THROW(resample(RadialField(make_grid(1.0, 16)), make_grid(2.0, 16)), DomainMismatch);
}

TEST(Csv, RoundTripIsBitExact) {
  const auto g = make_grid(3.0, 30);
  const auto u = RadialField::sample(g, [](double r) { return std::sin(r) / 3.0; });
  std::stringstream ss;
  write_csv(ss, u);
  EXPECT_EQ(ss.str().substr(0, 8), "r,value\n");
  const auto v = read_csv(ss);
  ASSERT_EQ(v.size(), u.size());
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_EQ(v[i], u[i]);
}
