#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qcl/paneitz.hpp"
#include "qcl/quadrature.hpp"

using namespace qcl;

namespace {

// Closed form of the Paneitz Green's function on the round sphere in terms of
// chordal distance |x − y| = 2 sin(θ/2).
double green_chordal(int n, double theta) {
  return std::pow(2.0 * std::sin(0.5 * theta), 4 - n) / (2.0 * (n - 2) * (n - 4) * sphere_volume(n - 1));
}

ZonalCoeffs random_band_limited(const GridPtr& g, int top, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  ZonalCoeffs c{g, std::vector<double>(g->truncation() + 1, 0.0)};
  for (int k = 0; k <= top; ++k) c.coeffs[k] = nd(rng) / (1.0 + k * k);
  return c;
}

double inner(const RadialField& a, const RadialField& b) {
  RadialField p{a.grid, a.values};
  for (std::size_t j = 0; j < p.values.size(); ++j) p.values[j] *= b.values[j];
  return integrate_sphere(p);
}

}  // namespace

TEST(PaneitzConstants, FiveSphere) {
  const auto p = paneitz_constants(Dimension(5));
  EXPECT_DOUBLE_EQ(p.c1, 3.75);
  EXPECT_DOUBLE_EQ(p.c2, 1.75);
  EXPECT_DOUBLE_EQ(p.a_n, 5.5);
  EXPECT_DOUBLE_EQ(p.b_n, 6.5625);
  EXPECT_DOUBLE_EQ(p.c_n, 59.0625);
  EXPECT_DOUBLE_EQ(p.q_round(), 13.125);
}

TEST(PaneitzConstants, SixSphere) {
  const auto p = paneitz_constants(Dimension(6));
  EXPECT_DOUBLE_EQ(p.c2, 4.0);
  EXPECT_DOUBLE_EQ(p.b_n, 24.0);
}

TEST(PaneitzConstants, AlgebraicIdentities) {
  for (int n = 5; n <= 40; ++n) {
    const auto p = paneitz_constants(Dimension(n));
    EXPECT_NEAR(p.c_n - (n * n + n * p.a_n + p.b_n), 0.0, 1e-12 * p.c_n);
    EXPECT_NEAR(p.b_n, 0.5 * (n - 4) * p.q_round(), 1e-12 * p.b_n);
    EXPECT_NEAR(p.a_n, 0.5 * (n * n - 2.0 * n - 4.0), 1e-12 * p.a_n);
    for (int k = 0; k < 200; ++k) EXPECT_GT(p.multiplier(k), 0.0);
  }
}

TEST(PaneitzSpectral, ConstantAndCosTheta) {
  for (int n : {5, 6, 8, 12}) {
    auto g = make_grid(Dimension(n), 32);
    const auto pc = paneitz_constants(Dimension(n));
    const RadialField one = synthesize(paneitz_apply(analyze(sample(g, [](double) { return 1.0; }))));
    const RadialField cx = synthesize(paneitz_apply(analyze(sample(g, [](double x) { return x; }))));
    for (int j = 0; j < g->size(); ++j) {
      EXPECT_NEAR(one.values[j] / pc.b_n, 1.0, 1e-12);
      const double x = g->x()[j];
      EXPECT_NEAR(cx.values[j], pc.c_n * x, 1e-12 * pc.c_n);
    }
  }
}

TEST(PaneitzSpectral, LaplacianEigenvalues) {
  auto g = make_grid(Dimension(5), 16);
  ZonalCoeffs c{g, std::vector<double>(17, 1.0)};
  const ZonalCoeffs l = laplacian(c);
  EXPECT_EQ(l.coeffs[0], 0.0);
  EXPECT_EQ(l.coeffs[1], 5.0);
  EXPECT_EQ(l.coeffs[2], 12.0);
}

TEST(PaneitzSpectral, FactorizationAndCommutation) {
  std::mt19937_64 rng(7);
  for (int n : {5, 9}) {
    auto g = make_grid(Dimension(n), 48);
    const auto pc = paneitz_constants(Dimension(n));
    const ZonalCoeffs f = random_band_limited(g, 48, rng);
    const ZonalCoeffs fac = shifted_laplacian(shifted_laplacian(f, pc.c1), pc.c2);
    const ZonalCoeffs direct = paneitz_apply(f);
    const ZonalCoeffs lap = laplacian(f);
    const ZonalCoeffs expanded = [&] {
      ZonalCoeffs e = laplacian(lap);
      for (std::size_t k = 0; k < e.coeffs.size(); ++k) e.coeffs[k] += pc.a_n * lap.coeffs[k] + pc.b_n * f.coeffs[k];
      return e;
    }();
    const ZonalCoeffs pl = paneitz_apply(laplacian(f));
    const ZonalCoeffs lp = laplacian(paneitz_apply(f));
    for (std::size_t k = 0; k < f.coeffs.size(); ++k) {
      const double scale = std::abs(direct.coeffs[k]) + 1e-300;
      EXPECT_NEAR(fac.coeffs[k], direct.coeffs[k], 1e-13 * scale);
      EXPECT_NEAR(expanded.coeffs[k], direct.coeffs[k], 1e-12 * scale);
      EXPECT_NEAR(pl.coeffs[k], lp.coeffs[k], 1e-13 * (std::abs(pl.coeffs[k]) + 1e-300));
    }
  }
}

TEST(PaneitzSpectral, SelfAdjoint) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    auto g = make_grid(Dimension(5 + trial % 4), 40);
    const ZonalCoeffs f = random_band_limited(g, 20, rng);
    const ZonalCoeffs h = random_band_limited(g, 20, rng);
    const double a = inner(synthesize(paneitz_apply(f)), synthesize(h));
    const double b = inner(synthesize(f), synthesize(paneitz_apply(h)));
    EXPECT_NEAR(a, b, 1e-10 * (std::abs(a) + 1.0));
  }
}

TEST(PaneitzPointwise, AgreesWithSpectralOnBandLimitedFields) {
  std::mt19937_64 rng(3);
  for (int n : {5, 8, 12}) {
    auto g = make_grid(Dimension(n), 24);
    const auto pc = paneitz_constants(Dimension(n));
    const ZonalCoeffs f = random_band_limited(g, 12, rng);
    const ZonalCoeffs pf = paneitz_apply(f);
    const Profile prof = to_profile(f);
    for (double x : {-1.0, -0.7, 0.0, 0.31, 0.93, 1.0}) {
      const double ref = evaluate(pf, x);
      EXPECT_NEAR(paneitz_pointwise(prof, x, pc), ref, 1e-10 * (1.0 + std::abs(ref)) * pc.c_n) << n << " " << x;
    }
  }
}

TEST(PaneitzPointwise, ConstantsAndCoordinate) {
  const auto pc = paneitz_constants(Dimension(7));
  EXPECT_NEAR(paneitz_pointwise(profiles::constant(1.0), 0.3, pc), pc.b_n, 1e-13);
  EXPECT_NEAR(paneitz_pointwise(profiles::cos_theta(), 0.3, pc), pc.c_n * 0.3, 1e-12);
  EXPECT_NEAR(laplacian_pointwise(profiles::cos_theta(), 0.3, 7), 7 * 0.3, 1e-14);
}

TEST(Coercivity, SmallestEigenvalueIsBn) {
  EXPECT_DOUBLE_EQ(coercivity_constant(Dimension(5)), 6.5625);
  EXPECT_DOUBLE_EQ(coercivity_constant(Dimension(8)), 120.0);
  for (int n = 5; n <= 20; ++n) EXPECT_DOUBLE_EQ(coercivity_constant(Dimension(n)), paneitz_constants(Dimension(n)).b_n);
}

TEST(Coercivity, RandomEnergyBoundedBelow) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 5 + trial % 6;
    auto g = make_grid(Dimension(n), 32);
    const ZonalCoeffs f = random_band_limited(g, 32, rng);
    const double e = inner(synthesize(f), synthesize(paneitz_apply(f)));
    const double l2 = inner(synthesize(f), synthesize(f));
    EXPECT_GE(e, coercivity_constant(Dimension(n)) * l2 - 1e-8);
  }
}

TEST(Green, RejectsDiagonal) {
  EXPECT_THROW(green_paneitz(Dimension(5), 0.0, 64), std::domain_error);
  EXPECT_THROW(green_paneitz(Dimension(5), -0.1, 64), std::domain_error);
}

TEST(Green, MatchesChordalClosedForm) {
  for (int n : {5, 6, 7, 8, 12}) {
    for (double th : {0.02, 0.1, 0.5, 1.0, 2.0, 3.0, std::numbers::pi}) {
      const double v = green_paneitz(Dimension(n), th, 16).value;
      EXPECT_NEAR(v / green_chordal(n, th), 1.0, 1e-10) << "n=" << n << " th=" << th;
    }
  }
}

TEST(Green, PositiveAndStableInTruncation) {
  for (int n : {5, 8}) {
    for (int i = 0; i < 200; ++i) {
      const double th = 0.1 + (std::numbers::pi - 0.1) * i / 199.0;
      const auto a = green_paneitz(Dimension(n), th, 256);
      const auto b = green_paneitz(Dimension(n), th, 512);
      EXPECT_GT(a.value, 0.0);
      EXPECT_LE(std::abs(a.value - b.value), 1e-6 * std::abs(a.value));
    }
  }
}

TEST(Green, PartialSumsConvergeWhereTheSeriesDoes) {
  // For n = 5 the terms decay like k^{-2}, so the partial sums converge.
  const auto a = green_paneitz(Dimension(5), 2.0, 64);
  const auto b = green_paneitz(Dimension(5), 2.0, 1024);
  EXPECT_LT(std::abs(b.tail), 0.1 * std::abs(a.tail));
  EXPECT_LT(std::abs(b.tail), 1e-4 * b.value);
}

TEST(Green, ReproducesPointValuesThroughP) {
  // ∫ G(pole, ·) P f dV = f(pole). Integrated in the cylinder coordinate,
  // where the pole singularity of G is absorbed by the volume density.
  std::mt19937_64 rng(11);
  for (int n : {5, 6, 8}) {
    auto g = make_grid(Dimension(n), 256);
    const ZonalCoeffs f = random_band_limited(g, 10, rng);
    const ZonalCoeffs pf = paneitz_apply(f);
    const QuadratureRule r = composite_gauss(-30.0, 30.0, 1.0, 16);
    const double I = sphere_volume(n - 1) * r.integrate([&](double s) {
      const double th = cylinder::theta_of_s(s);
      return green_paneitz(Dimension(n), th, 0).value * evaluate(pf, cylinder::x_of_s(s)) *
             std::exp(n * cylinder::log_sech(s));
    });
    const double f0 = evaluate(f, 1.0);
    EXPECT_NEAR(I, f0, 1e-6 * (1.0 + std::abs(f0))) << "n=" << n;
  }
}
