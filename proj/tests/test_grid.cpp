#include <gtest/gtest.h>

#include <random>

#include "hormlab/grid.hpp"

using namespace hormlab;

namespace {

GridFunction random_spatial(const Grid &g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  GridFunction f(g, Domain::spatial);
  for (auto &v : f.samples)
    v = cplx(nd(rng), nd(rng));
  return f;
}

// Continuum-scaled DFT by direct summation (the definition, O(N^2d)).
GridFunction direct_forward(const GridFunction &f) {
  const Grid &g = f.grid;
  GridFunction F(g, Domain::spectral);
  std::vector<std::size_t> ix(g.dims), ik(g.dims);
  for (std::size_t k = 0; k < g.size(); ++k) {
    g.unravel(k, ik);
    cplx s = 0;
    for (std::size_t x = 0; x < g.size(); ++x) {
      g.unravel(x, ix);
      double ph = 0;
      for (int a = 0; a < g.dims; ++a)
        ph += g.coordinate(ix[a]) * g.frequency(ik[a]);
      s += f.samples[x] * std::polar(1.0, -2 * pi * ph);
    }
    F.samples[k] = s * std::pow(g.spacing(), g.dims);
  }
  return F;
}

} // namespace

TEST(Grid, RejectsNonPowerOfTwo) {
  EXPECT_THROW(Grid(1, 12, 1.0), Error);
  EXPECT_THROW(Grid(0, 8, 1.0), Error);
  EXPECT_THROW(Grid(1, 8, -1.0), Error);
}

TEST(Grid, RoundTrip) {
  for (int dims : {1, 2, 3}) {
    Grid g(dims, dims == 3 ? 8 : 32, 3.0);
    auto f = random_spatial(g, 7 + dims);
    auto back = transform(transform(f, Direction::forward), Direction::inverse);
    EXPECT_LT(relative_error(back, f), 1e-12);
  }
}

TEST(Grid, MatchesDirectSummation) {
  for (int dims : {1, 2}) {
    Grid g(dims, 8, 2.5);
    auto f = random_spatial(g, 3);
    auto F = transform(f, Direction::forward);
    auto D = direct_forward(f);
    EXPECT_LT(relative_error(F, D), 1e-12);
  }
}

TEST(Grid, DeltaTransformsToOne) {
  Grid g(2, 16, 4.0);
  GridFunction f(g, Domain::spatial);
  f.samples[0] = 1.0 / g.cell_volume();
  auto F = transform(f, Direction::forward);
  for (auto v : F.samples)
    EXPECT_NEAR(std::abs(v - cplx(1.0)), 0.0, 1e-12);
}

TEST(Grid, SingleModeHasMagnitudePd) {
  Grid g(1, 8, 2.0);
  const long k0 = 3;
  auto f = sample(g, Domain::spatial, [&](std::span<const double> x) {
    return std::polar(1.0, 2 * pi * k0 * x[0] / g.period);
  });
  auto D = direct_forward(f);
  auto F = transform(f, Direction::forward);
  for (std::size_t i = 0; i < g.points; ++i) {
    double expect = g.signed_index(i) == k0 ? g.period : 0.0;
    EXPECT_NEAR(std::abs(D.samples[i]), expect, 1e-12);
    EXPECT_NEAR(std::abs(F.samples[i] - D.samples[i]), 0.0, 1e-12);
  }
}

TEST(Grid, ParsevalOnBandLimited) {
  Grid g(2, 32, 5.0);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  GridFunction F(g, Domain::spectral);
  std::vector<std::size_t> idx(2);
  for (std::size_t f = 0; f < g.size(); ++f) {
    g.unravel(f, idx);
    if (std::abs(g.signed_index(idx[0])) < 8 && std::abs(g.signed_index(idx[1])) < 8)
      F.samples[f] = cplx(nd(rng), nd(rng));
  }
  auto f = transform(F, Direction::inverse);
  EXPECT_NEAR(lp_norm(f, NormSpec::lebesgue(2)) / spectral_l2(F), 1.0, 1e-10);
}

TEST(Grid, Linearity) {
  Grid g(1, 64, 1.0);
  auto f = random_spatial(g, 1), h = random_spatial(g, 2);
  cplx a(0.3, -1.2), b(2.0, 0.5);
  auto lhs = transform(a * f + b * h, Direction::forward);
  auto rhs = a * transform(f, Direction::forward) + b * transform(h, Direction::forward);
  EXPECT_LT(relative_error(lhs, rhs), 1e-14);
}

TEST(Norms, ConstantHasUnitNormOnUnitPeriod) {
  Grid g(2, 16, 1.0);
  GridFunction f(g, Domain::spatial);
  for (auto &v : f.samples)
    v = 1.0;
  for (double p : {0.5, 1.0, 2.0, 3.7})
    EXPECT_NEAR(lp_norm(f, NormSpec::lebesgue(p)), 1.0, 1e-13);
  EXPECT_NEAR(lp_norm(f, NormSpec::infinity()), 1.0, 0.0);
  EXPECT_NEAR(lp_norm(f, NormSpec::weak(2)), 1.0, 1e-13);
}

TEST(Norms, HalfIndicator) {
  Grid g(1, 32, 1.0);
  GridFunction f(g, Domain::spatial);
  for (std::size_t i = 0; i < 16; ++i)
    f.samples[i] = 1.0;
  EXPECT_NEAR(lp_norm(f, NormSpec::lebesgue(2)), std::sqrt(0.5), 1e-14);
}

TEST(Norms, WeakNormOfTwoLevels) {
  // |f| = 2 on 1/4 of the cells, 1 on another 1/4: sup(2 * (1/4)^{1/p}, 1 * (1/2)^{1/p})
  Grid g(1, 16, 1.0);
  GridFunction f(g, Domain::spatial);
  for (std::size_t i = 0; i < 4; ++i)
    f.samples[i] = 2.0;
  for (std::size_t i = 4; i < 8; ++i)
    f.samples[i] = -1.0;
  for (double p : {1.0, 2.0, 4.0}) {
    double expect = std::max(2 * std::pow(0.25, 1 / p), std::pow(0.5, 1 / p));
    EXPECT_NEAR(lp_norm(f, NormSpec::weak(p)), expect, 1e-14);
  }
}

TEST(Norms, RejectsNonpositiveP) {
  Grid g(1, 8, 1.0);
  GridFunction f(g, Domain::spatial);
  EXPECT_THROW(lp_norm(f, NormSpec::lebesgue(0)), Error);
  EXPECT_THROW(lp_norm(f, NormSpec::lebesgue(-1)), Error);
}

TEST(Norms, HomogeneityAndNesting) {
  Grid g(1, 128, 1.0);
  auto f = random_spatial(g, 5);
  cplx c(-2.0, 1.5);
  double prev = 0;
  for (double p : {0.5, 1.0, 1.5, 2.0, 3.0, 8.0}) {
    EXPECT_NEAR(lp_norm(c * f, NormSpec::lebesgue(p)), std::abs(c) * lp_norm(f, NormSpec::lebesgue(p)),
                1e-12 * lp_norm(c * f, NormSpec::lebesgue(p)));
    double cur = lp_norm(f, NormSpec::lebesgue(p));
    EXPECT_GE(cur, prev);
    prev = cur;
  }
}

TEST(Products, IdentityAndZero) {
  Grid g(2, 8, 1.0);
  auto f = random_spatial(g, 9);
  GridFunction one(g, Domain::spatial), zero(g, Domain::spatial);
  for (auto &v : one.samples)
    v = 1.0;
  EXPECT_EQ(relative_error(pointwise_product(f, one), f), 0.0);
  EXPECT_EQ(max_abs(pointwise_product(f, zero)), 0.0);
  Grid other(2, 16, 1.0);
  EXPECT_THROW(pointwise_product(f, GridFunction(other, Domain::spatial)), Error);
}

TEST(Products, ModesAddUnderProduct) {
  // spectra convolve: check by direct convolution of the two spectra on a padded grid
  Grid g(1, 8, 1.0);
  const long k1 = 2, k2 = 3;
  auto mode = [&](long k) {
    return sample(g, Domain::spatial, [&](std::span<const double> x) { return std::polar(1.0, 2 * pi * k * x[0]); });
  };
  auto F1 = transform(mode(k1), Direction::forward), F2 = transform(mode(k2), Direction::forward);
  Grid pg(1, 16, 1.0);
  auto P1 = pad_spectrum(F1, 16), P2 = pad_spectrum(F2, 16);
  auto prod = pointwise_product(transform(P1, Direction::inverse), transform(P2, Direction::inverse));
  auto spec = transform(prod, Direction::forward);
  // oracle: (F1 * F2)(k) = P^-1 sum_j F1(j) F2(k - j)
  for (std::size_t i = 0; i < 16; ++i) {
    long k = pg.signed_index(i);
    cplx conv = 0;
    for (std::size_t a = 0; a < 16; ++a) {
      long j = pg.signed_index(a);
      long rest = k - j;
      if (rest < -8 || rest >= 8)
        continue;
      conv += P1.samples[a] * P2.samples[pg.wrap_index(rest)];
    }
    EXPECT_NEAR(std::abs(spec.samples[i] - conv / pg.period), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(spec.samples[i]), k == k1 + k2 ? 1.0 : 0.0, 1e-12);
  }
}

TEST(Products, RestrictInvertsPadding) {
  Grid g(2, 8, 2.0);
  auto f = random_spatial(g, 4);
  auto up = transform(pad_spectrum(transform(f, Direction::forward), 32), Direction::inverse);
  EXPECT_LT(relative_error(restrict_to(up, g), f), 1e-12);
}
