#include <gtest/gtest.h>

#include <map>
#include <random>

#include "hormlab/maximal.hpp"
#include "oracles.hpp"

using namespace hormlab;
using oracle::brute_hybrid;

namespace {

// Exhaustive oracle: every periodic grid box (start, side per axis group) containing x.
GridFunction brute_maximal(const GridFunction &f, int groups, bool dyadic_only, double r) {
  const Grid &g = f.grid;
  const std::size_t N = g.points;
  const int D = g.dims, per = D / groups;
  GridFunction out(g, Domain::spatial);
  std::vector<std::size_t> sides;
  for (std::size_t L = 1; L <= N; ++L)
    if (!dyadic_only || is_pow2(L))
      sides.push_back(L);
  std::vector<std::size_t> xi(D), si(D), ti(D);
  for (std::size_t x = 0; x < g.size(); ++x) {
    g.unravel(x, xi);
    double best = 0;
    std::vector<std::size_t> ch(groups, 0);
    while (true) {
      std::vector<std::size_t> L(D);
      for (int a = 0; a < D; ++a)
        L[a] = sides[ch[a / per]];
      for (std::size_t s = 0; s < g.size(); ++s) {
        g.unravel(s, si);
        bool inside = true;
        for (int a = 0; a < D; ++a)
          inside = inside && (xi[a] + N - si[a]) % N < L[a];
        if (!inside)
          continue;
        double sum = 0, cnt = 0;
        for (std::size_t t = 0; t < g.size(); ++t) {
          g.unravel(t, ti);
          bool in = true;
          for (int a = 0; a < D; ++a)
            in = in && (ti[a] + N - si[a]) % N < L[a];
          if (in) {
            sum += std::pow(std::abs(f.samples[t]), r);
            cnt += 1;
          }
        }
        best = std::max(best, sum / cnt);
      }
      int q = 0;
      while (q < groups && ++ch[q] == sides.size()) {
        ch[q] = 0;
        ++q;
      }
      if (q == groups)
        break;
    }
    out.samples[x] = std::pow(best, 1 / r);
  }
  return out;
}

GridFunction random_field(const Grid &g, std::mt19937_64 &rng) {
  std::normal_distribution<double> nd;
  GridFunction f(g, Domain::spatial);
  for (auto &v : f.samples)
    v = cplx(nd(rng), nd(rng));
  return f;
}

// Band-limited random F on the 2-D grid, supported where both frequency radii lie in the bank band.
GridFunction random_band_field(const FilterBank &bank, const Grid &g, std::mt19937_64 &rng) {
  std::normal_distribution<double> nd;
  GridFunction Fh(g, Domain::spectral);
  std::vector<std::size_t> idx(2);
  for (std::size_t f = 0; f < g.size(); ++f) {
    g.unravel(f, idx);
    double a = std::abs(g.frequency(idx[0])), b = std::abs(g.frequency(idx[1]));
    if (bank.in_band(a) && bank.in_band(b))
      Fh.samples[f] = cplx(nd(rng), nd(rng));
  }
  return transform(Fh, Direction::inverse);
}


} // namespace

TEST(Maximal, ConstantAndDominance) {
  Grid g(2, 8, 1.0);
  std::mt19937_64 rng(3);
  GridFunction c(g, Domain::spatial);
  for (auto &v : c.samples)
    v = cplx(0, -2.5);
  for (auto kind : {RectangleFamily::Kind::cubes, RectangleFamily::Kind::dyadic_rectangles})
    for (double r : {0.5, 1.0, 3.0}) {
      RectangleFamily fam{kind};
      auto m = maximal(c, fam, r);
      for (auto v : m.samples)
        EXPECT_NEAR(v.real(), 2.5, 1e-13);
      auto f = random_field(g, rng);
      auto mf = maximal(f, fam, r);
      for (std::size_t i = 0; i < g.size(); ++i)
        EXPECT_GE(mf.samples[i].real(), std::abs(f.samples[i]) * (1 - 1e-14));
    }
}

TEST(Maximal, IndicatorMatchesExhaustiveWindows) {
  Grid g(1, 32, 1.0);
  GridFunction f(g, Domain::spatial);
  for (std::size_t i = 8; i < 16; ++i)
    f.samples[i] = 1.0;
  auto fast = maximal(f, RectangleFamily{}, 1.0);
  auto slow = brute_maximal(f, 1, false, 1.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    EXPECT_NEAR(fast.samples[i].real(), slow.samples[i].real(), 1e-14) << i;
}

TEST(Maximal, RandomMatchesExhaustiveWindows) {
  std::mt19937_64 rng(5);
  Grid g1(1, 32, 2.0);
  auto f1 = random_field(g1, rng);
  for (double r : {1.0, 2.0}) {
    auto a = maximal(f1, RectangleFamily{}, r), b = brute_maximal(f1, 1, false, r);
    EXPECT_LE(relative_error(a, b), 1e-13);
  }
  Grid g2(2, 8, 1.0);
  auto f2 = random_field(g2, rng);
  EXPECT_LE(relative_error(maximal(f2, RectangleFamily{}), brute_maximal(f2, 1, false, 1)), 1e-13);
  RectangleFamily prod{RectangleFamily::Kind::dyadic_rectangles};
  EXPECT_LE(relative_error(maximal(f2, prod), brute_maximal(f2, 2, false, 1)), 1e-13);
  prod.dyadic_only = true;
  EXPECT_LE(relative_error(maximal(f2, prod, 1.5), brute_maximal(f2, 2, true, 1.5)), 1e-13);
}

TEST(Maximal, PowerIdentityHomogeneityMonotonicity) {
  std::mt19937_64 rng(8);
  Grid g(2, 16, 1.0);
  auto f = random_field(g, rng);
  GridFunction fr(g, Domain::spatial);
  for (std::size_t i = 0; i < g.size(); ++i)
    fr.samples[i] = std::pow(std::abs(f.samples[i]), 2.5);
  RectangleFamily cubes, prod{RectangleFamily::Kind::dyadic_rectangles};
  auto a = maximal(f, cubes, 2.5), b = maximal(fr, cubes, 1.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    EXPECT_EQ(a.samples[i].real(), std::pow(b.samples[i].real(), 1 / 2.5));

  auto m = maximal(f, prod), m3 = maximal(cplx(0, 3) * f, prod);
  for (std::size_t i = 0; i < g.size(); ++i)
    EXPECT_NEAR(m3.samples[i].real(), 3 * m.samples[i].real(), 1e-12 * m3.samples[i].real());

  GridFunction big = f;
  for (auto &v : big.samples)
    v *= 1.0 + std::uniform_real_distribution<double>(0, 1)(rng);
  auto mb = maximal(big, prod), mc = maximal(f, cubes);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_GE(mb.samples[i].real(), m.samples[i].real());
    EXPECT_LE(mc.samples[i].real(), m.samples[i].real() * (1 + 1e-14)); // cubes within products
  }
}

TEST(Maximal, FeffermanSteinConstantStable) {
  // vector-valued bound ||(sum_j (M f_j)^2)^{1/2}||_p <= C ||(sum_j |f_j|^2)^{1/2}||_p, p = 3
  Grid g(1, 64, 1.0);
  std::mt19937_64 rng(21);
  std::vector<double> ratios;
  for (int trial = 0; trial < 20; ++trial) {
    GridFunction lhs(g, Domain::spatial), rhs(g, Domain::spatial);
    std::vector<double> l2(g.size()), r2(g.size());
    for (int j = 0; j < 4; ++j) {
      GridFunction fj(g, Domain::spatial);
      std::size_t start = rng() % 64, len = 1 + rng() % 16;
      for (std::size_t t = 0; t < len; ++t)
        fj.samples[(start + t) % 64] = std::normal_distribution<double>()(rng);
      auto mj = maximal(fj, RectangleFamily{}, 1.0);
      for (std::size_t i = 0; i < g.size(); ++i) {
        l2[i] += std::norm(mj.samples[i]);
        r2[i] += std::norm(fj.samples[i]);
      }
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      lhs.samples[i] = std::sqrt(l2[i]);
      rhs.samples[i] = std::sqrt(r2[i]);
    }
    ratios.push_back(lp_norm(lhs, NormSpec::lebesgue(3)) / lp_norm(rhs, NormSpec::lebesgue(3)));
  }
  auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  EXPECT_GE(*lo, 1.0);
  EXPECT_LE(*hi / *lo, 3.0);
}

TEST(Maximal, RejectsBadInput) {
  Grid g(1, 8, 1.0);
  GridFunction f(g, Domain::spatial);
  EXPECT_THROW(maximal(f, RectangleFamily{}, 0.0), Error);
  EXPECT_THROW(maximal(transform(f, Direction::forward), RectangleFamily{}), Error);
  Grid g3(3, 4, 1.0);
  EXPECT_THROW(maximal(GridFunction(g3, Domain::spatial), RectangleFamily{RectangleFamily::Kind::dyadic_rectangles}),
               Error);
}

class HybridOracle : public ::testing::TestWithParam<std::tuple<HybridKind, double>> {};

TEST_P(HybridOracle, MatchesDefinitionLevelBruteForce) {
  auto [kind, u] = GetParam();
  Grid axis(1, 16, 16.0), g(2, 16, 16.0);
  FilterBank bank = build_dyadic_bank(axis, -4, -1);
  std::mt19937_64 rng(99);
  auto F = random_band_field(bank, g, rng);
  HybridSpec s{kind, 1, 0, u, &bank};
  auto fast = hybrid(F, s);
  auto slow = brute_hybrid(F, s);
  EXPECT_LE(relative_error(fast.value, slow), 1e-9);
  EXPECT_GT(max_abs(slow), 0.0);
  EXPECT_LT(fast.out_of_band_fraction, 1e-20);
}

INSTANTIATE_TEST_SUITE_P(AllKinds, HybridOracle,
                         ::testing::Combine(::testing::Values(HybridKind::SS, HybridKind::MS, HybridKind::SM,
                                                              HybridKind::MM),
                                            ::testing::Values(1.0, 2.0)));

TEST(Hybrid, ZeroInputAndErrors) {
  Grid axis(1, 16, 16.0), g(2, 16, 16.0);
  FilterBank bank = build_dyadic_bank(axis, -4, -1);
  GridFunction F(g, Domain::spatial);
  for (auto k : {HybridKind::SS, HybridKind::MS, HybridKind::SM, HybridKind::MM})
    EXPECT_EQ(max_abs(hybrid(F, HybridSpec{k, 2, 1, 1.0, &bank}).value), 0.0);
  EXPECT_THROW(hybrid(F, HybridSpec{HybridKind::SS, -1, 0, 1.0, &bank}), Error);
  EXPECT_THROW(hybrid(F, HybridSpec{HybridKind::SS, 0, 0, 0.5, &bank}), Error);
  EXPECT_THROW(hybrid(GridFunction(Grid(2, 32, 16.0), Domain::spatial), HybridSpec{HybridKind::SS, 0, 0, 1, &bank}),
               Error);
  EXPECT_THROW(parse_hybrid_kind("SQ"), Error);
}

TEST(Hybrid, OutOfBandContentReported) {
  Grid axis(1, 16, 16.0), g(2, 16, 16.0);
  FilterBank bank = build_dyadic_bank(axis, -4, -1);
  GridFunction F(g, Domain::spatial);
  for (auto &v : F.samples)
    v = 1.0; // all energy at zero frequency
  EXPECT_NEAR(hybrid(F, HybridSpec{HybridKind::SS, 0, 0, 1, &bank}).out_of_band_fraction, 1.0, 1e-12);
}

TEST(Hybrid, MaximalKindsNonnegative) {
  Grid axis(1, 16, 16.0), g(2, 16, 16.0);
  FilterBank bank = build_dyadic_bank(axis, -4, -1);
  std::mt19937_64 rng(4);
  auto F = random_band_field(bank, g, rng);
  auto mm = hybrid(F, HybridSpec{HybridKind::MM, 0, 1, 2.0, &bank}).value;
  auto ms = hybrid(F, HybridSpec{HybridKind::MS, 0, 1, 2.0, &bank}).value;
  for (std::size_t i = 0; i < g.size(); ++i)
    EXPECT_GE(mm.samples[i].real(), 0.0);
  EXPECT_GT(max_abs(mm), 0.0);
  EXPECT_GT(max_abs(ms), 0.0);
}

TEST(Hybrid, SS1UniformInShift) {
  Grid axis(1, 32, 16.0), g(2, 32, 16.0);
  FilterBank bank = build_dyadic_bank(axis, -4, 0);
  std::mt19937_64 rng(2024);
  auto F = random_band_field(bank, g, rng);
  std::vector<double> ratios;
  for (int M = 0; M <= 3; ++M) {
    auto v = hybrid(F, HybridSpec{HybridKind::SS, M, M, 1.0, &bank}).value;
    ratios.push_back(lp_norm(v, NormSpec::lebesgue(2)) / lp_norm(F, NormSpec::lebesgue(2)));
  }
  auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  EXPECT_LT(*hi / *lo, 3.0);
}

TEST(Hybrid, GrowthScans) {
  Grid axis(1, 32, 16.0), g(2, 32, 16.0);
  FilterBank bank = build_dyadic_bank(axis, -4, 0);
  std::mt19937_64 rng(7);
  std::vector<GridFunction> samples;
  for (int i = 0; i < 3; ++i)
    samples.push_back(random_band_field(bank, g, rng));
  std::vector<std::pair<int, int>> Ms{{0, 0}, {1, 0}, {1, 1}, {2, 1}, {2, 2}, {3, 3}};
  auto s1 = hybrid_growth_scan(samples, HybridSpec{HybridKind::SS, 0, 0, 1.0, &bank}, 2, 1, Ms);
  EXPECT_LE(s1.report.fitted_slope, 0.15);
  EXPECT_EQ(s1.report.verdict, Verdict::pass);
  auto s2 = hybrid_growth_scan(samples, HybridSpec{HybridKind::SS, 0, 0, 2.0, &bank}, 2.5, 1, Ms);
  EXPECT_NEAR(*s2.report.predicted_slope, 0.5, 1e-15);
  EXPECT_LE(s2.report.fitted_slope, 0.5 + 0.15);
  EXPECT_THROW(hybrid_growth_scan(samples, HybridSpec{HybridKind::SS, 0, 0, 2.0, &bank}, 2.5, 1, {{0, 0}, {1, 1}}),
               Error);
  EXPECT_THROW(hybrid_growth_scan(samples, HybridSpec{HybridKind::SS, 0, 0, 2.0, &bank}, 1.5, 2, Ms), Error);
}

TEST(Hybrid, SingleBandSlopeFlat) {
  // F = one psi_j (x) psi_k band: SS reduces to that band's local means
  Grid axis(1, 32, 16.0), g(2, 32, 16.0);
  FilterBank bank = build_dyadic_bank(axis, -4, 0);
  std::mt19937_64 rng(11);
  auto F0 = random_band_field(bank, g, rng);
  auto Fh = transform(F0, Direction::forward);
  for (std::size_t f = 0; f < g.size(); ++f)
    Fh.samples[f] *= bank.psi_hat.at(-2).samples[f / 32] * bank.psi_hat.at(-2).samples[f % 32];
  std::vector<GridFunction> one{transform(Fh, Direction::inverse)};
  auto s = hybrid_growth_scan(one, HybridSpec{HybridKind::SS, 0, 0, 1.0, &bank}, 2, 1,
                              {{0, 0}, {1, 1}, {2, 2}, {3, 3}});
  EXPECT_NEAR(s.report.fitted_slope, 0.0, 0.1);
}
