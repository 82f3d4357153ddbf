#include <gtest/gtest.h>

#include <random>

#include "hormlab/filters.hpp"

using namespace hormlab;

namespace {

double radius_at(const Grid &g, std::size_t f) {
  std::vector<std::size_t> idx(g.dims);
  g.unravel(f, idx);
  double s = 0;
  for (int a = 0; a < g.dims; ++a)
    s += g.frequency(idx[a]) * g.frequency(idx[a]);
  return std::sqrt(s);
}

} // namespace

TEST(Profiles, SmoothStepLimits) {
  EXPECT_EQ(smooth_step(-0.1), 0.0);
  EXPECT_EQ(smooth_step(0.0), 0.0);
  EXPECT_EQ(smooth_step(1.0), 1.0);
  EXPECT_NEAR(smooth_step(0.5), 0.5, 1e-15);
  for (double x = 0.01; x < 1; x += 0.01)
    EXPECT_NEAR(smooth_step(x) + smooth_step(1 - x), 1.0, 1e-15);
}

TEST(Bank, PartitionOfUnityInBand) {
  Grid g(2, 64, 4.0);
  FilterBank bank = build_dyadic_bank(g, -2, 3);
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> pick(0, g.size() - 1);
  int checked = 0;
  while (checked < 200) {
    std::size_t f = pick(rng);
    double r = radius_at(g, f);
    if (r < std::ldexp(1.0, bank.j_min) || r > std::ldexp(1.0, bank.j_max - 1))
      continue;
    double s = 0;
    for (const auto &[j, ps] : bank.psi_hat)
      s += ps.samples[f].real();
    EXPECT_NEAR(s, 1.0, 1e-12) << "r = " << r;
    ++checked;
  }
}

TEST(Bank, SupportsAreDyadicAnnuli) {
  Grid g(1, 64, 1.0);
  FilterBank bank = build_dyadic_bank(g, 0, 5);
  EXPECT_EQ(bank.psi_hat.at(0).samples[g.wrap_index(3)].real(), 0.0);
  for (const auto &[j, ps] : bank.psi_hat)
    for (std::size_t f = 0; f < g.size(); ++f) {
      double r = radius_at(g, f);
      if (r < std::ldexp(1.0, j - 1) || r > std::ldexp(1.0, j + 1)) {
        EXPECT_EQ(ps.samples[f].real(), 0.0);
      }
      EXPECT_GE(ps.samples[f].real(), 0.0);
      EXPECT_EQ(ps.samples[f].imag(), 0.0);
    }
}

TEST(Bank, LowPassMatchesSumOfBands) {
  // oracle: enumerate the psi supports and sum the bands below j - sep
  Grid g(1, 256, 2.0);
  for (int sep : {1, 2, 3}) {
    FilterBank bank = build_dyadic_bank(g, -1, 6, sep);
    for (int j = bank.j_min + sep + 1; j <= bank.j_max; ++j) {
      const auto &ph = bank.phi_hat.at(j);
      for (std::size_t f = 0; f < g.size(); ++f) {
        double r = radius_at(g, f);
        if (r <= std::ldexp(1.0, j - sep - 1)) {
          EXPECT_EQ(ph.samples[f].real(), 1.0);
        }
        if (r >= std::ldexp(1.0, j - sep)) {
          EXPECT_EQ(ph.samples[f].real(), 0.0);
        }
        if (r < std::ldexp(1.0, bank.j_min))
          continue;
        double s = 0;
        for (int k = bank.j_min; k <= j - sep - 1; ++k)
          s += bank.psi_hat.at(k).samples[f].real();
        EXPECT_NEAR(ph.samples[f].real(), s, 1e-12) << "j=" << j << " r=" << r;
      }
    }
  }
}

TEST(Bank, DyadicCovariance) {
  Grid g(1, 512, 4.0);
  FilterBank bank = build_dyadic_bank(g, -1, 5);
  for (int j = bank.j_min; j <= bank.j_max; ++j)
    for (std::size_t f = 0; f < g.size(); ++f) {
      double r = radius_at(g, f);
      EXPECT_NEAR(bank.psi_hat.at(j).samples[f].real(), psi_hat_value(0, std::ldexp(r, -j)), 1e-13);
    }
}

TEST(Bank, SpatialMeans) {
  Grid g(1, 256, 16.0);
  FilterBank bank = build_dyadic_bank(g, -2, 3);
  for (int j = bank.j_min; j <= bank.j_max; ++j) {
    auto psi = transform(bank.psi_hat.at(j), Direction::inverse);
    auto phi = transform(bank.phi_hat.at(j), Direction::inverse);
    cplx mp = 0, mf = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      mp += psi.samples[i] * g.spacing();
      mf += phi.samples[i] * g.spacing();
    }
    EXPECT_NEAR(std::abs(mp), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(mf - cplx(1.0)), 0.0, 1e-12);
  }
}

TEST(Bank, RejectsUnresolvedRange) {
  Grid g(1, 32, 1.0);
  EXPECT_THROW(build_dyadic_bank(g, -1, 3), Error); // 2^-1 below spacing 1
  EXPECT_THROW(build_dyadic_bank(g, 0, 5), Error);  // 32 above Nyquist 16
  EXPECT_THROW(build_dyadic_bank(g, 0, 2), Error);  // too few scales
  try {
    build_dyadic_bank(g, 0, 5);
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::resolution);
  }
}

TEST(Windows, PlateausAndSupports) {
  EXPECT_EQ(annulus_window_value(1.0), 1.0);
  EXPECT_EQ(annulus_window_value(0.5), 0.0);
  EXPECT_EQ(annulus_window_value(2.0), 0.0);
  EXPECT_EQ(tilde_window_value(1.0 / 200), 0.0);
  EXPECT_EQ(tilde_window_value(150.0), 0.0);
  // a point in supp(phi_hat (x) psi_hat): |xi| <= 1, 1/2 <= |eta| <= 2
  for (double xi : {0.0, 0.3, 1.0})
    for (double eta : {0.5, 1.0, 2.0})
      EXPECT_EQ(tilde_window_value(std::hypot(xi, eta)), 1.0);
  Grid g(2, 128, 16.0);
  auto w = window_theta(g, WindowKind::annulus_window);
  for (std::size_t f = 0; f < g.size(); ++f) {
    double r = radius_at(g, f);
    if (r >= 0.75 && r <= 1.5) {
      EXPECT_EQ(w.samples[f].real(), 1.0);
    }
    if (r <= 0.5 || r >= 2) {
      EXPECT_EQ(w.samples[f].real(), 0.0);
    }
  }
  EXPECT_THROW(window_theta(Grid(1, 8, 2.0), WindowKind::annulus_window), Error);
  EXPECT_EQ(parse_window_kind("tilde"), WindowKind::tilde_window);
  EXPECT_THROW(parse_window_kind("box"), Error);
}

TEST(Bump, ProfileRange) {
  Bump b({0.5}, 0.1, 0.2);
  EXPECT_EQ(b(0.5), 1.0);
  EXPECT_EQ(b(0.6), 1.0);
  EXPECT_EQ(b(0.7), 0.0);
  for (double x = 0; x < 1; x += 0.013) {
    EXPECT_GE(b(x), 0.0);
    EXPECT_LE(b(x), 1.0);
  }
  EXPECT_THROW(Bump({0.0}, 0.3, 0.2), Error);
}

TEST(BumpDecomposition, ReconstructsGaussian) {
  Grid g(1, 1024, 64.0);
  Cube I{{0.0}, 0.25};
  auto v = sample(g, Domain::spatial, [](std::span<const double> x) { return cplx(std::exp(-x[0] * x[0] / 0.01)); });
  auto pieces = compact_bump_decomposition(v, I, 8, 10);
  ASSERT_EQ(pieces.size(), 9u);
  GridFunction sum(g, Domain::spatial);
  for (const auto &p : pieces) {
    EXPECT_NEAR(p.weight, std::exp2(-10.0 * (&p - pieces.data())), 0.0);
    sum += p.weight * p.piece;
  }
  double err = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    err = std::max(err, std::abs(sum.samples[i] - v.samples[i]));
  EXPECT_LE(err, 1e-8);
  // piece 3 vanishes outside 2^3 I (half side 4 * 0.25 / 2 ... sup distance >= 2^3 * side / 2)
  const auto &p3 = pieces[3].piece;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (std::abs(g.coordinate(i)) >= 8 * I.side / 2) {
      EXPECT_EQ(p3.samples[i], cplx(0));
    }
}

TEST(BumpDecomposition, MeanZeroPieces) {
  Grid g(1, 1024, 64.0);
  FilterBank bank = build_dyadic_bank(g, -2, 3);
  GridFunction psi = transform(bank.psi_hat.at(1), Direction::inverse);
  auto pieces = compact_bump_decomposition(psi, Cube{{0.0}, 1.0}, 5, 2.0);
  for (const auto &p : pieces) {
    cplx m = 0;
    for (auto x : p.piece.samples)
      m += x * g.spacing();
    EXPECT_LT(std::abs(m), 1e-10);
  }
}

TEST(BumpDecomposition, TailWithinGeometricBound) {
  // residual after mu_max levels stays below 2^{-c mu_max} max|v| for a fast-decaying bump
  Grid g(1, 2048, 64.0);
  auto v = sample(g, Domain::spatial, [](std::span<const double> x) { return cplx(std::exp(-x[0] * x[0] / 0.001)); });
  for (int mu = 1; mu <= 7; ++mu) {
    auto pieces = compact_bump_decomposition(v, Cube{{0.0}, 0.25}, mu, 2.0);
    GridFunction sum(g, Domain::spatial);
    for (const auto &p : pieces)
      sum += p.weight * p.piece;
    double err = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
      err = std::max(err, std::abs(sum.samples[i] - v.samples[i]));
    EXPECT_LE(err, std::exp2(-2.0 * mu));
  }
}

TEST(BumpDecomposition, NonDecayingInputRaisesTailBound) {
  Grid g(1, 256, 64.0);
  auto v = sample(g, Domain::spatial, [](std::span<const double>) { return cplx(1.0); });
  try {
    compact_bump_decomposition(v, Cube{{0.0}, 0.25}, 3, 10);
    FAIL() << "expected tail_bound error";
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::tail_bound);
  }
}
