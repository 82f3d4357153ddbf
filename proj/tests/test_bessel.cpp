#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <chrono>
#include <numbers>
#include <random>

#include "hormlab/bessel.hpp"
#include "hormlab/norms.hpp"

using namespace hormlab;

namespace {

constexpr double kPi = std::numbers::pi;

// H^(rho) = 2 int_0^inf H(y) cos(2 kPi rho y) dy by double-exponential Fourier quadrature.
double transform_oracle(double t, double gamma, double rho) {
  boost::math::quadrature::ooura_fourier_cos<double> oc(1e-11);
  auto f = [&](double y) {
    double L = std::log1p(4 * kPi * kPi * y * y);
    return std::exp(-0.5 * t * L) * std::pow(1 + L, -0.5 * gamma);
  };
  return 2 * oc.integrate(f, 2 * kPi * rho).first;
}

} // namespace

TEST(BesselKernel, PointValues) {
  for (double t : {0.3, 1.0, 2.5})
    for (double g : {0.1, 2.0})
      EXPECT_EQ(bessel_kernel(t, g, 0.0), 1.0);
  const double ref = 1 / (1 + 4 * kPi * kPi) / (1 + std::log(1 + 4 * kPi * kPi));
  EXPECT_NEAR(bessel_kernel(2, 2, 1.0), ref, 1e-15);
  std::vector<double> x{0.6, 0.8};
  EXPECT_NEAR(bessel_kernel(2, 2, x), ref, 1e-15);
  EXPECT_THROW(bessel_kernel(0, 1, 1.0), Error);
  EXPECT_THROW(bessel_kernel(1, -1, 1.0), Error);
}

TEST(BesselKernel, PositiveBoundedMonotone) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0, 50);
  for (int i = 0; i < 100; ++i) {
    double a = U(rng), b = U(rng);
    if (a == b)
      continue;
    double r1 = std::min(a, b), r2 = std::max(a, b);
    double h1 = bessel_kernel(0.7, 1.3, r1), h2 = bessel_kernel(0.7, 1.3, r2);
    EXPECT_GT(h1, h2);
    EXPECT_GT(h2, 0);
    EXPECT_LE(h1, 1);
  }
  // log form agrees with the direct one
  for (double r : {1e-3, 0.5, 7.0, 1e4})
    EXPECT_NEAR(bessel_log_kernel_at_log_radius(0.7, 1.3, std::log(r)), std::log(bessel_kernel(0.7, 1.3, r)), 1e-12);
}

TEST(BesselTransform, MatchesFourierQuadrature) {
  for (double t : {0.25, 0.5, 0.75, 1.5})
    for (double rho : {0.05, 0.3, 1.0, 2.5}) {
      double mine = bessel_transform_1d(t, 1.0, rho);
      double ref = transform_oracle(t, 1.0, rho);
      EXPECT_NEAR(mine, ref, 1e-7 * std::abs(ref) + 1e-10) << "t=" << t << " rho=" << rho;
    }
}

TEST(BesselDichotomy, KernelPartialsMatchDirectQuadrature) {
  // 2 int_0^R H(r)^u dr on the line for moderate R
  const double R = std::exp(4.0);
  for (double t : {0.5, 2.0}) {
    double ref = 2 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                         [&](double r) { return std::pow(bessel_kernel(t, 1.0, r), 2.0); }, 0.0, R, 15, 1e-13);
    auto v = detail::kernel_log_partials(t, 1.0, 1, 2.0, {4.0});
    EXPECT_NEAR(std::exp(v[0]), ref, 1e-5 * ref) << "t=" << t;
  }
  // sphere area in the plane: 2 kPi int_0^R r H(r) dr
  double ref2 = 2 * kPi * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                             [&](double r) { return r * bessel_kernel(3.0, 1.0, r); }, 0.0, R, 15, 1e-13);
  auto v2 = detail::kernel_log_partials(3.0, 1.0, 2, 1.0, {4.0});
  EXPECT_NEAR(std::exp(v2[0]), ref2, 1e-5 * ref2);
}

TEST(BesselDichotomy, SpecExamples) {
  for (int dim : {1, 2}) {
    const double u = 2;
    auto a = bessel_norm_dichotomy(dim / u, 3 / u, dim, u, BesselSide::kernel);
    EXPECT_EQ(a.verdict, Convergence::convergent) << dim;
    auto b = bessel_norm_dichotomy(dim / u, 2 / u, dim, u, BesselSide::kernel);
    EXPECT_EQ(b.verdict, Convergence::divergent) << dim;
    for (double r : b.ratios)
      EXPECT_GT(r, dichotomy_ratio_threshold);
    auto c = bessel_norm_dichotomy(dim / u + 0.5, 0.01, dim, u, BesselSide::kernel);
    EXPECT_EQ(c.verdict, Convergence::convergent) << dim;
  }
}

TEST(BesselDichotomy, GridAroundCriticalLineBothSides) {
  auto t0 = std::chrono::steady_clock::now();
  int wrong = 0;
  for (BesselSide side : {BesselSide::kernel, BesselSide::transform})
    for (double t : {0.25, 0.5, 0.75})
      for (double g : {0.5, 1.0, 1.5}) {
        auto r = bessel_norm_dichotomy(t, g, 1, 2.0, side);
        EXPECT_EQ(r.verdict, r.predicted) << to_string(side) << " t=" << t << " gamma=" << g;
        wrong += r.verdict != r.predicted;
        if (t == 0.5 && g <= 1.0) {
          EXPECT_EQ(r.verdict, Convergence::divergent);
        }
      }
  EXPECT_EQ(wrong, 0);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(secs, 5.0);
}

TEST(BesselDichotomy, PredictionAndValidation) {
  EXPECT_TRUE(bessel_predicted_finite(0.6, 0.1, 1, 2, BesselSide::kernel));
  EXPECT_FALSE(bessel_predicted_finite(0.5, 1.0, 1, 2, BesselSide::kernel));
  EXPECT_TRUE(bessel_predicted_finite(0.5, 1.01, 1, 2, BesselSide::kernel));
  // transform side uses the dual exponent: dim / u' with u = 4 gives 3/4
  EXPECT_FALSE(bessel_predicted_finite(0.7, 5.0, 1, 4, BesselSide::transform));
  EXPECT_TRUE(bessel_predicted_finite(0.75, 0.6, 1, 4, BesselSide::transform));
  EXPECT_THROW(bessel_norm_dichotomy(0.5, 1, 1, 2, BesselSide::kernel, {1, 2, 3, 4}), Error);
  EXPECT_THROW(bessel_norm_dichotomy(0.5, 1, 1, 2, BesselSide::kernel, {1, 20, 10, 40}), Error);
  EXPECT_THROW(bessel_norm_dichotomy(0.5, 1, 2, 2, BesselSide::transform), Error);
  EXPECT_EQ(ratio_verdict({1.5, 1.01, 1.03, 1.0}), Convergence::inconclusive);
}

TEST(BesselWindows, ThetaProperties) {
  const int l = 2;
  EXPECT_EQ(theta_hat(1.0 / (200 * l) + 1e-9, l), 0.0);
  EXPECT_GT(theta_hat(0.0, l), 0.0);
  EXPECT_NEAR(theta_hat(1e-3, l), theta_hat(-1e-3, l), 1e-18);
  EXPECT_GT(theta_spatial(0.0, l), 0.0);
  for (double x : {13.0, 700.0, 2500.0})
    EXPECT_GE(theta_spatial(x, l), 0.0);
  // int theta = theta^(0) (Plancherel)
  double s = 0, dx = 4;
  for (double x = -30000; x <= 30000; x += dx)
    s += theta_spatial(x, l) * dx;
  EXPECT_NEAR(s, theta_hat(0.0, l), 1e-4 * theta_hat(0.0, l));
  EXPECT_EQ(theta_tilde_hat(1.0 / (10 * l), l), 0.0);
  EXPECT_EQ(theta_tilde_hat(1.0 / (100 * l), l), 1.0);
}

TEST(BesselMultiplier, RotationSendsDiagonalToOrigin) {
  for (int l : {2, 3})
    for (int n : {1, 2}) {
      auto nu = bessel_nu(l, n);
      std::vector<double> xi;
      for (int i = 0; i < l; ++i)
        xi.insert(xi.end(), nu.begin(), nu.end());
      auto R = rotation_R(xi, l, n);
      for (double v : R)
        EXPECT_NEAR(v, 0.0, 1e-15);
    }
  // linear part is invertible: distinct points map to distinct images
  std::vector<double> a{0.3, 0.9}, b{0.9, 0.3};
  EXPECT_NE(rotation_R(a, 2, 1), rotation_R(b, 2, 1));
}

TEST(BesselMultiplier, ShiftedTableMatchesDirectSum) {
  BesselFamily fam{2.0, 2.0, 2, 2.0};
  Grid g(1, 256, 80.0);
  MultiplierRep m = bessel_multiplier(BesselFamily::Mode::shifted, fam, 2, 1, g);
  const double nu = 1 / std::sqrt(2.0);
  for (int dq1 : {-3, 0, 2})
    for (int dq2 : {-1, 0, 4}) {
      double q1 = std::round(nu * 80) + dq1, q2 = std::round(nu * 80) + dq2;
      std::vector<double> xi{q1 / 80, q2 / 80};
      cplx tab = symbol_value(m, xi);
      double w = theta_tilde_hat(std::abs(xi[0] - nu), 2) * theta_tilde_hat(std::abs(xi[1] - nu), 2);
      std::vector<double> z{xi[0] - nu, xi[1] - nu};
      cplx ref = w * truncated_bessel_hat(2.0, 2.0, 2.0, z);
      EXPECT_NEAR(std::abs(tab - ref), 0.0, 1e-10) << q1 << " " << q2;
    }
  // off-lattice points take the direct path
  std::vector<double> off{nu + 0.0013, nu - 0.002};
  std::vector<double> z{0.0013, -0.002};
  EXPECT_NEAR(std::abs(symbol_value(m, off) - truncated_bessel_hat(2, 2, 2, z)), 0.0, 1e-12);
}

TEST(BesselMultiplier, ShiftedZerosAndSupport) {
  BesselFamily fam{2.0, 2.0, 2, 2.0};
  Grid g(1, 256, 80.0);
  MultiplierRep m = bessel_multiplier(BesselFamily::Mode::shifted, fam, 2, 1, g);
  const double nu = 1 / std::sqrt(2.0);
  const double edge = 1.0 / 20;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  for (int i = 0; i < 200; ++i) {
    double a = U(rng), b = nu + 0.01 * U(rng);
    if (std::abs(a - nu) <= edge * 1.001)
      continue;
    std::vector<double> xi{a, b};
    EXPECT_EQ(symbol_value(m, xi), cplx(0));
  }
  ASSERT_TRUE(m.support);
  KRange k = auto_k_range(*m.support, WindowKind::annulus_window);
  EXPECT_EQ(k.lo, -1);
  EXPECT_EQ(k.hi, 1);
  // dilations outside {-1, 0, 1} give exactly zero windowed symbols
  SymbolGrid sg{Grid(2, 64, 4.0), {}};
  for (int kk : {-3, -2, 2, 3}) {
    std::vector<int> kv{kk};
    EXPECT_EQ(max_abs(windowed_symbol(m, kv, WindowKind::annulus_window, sg)), 0.0) << kk;
  }
  std::vector<int> k0{0};
  EXPECT_GT(max_abs(windowed_symbol(m, k0, WindowKind::annulus_window, sg)), 0.0);
  EXPECT_THROW(bessel_multiplier(BesselFamily::Mode::shifted, BesselFamily{2, 2, 2, std::nullopt}, 2, 1, g), Error);
  EXPECT_THROW(bessel_multiplier(BesselFamily::Mode::shifted, fam, 2, 1, Grid(1, 256, 10.0)), Error);
}

TEST(BesselMultiplier, SamplerMatchesPointwise) {
  BesselFamily fam{2.0, 2.0, 2, 2.0};
  Grid g(1, 256, 80.0);
  MultiplierRep m = bessel_multiplier(BesselFamily::Mode::shifted, fam, 2, 1, g);
  SymbolGrid sg{Grid(2, 64, 4.0), {0.01, -0.02}};
  for (int k : {-1, 0, 1}) {
    std::vector<int> kv{k};
    auto fast = m.sampler(sg, kv);
    MultiplierRep plain = m;
    plain.sampler = nullptr;
    auto slow = sample_dilated(plain, sg, kv);
    double err = 0, peak = 0;
    for (std::size_t f = 0; f < fast.size(); ++f) {
      err = std::max(err, std::abs(fast[f] - slow[f]));
      peak = std::max(peak, std::abs(slow[f]));
    }
    EXPECT_LT(err, 1e-9 * std::max(peak, 1e-300)) << k;
  }
}

TEST(BesselMultiplier, RotatedMatchesDefinition) {
  BesselFamily fam{0.5, 1.0, 1, std::nullopt, BesselFamily::Mode::rotated};
  Grid g(1, 256, 80.0);
  MultiplierRep m = bessel_multiplier(BesselFamily::Mode::rotated, fam, 2, 1, g);
  const double nu = 1 / std::sqrt(2.0);
  std::vector<double> xi{nu + 0.0011, nu + 0.0003};
  double sigma = (xi[0] + xi[1]) / 2;
  double ref = transform_oracle(0.5, 1.0, sigma - nu) * theta_hat(sigma - nu, 2) * theta_hat(sigma - xi[1], 2);
  EXPECT_NEAR(symbol_value(m, xi).real(), ref, 1e-7 * std::abs(ref));
  std::vector<double> far{nu + 0.01, nu};
  EXPECT_EQ(symbol_value(m, far), cplx(0));
  EXPECT_THROW(bessel_multiplier(BesselFamily::Mode::rotated, fam, 2, 2, Grid(2, 256, 80.0)), Error);
}

TEST(BesselMultiplier, NormBoundedWhileLowerBoundGrows) {
  // Parameter 1 of the tensorized family; the parameter-2 factor is the same for every M and
  // both the a-norm and the lower bound factorize across parameters.
  const double t = 2, gamma = 2, u = 2, s = 1; // s = l n / u
  Grid g(1, 256, 80.0);
  std::vector<double> norms, lower;
  for (double M : {4.0, 8.0, 16.0}) {
    MultiplierRep m = bessel_multiplier(BesselFamily::Mode::shifted, BesselFamily{t, gamma, 2, M}, 2, 1, g);
    ANormOptions opt;
    opt.symbol_grid = SymbolGrid{Grid(2, next_pow2(static_cast<std::size_t>(32 * M)), 4.0), {}};
    norms.push_back(a_norm(m, SobolevSpec{{s}, u}, opt));
    auto lb = bessel_lower_bound(t, gamma, M, 1.0, 1.0);
    EXPECT_TRUE(lb.converged);
    lower.push_back(lb.value);
  }
  for (std::size_t i = 1; i < norms.size(); ++i) {
    EXPECT_LT(norms[i], 1.25 * norms[0]);
    EXPECT_GT(lower[i], lower[i - 1]);
    EXPECT_GT(lower[i] / norms[i], lower[i - 1] / norms[i - 1]);
  }
}
