#pragma once

// Numerical invariants checked by `hormlab selftest` and by the acceptance binary.

#include <random>
#include <string>
#include <vector>

#include "experiments.hpp"
#include "filters.hpp"
#include "maximal.hpp"
#include "multiplier.hpp"

namespace hormlab {

struct InvariantCheck {
  std::string name;
  double value = 0;     // measured discrepancy
  double tolerance = 0;
  bool pass = false;
};

struct SelftestResult {
  std::vector<InvariantCheck> checks;
  bool pass() const {
    for (const auto &c : checks)
      if (!c.pass)
        return false;
    return !checks.empty();
  }
};

namespace detail {

// Exhaustive 1-D uncentered maximal function over all periodic windows.
inline std::vector<double> exhaustive_maximal_1d(const GridFunction &f) {
  const std::size_t N = f.grid.points;
  std::vector<double> out(N, 0.0);
  for (std::size_t x = 0; x < N; ++x)
    for (std::size_t L = 1; L <= N; ++L)
      for (std::size_t back = 0; back < L; ++back) {
        double s = 0;
        for (std::size_t t = 0; t < L; ++t)
          s += std::abs(f.samples[(x + N - back + t) % N]);
        out[x] = std::max(out[x], s / static_cast<double>(L));
      }
  return out;
}

inline SeparableSum selftest_separable(std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  SeparableSum s;
  s.factors.resize(2);
  for (int i = 0; i < 2; ++i) {
    s.factors[i].push_back(make_factor("bump", {0.4, 1.5, u(rng)}));
    s.factors[i].push_back(make_factor("mode", {u(rng)}));
  }
  s.terms = {{0, 1}, {1, 0}, {1, 1}};
  for (int t = 0; t < 3; ++t)
    s.coeffs.push_back(cplx(u(rng), u(rng)));
  return s;
}

} // namespace detail

inline SelftestResult run_selftest(std::uint64_t seed = 2024) {
  SelftestResult R;
  auto add = [&](std::string name, double v, double tol) { R.checks.push_back({std::move(name), v, tol, v <= tol}); };
  std::mt19937_64 rng(seed);

  {
    Grid g(2, 32, 5.0);
    auto f = random_band_limited(g, 7, rng);
    auto F = transform(f, Direction::forward);
    add("parseval", std::abs(lp_norm(f, NormSpec::lebesgue(2)) / spectral_l2(F) - 1), 1e-10);
    add("fft_round_trip", relative_error(transform(F, Direction::inverse), f), 1e-12);
  }
  {
    Grid g(2, 64, 4.0);
    FilterBank bank = build_dyadic_bank(g, -2, 3);
    std::vector<std::size_t> idx(2);
    double worst = 0;
    for (std::size_t f = 0; f < g.size(); ++f) {
      g.unravel(f, idx);
      double r = std::hypot(g.frequency(idx[0]), g.frequency(idx[1]));
      if (r < std::ldexp(1.0, bank.j_min) || r > std::ldexp(1.0, bank.j_max - 1))
        continue;
      double s = 0;
      for (const auto &[j, ps] : bank.psi_hat)
        s += ps.samples[f].real();
      worst = std::max(worst, std::abs(s - 1));
    }
    add("partition_of_unity", worst, 1e-12);
  }
  {
    Grid g(1, 16, 2.0);
    auto sep = make_separable({2, 1, 1}, detail::selftest_separable(rng));
    auto dense = to_dense(sep, g);
    auto f = random_band_limited(g, 6, rng), h = random_band_limited(g, 6, rng);
    add("dense_vs_separable", relative_error(apply_multilinear(sep, {f, h}), apply_multilinear(dense, {f, h})), 1e-9);
  }
  {
    Grid g(2, 16, 2.0);
    auto f = random_band_limited(g, 7, rng), h = random_band_limited(g, 7, rng);
    auto out = apply_multilinear(constant_symbol({2, 2, 1}, 1.0), {f, h});
    Grid og = output_grid(g, 2, true);
    auto up = [&](const GridFunction &x) {
      return transform(pad_spectrum(transform(x, Direction::forward), og.points), Direction::inverse);
    };
    add("unit_symbol_product", relative_error(out, pointwise_product(up(f), up(h))), 1e-10);
  }
  {
    Grid g(1, 32, 2.0);
    std::normal_distribution<double> nd;
    GridFunction f(g, Domain::spatial);
    for (auto &v : f.samples)
      v = cplx(nd(rng), nd(rng));
    auto fast = maximal(f, RectangleFamily{});
    auto slow = detail::exhaustive_maximal_1d(f);
    double worst = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
      worst = std::max(worst, std::abs(fast.samples[i].real() - slow[i]) / slow[i]);
    add("maximal_exhaustive", worst, 1e-12);
  }
  return R;
}

} // namespace hormlab
