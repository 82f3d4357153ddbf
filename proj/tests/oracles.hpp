#pragma once

// Independent reference computations shared by the unit tests and the acceptance binary.

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <complex>
#include <numbers>
#include <algorithm>
#include <map>

#include "hormlab/filters.hpp"
#include "hormlab/maximal.hpp"

namespace oracle {

// Inverse transform of a radial plateau bump on the line (1 on [-a, a], 0 beyond b), by
// quadrature: 2 * int_0^b profile(x) cos(2 pi x y) dx.
inline double plateau_bump_check(double a, double b, double y) {
  const double w = 2 * std::numbers::pi * y;
  double flat = std::abs(w) < 1e-300 ? a : std::sin(w * a) / w;
  using GL = boost::math::quadrature::gauss<double, 30>;
  // a few nodes per oscillation; the transform decays only like exp(-c sqrt(y))
  const int panels = std::max(40, static_cast<int>(std::ceil(2 * std::abs(y) * (b - a))));
  double h = (b - a) / panels, s = 0;
  for (int q = 0; q < panels; ++q) {
    double lo = a + q * h;
    s += GL::integrate([&](double x) { return hormlab::plateau_cutoff(x, a, b) * std::cos(w * x); }, lo, lo + h);
  }
  return 2 * (flat + s);
}

// Closed form of the tensor-bump output on the line: #E N^{-l} vcheck(x/N)^l e^{2 pi i x}.
inline std::complex<double> tensor_bump_output(double x, int N, int l, std::size_t cardE) {
  double v = plateau_bump_check(1.0 / 200, 1.0 / 100, x / N);
  return static_cast<double>(cardE) * std::pow(static_cast<double>(N), -l) * std::pow(v, l) *
         std::polar(1.0, 2 * std::numbers::pi * x);
}

// The same output on a grid of period P (an integer multiple of N): every argument is the
// periodization of its continuous counterpart, so the product periodizes factor by factor.
inline std::complex<double> tensor_bump_output_periodic(double x, int N, int l, std::size_t cardE, double P,
                                                        int wraps = 12) {
  double v = 0;
  for (int w = -wraps; w <= wraps; ++w)
    v += plateau_bump_check(1.0 / 200, 1.0 / 100, (x + w * P) / N);
  return static_cast<double>(cardE) * std::pow(static_cast<double>(N), -l) * std::pow(v, l) *
         std::polar(1.0, 2 * std::numbers::pi * x);
}

namespace detail_hybrid {
using namespace hormlab;
// Definition-level hybrid: direct DFT convolution, explicit loops over (j, k), cells and every
// unwrapped lattice point of the inner ball.
inline GridFunction brute_hybrid(const GridFunction &F, const HybridSpec &s) {
  const Grid &g = F.grid;
  const std::size_t N = g.points;
  const double h = g.spacing(), P = g.period;
  const FilterBank &bank = *s.bank;
  const double rho = 6.0;
  const bool low1 = s.kind == HybridKind::MS || s.kind == HybridKind::MM;
  const bool low2 = s.kind == HybridKind::SM || s.kind == HybridKind::MM;
  // spectrum by direct summation
  std::vector<cplx> Fh(g.size());
  for (std::size_t a = 0; a < N; ++a)
    for (std::size_t b = 0; b < N; ++b) {
      cplx acc = 0;
      for (std::size_t x = 0; x < N; ++x)
        for (std::size_t y = 0; y < N; ++y)
          acc += F.samples[x * N + y] *
                 std::polar(1.0, -2 * M_PI * (g.frequency(a) * g.coordinate(x) + g.frequency(b) * g.coordinate(y)));
      Fh[a * N + b] = acc * h * h;
    }
  std::map<std::pair<int, int>, std::vector<double>> V; // per (j, k): value at each grid point
  for (int j = bank.j_min; j <= bank.j_max; ++j)
    for (int k = bank.j_min; k <= bank.j_max; ++k) {
      const auto &A = low1 ? bank.phi_hat.at(j) : bank.psi_hat.at(j);
      const auto &B = low2 ? bank.phi_hat.at(k) : bank.psi_hat.at(k);
      std::vector<cplx> G(g.size());
      for (std::size_t x = 0; x < N; ++x)
        for (std::size_t y = 0; y < N; ++y) {
          cplx acc = 0;
          for (std::size_t a = 0; a < N; ++a)
            for (std::size_t b = 0; b < N; ++b) {
              cplx w = Fh[a * N + b] * A.samples[a] * B.samples[b];
              if (w != cplx(0))
                acc += w * std::polar(1.0, 2 * M_PI * (g.frequency(a) * g.coordinate(x) + g.frequency(b) * g.coordinate(y)));
            }
          G[x * N + y] = acc / (P * P);
        }
      const double c1 = std::ldexp(1.0, s.M1 - j), c2 = std::ldexp(1.0, s.M2 - k);
      std::vector<double> out(g.size());
      std::map<std::pair<double, double>, double> seen;
      for (std::size_t x = 0; x < N; ++x)
        for (std::size_t y = 0; y < N; ++y) {
          const double m1 = std::floor(g.coordinate(x) / c1), m2 = std::floor(g.coordinate(y) / c2);
          if (auto it = seen.find({m1, m2}); it != seen.end()) {
            out[x * N + y] = it->second;
            continue;
          }
          const long i0 = static_cast<long>(std::floor(c1 * (m1 - rho) / h)) - 1,
                     i1 = static_cast<long>(std::ceil(c1 * (m1 + rho) / h)) + 1;
          const long k0 = static_cast<long>(std::floor(c2 * (m2 - rho) / h)) - 1,
                     k1 = static_cast<long>(std::ceil(c2 * (m2 + rho) / h)) + 1;
          double sum = 0;
          for (long i = i0; i <= i1; ++i)
            for (long t = k0; t <= k1; ++t) {
              double y1 = i * h / c1 - m1, y2 = t * h / c2 - m2;
              if (y1 * y1 + y2 * y2 <= rho * rho)
                sum += std::pow(std::abs(G[g.wrap_index(i) * N + g.wrap_index(t)]), s.u);
            }
          out[x * N + y] = seen[{m1, m2}] = std::pow(sum * (h / c1) * (h / c2), 1 / s.u);
        }
      V[{j, k}] = out;
    }
  GridFunction res(g, Domain::spatial);
  for (std::size_t x = 0; x < g.size(); ++x) {
    double outer = 0;
    for (int j = bank.j_min; j <= bank.j_max; ++j) {
      double sum = 0, sup = 0;
      for (int k = bank.j_min; k <= bank.j_max; ++k) {
        double v = V[{j, k}][x];
        sum += v * v;
        sup = std::max(sup, v);
      }
      switch (s.kind) {
      case HybridKind::SS: outer += sum; break;
      case HybridKind::MS: outer = std::max(outer, std::sqrt(sum)); break;
      case HybridKind::SM: outer += sup * sup; break;
      case HybridKind::MM: outer = std::max(outer, sup); break;
      }
    }
    res.samples[x] = (s.kind == HybridKind::SS || s.kind == HybridKind::SM) ? std::sqrt(outer) : outer;
  }
  return res;
}
} // namespace detail_hybrid

using detail_hybrid::brute_hybrid;

} // namespace oracle
