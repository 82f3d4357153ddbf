#pragma once

// Dyadic Littlewood-Paley bank, windows, smooth bumps, compact bump decomposition.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "grid.hpp"

namespace hormlab {

// C-infinity step: 0 for x <= 0, 1 for x >= 1.
inline double smooth_step(double x) {
  if (x <= 0)
    return 0.0;
  if (x >= 1)
    return 1.0;
  double a = std::exp(-1.0 / x);
  double b = std::exp(-1.0 / (1.0 - x));
  return a / (a + b);
}

// 1 on [0, inner], 0 on [outer, inf), smooth in between.
inline double plateau_cutoff(double r, double inner, double outer) {
  return smooth_step((outer - r) / (outer - inner));
}

// beta = 1 on [0, 1/2], 0 on [1, inf).
inline double lp_beta(double r) { return plateau_cutoff(r, 0.5, 1.0); }

inline double psi_hat_value(int j, double r) {
  return lp_beta(std::ldexp(r, -j - 1)) - lp_beta(std::ldexp(r, -j));
}

// Low-pass companion at scale j: 1 for r <= 2^{j-sep-1}, 0 for r >= 2^{j-sep}.
inline double phi_hat_value(int j, int separation, double r) { return lp_beta(std::ldexp(r, -(j - separation))); }

// Wide band window: 1 on [2^{j-2}, 2^{j+2}], 0 outside (2^{j-3}, 2^{j+3}).
inline double psi_tilde_value(int j, double r) {
  double lo = std::ldexp(1.0, j - 3), lo1 = std::ldexp(1.0, j - 2);
  double hi1 = std::ldexp(1.0, j + 2), hi = std::ldexp(1.0, j + 3);
  return smooth_step((r - lo) / (lo1 - lo)) * plateau_cutoff(r, hi1, hi);
}

// Wide low-pass: 1 on [0, 2^{j+2}], 0 beyond 2^{j+3}.
inline double phi_tilde_value(int j, double r) {
  return plateau_cutoff(r, std::ldexp(1.0, j + 2), std::ldexp(1.0, j + 3));
}

enum class WindowKind { annulus_window, tilde_window };

// Theta: 1 on [3/4, 3/2], supported in (1/2, 2).
inline double annulus_window_value(double r) { return smooth_step((r - 0.5) / 0.25) * plateau_cutoff(r, 1.5, 2.0); }

// Theta tilde: 1 on [1/8, 32], supported in (1/100, 100).
inline double tilde_window_value(double r) {
  return smooth_step((r - 0.01) / (0.125 - 0.01)) * plateau_cutoff(r, 32.0, 100.0);
}

inline double window_value(WindowKind kind, double r) {
  return kind == WindowKind::annulus_window ? annulus_window_value(r) : tilde_window_value(r);
}

inline WindowKind parse_window_kind(const std::string &s) {
  if (s == "annulus_window" || s == "annulus")
    return WindowKind::annulus_window;
  if (s == "tilde_window" || s == "tilde")
    return WindowKind::tilde_window;
  throw Error(ErrorKind::parameter, "unknown window kind '" + s + "'");
}

struct Bump {
  std::vector<double> center;
  double inner_radius = 0.5;
  double outer_radius = 1.0;

  Bump() = default;
  Bump(std::vector<double> c, double inner, double outer) : center(std::move(c)), inner_radius(inner), outer_radius(outer) {
    require(inner > 0 && outer > inner, ErrorKind::parameter, "bump radii must satisfy 0 < inner < outer");
  }

  double profile(double r) const { return plateau_cutoff(r, inner_radius, outer_radius); }

  double operator()(std::span<const double> x) const {
    double r2 = 0;
    for (std::size_t a = 0; a < x.size(); ++a) {
      double c = a < center.size() ? center[a] : 0.0;
      r2 += (x[a] - c) * (x[a] - c);
    }
    return profile(std::sqrt(r2));
  }
  double operator()(double x) const { return profile(std::abs(x - (center.empty() ? 0.0 : center[0]))); }
};

inline double radius(std::span<const double> v) {
  double s = 0;
  for (double x : v)
    s += x * x;
  return std::sqrt(s);
}

struct FilterBank {
  Grid grid;
  int j_min = 0;
  int j_max = 0;
  int separation = 2;
  std::map<int, GridFunction> psi_hat;
  std::map<int, GridFunction> phi_hat;

  double band_low() const { return std::ldexp(1.0, j_min); }
  double band_high() const { return std::ldexp(1.0, j_max); }
  bool in_band(double r) const { return r >= band_low() && r <= band_high(); }
};

namespace detail {
inline std::vector<double> radial_frequencies(const Grid &g) {
  std::vector<double> r(g.size());
  std::vector<std::size_t> idx(g.dims);
  for (std::size_t f = 0; f < g.size(); ++f) {
    g.unravel(f, idx);
    double s = 0;
    for (int a = 0; a < g.dims; ++a) {
      double x = g.frequency(idx[a]);
      s += x * x;
    }
    r[f] = std::sqrt(s);
  }
  return r;
}
} // namespace detail

inline FilterBank build_dyadic_bank(const Grid &grid, int j_min, int j_max, int separation = 2) {
  grid.validate();
  require(j_max - j_min >= 3, ErrorKind::parameter, "bank needs j_max - j_min >= 3");
  require(separation >= 1, ErrorKind::parameter, "bank separation must be >= 1");
  require(std::ldexp(1.0, j_min) >= 1.0 / grid.period, ErrorKind::resolution,
          "2^j_min is below the frequency spacing 1/P");
  require(std::ldexp(1.0, j_max) <= grid.nyquist(), ErrorKind::resolution, "2^j_max exceeds the Nyquist frequency");
  FilterBank bank;
  bank.grid = grid;
  bank.j_min = j_min;
  bank.j_max = j_max;
  bank.separation = separation;
  const auto r = detail::radial_frequencies(grid);
  for (int j = j_min; j <= j_max; ++j) {
    GridFunction ps(grid, Domain::spectral), ph(grid, Domain::spectral);
    for (std::size_t f = 0; f < r.size(); ++f) {
      ps.samples[f] = psi_hat_value(j, r[f]);
      ph.samples[f] = phi_hat_value(j, separation, r[f]);
    }
    bank.psi_hat.emplace(j, std::move(ps));
    bank.phi_hat.emplace(j, std::move(ph));
  }
  // telescoping sum is 1 up to rounding on the band; renormalize so it is 1 to the last bit
  for (std::size_t f = 0; f < r.size(); ++f) {
    if (!bank.in_band(r[f]))
      continue;
    double s = 0;
    for (int j = j_min; j <= j_max; ++j)
      s += bank.psi_hat[j].samples[f].real();
    for (int j = j_min; j <= j_max; ++j)
      bank.psi_hat[j].samples[f] /= s;
  }
  return bank;
}

inline GridFunction window_theta(const Grid &grid, WindowKind kind) {
  grid.validate();
  if (kind == WindowKind::annulus_window) {
    require(1.0 / grid.period <= 0.25, ErrorKind::resolution, "annulus window needs frequency spacing <= 1/4");
    require(grid.nyquist() > 0.75, ErrorKind::resolution, "annulus window plateau is above Nyquist");
  } else {
    require(1.0 / grid.period <= 0.1, ErrorKind::resolution, "tilde window needs frequency spacing <= 1/10");
    require(grid.nyquist() > 0.125, ErrorKind::resolution, "tilde window plateau is above Nyquist");
  }
  const auto r = detail::radial_frequencies(grid);
  GridFunction w(grid, Domain::spectral);
  for (std::size_t f = 0; f < r.size(); ++f)
    w.samples[f] = window_value(kind, r[f]);
  return w;
}

struct Cube {
  std::vector<double> center;
  double side = 1.0;
};

struct BumpPiece {
  double weight;
  GridFunction piece;
};

namespace detail {
// periodic sup-distance per axis
inline double torus_delta(double x, double c, double period) {
  double d = std::fmod(x - c, period);
  if (d < -period / 2)
    d += period;
  if (d >= period / 2)
    d -= period;
  return d;
}
} // namespace detail

// v = sum_mu 2^{-c mu} piece_mu with piece_mu supported in 2^mu I (mean zero if v has mean zero).
inline std::vector<BumpPiece> compact_bump_decomposition(const GridFunction &v, const Cube &cube, int mu_max,
                                                         double c_exp = 10.0) {
  v.check();
  require(v.domain == Domain::spatial, ErrorKind::structural, "bump decomposition expects a spatial function");
  require(mu_max >= 1, ErrorKind::parameter, "mu_max must be >= 1");
  require(c_exp > 0, ErrorKind::parameter, "c_exp must be positive");
  require(static_cast<int>(cube.center.size()) == v.grid.dims, ErrorKind::structural, "cube center dimension mismatch");
  require(cube.side > 0, ErrorKind::parameter, "cube side must be positive");
  const Grid &g = v.grid;
  const double vol = g.cell_volume();
  std::vector<std::size_t> idx(g.dims);

  auto cutoff = [&](double inner, double outer) {
    GridFunction eta(g, Domain::spatial);
    for (std::size_t f = 0; f < g.size(); ++f) {
      g.unravel(f, idx);
      double val = 1.0;
      for (int a = 0; a < g.dims; ++a)
        val *= plateau_cutoff(std::abs(detail::torus_delta(g.coordinate(idx[a]), cube.center[a], g.period)), inner,
                              outer);
      eta.samples[f] = val;
    }
    return eta;
  };

  // rho: bump inside I with unit quadrature mass
  GridFunction rho = cutoff(cube.side / 8, cube.side / 2);
  cplx mass = 0;
  for (const auto &x : rho.samples)
    mass += x;
  require(std::abs(mass) > 0, ErrorKind::resolution, "cube is smaller than one grid cell");
  for (auto &x : rho.samples)
    x /= mass * vol;

  auto integral = [&](const GridFunction &x) {
    return pairwise_sum<cplx>(x.size(), [&](std::size_t i) { return x.samples[i]; }) * vol;
  };
  const cplx total = integral(v);

  // d_mu = S_mu - (d_0 + ... + d_{mu-1}) with S_mu = eta_mu v; the mean of d_mu is moved onto rho
  // (twice, so the correction is exact to rounding of d_mu itself, not of v)
  std::vector<BumpPiece> out;
  GridFunction partial(g, Domain::spatial);
  for (int mu = 0; mu <= mu_max; ++mu) {
    double scale = std::ldexp(cube.side, mu);
    GridFunction eta = cutoff(scale / 4, scale / 2);
    GridFunction d(g, Domain::spatial);
    for (std::size_t f = 0; f < g.size(); ++f)
      d.samples[f] = v.samples[f] * eta.samples[f] - partial.samples[f];
    const cplx target = mu == 0 ? total : cplx(0);
    for (int pass = 0; pass < 2; ++pass) {
      const cplx excess = integral(d) - target;
      for (std::size_t f = 0; f < g.size(); ++f)
        d.samples[f] -= excess * rho.samples[f];
    }
    partial += d;
    const double w = std::exp2(-c_exp * mu);
    d *= 1.0 / w;
    out.push_back({w, std::move(d)});
  }
  const GridFunction &prev = partial;

  double resid = 0, vmax = max_abs(v);
  for (std::size_t f = 0; f < g.size(); ++f)
    resid = std::max(resid, std::abs(v.samples[f] - prev.samples[f]));
  const double allowed = (std::exp2(-c_exp * mu_max) + 1e-13) * vmax;
  if (resid > allowed)
    throw Error(ErrorKind::tail_bound, "truncation tail " + std::to_string(resid) + " exceeds bound " +
                                           std::to_string(allowed) + "; input does not decay inside 2^mu_max I");
  return out;
}

} // namespace hormlab
