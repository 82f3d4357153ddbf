#pragma once

// Bessel-type kernel H(x) = (1+4pi^2|x|^2)^{-t/2} (1+ln(1+4pi^2|x|^2))^{-gamma/2}: pointwise values,
// the L^u integrability dichotomy of H and of its Fourier transform, and the multiplier families
// built from it (shifted, rotated) with the matching lower-bound functional.

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "counterexamples.hpp"
#include "multiplier.hpp"

namespace hormlab {

struct BesselFamily {
  enum class Mode { shifted, rotated, multiparam };
  double t = 1;
  double gamma = 1;
  int dim = 1;
  std::optional<double> M; // Gamma_M truncation scale
  Mode mode = Mode::shifted;
};

inline const char *to_string(BesselFamily::Mode m) {
  switch (m) {
  case BesselFamily::Mode::shifted: return "shifted";
  case BesselFamily::Mode::rotated: return "rotated";
  case BesselFamily::Mode::multiparam: return "multiparam";
  }
  return "?";
}

inline BesselFamily::Mode parse_bessel_mode(const std::string &s) {
  if (s == "shifted")
    return BesselFamily::Mode::shifted;
  if (s == "rotated")
    return BesselFamily::Mode::rotated;
  if (s == "multiparam")
    return BesselFamily::Mode::multiparam;
  throw Error(ErrorKind::parameter, "unknown Bessel mode '" + s + "'");
}

namespace detail {

inline constexpr double two_pi = 2 * std::numbers::pi;
inline const double log_4pi2 = std::log(4 * std::numbers::pi * std::numbers::pi);
inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

inline double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

inline double log_add(double a, double b) {
  if (a < b)
    std::swap(a, b);
  if (b == neg_inf)
    return a;
  return a + std::log1p(std::exp(b - a));
}

// log of int_0^h exp(g0 + (g1 - g0) x / h) dx
inline double log_exp_linear_panel(double g0, double g1, double h) {
  if (g0 == neg_inf || g1 == neg_inf) {
    double m = std::max(g0, g1);
    return m == neg_inf ? neg_inf : m + std::log(h / 2);
  }
  const double D = g1 - g0;
  if (std::abs(D) < 1e-8)
    return g0 + std::log(h) + D / 2;
  if (D > 0)
    return g1 + std::log(h) + std::log(-std::expm1(-D)) - std::log(D);
  return g0 + std::log(h) + std::log(-std::expm1(D)) - std::log(-D);
}

inline void check_bessel(double t, double gamma) {
  require(t > 0 && gamma > 0 && std::isfinite(t) && std::isfinite(gamma), ErrorKind::parameter,
          "Bessel kernel needs t, gamma > 0");
}

} // namespace detail

// ln H at radius r = e^s, stable for |s| up to ~1e300.
inline double bessel_log_kernel_at_log_radius(double t, double gamma, double s) {
  const double L = detail::softplus(2 * s + detail::log_4pi2); // ln(1 + 4 pi^2 r^2)
  return -0.5 * t * L - 0.5 * gamma * std::log1p(L);
}

inline double bessel_kernel(double t, double gamma, double r) {
  detail::check_bessel(t, gamma);
  const double L = std::log1p(4 * std::numbers::pi * std::numbers::pi * r * r);
  return std::exp(-0.5 * t * L) * std::pow(1 + L, -0.5 * gamma);
}

inline double bessel_kernel(double t, double gamma, std::span<const double> x) {
  return bessel_kernel(t, gamma, radius(x));
}

// ---------------------------------------------------------------------------------------------
// Fourier transform of H on the line, H^(rho) = 2 rho^{t-1} J(rho) with
// J = int_0^inf a(y) cos(2 pi y) dy, a(y) = (rho^2+4pi^2y^2)^{-t/2} (1+ln(1+4pi^2y^2/rho^2))^{-gamma/2}.

namespace detail {

// ln a(y) at rho = e^{-w}, given ln y.
inline double bessel_log_a(double t, double gamma, double w, double log_y) {
  const double X = log_4pi2 + 2 * log_y;
  const double lnP = log_add(-2 * w, X);
  const double lnQ = std::log1p(softplus(X + 2 * w));
  return -0.5 * t * lnP - 0.5 * gamma * lnQ;
}

inline double bessel_J(double t, double gamma, double w) {
  using GL = boost::math::quadrature::gauss<double, 10>;
  // [0, 1] in v = -ln y: integrand a(e^{-v}) cos(2 pi e^{-v}) e^{-v}
  const double V = std::max(0.0, t < 1 ? std::min(w, 40 / (1 - t)) : w) + 40;
  auto f0 = [&](double v) {
    double y = std::exp(-v);
    return std::exp(bessel_log_a(t, gamma, w, -v)) * std::cos(two_pi * y) * y;
  };
  double J = 0;
  for (double v = 0; v < V;) {
    double h = v < 5 ? 0.25 : 1.0;
    double v1 = std::min(V, v + h);
    J += GL::integrate(f0, v, v1);
    v = v1;
  }
  // [1, A] per unit interval, then one integration by parts for the tail (A integer)
  const int A = 100;
  auto f1 = [&](double y) { return std::exp(bessel_log_a(t, gamma, w, std::log(y))) * std::cos(two_pi * y); };
  for (int q = 1; q < A; ++q)
    J += GL::integrate(f1, q, q + 1.0);
  const double y = A;
  const double lnP = log_add(-2 * w, log_4pi2 + 2 * std::log(y));
  const double Q = 1 + softplus(log_4pi2 + 2 * std::log(y) + 2 * w);
  const double a = std::exp(bessel_log_a(t, gamma, w, std::log(y)));
  const double dlog = -8 * std::numbers::pi * std::numbers::pi * y * std::exp(-lnP) * (0.5 * t + 0.5 * gamma / Q);
  J += -a * dlog / (4 * std::numbers::pi * std::numbers::pi);
  return J;
}

} // namespace detail

// ln |H^(rho)| at rho = e^{-w} (line only); -inf where the transform vanishes numerically.
inline double bessel_transform_log_abs(double t, double gamma, double w) {
  detail::check_bessel(t, gamma);
  const double J = detail::bessel_J(t, gamma, w);
  if (!(std::abs(J) > 0))
    return detail::neg_inf;
  return std::log(2.0) + (1 - t) * w + std::log(std::abs(J));
}

// H^(rho) on the line for rho > 0.
inline double bessel_transform_1d(double t, double gamma, double rho) {
  detail::check_bessel(t, gamma);
  rho = std::abs(rho);
  require(rho > 0, ErrorKind::parameter, "transform evaluated at the origin");
  const double w = -std::log(rho);
  return 2 * std::exp((1 - t) * w) * detail::bessel_J(t, gamma, w);
}

// ---------------------------------------------------------------------------------------------
// Integrability dichotomy by successive truncations.

enum class BesselSide { kernel, transform };
enum class Convergence { convergent, divergent, inconclusive };

inline const char *to_string(BesselSide s) { return s == BesselSide::kernel ? "kernel" : "transform"; }
inline const char *to_string(Convergence c) {
  switch (c) {
  case Convergence::convergent: return "convergent";
  case Convergence::divergent: return "divergent";
  case Convergence::inconclusive: return "inconclusive";
  }
  return "?";
}
inline BesselSide parse_bessel_side(const std::string &s) {
  if (s == "kernel")
    return BesselSide::kernel;
  if (s == "transform")
    return BesselSide::transform;
  throw Error(ErrorKind::parameter, "unknown side '" + s + "' (kernel | transform)");
}

inline constexpr double dichotomy_ratio_threshold = 1.02;

// ln R_k = e^z for z in {4, 8, 12, 16, 20}: double-logarithmic growth moves by a fixed amount per step.
inline std::vector<double> default_log_radii() {
  std::vector<double> out;
  for (double z : {4.0, 8.0, 12.0, 16.0, 20.0})
    out.push_back(std::exp(z));
  return out;
}

inline bool bessel_predicted_finite(double t, double gamma, int dim, double u, BesselSide side) {
  const double e = side == BesselSide::kernel ? dim / u : dim * (1 - 1 / u);
  const double tol = 1e-12;
  if (t > e + tol)
    return true;
  return std::abs(t - e) <= tol && gamma > 2 / u + tol;
}

struct DichotomyResult {
  BesselSide side = BesselSide::kernel;
  double t = 0, gamma = 0, u = 0;
  int dim = 1;
  std::vector<double> log_radii;  // ln R (kernel) or ln(1/rho_min) (transform)
  std::vector<double> log_values; // ln of the truncated integrals
  std::vector<double> ratios;     // successive truncation ratios
  Convergence verdict = Convergence::inconclusive;
  Convergence predicted = Convergence::inconclusive;
};

inline Convergence ratio_verdict(const std::vector<double> &ratios) {
  require(ratios.size() >= 3, ErrorKind::parameter, "ratio test needs at least 4 truncations");
  int above = 0;
  for (std::size_t i = ratios.size() - 3; i < ratios.size(); ++i)
    above += ratios[i] > dichotomy_ratio_threshold;
  if (above == 3)
    return Convergence::divergent;
  if (above == 0)
    return Convergence::convergent;
  return Convergence::inconclusive;
}

namespace detail {

// ln of omega_dim int_0^{R} r^{dim-1} H(r)^u dr at each ln R in the (increasing) ladder.
inline std::vector<double> kernel_log_partials(double t, double gamma, int dim, double u,
                                               const std::vector<double> &log_radii) {
  using GL = boost::math::quadrature::gauss<double, 30>;
  const double omega = 2 * std::pow(std::numbers::pi, dim / 2.0) / std::tgamma(dim / 2.0);
  double inner = 0;
  for (int q = 0; q < 4; ++q)
    inner += GL::integrate(
        [&](double r) { return std::pow(r, dim - 1) * std::pow(bessel_kernel(t, gamma, r), u); }, q / 4.0,
        (q + 1) / 4.0);
  double logI = std::log(inner);
  auto g = [&](double s) { return dim * s + u * bessel_log_kernel_at_log_radius(t, gamma, s); };
  std::vector<double> out;
  double s = 0, gs = g(0);
  for (double target : log_radii) {
    while (s < target) {
      double h = std::max(0.01, 0.01 * s);
      double s1 = std::min(target, s + h);
      double g1 = g(s1);
      logI = log_add(logI, log_exp_linear_panel(gs, g1, s1 - s));
      s = s1;
      gs = g1;
    }
    out.push_back(logI + std::log(omega));
  }
  return out;
}

// ln of int_{rho_min <= |rho| <= 10} |H^(rho)|^u drho at each ln(1/rho_min) in the ladder; the part
// beyond |rho| = 10 is a fixed constant below e^{-10 u} and does not move the ratios.
inline std::vector<double> transform_log_partials(double t, double gamma, double u,
                                                  const std::vector<double> &log_radii) {
  auto g = [&](double w) { return u * bessel_transform_log_abs(t, gamma, w) - w; };
  double w = -std::log(10.0), gw = g(w);
  double logI = neg_inf;
  std::vector<double> out;
  for (double target : log_radii) {
    while (w < target) {
      double h = w < 1 ? 0.02 : 0.05 * w;
      double w1 = std::min(target, w + h);
      double g1 = g(w1);
      logI = log_add(logI, log_exp_linear_panel(gw, g1, w1 - w));
      w = w1;
      gw = g1;
    }
    out.push_back(logI + std::log(2.0));
  }
  return out;
}

} // namespace detail

inline DichotomyResult bessel_norm_dichotomy(double t, double gamma, int dim, double u, BesselSide side,
                                             std::vector<double> log_radii = default_log_radii()) {
  detail::check_bessel(t, gamma);
  require(dim >= 1, ErrorKind::parameter, "dimension must be positive");
  require(u >= 1 && std::isfinite(u), ErrorKind::parameter, "integrability exponent u must be in [1, inf)");
  require(log_radii.size() >= 4, ErrorKind::parameter, "dichotomy needs at least 4 truncation radii");
  for (std::size_t i = 1; i < log_radii.size(); ++i)
    require(log_radii[i] > log_radii[i - 1], ErrorKind::parameter, "truncation radii must increase");
  require(log_radii.front() >= 0, ErrorKind::parameter, "truncation radii must be at least 1");
  require(log_radii.back() - log_radii.front() >= 4 * std::log(10.0), ErrorKind::parameter,
          "truncation radii must span at least 4 decades");
  if (side == BesselSide::transform)
    require(dim == 1, ErrorKind::parameter, "transform side is implemented on the line (dim = 1)");

  DichotomyResult r;
  r.side = side;
  r.t = t;
  r.gamma = gamma;
  r.u = u;
  r.dim = dim;
  r.log_radii = log_radii;
  r.log_values = side == BesselSide::kernel ? detail::kernel_log_partials(t, gamma, dim, u, log_radii)
                                            : detail::transform_log_partials(t, gamma, u, log_radii);
  for (std::size_t i = 1; i < r.log_values.size(); ++i)
    r.ratios.push_back(std::exp(r.log_values[i] - r.log_values[i - 1]));
  r.verdict = ratio_verdict(r.ratios);
  r.predicted = bessel_predicted_finite(t, gamma, dim, u, side) ? Convergence::convergent : Convergence::divergent;
  return r;
}

// ---------------------------------------------------------------------------------------------
// Auxiliary windows. theta^ = b * b with b a plateau bump of radius 1/(400 l), so theta = (b check)^2 is
// nonnegative with theta(0) = (int b)^2 > 0 and theta^ supported in |xi| <= 1/(200 l).

inline double theta_tilde_hat(double r, int l) { return plateau_cutoff(r, 1.0 / (100 * l), 1.0 / (10 * l)); }

inline double theta_b(double r, int l) { return plateau_cutoff(r, 1.0 / (800 * l), 1.0 / (400 * l)); }

// theta^ on the line.
inline double theta_hat(double zeta, int l) {
  using GL = boost::math::quadrature::gauss<double, 20>;
  const double R = 1.0 / (400 * l);
  const double lo = std::max(-R, zeta - R), hi = std::min(R, zeta + R);
  if (!(hi > lo))
    return 0.0;
  double s = 0;
  const int panels = 8;
  const double h = (hi - lo) / panels;
  for (int q = 0; q < panels; ++q)
    s += GL::integrate([&](double x) { return theta_b(std::abs(x), l) * theta_b(std::abs(zeta - x), l); },
                       lo + q * h, lo + (q + 1) * h);
  return s;
}

// theta on the line.
inline double theta_spatial(double x, int l) {
  using GL = boost::math::quadrature::gauss<double, 30>;
  const double a = 1.0 / (800 * l), b = 1.0 / (400 * l);
  const double w = detail::two_pi * x;
  double v = std::abs(w) < 1e-300 ? a : std::sin(w * a) / w;
  const int panels = std::max(20, static_cast<int>(std::ceil(2 * std::abs(x) * (b - a))));
  const double h = (b - a) / panels;
  for (int q = 0; q < panels; ++q)
    v += GL::integrate([&](double z) { return theta_b(z, l) * std::cos(w * z); }, a + q * h, a + (q + 1) * h);
  v *= 2;
  return v * v;
}

// Gamma^: 1 on the unit ball, supported in the ball of radius 2.
inline double gamma_hat(double r) { return plateau_cutoff(r, 1.0, 2.0); }

inline std::vector<double> bessel_nu(int l, int n) {
  std::vector<double> v(n, 0.0);
  v[0] = 1 / std::sqrt(static_cast<double>(l));
  return v;
}

// The affine change of variables R(xi) = (sigma - nu, sigma - xi_2, ..., sigma - xi_l), sigma = mean of xi_i.
inline std::vector<double> rotation_R(std::span<const double> xi, int l, int n) {
  require(static_cast<int>(xi.size()) == l * n, ErrorKind::structural, "rotation expects l*n coordinates");
  const auto nu = bessel_nu(l, n);
  std::vector<double> sigma(n, 0.0), out(xi.size());
  for (int i = 0; i < l; ++i)
    for (int a = 0; a < n; ++a)
      sigma[a] += xi[i * n + a] / l;
  for (int a = 0; a < n; ++a)
    out[a] = sigma[a] - nu[a];
  for (int i = 1; i < l; ++i)
    for (int a = 0; a < n; ++a)
      out[i * n + a] = sigma[a] - xi[i * n + a];
  return out;
}

// ---------------------------------------------------------------------------------------------
// Truncated kernel H^{(M)}(y) = H(y) Gamma^(y/M) on R^D and its Fourier transform on lattices.

namespace detail {

inline constexpr double bessel_y_spacing = 1.0 / 16;
inline constexpr std::size_t bessel_fft_budget = std::size_t(1) << 24;

// H^{(M)}^(zeta0 + q step) for signed q in [-count/2, count/2)^D, row-major in wrapped q.
inline std::vector<cplx> truncated_bessel_hat_lattice(double t, double gamma, double M, int D,
                                                      std::span<const double> zeta0, double step, std::size_t count) {
  require(step > 0 && is_pow2(count), ErrorKind::structural, "lattice step must be positive, count a power of two");
  // y-period P' = mult / step >= 4M keeps the support |y| <= 2M free of wrap-around
  std::size_t mult = 1;
  while (mult / step < 4 * M)
    mult *= 2;
  const double P = mult / step;
  // y spacing 1/32 (aliasing ~e^{-32}) when it fits the budget, 1/16 (~e^{-16}) otherwise
  auto size_for = [&](double h) {
    return next_pow2(std::max<std::size_t>(count * mult, static_cast<std::size_t>(std::ceil(P / h))));
  };
  std::size_t Ny = size_for(bessel_y_spacing / 2);
  if (ipow(Ny, D) > bessel_fft_budget)
    Ny = size_for(bessel_y_spacing);
  require(ipow(Ny, D) <= bessel_fft_budget, ErrorKind::budget,
          "truncated Bessel transform needs " + std::to_string(Ny) + "^" + std::to_string(D) + " samples");
  Grid yg(D, Ny, P);
  GridFunction S(yg, Domain::spatial);
  std::vector<std::size_t> idx(D);
  for (std::size_t f = 0; f < yg.size(); ++f) {
    yg.unravel(f, idx);
    double r2 = 0, phase = 0;
    for (int a = 0; a < D; ++a) {
      double y = yg.coordinate(idx[a]);
      r2 += y * y;
      phase += y * zeta0[a];
    }
    double r = std::sqrt(r2);
    if (r >= 2 * M)
      continue;
    S.samples[f] = bessel_kernel(t, gamma, r) * gamma_hat(r / M) * std::polar(1.0, -two_pi * phase);
  }
  GridFunction F = transform(S, Direction::forward);
  Grid qg(D, count, 1.0);
  std::vector<cplx> out(qg.size());
  std::vector<std::size_t> jdx(D);
  for (std::size_t f = 0; f < qg.size(); ++f) {
    qg.unravel(f, idx);
    for (int a = 0; a < D; ++a)
      jdx[a] = yg.wrap_index(qg.signed_index(idx[a]) * static_cast<long>(mult));
    out[f] = F.samples[yg.ravel(jdx)];
  }
  return out;
}

// Direct quadrature of H^{(M)}^ at one point (reference path, O((M/h)^D)).
inline cplx truncated_bessel_hat_direct(double t, double gamma, double M, std::span<const double> zeta) {
  const int D = static_cast<int>(zeta.size());
  const double h = bessel_y_spacing / 2;
  const long K = static_cast<long>(std::ceil(2 * M / h));
  std::vector<long> q(D, -K);
  cplx s = 0;
  while (true) {
    double r2 = 0, phase = 0;
    for (int a = 0; a < D; ++a) {
      double y = q[a] * h;
      r2 += y * y;
      phase += y * zeta[a];
    }
    double r = std::sqrt(r2);
    if (r < 2 * M)
      s += bessel_kernel(t, gamma, r) * gamma_hat(r / M) * std::polar(1.0, -two_pi * phase);
    int a = 0;
    while (a < D && ++q[a] > K) {
      q[a] = -K;
      ++a;
    }
    if (a == D)
      break;
  }
  return s * std::pow(h, D);
}

} // namespace detail

inline cplx truncated_bessel_hat(double t, double gamma, double M, std::span<const double> zeta) {
  detail::check_bessel(t, gamma);
  require(M > 0, ErrorKind::parameter, "truncation scale M must be positive");
  return detail::truncated_bessel_hat_direct(t, gamma, M, zeta);
}

// ---------------------------------------------------------------------------------------------

namespace detail {

inline double shifted_window(std::span<const double> xi, int l, int n, const std::vector<double> &nu) {
  double w = 1;
  for (int i = 0; i < l && w != 0; ++i) {
    double r2 = 0;
    for (int a = 0; a < n; ++a) {
      double d = xi[i * n + a] - nu[a];
      r2 += d * d;
    }
    w *= theta_tilde_hat(std::sqrt(r2), l);
  }
  return w;
}

} // namespace detail

// Shifted mode: m(xi) = H^{(ln,M)}^(xi_1 - nu, ..., xi_l - nu) prod theta~^(xi_i - nu).
// Rotated mode (n = 1): m(xi) = H^(sigma - nu) theta^(sigma - nu) prod_{i>=2} theta^(sigma - xi_i).
// The argument grid fixes the lattice on which application uses a precomputed table.
inline MultiplierRep bessel_multiplier(BesselFamily::Mode mode, const BesselFamily &fam, int l, int n,
                                       const Grid &arg_grid) {
  detail::check_bessel(fam.t, fam.gamma);
  require(l >= 1 && n >= 1, ErrorKind::parameter, "Bessel multiplier needs l, n >= 1");
  require(arg_grid.dims == n, ErrorKind::structural, "argument grid must have n dims");
  // the theta~ windows of radius 1/(10 l) around nu need several lattice points
  require(arg_grid.period >= 40.0 * l, ErrorKind::resolution,
          "argument grid period must be >= 40 l to resolve the 1/(10 l) windows around nu");
  require(arg_grid.nyquist() > 1.2, ErrorKind::resolution, "argument grid Nyquist frequency must exceed 1.2");
  const SymbolLayout L{l, 1, n};
  const auto nu = bessel_nu(l, n);
  const double t = fam.t, gamma = fam.gamma;
  const SupportAnnulus support{0.8, 1.2};
  const int D = l * n;

  if (mode == BesselFamily::Mode::shifted) {
    require(fam.M && *fam.M > 0, ErrorKind::parameter, "shifted Bessel multiplier needs a finite truncation M");
    const double M = *fam.M;
    std::vector<double> zeta0(D);
    for (int i = 0; i < l; ++i)
      for (int a = 0; a < n; ++a)
        zeta0[i * n + a] = -nu[a];
    // lattice table on the argument grid (symbol values at xi = q / P)
    auto table = std::make_shared<std::vector<cplx>>(
        detail::truncated_bessel_hat_lattice(t, gamma, M, D, zeta0, 1 / arg_grid.period, arg_grid.points));
    const Grid tg(D, arg_grid.points, 1.0);
    PointFn fn = [=](std::span<const double> xi) -> cplx {
      double w = detail::shifted_window(xi, l, n, nu);
      if (w == 0)
        return 0;
      std::vector<std::size_t> idx(D);
      bool on_lattice = true;
      for (int a = 0; a < D && on_lattice; ++a) {
        double q = xi[a] * arg_grid.period, r = std::round(q);
        on_lattice = std::abs(q - r) < 1e-9 && r >= -double(arg_grid.points / 2) && r < double(arg_grid.points / 2);
        idx[a] = tg.wrap_index(static_cast<long>(r));
      }
      if (on_lattice)
        return w * (*table)[tg.ravel(idx)];
      std::vector<double> z(D);
      for (int a = 0; a < D; ++a)
        z[a] = xi[a] + zeta0[a];
      return w * detail::truncated_bessel_hat_direct(t, gamma, M, z);
    };
    MultiplierRep m = make_rule(L, fn, support);
    // fast sampler on dilated symbol grids: one FFT per dilation
    m.sampler = [=](const SymbolGrid &sg, std::span<const int> k) {
      const Grid &G = sg.grid;
      const double scale = std::ldexp(1.0, k[0]);
      std::vector<double> z0(D);
      for (int a = 0; a < D; ++a)
        z0[a] = scale * sg.center_of(a) + zeta0[a];
      std::vector<cplx> vals = detail::truncated_bessel_hat_lattice(t, gamma, M, D, z0, scale * G.spacing(), G.points);
      std::vector<std::size_t> idx(D);
      std::vector<double> xi(D);
      for (std::size_t f = 0; f < G.size(); ++f) {
        G.unravel(f, idx);
        for (int a = 0; a < D; ++a)
          xi[a] = scale * (sg.center_of(a) + G.coordinate(idx[a]));
        vals[f] *= detail::shifted_window(xi, l, n, nu);
      }
      return vals;
    };
    m.id = "bessel_shifted(t=" + std::to_string(t) + ",gamma=" + std::to_string(gamma) + ",M=" + std::to_string(M) + ")";
    return m;
  }

  require(mode == BesselFamily::Mode::rotated, ErrorKind::parameter,
          "multiparam Bessel symbols are built with multiparam_tensorize");
  require(n == 1, ErrorKind::parameter, "rotated Bessel multiplier is implemented for n = 1");
  PointFn fn = [=](std::span<const double> xi) -> cplx {
    std::vector<double> R = rotation_R(xi, l, n);
    double v = theta_hat(R[0], l);
    for (int i = 1; i < l && v != 0; ++i)
      v *= theta_hat(R[i], l);
    if (v == 0)
      return 0;
    if (R[0] == 0) {
      require(t > 1, ErrorKind::parameter, "rotated symbol is unbounded at sigma = nu for t <= 1");
      R[0] = 1e-12;
    }
    return v * bessel_transform_1d(t, gamma, R[0]);
  };
  MultiplierRep m = make_rule(L, fn, support);
  m.id = "bessel_rotated(t=" + std::to_string(t) + ",gamma=" + std::to_string(gamma) + ")";
  return m;
}

// ---------------------------------------------------------------------------------------------
// Lower-bound functional for the shifted family on f_i = eps^{1/p_i} theta(eps y) e^{2 pi i y nu}
// (l = 2, n = 1): after x -> x / eps the output norm is exactly
//   L(eps) = ( int | int H^{(M)}(y) theta(x - eps y_1) theta(x - eps y_2) dy |^p dx )^{1/p}.

struct BesselLowerBound {
  double value = 0;        // L(eps)
  double value_finer = 0;  // L(eps / 4)
  bool converged = false;  // the two agree within 5%
};

namespace detail {

inline double bessel_lower_bound_at(double t, double gamma, double M, double p, double eps) {
  const int l = 2;
  const double h = 1.0 / 8;
  const long K = static_cast<long>(std::ceil(2 * M / h));
  const std::size_t Ny = 2 * K + 1;
  std::vector<double> H(Ny * Ny);
  for (std::size_t a = 0; a < Ny; ++a)
    for (std::size_t b = 0; b < Ny; ++b) {
      double r = std::hypot((long(a) - K) * h, (long(b) - K) * h);
      H[a * Ny + b] = r < 2 * M ? bessel_kernel(t, gamma, r) * gamma_hat(r / M) * h * h : 0.0;
    }
  // theta spreads over |x| of a few thousand (l = 2); it is tabulated once on a fine grid
  const double X = 12000, dx = 20;
  const long Nx = static_cast<long>(X / dx);
  const double pad = eps * 2 * M + dx;
  const double tdx = 0.5;
  const long Nt = static_cast<long>((X + pad) / tdx) + 2;
  std::vector<double> tab(Nt + 1);
  for (long i = 0; i <= Nt; ++i)
    tab[i] = theta_spatial(i * tdx, l);
  auto th = [&](double x) {
    double s = std::abs(x) / tdx;
    long i = static_cast<long>(s);
    if (i >= Nt)
      return 0.0;
    double f = s - i;
    return tab[i] * (1 - f) + tab[i + 1] * f;
  };
  std::vector<double> A(Ny), HA(Ny);
  double acc = 0;
  for (long ix = -Nx; ix <= Nx; ++ix) {
    double x = ix * dx;
    for (std::size_t a = 0; a < Ny; ++a)
      A[a] = th(x - eps * (long(a) - K) * h);
    double s = 0;
    for (std::size_t a = 0; a < Ny; ++a) {
      double row = 0;
      const double *Hr = &H[a * Ny];
      for (std::size_t b = 0; b < Ny; ++b)
        row += Hr[b] * A[b];
      s += A[a] * row;
    }
    acc += std::pow(std::abs(s), p) * dx;
  }
  return std::pow(acc, 1 / p);
}

} // namespace detail

inline BesselLowerBound bessel_lower_bound(double t, double gamma, double M, double p, double eps) {
  detail::check_bessel(t, gamma);
  require(M > 0 && p > 0 && eps > 0, ErrorKind::parameter, "lower bound needs M, p, eps > 0");
  BesselLowerBound r;
  r.value = detail::bessel_lower_bound_at(t, gamma, M, p, eps);
  r.value_finer = detail::bessel_lower_bound_at(t, gamma, M, p, eps / 4);
  r.converged = std::abs(r.value - r.value_finer) <= 0.05 * std::max(r.value, r.value_finer);
  return r;
}

} // namespace hormlab
