#pragma once

// Periodic uniform grids, sampled functions and their continuum-scaled DFT.
//
// Conventions: coordinates x = i*h for i < N/2, (i - N)*h otherwise; frequencies k/P.
//   forward:  F(k/P) = h^d  sum_x f(x) e^{-2 pi i x.k/P}
//   inverse:  f(x)   = P^-d sum_k F(k/P) e^{+2 pi i x.k/P}
// so that h^d sum |f|^2 = P^-d sum |F|^2.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <fftw3.h>

#include "error.hpp"

namespace hormlab {

using cplx = std::complex<double>;
constexpr double pi = 3.14159265358979323846;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n)
    p <<= 1;
  return p;
}

inline std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e--)
    r *= b;
  return r;
}

// Pairwise summation in a fixed order; reproducible and accurate.
template <class T, class F>
T pairwise_sum(std::size_t n, F &&term) {
  if (n == 0)
    return T{};
  if (n <= 32) {
    T s = term(0);
    for (std::size_t i = 1; i < n; ++i)
      s += term(i);
    return s;
  }
  std::function<T(std::size_t, std::size_t)> rec = [&](std::size_t lo, std::size_t hi) -> T {
    if (hi - lo <= 32) {
      T s = term(lo);
      for (std::size_t i = lo + 1; i < hi; ++i)
        s += term(i);
      return s;
    }
    std::size_t mid = lo + (hi - lo) / 2;
    return rec(lo, mid) + rec(mid, hi);
  };
  return rec(0, n);
}

struct Grid {
  int dims = 1;
  std::size_t points = 8;
  double period = 1.0;

  Grid() = default;
  Grid(int d, std::size_t n, double p) : dims(d), points(n), period(p) { validate(); }

  void validate() const {
    require(dims >= 1, ErrorKind::structural, "grid dims must be positive");
    require(is_pow2(points) && points >= 2, ErrorKind::structural,
            "grid points per axis must be a power of two >= 2, got " + std::to_string(points));
    require(period > 0 && std::isfinite(period), ErrorKind::structural, "grid period must be positive");
  }

  double spacing() const { return period / static_cast<double>(points); }
  std::size_t size() const { return ipow(points, static_cast<std::size_t>(dims)); }
  double cell_volume() const { return std::pow(spacing(), dims); }
  double nyquist() const { return static_cast<double>(points) / (2.0 * period); }

  long signed_index(std::size_t i) const {
    return i < points / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(points);
  }
  std::size_t wrap_index(long k) const {
    long n = static_cast<long>(points);
    long r = k % n;
    return static_cast<std::size_t>(r < 0 ? r + n : r);
  }
  double coordinate(std::size_t i) const { return static_cast<double>(signed_index(i)) * spacing(); }
  double frequency(std::size_t i) const { return static_cast<double>(signed_index(i)) / period; }

  // Row-major: axis 0 is slowest.
  void unravel(std::size_t flat, std::span<std::size_t> idx) const {
    for (int a = dims - 1; a >= 0; --a) {
      idx[a] = flat % points;
      flat /= points;
    }
  }
  std::size_t ravel(std::span<const std::size_t> idx) const {
    std::size_t f = 0;
    for (int a = 0; a < dims; ++a)
      f = f * points + idx[a];
    return f;
  }

  bool operator==(const Grid &o) const {
    return dims == o.dims && points == o.points && period == o.period;
  }
  bool operator!=(const Grid &o) const { return !(*this == o); }
};

enum class Domain { spatial, spectral };
enum class Direction { forward, inverse };

inline const char *to_string(Domain d) { return d == Domain::spatial ? "spatial" : "spectral"; }

struct GridFunction {
  Grid grid;
  std::vector<cplx> samples;
  Domain domain = Domain::spatial;

  GridFunction() = default;
  GridFunction(const Grid &g, Domain d) : grid(g), samples(g.size()), domain(d) {}
  GridFunction(const Grid &g, std::vector<cplx> s, Domain d) : grid(g), samples(std::move(s)), domain(d) {
    check();
  }

  void check() const {
    grid.validate();
    require(samples.size() == grid.size(), ErrorKind::structural,
            "sample count " + std::to_string(samples.size()) + " does not match grid size " +
                std::to_string(grid.size()));
  }

  std::size_t size() const { return samples.size(); }
  cplx &operator[](std::size_t i) { return samples[i]; }
  const cplx &operator[](std::size_t i) const { return samples[i]; }

  GridFunction &operator+=(const GridFunction &o) {
    require(grid == o.grid && domain == o.domain, ErrorKind::structural, "grid or domain mismatch in +=");
    for (std::size_t i = 0; i < samples.size(); ++i)
      samples[i] += o.samples[i];
    return *this;
  }
  GridFunction &operator-=(const GridFunction &o) {
    require(grid == o.grid && domain == o.domain, ErrorKind::structural, "grid or domain mismatch in -=");
    for (std::size_t i = 0; i < samples.size(); ++i)
      samples[i] -= o.samples[i];
    return *this;
  }
  GridFunction &operator*=(cplx c) {
    for (auto &v : samples)
      v *= c;
    return *this;
  }
};

inline GridFunction operator+(GridFunction a, const GridFunction &b) { return a += b; }
inline GridFunction operator-(GridFunction a, const GridFunction &b) { return a -= b; }
inline GridFunction operator*(cplx c, GridFunction a) { return a *= c; }

// Fill from a function of the coordinate vector (spatial) or frequency vector (spectral).
inline GridFunction sample(const Grid &g, Domain d, const std::function<cplx(std::span<const double>)> &fn) {
  GridFunction out(g, d);
  std::vector<std::size_t> idx(g.dims);
  std::vector<double> pt(g.dims);
  for (std::size_t f = 0; f < g.size(); ++f) {
    g.unravel(f, idx);
    for (int a = 0; a < g.dims; ++a)
      pt[a] = d == Domain::spatial ? g.coordinate(idx[a]) : g.frequency(idx[a]);
    out.samples[f] = fn(pt);
  }
  return out;
}

namespace detail {

class FftPlanner {
public:
  static FftPlanner &instance() {
    static FftPlanner p;
    return p;
  }

  void execute(int dims, std::size_t n, int sign, const cplx *in, cplx *out) {
    fftw_plan plan = get(dims, n, sign);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex *>(const_cast<cplx *>(in)),
                     reinterpret_cast<fftw_complex *>(out));
  }

  ~FftPlanner() {
    for (auto &[k, p] : plans_)
      fftw_destroy_plan(p);
  }

private:
  fftw_plan get(int dims, std::size_t n, int sign) {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_tuple(dims, n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end())
      return it->second;
    std::vector<int> shape(dims, static_cast<int>(n));
    std::size_t total = ipow(n, dims);
    fftw_complex *a = fftw_alloc_complex(total);
    fftw_complex *b = fftw_alloc_complex(total);
    fftw_plan p = fftw_plan_dft(dims, shape.data(), a, b, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(a);
    fftw_free(b);
    require(p != nullptr, ErrorKind::structural, "FFTW could not create a plan");
    plans_.emplace(key, p);
    return p;
  }

  std::mutex mu_;
  std::map<std::tuple<int, std::size_t, int>, fftw_plan> plans_;
};

} // namespace detail

inline GridFunction transform(const GridFunction &f, Direction dir) {
  f.check();
  const Domain want = dir == Direction::forward ? Domain::spatial : Domain::spectral;
  require(f.domain == want, ErrorKind::structural,
          std::string("transform direction expects a ") + to_string(want) + " input");
  GridFunction out(f.grid, dir == Direction::forward ? Domain::spectral : Domain::spatial);
  const int sign = dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD;
  detail::FftPlanner::instance().execute(f.grid.dims, f.grid.points, sign, f.samples.data(), out.samples.data());
  const double scale = dir == Direction::forward ? f.grid.cell_volume() : std::pow(f.grid.period, -f.grid.dims);
  for (auto &v : out.samples)
    v *= scale;
  return out;
}

struct NormSpec {
  enum class Kind { lebesgue, weak };
  double p = 2.0;
  Kind kind = Kind::lebesgue;

  static NormSpec lebesgue(double p) { return {p, Kind::lebesgue}; }
  static NormSpec weak(double p) { return {p, Kind::weak}; }
  static NormSpec infinity() { return {std::numeric_limits<double>::infinity(), Kind::lebesgue}; }
};

inline double lp_norm(const GridFunction &f, NormSpec spec) {
  f.check();
  require(spec.p > 0 && !std::isnan(spec.p), ErrorKind::parameter, "norm exponent p must be positive");
  require(f.domain == Domain::spatial, ErrorKind::structural, "lp_norm expects a spatial function");
  const std::size_t n = f.size();
  const double vol = f.grid.cell_volume();
  if (std::isinf(spec.p)) {
    double m = 0;
    for (const auto &v : f.samples)
      m = std::max(m, std::abs(v));
    return m;
  }
  if (spec.kind == NormSpec::Kind::weak) {
    std::vector<double> mags(n);
    for (std::size_t i = 0; i < n; ++i)
      mags[i] = std::abs(f.samples[i]);
    std::sort(mags.begin(), mags.end(), std::greater<double>());
    double best = 0;
    // sup_t t * |{|f| > t}|^{1/p}: approached as t increases to each sampled level a_k
    for (std::size_t k = 0; k < n; ++k) {
      if (mags[k] == 0)
        break;
      std::size_t cnt = k + 1;
      while (cnt < n && mags[cnt] == mags[k])
        ++cnt;
      best = std::max(best, mags[k] * std::pow(vol * static_cast<double>(cnt), 1.0 / spec.p));
    }
    return best;
  }
  const double p = spec.p;
  double s = pairwise_sum<double>(n, [&](std::size_t i) {
    double a = std::abs(f.samples[i]);
    return p == 2.0 ? a * a : std::pow(a, p);
  });
  return std::pow(vol * s, 1.0 / p);
}

// (P^-d sum |F|^2)^{1/2} for a spectral function; equals lp_norm(inverse, 2).
inline double spectral_l2(const GridFunction &F) {
  require(F.domain == Domain::spectral, ErrorKind::structural, "spectral_l2 expects a spectral function");
  double s = pairwise_sum<double>(F.size(), [&](std::size_t i) { return std::norm(F.samples[i]); });
  return std::sqrt(std::pow(F.grid.period, -F.grid.dims) * s);
}

inline GridFunction pointwise_product(const GridFunction &f, const GridFunction &g) {
  f.check();
  g.check();
  require(f.grid == g.grid, ErrorKind::structural, "pointwise_product: grid mismatch");
  require(f.domain == Domain::spatial && g.domain == Domain::spatial, ErrorKind::structural,
          "pointwise_product expects spatial functions");
  GridFunction out(f.grid, Domain::spatial);
  for (std::size_t i = 0; i < f.size(); ++i)
    out.samples[i] = f.samples[i] * g.samples[i];
  return out;
}

// Relative l2 distance between sample arrays (0 when both vanish).
inline double relative_error(const GridFunction &a, const GridFunction &b) {
  require(a.size() == b.size(), ErrorKind::structural, "relative_error: size mismatch");
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a.samples[i] - b.samples[i]);
    den += std::norm(b.samples[i]);
  }
  if (den == 0)
    return std::sqrt(num);
  return std::sqrt(num / den);
}

inline double max_abs(const GridFunction &a) {
  double m = 0;
  for (const auto &v : a.samples)
    m = std::max(m, std::abs(v));
  return m;
}

// Zero-pad a spectral function to a finer grid with the same period (more points per axis).
inline GridFunction pad_spectrum(const GridFunction &F, std::size_t new_points) {
  require(F.domain == Domain::spectral, ErrorKind::structural, "pad_spectrum expects a spectral function");
  require(new_points >= F.grid.points && is_pow2(new_points), ErrorKind::structural,
          "pad_spectrum: target must be a power of two not below the source");
  Grid g(F.grid.dims, new_points, F.grid.period);
  GridFunction out(g, Domain::spectral);
  std::vector<std::size_t> idx(F.grid.dims), jdx(F.grid.dims);
  for (std::size_t f = 0; f < F.size(); ++f) {
    F.grid.unravel(f, idx);
    for (int a = 0; a < F.grid.dims; ++a)
      jdx[a] = g.wrap_index(F.grid.signed_index(idx[a]));
    out.samples[g.ravel(jdx)] = F.samples[f];
  }
  return out;
}

// Subsample a spatial function on a refined grid back to a coarser grid with the same period.
inline GridFunction restrict_to(const GridFunction &f, const Grid &coarse) {
  require(f.domain == Domain::spatial, ErrorKind::structural, "restrict_to expects a spatial function");
  require(f.grid.period == coarse.period && f.grid.dims == coarse.dims && f.grid.points % coarse.points == 0,
          ErrorKind::structural, "restrict_to: grids are not nested");
  const std::size_t r = f.grid.points / coarse.points;
  GridFunction out(coarse, Domain::spatial);
  std::vector<std::size_t> idx(coarse.dims), jdx(coarse.dims);
  for (std::size_t c = 0; c < coarse.size(); ++c) {
    coarse.unravel(c, idx);
    for (int a = 0; a < coarse.dims; ++a)
      jdx[a] = idx[a] * r;
    out.samples[c] = f.samples[f.grid.ravel(jdx)];
  }
  return out;
}

} // namespace hormlab
