#pragma once

// Hardy-Littlewood, power and strong maximal operators on the torus grid; hybrid square/maximal
// operators SS, MS, SM, MM at shift (M1, M2); growth scans.

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <vector>

#include "filters.hpp"
#include "fit.hpp"
#include "grid.hpp"

namespace hormlab {

// cubes: one side length for every axis. dyadic_rectangles: independent side lengths per axis
// group (groups of dims/groups consecutive axes), optionally restricted to powers of two.
struct RectangleFamily {
  enum class Kind { cubes, dyadic_rectangles } kind = Kind::cubes;
  int groups = 2;
  bool dyadic_only = false;
  std::size_t max_side = 0; // in grid points, 0 = full period
};

namespace detail {

// out[x] = max of a over the L periodic starts s with x in [s, s + L), along one axis.
inline void sliding_max_axis(const std::vector<double> &a, std::vector<double> &out, const Grid &g, int axis,
                             std::size_t L) {
  const std::size_t N = g.points;
  std::size_t stride = 1;
  for (int b = g.dims - 1; b > axis; --b)
    stride *= N;
  const std::size_t outer = g.size() / (N * stride);
  std::vector<double> line(N), res(N), ext(2 * N);
  std::deque<std::size_t> dq;
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t in = 0; in < stride; ++in) {
      const std::size_t base = o * N * stride + in;
      for (std::size_t t = 0; t < N; ++t)
        line[t] = a[base + t * stride];
      // starts for x are x - L + 1 .. x: slide a width-L window over the unrolled line
      const std::size_t E = N + L - 1;
      for (std::size_t t = 0; t < E; ++t)
        ext[t] = line[(t + N - (L - 1) % N) % N];
      dq.clear();
      for (std::size_t t = 0; t < E; ++t) {
        while (!dq.empty() && ext[dq.back()] <= ext[t])
          dq.pop_back();
        dq.push_back(t);
        if (dq.front() + L <= t)
          dq.pop_front();
        if (t + 1 >= L)
          res[t + 1 - L] = ext[dq.front()];
      }
      for (std::size_t t = 0; t < N; ++t)
        out[base + t * stride] = res[t];
    }
}

// Periodic box sums over [s, s + L_a) per axis, for every start s.
inline std::vector<double> box_sums(const std::vector<double> &a, const Grid &g, const std::vector<std::size_t> &L) {
  const std::size_t N = g.points;
  std::vector<double> cur = a, nxt(a.size());
  std::size_t stride = 1;
  for (int axis = g.dims - 1; axis >= 0; --axis) {
    const std::size_t outer = g.size() / (N * stride);
    std::vector<double> pre(2 * N + 1);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t in = 0; in < stride; ++in) {
        const std::size_t base = o * N * stride + in;
        pre[0] = 0;
        for (std::size_t t = 0; t < 2 * N; ++t)
          pre[t + 1] = pre[t] + cur[base + (t % N) * stride];
        for (std::size_t s = 0; s < N; ++s)
          nxt[base + s * stride] = pre[s + L[axis]] - pre[s];
      }
    std::swap(cur, nxt);
    stride *= N;
  }
  return cur;
}

} // namespace detail

// sup over family windows containing x of (average of |f|^r)^{1/r}
inline GridFunction maximal(const GridFunction &f, const RectangleFamily &family, double r = 1.0) {
  f.check();
  require(f.domain == Domain::spatial, ErrorKind::structural, "maximal expects a spatial function");
  require(r > 0, ErrorKind::parameter, "maximal exponent r must be positive");
  const Grid &g = f.grid;
  const std::size_t N = g.points;
  const std::size_t Lmax = family.max_side == 0 ? N : std::min(family.max_side, N);
  std::vector<std::size_t> sides;
  for (std::size_t L = 1; L <= Lmax; ++L)
    if (!family.dyadic_only || is_pow2(L))
      sides.push_back(L);
  require(!sides.empty(), ErrorKind::structural, "maximal: empty rectangle family");

  int groups = 1;
  if (family.kind == RectangleFamily::Kind::dyadic_rectangles) {
    groups = family.groups;
    require(groups >= 1 && g.dims % groups == 0, ErrorKind::structural,
            "strong maximal: dims must split evenly into axis groups");
  }
  const int per = g.dims / groups;

  std::vector<double> a(g.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    a[i] = r == 1.0 ? std::abs(f.samples[i]) : std::pow(std::abs(f.samples[i]), r);

  std::vector<double> best(g.size(), 0.0), tmp(g.size()), tmp2(g.size());
  std::vector<std::size_t> choice(groups, 0);
  while (true) {
    std::vector<std::size_t> L(g.dims);
    double count = 1;
    for (int a2 = 0; a2 < g.dims; ++a2) {
      L[a2] = sides[choice[a2 / per]];
      count *= static_cast<double>(L[a2]);
    }
    std::vector<double> avg = detail::box_sums(a, g, L);
    for (auto &v : avg)
      v /= count;
    for (int axis = 0; axis < g.dims; ++axis) {
      detail::sliding_max_axis(avg, tmp, g, axis, L[axis]);
      std::swap(avg, tmp);
    }
    for (std::size_t i = 0; i < best.size(); ++i)
      best[i] = std::max(best[i], avg[i]);
    int q = 0;
    while (q < groups && ++choice[q] == sides.size()) {
      choice[q] = 0;
      ++q;
    }
    if (q == groups)
      break;
  }
  GridFunction out(g, Domain::spatial);
  for (std::size_t i = 0; i < best.size(); ++i)
    out.samples[i] = r == 1.0 ? best[i] : std::pow(best[i], 1.0 / r);
  return out;
}

// ---------------------------------------------------------------------------------------------

enum class HybridKind { SS, MS, SM, MM };

inline const char *to_string(HybridKind k) {
  switch (k) {
  case HybridKind::SS: return "SS";
  case HybridKind::MS: return "MS";
  case HybridKind::SM: return "SM";
  case HybridKind::MM: return "MM";
  }
  return "?";
}

inline HybridKind parse_hybrid_kind(const std::string &s) {
  if (s == "SS")
    return HybridKind::SS;
  if (s == "MS")
    return HybridKind::MS;
  if (s == "SM")
    return HybridKind::SM;
  if (s == "MM")
    return HybridKind::MM;
  throw Error(ErrorKind::parameter, "unknown hybrid kind '" + s + "'");
}

// The bank lives on the n-dimensional axis grid; F on the 2n-dimensional grid with the same points
// and period. Substituting bank.psi_hat / phi_hat (e.g. with bump-decomposition pieces) gives the
// mu-decorated variants.
struct HybridSpec {
  HybridKind kind = HybridKind::SS;
  int M1 = 0, M2 = 0;
  double u = 1.0;
  const FilterBank *bank = nullptr;
  double radius = 0; // |y| <= radius, 0 = 6 sqrt(n)
};

struct HybridResult {
  GridFunction value;
  double out_of_band_fraction = 0; // spectral energy of F outside the bank band
};

namespace detail {

// G = (A_j (x) B_k) * F for spectral filters A, B on the n-dim grid.
inline GridFunction tensor_filter(const GridFunction &Fh, const GridFunction &A, const GridFunction &B) {
  const Grid &g = Fh.grid;
  const int n = g.dims / 2;
  const std::size_t half = ipow(g.points, n);
  GridFunction W = Fh;
  for (std::size_t f = 0; f < g.size(); ++f)
    W.samples[f] *= A.samples[f / half] * B.samples[f % half];
  return transform(W, Direction::inverse);
}

// Local L^u means V(m) = (int_{|y| <= rho} |G(c (m + y))|^u dy)^{1/u} for every cell m that
// contains a grid point, returned per grid point. Riemann sum over the unwrapped lattice points
// z = i h with |z / c - m| <= rho, dy = prod_a h / c_a.
inline std::vector<double> local_means(const GridFunction &G, const std::vector<double> &c, double u, double rho) {
  const Grid &g = G.grid;
  const int D = g.dims;
  const std::size_t N = g.points;
  const double h = g.spacing();
  // prefix sums of |G|^u along the last axis, per line
  const std::size_t lines = g.size() / N;
  std::vector<double> pre(lines * (N + 1));
  for (std::size_t ln = 0; ln < lines; ++ln) {
    double s = 0;
    pre[ln * (N + 1)] = 0;
    for (std::size_t t = 0; t < N; ++t) {
      double v = std::abs(G.samples[ln * N + t]);
      s += u == 1.0 ? v : std::pow(v, u);
      pre[ln * (N + 1) + t + 1] = s;
    }
  }
  auto line_sum = [&](std::size_t ln, long a, long b) { // sum over unwrapped [a, b]
    const long Nl = static_cast<long>(N);
    auto F = [&](long i) {
      long q = i >= 0 ? i / Nl : -((-i + Nl - 1) / Nl);
      long r = i - q * Nl;
      return static_cast<double>(q) * pre[ln * (N + 1) + N] + pre[ln * (N + 1) + r];
    };
    return F(b + 1) - F(a);
  };
  double dy = 1;
  for (int a = 0; a < D; ++a)
    dy *= h / c[a];

  std::map<std::vector<long>, double> cache;
  std::vector<double> out(g.size());
  std::vector<std::size_t> idx(D);
  std::vector<long> m(D);
  std::vector<long> i(D);
  for (std::size_t f = 0; f < g.size(); ++f) {
    g.unravel(f, idx);
    for (int a = 0; a < D; ++a)
      m[a] = static_cast<long>(std::floor(g.coordinate(idx[a]) / c[a]));
    auto it = cache.find(m);
    if (it != cache.end()) {
      out[f] = it->second;
      continue;
    }
    // enumerate axes 0..D-2 over the bounding box, close the last axis as an interval
    double total = 0;
    std::vector<long> lo(D), hi(D);
    bool empty = false;
    for (int a = 0; a < D - 1; ++a) {
      lo[a] = static_cast<long>(std::ceil(c[a] * (static_cast<double>(m[a]) - rho) / h));
      hi[a] = static_cast<long>(std::floor(c[a] * (static_cast<double>(m[a]) + rho) / h));
      empty = empty || lo[a] > hi[a];
      i[a] = lo[a];
    }
    while (!empty) {
      double s = 0;
      for (int a = 0; a < D - 1; ++a) {
        double y = static_cast<double>(i[a]) * h / c[a] - static_cast<double>(m[a]);
        s += y * y;
      }
      double rem = rho * rho - s;
      if (rem >= 0) {
        const int a = D - 1;
        double w = std::sqrt(rem);
        long zl = static_cast<long>(std::ceil(c[a] * (static_cast<double>(m[a]) - w) / h));
        long zh = static_cast<long>(std::floor(c[a] * (static_cast<double>(m[a]) + w) / h));
        if (zl <= zh) {
          std::size_t ln = 0;
          for (int b = 0; b < D - 1; ++b)
            ln = ln * N + g.wrap_index(i[b]);
          total += line_sum(ln, zl, zh);
        }
      }
      int a = 0;
      if (D == 1)
        break;
      while (a < D - 1 && ++i[a] > hi[a]) {
        i[a] = lo[a];
        ++a;
      }
      if (a == D - 1)
        break;
    }
    double v = u == 1.0 ? total * dy : std::pow(total * dy, 1.0 / u);
    cache.emplace(m, v);
    out[f] = v;
  }
  return out;
}

inline double band_fraction_outside(const GridFunction &Fh, const FilterBank &bank) {
  const Grid &g = Fh.grid;
  const int n = g.dims / 2;
  std::vector<std::size_t> idx(g.dims);
  double all = 0, out = 0;
  for (std::size_t f = 0; f < g.size(); ++f) {
    double e = std::norm(Fh.samples[f]);
    if (e == 0)
      continue;
    all += e;
    g.unravel(f, idx);
    double r1 = 0, r2 = 0;
    for (int a = 0; a < n; ++a) {
      r1 += g.frequency(idx[a]) * g.frequency(idx[a]);
      r2 += g.frequency(idx[n + a]) * g.frequency(idx[n + a]);
    }
    if (!bank.in_band(std::sqrt(r1)) || !bank.in_band(std::sqrt(r2)))
      out += e;
  }
  return all > 0 ? out / all : 0.0;
}

} // namespace detail

inline HybridResult hybrid(const GridFunction &F, const HybridSpec &spec) {
  F.check();
  require(spec.bank != nullptr, ErrorKind::structural, "hybrid needs a filter bank");
  const FilterBank &bank = *spec.bank;
  const Grid &g = F.grid;
  require(F.domain == Domain::spatial, ErrorKind::structural, "hybrid expects a spatial function");
  require(g.dims % 2 == 0 && bank.grid.dims * 2 == g.dims && bank.grid.points == g.points &&
              bank.grid.period == g.period,
          ErrorKind::structural, "hybrid: F must live on the product of two copies of the bank grid");
  require(spec.M1 >= 0 && spec.M2 >= 0, ErrorKind::parameter, "M1, M2 must be >= 0");
  require(spec.u >= 1, ErrorKind::parameter, "hybrid u must be >= 1");
  const int n = bank.grid.dims;
  const double rho = spec.radius > 0 ? spec.radius : 6.0 * std::sqrt(static_cast<double>(n));

  GridFunction Fh = transform(F, Direction::forward);
  HybridResult res;
  res.out_of_band_fraction = detail::band_fraction_outside(Fh, bank);

  const bool first_low = spec.kind == HybridKind::MS || spec.kind == HybridKind::MM;
  const bool second_low = spec.kind == HybridKind::SM || spec.kind == HybridKind::MM;
  const std::size_t S = g.size();
  // acc1[x]: per-j accumulator (MS: sum over k; SM: sup over k), total[x]: final combination
  std::vector<double> total(S, 0.0), inner(S);
  for (int j = bank.j_min; j <= bank.j_max; ++j) {
    std::fill(inner.begin(), inner.end(), 0.0);
    const GridFunction &A = first_low ? bank.phi_hat.at(j) : bank.psi_hat.at(j);
    for (int k = bank.j_min; k <= bank.j_max; ++k) {
      const GridFunction &B = second_low ? bank.phi_hat.at(k) : bank.psi_hat.at(k);
      GridFunction G = detail::tensor_filter(Fh, A, B);
      std::vector<double> c(g.dims);
      for (int a = 0; a < g.dims; ++a)
        c[a] = a < n ? std::ldexp(1.0, spec.M1 - j) : std::ldexp(1.0, spec.M2 - k);
      auto V = detail::local_means(G, c, spec.u, rho);
      for (std::size_t x = 0; x < S; ++x) {
        switch (spec.kind) {
        case HybridKind::SS:
        case HybridKind::MS: inner[x] += V[x] * V[x]; break;
        case HybridKind::SM: inner[x] = std::max(inner[x], V[x] * V[x]); break;
        case HybridKind::MM: inner[x] = std::max(inner[x], V[x]); break;
        }
      }
    }
    for (std::size_t x = 0; x < S; ++x) {
      switch (spec.kind) {
      case HybridKind::SS:
      case HybridKind::SM: total[x] += inner[x]; break;
      case HybridKind::MS: total[x] = std::max(total[x], inner[x]); break;
      case HybridKind::MM: total[x] = std::max(total[x], inner[x]); break;
      }
    }
  }
  res.value = GridFunction(g, Domain::spatial);
  for (std::size_t x = 0; x < S; ++x)
    res.value.samples[x] = spec.kind == HybridKind::MM ? total[x] : std::sqrt(total[x]);
  return res;
}

struct GrowthPoint {
  int M1, M2;
  double ratio; // max over samples of ||H F||_p / ||F||_p
};

struct GrowthScan {
  std::vector<GrowthPoint> points;
  ScalingReport report;
};

// Slope of log2(max ratio) against M1 + M2, judged against the upper bound n (1/p0 - 1/u)
// (0 in the u = 1 regime, where the bound is uniform).
inline GrowthScan hybrid_growth_scan(const std::vector<GridFunction> &samples, HybridSpec base, double p, double p0,
                                     const std::vector<std::pair<int, int>> &M_range, double tol = 0.15) {
  require(M_range.size() >= 3, ErrorKind::fit, "growth scan needs at least 3 M points");
  require(!samples.empty(), ErrorKind::parameter, "growth scan needs at least one sample");
  require(base.bank != nullptr, ErrorKind::structural, "growth scan needs a bank");
  const double n = base.bank->grid.dims;
  double predicted = 0;
  if (base.u > 1) {
    require(p0 >= 1 && p0 < std::min(base.u, p), ErrorKind::parameter, "need 1 <= p0 < min(u, p)");
    predicted = n * (1 / p0 - 1 / base.u);
  }
  GrowthScan out;
  std::vector<double> x, y;
  for (auto [m1, m2] : M_range) {
    HybridSpec s = base;
    s.M1 = m1;
    s.M2 = m2;
    double best = 0;
    for (const auto &F : samples) {
      double den = lp_norm(F, NormSpec::lebesgue(p));
      if (!(den > 0))
        continue;
      best = std::max(best, lp_norm(hybrid(F, s).value, NormSpec::lebesgue(p)) / den);
    }
    out.points.push_back({m1, m2, best});
    x.push_back(m1 + m2);
    y.push_back(std::log2(best));
  }
  out.report = make_scaling_report(std::string(to_string(base.kind)) + " growth", x, y, predicted,
                                   base.u > 1 ? "growth bound 2^{(M1+M2) n (1/p0 - 1/u)}" : "uniform in M1, M2",
                                   tol, true, false);
  out.report.x_name = "M1+M2";
  return out;
}

} // namespace hormlab
