#pragma once

// Product-type Sobolev norms, the multi-parameter Hormander norm, empirical operator norms.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "multiplier.hpp"

namespace hormlab {

struct SobolevSpec {
  std::vector<double> s; // one per parameter
  double u = 2.0;

  void validate(int d) const {
    require(static_cast<int>(s.size()) == d, ErrorKind::structural,
            "Sobolev spec has " + std::to_string(s.size()) + " smoothness values for " + std::to_string(d) +
                " parameters");
    for (double x : s)
      require(x >= 0, ErrorKind::parameter, "smoothness s_j must be >= 0");
    require(u > 1 && std::isfinite(u), ErrorKind::parameter, "u must lie in (1, inf)");
  }
};

// Weight prod_p (1 + 4 pi^2 |y^p|^2)^{s_p/2} applied to the transform of F, then the L^u norm.
// Several specs share one forward transform.
inline std::vector<double> product_sobolev_norms(const GridFunction &F, const std::vector<SobolevSpec> &specs,
                                                 const SymbolLayout &layout) {
  F.check();
  require(F.grid.dims == layout.total_dims(), ErrorKind::structural,
          "product domain has " + std::to_string(F.grid.dims) + " axes, layout expects " +
              std::to_string(layout.total_dims()));
  for (const auto &sp : specs)
    sp.validate(layout.d);
  GridFunction src = F;
  src.domain = Domain::spatial;
  const GridFunction Fh = transform(src, Direction::forward);
  const Grid &G = Fh.grid;
  const int D = G.dims;

  std::vector<double> out(specs.size(), -1.0);
  std::vector<std::size_t> idx(D);
  std::vector<double> acc(layout.d);
  for (std::size_t q = 0; q < specs.size(); ++q) {
    if (out[q] >= 0)
      continue;
    const auto &sp = specs[q];
    bool zero = std::all_of(sp.s.begin(), sp.s.end(), [](double x) { return x == 0; });
    GridFunction back;
    if (zero) {
      back = src;
    } else {
      GridFunction W = Fh;
      for (std::size_t f = 0; f < G.size(); ++f) {
        if (W.samples[f] == cplx(0))
          continue;
        G.unravel(f, idx);
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int a = 0; a < D; ++a) {
          double y = G.frequency(idx[a]);
          acc[layout.parameter_of_axis(a)] += y * y;
        }
        double w = 1;
        for (int p = 0; p < layout.d; ++p)
          if (sp.s[p] != 0)
            w *= std::pow(1 + 4 * pi * pi * acc[p], sp.s[p] / 2);
        W.samples[f] *= w;
      }
      back = transform(W, Direction::inverse);
    }
    // every spec with the same smoothness shares this inverse transform
    for (std::size_t r = q; r < specs.size(); ++r)
      if (specs[r].s == sp.s)
        out[r] = lp_norm(back, NormSpec::lebesgue(specs[r].u));
  }
  return out;
}

inline double product_sobolev_norm(const GridFunction &F, const SobolevSpec &spec, const SymbolLayout &layout) {
  return product_sobolev_norms(F, {spec}, layout)[0];
}

struct KRange {
  int lo = 0;
  int hi = 0;
};

// Dilations k with 2^{-k}[r_lo, r_hi] meeting the open window annulus.
inline KRange auto_k_range(const SupportAnnulus &s, WindowKind window) {
  const double a = window == WindowKind::annulus_window ? 0.5 : 0.01;
  const double b = window == WindowKind::annulus_window ? 2.0 : 100.0;
  require(s.r_lo >= 0 && s.r_hi > 0 && s.r_hi >= s.r_lo, ErrorKind::support_declaration,
          "declared support annulus is malformed");
  // need 2^k > r_lo / b and 2^k < r_hi / a
  KRange k;
  k.lo = s.r_lo > 0 ? static_cast<int>(std::floor(std::log2(s.r_lo / b))) + 1 : -64;
  k.hi = static_cast<int>(std::ceil(std::log2(s.r_hi / a))) - 1;
  return k;
}

struct ANormOptions {
  WindowKind window = WindowKind::annulus_window;
  std::optional<std::vector<KRange>> k_range; // per parameter; auto from declared support when absent
  std::optional<SymbolGrid> symbol_grid;      // required for rule / separable forms
  bool factorize = true;                      // use exact product structure across parameters when present
};

struct ANormEntry {
  std::vector<int> k;
  std::vector<double> values; // one per spec
};

struct ANormResult {
  std::vector<double> value; // one per spec
  std::vector<std::vector<int>> argmax;
  std::vector<ANormEntry> scan;
};

inline std::optional<SupportAnnulus> dense_support(const MultiplierRep &m) {
  if (m.form != SymbolForm::dense)
    return std::nullopt;
  const SymbolGrid sg = lattice_symbol_grid(m.arg_grid, m.layout);
  const Grid &G = sg.grid;
  std::vector<std::size_t> idx(G.dims);
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (std::size_t f = 0; f < G.size(); ++f) {
    if (m.dense[f] == cplx(0))
      continue;
    G.unravel(f, idx);
    std::vector<double> r2(m.layout.d, 0.0);
    for (int a = 0; a < G.dims; ++a) {
      double x = G.coordinate(idx[a]);
      r2[m.layout.parameter_of_axis(a)] += x * x;
    }
    for (double v : r2) {
      lo = std::min(lo, std::sqrt(v));
      hi = std::max(hi, std::sqrt(v));
    }
  }
  if (hi == 0)
    return SupportAnnulus{0, 0};
  return SupportAnnulus{lo, hi};
}

inline ANormResult a_norm(const MultiplierRep &m, const std::vector<SobolevSpec> &specs, const ANormOptions &opt = {});

namespace detail {
inline ANormResult a_norm_factorized(const MultiplierRep &m, const std::vector<SobolevSpec> &specs,
                                     const ANormOptions &opt) {
  // ||F_1 (x) ... (x) F_d||_{L^u_{s}} = prod_p ||F_p||_{L^u_{s_p}} for product symbols and product weights
  const int d = m.layout.d;
  std::vector<ANormResult> per;
  for (int p = 0; p < d; ++p) {
    std::vector<SobolevSpec> sp;
    for (const auto &s : specs)
      sp.push_back({{s.s[p]}, s.u});
    ANormOptions o = opt;
    o.factorize = true;
    if (opt.k_range)
      o.k_range = std::vector<KRange>{(*opt.k_range)[p]};
    if (opt.symbol_grid) {
      // the parameter-p slice of the full symbol grid
      const auto &full = *opt.symbol_grid;
      SymbolGrid fg{Grid(m.layout.l * m.layout.n, full.grid.points, full.grid.period), {}};
      if (!full.center.empty())
        for (int a : m.layout.group_axes(p))
          fg.center.push_back(full.center[a]);
      o.symbol_grid = fg;
    }
    per.push_back(a_norm(*m.parameter_factors[p], sp, o));
  }
  ANormResult out;
  out.value.assign(specs.size(), 1.0);
  out.argmax.assign(specs.size(), std::vector<int>(d));
  for (std::size_t q = 0; q < specs.size(); ++q)
    for (int p = 0; p < d; ++p) {
      out.value[q] *= per[p].value[q];
      out.argmax[q][p] = per[p].argmax[q][0];
    }
  return out;
}
} // namespace detail

inline ANormResult a_norm(const MultiplierRep &m, const std::vector<SobolevSpec> &specs, const ANormOptions &opt) {
  const int d = m.layout.d;
  for (const auto &s : specs)
    s.validate(d);
  if (opt.factorize && static_cast<int>(m.parameter_factors.size()) == d && d > 1)
    return detail::a_norm_factorized(m, specs, opt);

  std::vector<KRange> ranges;
  if (opt.k_range) {
    ranges = *opt.k_range;
    require(static_cast<int>(ranges.size()) == d, ErrorKind::structural, "k_range needs one interval per parameter");
  } else {
    auto sup = m.support;
    if (!sup && m.form == SymbolForm::dense)
      sup = dense_support(m);
    if (!sup)
      throw Error(ErrorKind::support_declaration,
                  "auto k-range needs a declared support annulus for symbol '" + m.id + "'");
    if (sup->r_hi == 0) {
      ANormResult z;
      z.value.assign(specs.size(), 0.0);
      z.argmax.assign(specs.size(), std::vector<int>(d, 0));
      return z;
    }
    ranges.assign(d, auto_k_range(*sup, opt.window));
  }
  SymbolGrid sg;
  if (opt.symbol_grid)
    sg = *opt.symbol_grid;
  else if (m.form == SymbolForm::dense)
    sg = lattice_symbol_grid(m.arg_grid, m.layout);
  else
    throw Error(ErrorKind::structural, "a_norm of a " + std::string(m.form == SymbolForm::rule ? "rule" : "separable") +
                                           " symbol needs a symbol grid");

  ANormResult out;
  out.value.assign(specs.size(), 0.0);
  out.argmax.assign(specs.size(), std::vector<int>(d, ranges[0].lo));
  std::vector<int> k(d);
  for (int p = 0; p < d; ++p)
    k[p] = ranges[p].lo;
  while (true) {
    GridFunction F = windowed_symbol(m, k, opt.window, sg);
    std::vector<double> vals(specs.size(), 0.0);
    if (max_abs(F) > 0)
      vals = product_sobolev_norms(F, specs, m.layout);
    for (std::size_t q = 0; q < specs.size(); ++q)
      if (vals[q] > out.value[q]) {
        out.value[q] = vals[q];
        out.argmax[q] = k;
      }
    out.scan.push_back({k, vals});
    int p = 0;
    while (p < d && ++k[p] > ranges[p].hi) {
      k[p] = ranges[p].lo;
      ++p;
    }
    if (p == d)
      break;
  }
  return out;
}

inline double a_norm(const MultiplierRep &m, const SobolevSpec &spec, const ANormOptions &opt = {}) {
  return a_norm(m, std::vector<SobolevSpec>{spec}, opt).value[0];
}

// ---------------------------------------------------------------------------------------------

struct RandomTrialSpec {
  Grid grid;
  double band_lo = 0; // |xi| range of the Gaussian fields
  double band_hi = 1;
};

struct OperatorNormEstimate {
  double value = 0;
  std::string witness;                  // "family <i>" or "trial <t>"
  std::vector<GridFunction> witness_args;
  int trials = 0;
  std::uint64_t seed = 0;
  int skipped = 0;
  std::vector<double> running_max; // after each family, then each trial
};

inline double holder_exponent(const std::vector<double> &p) {
  double s = 0;
  for (double x : p) {
    require(x > 0, ErrorKind::parameter, "exponents must be positive");
    s += 1.0 / x;
  }
  return 1.0 / s;
}

inline GridFunction gaussian_field(const Grid &g, double band_lo, double band_hi, std::mt19937_64 &rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  GridFunction F(g, Domain::spectral);
  std::vector<std::size_t> idx(g.dims);
  for (std::size_t f = 0; f < g.size(); ++f) {
    g.unravel(f, idx);
    double r2 = 0;
    for (int a = 0; a < g.dims; ++a) {
      double x = g.frequency(idx[a]);
      r2 += x * x;
    }
    double re = nd(rng), im = nd(rng);
    double r = std::sqrt(r2);
    if (r >= band_lo && r <= band_hi)
      F.samples[f] = cplx(re, im);
  }
  return transform(F, Direction::inverse);
}

inline OperatorNormEstimate operator_norm_lower_bound(const MultiplierRep &m, const std::vector<double> &p_vec,
                                                      const std::vector<std::vector<GridFunction>> &families,
                                                      int random_trials, std::uint64_t seed,
                                                      std::optional<RandomTrialSpec> random = {},
                                                      ApplyOptions apply = {}) {
  require(static_cast<int>(p_vec.size()) == m.layout.l, ErrorKind::arity, "need one exponent per argument");
  require(random_trials == 0 || random.has_value(), ErrorKind::parameter, "random trials need a grid and band");
  const double p = holder_exponent(p_vec);
  OperatorNormEstimate est;
  est.seed = seed;
  auto consider = [&](const std::vector<GridFunction> &fs, const std::string &label) {
    double den = 1;
    for (std::size_t i = 0; i < fs.size(); ++i) {
      GridFunction x = fs[i].domain == Domain::spatial ? fs[i] : transform(fs[i], Direction::inverse);
      den *= lp_norm(x, NormSpec::lebesgue(p_vec[i]));
    }
    if (!(den > 0)) {
      ++est.skipped;
      est.running_max.push_back(est.value);
      return;
    }
    double num = lp_norm(apply_multilinear(m, fs, apply), NormSpec::lebesgue(p));
    double r = num / den;
    if (r > est.value) {
      est.value = r;
      est.witness = label;
      est.witness_args = fs;
    }
    est.running_max.push_back(est.value);
  };
  for (std::size_t i = 0; i < families.size(); ++i)
    consider(families[i], "family " + std::to_string(i));
  std::mt19937_64 rng(seed);
  for (int t = 0; t < random_trials; ++t) {
    std::vector<GridFunction> fs;
    for (int i = 0; i < m.layout.l; ++i)
      fs.push_back(gaussian_field(random->grid, random->band_lo, random->band_hi, rng));
    consider(fs, "trial " + std::to_string(t));
    ++est.trials;
  }
  return est;
}

} // namespace hormlab
