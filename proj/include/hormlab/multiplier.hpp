#pragma once

// Multilinear multi-parameter Fourier multipliers: symbol representations, application,
// paraproduct split, dyadic localization and kernel shells.
//
// Coordinate order of a symbol point xi in R^{l n d}: argument i, then parameter p, then
// component t, i.e. axis i*(n*d) + p*n + t. Each argument lives on an (n*d)-dimensional grid
// whose axis p*n + t belongs to parameter p.

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "filters.hpp"
#include "grid.hpp"

namespace hormlab {

struct SymbolLayout {
  int l = 2; // arity
  int d = 1; // parameters
  int n = 1; // base dimension
  int arg_dims() const { return n * d; }
  int total_dims() const { return l * n * d; }
  int parameter_of_axis(int axis) const { return (axis % arg_dims()) / n; }
  // axes of the product domain belonging to parameter p
  std::vector<int> group_axes(int p) const {
    std::vector<int> out;
    for (int i = 0; i < l; ++i)
      for (int t = 0; t < n; ++t)
        out.push_back(i * arg_dims() + p * n + t);
    return out;
  }
};

using PointFn = std::function<cplx(std::span<const double>)>;

// A named factor function of one argument's frequency vector, reconstructible from (kind, params).
struct Factor {
  std::string kind;
  std::vector<double> params;
  PointFn fn;
};

inline Factor make_factor(const std::string &kind, std::vector<double> params) {
  Factor f{kind, params, {}};
  if (kind == "one") {
    f.fn = [](std::span<const double>) { return cplx(1.0); };
  } else if (kind == "bump") {
    // params: inner, outer, center_0, ..., center_{m-1}
    require(params.size() >= 3, ErrorKind::parameter, "bump factor needs inner, outer, center...");
    Bump b(std::vector<double>(params.begin() + 2, params.end()), params[0], params[1]);
    f.fn = [b](std::span<const double> x) { return cplx(b(x)); };
  } else if (kind == "mode") {
    // params: a_0..a_{m-1}: e^{-2 pi i a.xi} (translation by a)
    f.fn = [params](std::span<const double> x) {
      double s = 0;
      for (std::size_t q = 0; q < x.size() && q < params.size(); ++q)
        s += params[q] * x[q];
      return std::polar(1.0, -2 * pi * s);
    };
  } else {
    throw Error(ErrorKind::parameter, "unknown factor kind '" + kind + "'");
  }
  return f;
}

struct SeparableSum {
  std::vector<std::vector<Factor>> factors; // per argument, distinct factors
  std::vector<std::vector<int>> terms;      // per term, factor index for each argument
  std::vector<cplx> coeffs;                 // per term (empty means all 1)

  cplx coeff(std::size_t t) const { return coeffs.empty() ? cplx(1.0) : coeffs[t]; }
};

// Fast sampler for rule symbols: values of m at center + grid coordinates scaled by 2^{k_p}
// per parameter group, row-major over the symbol grid.
struct SymbolGrid;
using GridSampler = std::function<std::vector<cplx>(const SymbolGrid &, std::span<const int>)>;

enum class SymbolForm { dense, separable_sum, rule };

struct SupportAnnulus {
  double r_lo = 0;
  double r_hi = 0;
};

struct MultiplierRep {
  SymbolLayout layout;
  SymbolForm form = SymbolForm::rule;
  std::string id = "symbol";

  // dense: values on the argument lattice of arg_grid, flattened argument-major
  Grid arg_grid;
  std::vector<cplx> dense;
  SeparableSum sep;
  PointFn rule;
  GridSampler sampler;
  // per parameter group |xi^p| bounds where the symbol may be nonzero
  std::optional<SupportAnnulus> support;
  // set when the symbol is an exact product over parameters (enables factorized norms)
  std::vector<std::shared_ptr<const MultiplierRep>> parameter_factors;
};

inline constexpr std::size_t dense_budget_default = std::size_t(1) << 24;
inline constexpr std::size_t tuple_budget_default = std::size_t(1) << 28;

inline MultiplierRep make_rule(SymbolLayout layout, PointFn fn, std::optional<SupportAnnulus> support = {}) {
  MultiplierRep m;
  m.layout = layout;
  m.form = SymbolForm::rule;
  m.rule = std::move(fn);
  m.support = support;
  return m;
}

inline MultiplierRep make_dense(SymbolLayout layout, const Grid &arg_grid, std::vector<cplx> values,
                                std::size_t budget = dense_budget_default) {
  require(arg_grid.dims == layout.arg_dims(), ErrorKind::structural, "dense symbol: grid dims != n*d");
  const std::size_t need = ipow(arg_grid.size(), layout.l);
  require(need <= budget, ErrorKind::budget,
          "dense symbol needs " + std::to_string(need) + " entries, budget " + std::to_string(budget));
  require(values.size() == need, ErrorKind::structural, "dense symbol: tensor shape mismatch");
  MultiplierRep m;
  m.layout = layout;
  m.form = SymbolForm::dense;
  m.arg_grid = arg_grid;
  m.dense = std::move(values);
  return m;
}

inline MultiplierRep make_separable(SymbolLayout layout, SeparableSum sep,
                                    std::optional<SupportAnnulus> support = {}) {
  require(static_cast<int>(sep.factors.size()) == layout.l, ErrorKind::arity,
          "separable sum needs one factor list per argument");
  for (const auto &t : sep.terms) {
    require(static_cast<int>(t.size()) == layout.l, ErrorKind::arity, "separable term arity mismatch");
    for (int i = 0; i < layout.l; ++i)
      require(t[i] >= 0 && static_cast<std::size_t>(t[i]) < sep.factors[i].size(), ErrorKind::structural,
              "separable term references a missing factor");
  }
  require(sep.coeffs.empty() || sep.coeffs.size() == sep.terms.size(), ErrorKind::structural,
          "separable coefficient count mismatch");
  MultiplierRep m;
  m.layout = layout;
  m.form = SymbolForm::separable_sum;
  m.sep = std::move(sep);
  m.support = support;
  return m;
}

inline MultiplierRep constant_symbol(SymbolLayout layout, cplx c) {
  SeparableSum s;
  for (int i = 0; i < layout.l; ++i)
    s.factors.push_back({make_factor("one", {})});
  s.terms.push_back(std::vector<int>(layout.l, 0));
  s.coeffs.push_back(c);
  return make_separable(layout, std::move(s));
}

// Evaluate a rule or separable symbol at a point of R^{l n d}.
inline cplx symbol_value(const MultiplierRep &m, std::span<const double> xi) {
  const int nd = m.layout.arg_dims();
  switch (m.form) {
  case SymbolForm::rule:
    return m.rule(xi);
  case SymbolForm::separable_sum: {
    cplx s = 0;
    for (std::size_t t = 0; t < m.sep.terms.size(); ++t) {
      cplx prod = m.sep.coeff(t);
      for (int i = 0; i < m.layout.l && prod != cplx(0); ++i)
        prod *= m.sep.factors[i][m.sep.terms[t][i]].fn(xi.subspan(i * nd, nd));
      s += prod;
    }
    return s;
  }
  case SymbolForm::dense:
    break;
  }
  throw Error(ErrorKind::structural, "dense symbols are only defined on their lattice");
}

// Expand any symbol to a dense tensor on the argument lattice of g.
inline MultiplierRep to_dense(const MultiplierRep &m, const Grid &g, std::size_t budget = dense_budget_default) {
  if (m.form == SymbolForm::dense) {
    require(m.arg_grid == g, ErrorKind::structural, "to_dense: dense symbol lives on a different lattice");
    return m;
  }
  require(g.dims == m.layout.arg_dims(), ErrorKind::structural, "to_dense: grid dims != n*d");
  const std::size_t A = g.size();
  const std::size_t need = ipow(A, m.layout.l);
  require(need <= budget, ErrorKind::budget,
          "dense expansion needs " + std::to_string(need) + " entries, budget " + std::to_string(budget));
  const int D = m.layout.total_dims();
  Grid full(D, g.points, g.points / g.period);
  std::vector<cplx> vals(need);
  std::vector<std::size_t> idx(D);
  std::vector<double> xi(D);
  for (std::size_t f = 0; f < need; ++f) {
    full.unravel(f, idx);
    for (int a = 0; a < D; ++a)
      xi[a] = g.frequency(idx[a]);
    vals[f] = symbol_value(m, xi);
  }
  MultiplierRep out = make_dense(m.layout, g, std::move(vals), budget);
  out.id = m.id;
  out.support = m.support;
  return out;
}

inline GridFunction as_spectrum(const GridFunction &f) {
  return f.domain == Domain::spectral ? f : transform(f, Direction::forward);
}

inline GridFunction apply_linear(const GridFunction &symbol, const GridFunction &f) {
  symbol.check();
  f.check();
  require(symbol.grid == f.grid, ErrorKind::structural, "apply_linear: grid mismatch");
  require(symbol.domain == Domain::spectral, ErrorKind::structural, "apply_linear: symbol must be spectral");
  GridFunction F = as_spectrum(f);
  for (std::size_t i = 0; i < F.size(); ++i)
    F.samples[i] *= symbol.samples[i];
  return transform(F, Direction::inverse);
}

// Spectral samples of a factor function on the lattice of g.
inline GridFunction sample_factor(const Factor &fac, const Grid &g) { return sample(g, Domain::spectral, fac.fn); }

struct ApplyOptions {
  bool dealias = true;
  std::size_t tuple_budget = tuple_budget_default;
};

inline Grid output_grid(const Grid &g, int l, bool dealias) {
  return dealias ? Grid(g.dims, next_pow2(static_cast<std::size_t>(l) * g.points), g.period) : g;
}

inline GridFunction apply_multilinear(const MultiplierRep &m, const std::vector<GridFunction> &fs,
                                      ApplyOptions opt = {}) {
  const int l = m.layout.l;
  require(static_cast<int>(fs.size()) == l, ErrorKind::arity,
          "symbol arity " + std::to_string(l) + " but " + std::to_string(fs.size()) + " inputs");
  for (const auto &f : fs) {
    f.check();
    require(f.grid == fs[0].grid, ErrorKind::structural, "apply_multilinear: inputs on different grids");
  }
  const Grid &g = fs[0].grid;
  require(g.dims == m.layout.arg_dims(), ErrorKind::structural, "apply_multilinear: grid dims != n*d");
  const Grid og = output_grid(g, l, opt.dealias);

  std::vector<GridFunction> spec;
  spec.reserve(l);
  for (const auto &f : fs)
    spec.push_back(as_spectrum(f));

  if (m.form == SymbolForm::separable_sum) {
    // each distinct (argument, factor) pair is applied once, then terms are pointwise products
    std::vector<std::vector<GridFunction>> applied(l);
    for (int i = 0; i < l; ++i) {
      GridFunction Fi = opt.dealias ? pad_spectrum(spec[i], og.points) : spec[i];
      for (const auto &fac : m.sep.factors[i])
        applied[i].push_back(apply_linear(sample_factor(fac, og), Fi));
    }
    GridFunction out(og, Domain::spatial);
    for (std::size_t t = 0; t < m.sep.terms.size(); ++t) {
      const cplx c = m.sep.coeff(t);
      for (std::size_t x = 0; x < og.size(); ++x) {
        cplx prod = c;
        for (int i = 0; i < l; ++i)
          prod *= applied[i][m.sep.terms[t][i]].samples[x];
        out.samples[x] += prod;
      }
    }
    return out;
  }

  if (m.form == SymbolForm::dense)
    require(m.arg_grid == g, ErrorKind::structural, "dense symbol lattice does not match the input grid");

  // direct lattice sum, accumulated into the output spectrum: G(sigma) = sum_{sum xi_i = sigma} m prod f_i
  const int nd = g.dims;
  const std::size_t A = g.size();
  std::vector<std::vector<std::size_t>> nz(l);
  std::size_t tuples = 1;
  for (int i = 0; i < l; ++i) {
    for (std::size_t q = 0; q < A; ++q)
      if (spec[i].samples[q] != cplx(0))
        nz[i].push_back(q);
    tuples *= std::max<std::size_t>(nz[i].size(), 1);
    require(tuples <= opt.tuple_budget, ErrorKind::budget,
            "direct multilinear sum exceeds tuple budget " + std::to_string(opt.tuple_budget));
  }
  std::vector<std::vector<long>> sidx(A, std::vector<long>(nd));
  std::vector<std::vector<double>> freq(A, std::vector<double>(nd));
  {
    std::vector<std::size_t> idx(nd);
    for (std::size_t q = 0; q < A; ++q) {
      g.unravel(q, idx);
      for (int a = 0; a < nd; ++a) {
        sidx[q][a] = g.signed_index(idx[a]);
        freq[q][a] = g.frequency(idx[a]);
      }
    }
  }
  GridFunction G(og, Domain::spectral);
  const double w = std::pow(g.period, -static_cast<double>(nd) * (l - 1));
  std::vector<double> xi(static_cast<std::size_t>(l) * nd);
  std::vector<long> sig(nd);
  std::vector<std::size_t> oidx(nd);
  std::vector<std::size_t> pick(l);

  std::function<void(int, cplx, std::size_t)> rec = [&](int i, cplx prod, std::size_t flat) {
    if (i == l) {
      cplx mv;
      if (m.form == SymbolForm::dense)
        mv = m.dense[flat];
      else
        mv = m.rule(xi);
      if (mv == cplx(0))
        return;
      std::fill(sig.begin(), sig.end(), 0);
      for (int k = 0; k < l; ++k)
        for (int a = 0; a < nd; ++a)
          sig[a] += sidx[pick[k]][a];
      for (int a = 0; a < nd; ++a)
        oidx[a] = og.wrap_index(sig[a]);
      G.samples[og.ravel(oidx)] += mv * prod;
      return;
    }
    for (std::size_t q : nz[i]) {
      pick[i] = q;
      for (int a = 0; a < nd; ++a)
        xi[i * nd + a] = freq[q][a];
      rec(i + 1, prod * spec[i].samples[q], flat * A + q);
    }
  };
  rec(0, cplx(w), 0);
  return transform(G, Direction::inverse);
}

// ---------------------------------------------------------------------------------------------
// Paraproduct split (bilinear, bi-parameter, n = 1).

struct ParaproductPieces {
  // pieces[a][b]: a indexes the parameter-1 cutoff (0: A_12, 1: A_22, 2: A_21), b likewise for B
  std::vector<std::vector<GridFunction>> pieces;
  static const char *label(int a) {
    static const char *names[] = {"12", "22", "21"};
    return names[a];
  }
};

struct ParaproductOptions {
  bool aux_window = false; // insert psi_tilde_j(xi+eta) / phi_tilde(xi+eta) per piece
  bool dealias = true;
};

namespace detail {

// Cutoff values A_a(x, y) for one parameter from 1-D frequencies x (first argument) and y (second).
struct ParaCutoffs {
  const FilterBank &bank;
  bool aux;

  double psi(int j, double r) const { return psi_hat_value_bank(j, r); }
  double psi_hat_value_bank(int j, double r) const {
    // renormalized bank value on the band, analytic value off it (identical to 1e-16)
    double s = 0;
    if (bank.in_band(r)) {
      for (int k = bank.j_min; k <= bank.j_max; ++k)
        s += psi_hat_value(k, r);
      return psi_hat_value(j, r) / s;
    }
    return psi_hat_value(j, r);
  }
  double psi_wide(int j, double r) const {
    double s = 0;
    for (int k = std::max(bank.j_min, j - bank.separation); k <= std::min(bank.j_max, j + bank.separation); ++k)
      s += psi(k, r);
    return s;
  }
  double operator()(int a, double x, double y) const {
    const double rx = std::abs(x), ry = std::abs(y), rs = std::abs(x + y);
    double v = 0;
    for (int j = bank.j_min; j <= bank.j_max; ++j) {
      double term;
      if (a == 0)
        term = phi_hat_value(j, bank.separation, rx) * psi(j, ry);
      else if (a == 1)
        term = psi(j, rx) * psi_wide(j, ry);
      else
        term = psi(j, rx) * phi_hat_value(j, bank.separation, ry);
      if (aux && term != 0)
        term *= a == 1 ? phi_tilde_value(j + bank.separation, rs) : psi_tilde_value(j, rs);
      v += term;
    }
    return v;
  }
};

} // namespace detail

inline std::vector<std::string> uncovered_modes(const GridFunction &F, const FilterBank &bank, double rel_tol = 1e-13) {
  std::vector<std::string> out;
  const double mx = max_abs(F);
  std::vector<std::size_t> idx(F.grid.dims);
  for (std::size_t f = 0; f < F.size(); ++f) {
    if (std::abs(F.samples[f]) <= rel_tol * mx)
      continue;
    F.grid.unravel(f, idx);
    for (int a = 0; a < F.grid.dims; ++a) {
      if (!bank.in_band(std::abs(F.grid.frequency(idx[a])))) {
        std::string s = "(";
        for (int b = 0; b < F.grid.dims; ++b)
          s += (b ? "," : "") + std::to_string(F.grid.signed_index(idx[b]));
        out.push_back(s + ")");
        break;
      }
    }
  }
  return out;
}

inline ParaproductPieces paraproduct_pieces(const MultiplierRep &m, const GridFunction &f, const GridFunction &g,
                                            const FilterBank &bank, ParaproductOptions opt = {}) {
  require(m.layout.l == 2 && m.layout.d == 2 && m.layout.n == 1, ErrorKind::structural,
          "paraproduct split needs l = 2, d = 2, n = 1");
  require(bank.grid.dims == 1 && bank.grid.points == f.grid.points && bank.grid.period == f.grid.period,
          ErrorKind::structural, "bank must live on the 1-D axis grid of the inputs");
  GridFunction F = as_spectrum(f), Gs = as_spectrum(g);
  for (const GridFunction *X : {&F, &Gs}) {
    auto bad = uncovered_modes(*X, bank);
    if (!bad.empty()) {
      std::string list;
      for (std::size_t i = 0; i < bad.size() && i < 12; ++i)
        list += (i ? " " : "") + bad[i];
      throw Error(ErrorKind::coverage, std::to_string(bad.size()) + " input modes outside the bank band: " + list +
                                           (bad.size() > 12 ? " ..." : ""));
    }
  }
  detail::ParaCutoffs cut{bank, opt.aux_window};
  const Grid &ag = f.grid;
  const MultiplierRep base = m.form == SymbolForm::dense ? m : to_dense(m, ag);
  const std::size_t A = ag.size();
  Grid full(4, ag.points, ag.points / ag.period);
  std::vector<std::size_t> idx(4);

  ParaproductPieces out;
  out.pieces.assign(3, std::vector<GridFunction>(3));
  // per parameter cutoff tables over (xi_p index, eta_p index)
  const std::size_t N = ag.points;
  std::vector<std::vector<double>> tab(3, std::vector<double>(N * N));
  for (int a = 0; a < 3; ++a)
    for (std::size_t x = 0; x < N; ++x)
      for (std::size_t y = 0; y < N; ++y)
        tab[a][x * N + y] = cut(a, ag.frequency(x), ag.frequency(y));
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      std::vector<cplx> vals(A * A);
      for (std::size_t q = 0; q < vals.size(); ++q) {
        full.unravel(q, idx); // (xi_1, xi_2, eta_1, eta_2)
        vals[q] = base.dense[q] * tab[a][idx[0] * N + idx[2]] * tab[b][idx[1] * N + idx[3]];
      }
      MultiplierRep piece = make_dense(m.layout, ag, std::move(vals));
      out.pieces[a][b] = apply_multilinear(piece, {F, Gs}, {opt.dealias});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// Dyadic localization.

// A grid on which a symbol is sampled as a function of xi: xi = center + coordinate.
struct SymbolGrid {
  Grid grid;
  std::vector<double> center;

  double center_of(int axis) const { return center.empty() ? 0.0 : center[axis]; }
};

// The argument lattice of g viewed as a symbol grid (spacing 1/P, N points per axis).
inline SymbolGrid lattice_symbol_grid(const Grid &g, const SymbolLayout &layout) {
  return {Grid(layout.total_dims(), g.points, g.points / g.period), {}};
}

struct LocalizedSymbol {
  std::vector<int> dilation;
  SymbolGrid symbol_grid;
  GridFunction windowed; // function of xi on the symbol grid (tagged spatial)
  GridFunction kernel;   // K(y) = int F(xi) e^{2 pi i xi.y} dxi on the dual grid (spacing 1/period)
};

namespace detail {

inline std::vector<cplx> sample_dense_dilated(const MultiplierRep &m, const SymbolGrid &sg, std::span<const int> k) {
  const SymbolGrid lat = lattice_symbol_grid(m.arg_grid, m.layout);
  require(sg.grid == lat.grid, ErrorKind::structural, "dense symbol: symbol grid must be its own lattice");
  for (double c : sg.center)
    require(c == 0.0, ErrorKind::structural, "dense symbol: shifted symbol grids are not supported");
  const int D = sg.grid.dims;
  const Grid &G = sg.grid;
  std::vector<cplx> out(G.size());
  std::vector<std::size_t> idx(D), jdx(D);
  for (std::size_t f = 0; f < G.size(); ++f) {
    G.unravel(f, idx);
    bool outside = false;
    std::vector<double> r2(m.layout.d, 0.0);
    for (int a = 0; a < D; ++a) {
      int p = m.layout.parameter_of_axis(a);
      long s = G.signed_index(idx[a]);
      long t;
      if (k[p] >= 0) {
        t = s * (1L << k[p]);
      } else {
        long q = 1L << (-k[p]);
        if (s % q != 0)
          throw Error(ErrorKind::resolution, "dilation 2^" + std::to_string(k[p]) +
                                                  " is not aligned with the dense lattice; refusing to interpolate");
        t = s / q;
      }
      if (t < -static_cast<long>(G.points) / 2 || t >= static_cast<long>(G.points) / 2)
        outside = true;
      double xi = static_cast<double>(t) * G.period / static_cast<double>(G.points);
      r2[p] += xi * xi;
      jdx[a] = G.wrap_index(t);
    }
    if (outside) {
      bool known_zero = false;
      if (m.support)
        for (double v : r2)
          if (std::sqrt(v) > m.support->r_hi || std::sqrt(v) < m.support->r_lo)
            known_zero = true;
      require(known_zero, ErrorKind::resolution, "dilated symbol leaves the dense lattice inside its support");
      out[f] = 0;
    } else {
      out[f] = m.dense[G.ravel(jdx)];
    }
  }
  return out;
}

inline std::vector<cplx> sample_separable_dilated(const MultiplierRep &m, const SymbolGrid &sg, std::span<const int> k) {
  const SymbolLayout &L = m.layout;
  const int nd = L.arg_dims();
  const Grid &G = sg.grid;
  Grid sub(nd, G.points, G.period);
  const std::size_t A = sub.size();
  // nonzero samples of every (argument, factor)
  std::vector<std::vector<std::vector<std::pair<std::size_t, cplx>>>> nzv(L.l);
  std::vector<std::size_t> idx(nd);
  std::vector<double> x(nd);
  for (int i = 0; i < L.l; ++i) {
    for (const auto &fac : m.sep.factors[i]) {
      std::vector<std::pair<std::size_t, cplx>> v;
      for (std::size_t q = 0; q < A; ++q) {
        sub.unravel(q, idx);
        for (int a = 0; a < nd; ++a)
          x[a] = std::ldexp(sg.center_of(i * nd + a) + sub.coordinate(idx[a]), k[L.parameter_of_axis(a)]);
        cplx val = fac.fn(x);
        if (val != cplx(0))
          v.emplace_back(q, val);
      }
      nzv[i].push_back(std::move(v));
    }
  }
  std::vector<cplx> out(G.size());
  for (std::size_t t = 0; t < m.sep.terms.size(); ++t) {
    const auto &term = m.sep.terms[t];
    std::function<void(int, cplx, std::size_t)> rec = [&](int i, cplx prod, std::size_t flat) {
      if (i == L.l) {
        out[flat] += prod;
        return;
      }
      for (const auto &[q, val] : nzv[i][term[i]])
        rec(i + 1, prod * val, flat * A + q);
    };
    rec(0, m.sep.coeff(t), 0);
  }
  return out;
}

inline std::vector<cplx> sample_rule_dilated(const MultiplierRep &m, const SymbolGrid &sg, std::span<const int> k) {
  if (m.sampler)
    return m.sampler(sg, k);
  const Grid &G = sg.grid;
  const int D = G.dims;
  std::vector<cplx> out(G.size());
  std::vector<std::size_t> idx(D);
  std::vector<double> xi(D);
  for (std::size_t f = 0; f < G.size(); ++f) {
    G.unravel(f, idx);
    for (int a = 0; a < D; ++a)
      xi[a] = std::ldexp(sg.center_of(a) + G.coordinate(idx[a]), k[m.layout.parameter_of_axis(a)]);
    out[f] = m.rule(xi);
  }
  return out;
}

} // namespace detail

// m(2^{k_1} xi^1, ..., 2^{k_d} xi^d) sampled on the symbol grid (no window).
inline std::vector<cplx> sample_dilated(const MultiplierRep &m, const SymbolGrid &sg, std::span<const int> k) {
  require(sg.grid.dims == m.layout.total_dims(), ErrorKind::structural, "symbol grid dims != l*n*d");
  require(static_cast<int>(k.size()) == m.layout.d, ErrorKind::structural, "dilation vector length != d");
  switch (m.form) {
  case SymbolForm::dense: return detail::sample_dense_dilated(m, sg, k);
  case SymbolForm::separable_sum: return detail::sample_separable_dilated(m, sg, k);
  case SymbolForm::rule: return detail::sample_rule_dilated(m, sg, k);
  }
  return {};
}

// Windowed symbol m(2^k .) * prod_p Theta(xi^p) on the symbol grid.
inline GridFunction windowed_symbol(const MultiplierRep &m, std::span<const int> k, WindowKind window,
                                    const SymbolGrid &sg) {
  auto vals = sample_dilated(m, sg, k);
  const Grid &G = sg.grid;
  const int D = G.dims;
  std::vector<std::size_t> idx(D);
  std::vector<double> r2(m.layout.d);
  for (std::size_t f = 0; f < G.size(); ++f) {
    if (vals[f] == cplx(0))
      continue;
    G.unravel(f, idx);
    std::fill(r2.begin(), r2.end(), 0.0);
    for (int a = 0; a < D; ++a) {
      double x = sg.center_of(a) + G.coordinate(idx[a]);
      r2[m.layout.parameter_of_axis(a)] += x * x;
    }
    double w = 1;
    for (double v : r2)
      w *= window_value(window, std::sqrt(v));
    vals[f] *= w;
  }
  return GridFunction(G, std::move(vals), Domain::spatial);
}

// K(y) = int F(xi) e^{2 pi i xi.y} dxi, y on the dual lattice q / period.
inline GridFunction kernel_of(const GridFunction &F, const SymbolGrid &sg) {
  const Grid &G = sg.grid;
  Grid kg(G.dims, G.points, static_cast<double>(G.points) / G.period);
  GridFunction K(kg, Domain::spatial);
  detail::FftPlanner::instance().execute(G.dims, G.points, FFTW_BACKWARD, F.samples.data(), K.samples.data());
  const double vol = G.cell_volume();
  std::vector<std::size_t> idx(G.dims);
  for (std::size_t f = 0; f < K.size(); ++f) {
    double phase = 0;
    if (!sg.center.empty()) {
      kg.unravel(f, idx);
      for (int a = 0; a < G.dims; ++a)
        phase += sg.center[a] * kg.coordinate(idx[a]);
    }
    K.samples[f] *= vol * (phase == 0 ? cplx(1) : std::polar(1.0, 2 * pi * phase));
  }
  return K;
}

// Inverse of kernel_of: F(xi) = int K(y) e^{-2 pi i xi.y} dy on the symbol grid.
inline GridFunction symbol_of_kernel(const GridFunction &K, const SymbolGrid &sg) {
  const Grid &G = sg.grid;
  const Grid &kg = K.grid;
  std::vector<cplx> mod(K.samples);
  std::vector<std::size_t> idx(G.dims);
  if (!sg.center.empty())
    for (std::size_t f = 0; f < K.size(); ++f) {
      kg.unravel(f, idx);
      double phase = 0;
      for (int a = 0; a < G.dims; ++a)
        phase += sg.center[a] * kg.coordinate(idx[a]);
      mod[f] *= std::polar(1.0, -2 * pi * phase);
    }
  GridFunction F(G, Domain::spatial);
  detail::FftPlanner::instance().execute(G.dims, G.points, FFTW_FORWARD, mod.data(), F.samples.data());
  const double vol = kg.cell_volume();
  for (auto &v : F.samples)
    v *= vol;
  return F;
}

inline LocalizedSymbol localize_symbol(const MultiplierRep &m, std::vector<int> dilation, WindowKind window,
                                       const SymbolGrid &sg) {
  LocalizedSymbol L;
  L.windowed = windowed_symbol(m, dilation, window, sg);
  L.kernel = kernel_of(L.windowed, sg);
  L.dilation = std::move(dilation);
  L.symbol_grid = sg;
  return L;
}

// Windowed symbol on the argument lattice as a dense multiplier (so T can be applied with it).
inline MultiplierRep dense_from_symbol_grid(const GridFunction &F, const SymbolLayout &layout, const Grid &arg_grid) {
  const SymbolGrid lat = lattice_symbol_grid(arg_grid, layout);
  require(F.grid == lat.grid, ErrorKind::structural, "symbol grid is not the argument lattice");
  return make_dense(layout, arg_grid, F.samples);
}

// ---------------------------------------------------------------------------------------------
// Kernel shells D_0 = {|v| <= 1}, D_M = {2^{M-1} < |v| <= 2^M} per parameter group.

struct ShellDecomposition {
  std::map<std::vector<int>, GridFunction> shells;
  int M_max = 1;
};

inline int shell_index(double r, int M_max) {
  if (r <= 1.0)
    return 0;
  int M = static_cast<int>(std::ceil(std::log2(r)));
  // guard the log2 rounding at exact powers of two
  while (M > 0 && std::ldexp(1.0, M - 1) >= r)
    --M;
  while (std::ldexp(1.0, M) < r)
    ++M;
  return std::min(M, M_max);
}

inline ShellDecomposition shell_decompose(const LocalizedSymbol &k, const SymbolLayout &layout, int M_max) {
  require(M_max >= 1, ErrorKind::parameter, "M_max must be >= 1");
  const GridFunction &K = k.kernel;
  require(K.grid.dims == layout.total_dims(), ErrorKind::structural, "kernel dims != l*n*d");
  ShellDecomposition out;
  out.M_max = M_max;
  const int D = K.grid.dims;
  std::vector<std::size_t> idx(D);
  std::vector<double> r2(layout.d);
  std::vector<int> key(layout.d);
  for (std::size_t f = 0; f < K.size(); ++f) {
    K.grid.unravel(f, idx);
    std::fill(r2.begin(), r2.end(), 0.0);
    for (int a = 0; a < D; ++a) {
      double y = K.grid.coordinate(idx[a]);
      r2[layout.parameter_of_axis(a)] += y * y;
    }
    for (int p = 0; p < layout.d; ++p)
      key[p] = shell_index(std::sqrt(r2[p]), M_max);
    auto it = out.shells.find(key);
    if (it == out.shells.end())
      it = out.shells.emplace(key, GridFunction(K.grid, Domain::spatial)).first;
    it->second.samples[f] = K.samples[f];
  }
  return out;
}

} // namespace hormlab
