#pragma once

// Sharpness families: the tensor-bump multiplier over E_k^N with its test functions and predicted
// exponents, and the multi-parameter tensorization of single-parameter symbols.

#include <cmath>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "multiplier.hpp"

namespace hormlab {

// phi = 1 on [-1/20, 1/20], supported in [-1/10, 1/10]; varphi supported in [-1/100, 1/100]
// (plateau 1/200). Both are scaled by 1/N in the family.
inline constexpr double tb_phi_inner = 1.0 / 20, tb_phi_outer = 1.0 / 10;
inline constexpr double tb_varphi_inner = 1.0 / 200, tb_varphi_outer = 1.0 / 100;

struct TensorBumpFamily {
  int N = 16;
  int k = 0;
  int l = 2;
  std::vector<std::vector<int>> index_set; // E_k^N
};

inline void check_tensor_bump(int N, int k, int l) {
  require(l >= 2, ErrorKind::parameter, "tensor bump needs arity l >= 2");
  require(k >= 0 && k <= l - 2, ErrorKind::parameter, "tensor bump needs 0 <= k <= l - 2");
  require(N >= l, ErrorKind::parameter, "tensor bump needs N >= l");
  if (k >= 1)
    require(N % l == 0, ErrorKind::parameter,
            "E_k^N with k >= 1 needs l | N (j_1 = N/l), got N = " + std::to_string(N) + ", l = " + std::to_string(l));
}

// Compositions of `total` into `parts` positive integers, lexicographic.
inline void compositions(int total, int parts, std::vector<int> &cur, std::vector<std::vector<int>> &out) {
  if (parts == 1) {
    if (total >= 1) {
      cur.push_back(total);
      out.push_back(cur);
      cur.pop_back();
    }
    return;
  }
  for (int j = 1; j <= total - (parts - 1); ++j) {
    cur.push_back(j);
    compositions(total - j, parts - 1, cur, out);
    cur.pop_back();
  }
}

inline TensorBumpFamily tensor_bump_family(int N, int k, int l) {
  check_tensor_bump(N, k, l);
  TensorBumpFamily fam{N, k, l, {}};
  std::vector<int> head(k, N / l);
  std::vector<int> cur = head;
  compositions(k == 0 ? N : (l - k) * N / l, l - k, cur, fam.index_set);
  return fam;
}

inline MultiplierRep tensor_bump_multiplier(int N, int k, int l) {
  TensorBumpFamily fam = tensor_bump_family(N, k, l);
  const double n = N;
  SeparableSum sep;
  sep.factors.resize(l);
  std::vector<std::map<int, int>> slot(l);
  double rlo = std::numeric_limits<double>::infinity(), rhi = 0;
  const double pad = std::sqrt(static_cast<double>(l)) * tb_phi_outer / n;
  for (const auto &j : fam.index_set) {
    std::vector<int> term(l);
    double r2 = 0;
    for (int i = 0; i < l; ++i) {
      auto it = slot[i].find(j[i]);
      if (it == slot[i].end()) {
        it = slot[i].emplace(j[i], static_cast<int>(sep.factors[i].size())).first;
        sep.factors[i].push_back(make_factor("bump", {tb_phi_inner / n, tb_phi_outer / n, j[i] / n}));
      }
      term[i] = it->second;
      r2 += (j[i] / n) * (j[i] / n);
    }
    sep.terms.push_back(term);
    rlo = std::min(rlo, std::max(0.0, std::sqrt(r2) - pad));
    rhi = std::max(rhi, std::sqrt(r2) + pad);
  }
  MultiplierRep m = make_separable(SymbolLayout{l, 1, 1}, std::move(sep), SupportAnnulus{rlo, rhi});
  m.id = "tensor_bump(N=" + std::to_string(N) + ",k=" + std::to_string(k) + ",l=" + std::to_string(l) + ")";
  return m;
}

// f_i^(xi) = sum_{j=1}^N varphi(N xi - j) for i > k, varphi(N xi - N/l) for i <= k (1-based i).
inline std::vector<GridFunction> tensor_bump_testfns(int N, int k, int l, const Grid &grid) {
  check_tensor_bump(N, k, l);
  require(grid.dims == 1, ErrorKind::structural, "tensor bump test functions live on a 1-D grid");
  require(grid.period >= 32.0 * N, ErrorKind::resolution,
          "tensor bump test functions need period >= 32 N (spatial spread), got " + std::to_string(grid.period));
  const double n = N;
  require(grid.nyquist() > 1.0 + tb_varphi_outer / n, ErrorKind::resolution,
          "grid Nyquist frequency must exceed 1 + 1/(100 N)");
  std::vector<GridFunction> out;
  for (int i = 1; i <= l; ++i) {
    GridFunction F(grid, Domain::spectral);
    std::vector<double> centers;
    if (i > k)
      for (int j = 1; j <= N; ++j)
        centers.push_back(j / n);
    else
      centers.push_back((N / l) / n);
    for (double c : centers) {
      Bump b({c}, tb_varphi_inner / n, tb_varphi_outer / n);
      // only lattice points near the bump can be nonzero
      long q0 = static_cast<long>(std::floor((c - tb_varphi_outer / n) * grid.period)) - 1;
      long q1 = static_cast<long>(std::ceil((c + tb_varphi_outer / n) * grid.period)) + 1;
      for (long q = q0; q <= q1; ++q) {
        double xi = q / grid.period;
        double v = b(xi);
        if (v != 0)
          F.samples[grid.wrap_index(q)] += v;
      }
    }
    out.push_back(transform(F, Direction::inverse));
  }
  return out;
}

struct TensorBumpPrediction {
  int N = 0, k = 0, l = 0;
  std::vector<double> p; // exponents p_i
  double p_inv = 0;      // 1/p = sum 1/p_i

  double symbol_exponent(double s, double u) const { return s - (k + 1) / u; }
  std::vector<double> testfn_exponents() const {
    std::vector<double> e;
    for (int i = 0; i < l; ++i)
      e.push_back(i < k ? 1 / p[i] - 1 : 0.0);
    return e;
  }
  double output_exponent() const { return p_inv - k - 1; }
  // necessity threshold for I = {1..k}: s >= 1/p - sum_{i<=k} 1/p_i + (k+1)/u - 1
  double threshold(double u) const {
    double s = p_inv + (k + 1) / u - 1;
    for (int i = 0; i < k; ++i)
      s -= 1 / p[i];
    return s;
  }
};

inline TensorBumpPrediction tensor_bump_prediction(int N, int k, int l, const std::vector<double> &p) {
  check_tensor_bump(N, k, l);
  require(static_cast<int>(p.size()) == l, ErrorKind::arity, "prediction needs one exponent per argument");
  TensorBumpPrediction r{N, k, l, p, 0};
  for (double x : p) {
    require(x > 0, ErrorKind::parameter, "exponents p_i must be positive");
    r.p_inv += 1 / x;
  }
  return r;
}

// ---------------------------------------------------------------------------------------------

// Point value of any symbol form; dense symbols are read at exact lattice points of their grid.
inline cplx symbol_value_anywhere(const MultiplierRep &m, std::span<const double> xi) {
  if (m.form != SymbolForm::dense)
    return symbol_value(m, xi);
  const Grid &g = m.arg_grid;
  const std::size_t A = g.size();
  const int nd = g.dims;
  std::size_t flat = 0;
  std::vector<std::size_t> idx(nd);
  for (int i = 0; i < m.layout.l; ++i) {
    for (int a = 0; a < nd; ++a) {
      double q = xi[i * nd + a] * g.period;
      double r = std::round(q);
      require(std::abs(q - r) < 1e-9, ErrorKind::structural, "dense factor evaluated off its lattice");
      const double half = static_cast<double>(g.points / 2);
      require(r >= -half && r < half, ErrorKind::structural, "dense factor evaluated outside its lattice");
      idx[a] = g.wrap_index(static_cast<long>(r));
    }
    flat = flat * A + g.ravel(idx);
  }
  return m.dense[flat];
}

// m(xi_1, ..., xi_l) = prod_k m_k(xi_{1k}, ..., xi_{lk}) on (R^{n d})^l.
inline MultiplierRep multiparam_tensorize(const std::vector<MultiplierRep> &factors) {
  require(!factors.empty(), ErrorKind::arity, "tensorize needs at least one factor");
  const int l = factors[0].layout.l, n = factors[0].layout.n;
  for (const auto &f : factors)
    require(f.layout.l == l && f.layout.n == n && f.layout.d == 1, ErrorKind::arity,
            "tensorize: factors must share arity l and dimension n, one parameter each");
  const int d = static_cast<int>(factors.size());
  SymbolLayout L{l, d, n};
  auto shared = std::make_shared<std::vector<MultiplierRep>>(factors);
  PointFn fn = [shared, L](std::span<const double> xi) {
    std::vector<double> part(static_cast<std::size_t>(L.l) * L.n);
    cplx prod = 1;
    for (int p = 0; p < L.d && prod != cplx(0); ++p) {
      for (int i = 0; i < L.l; ++i)
        for (int t = 0; t < L.n; ++t)
          part[i * L.n + t] = xi[i * L.arg_dims() + p * L.n + t];
      prod *= symbol_value_anywhere((*shared)[p], part);
    }
    return prod;
  };
  // per-parameter annulus covering every factor's declared support
  std::optional<SupportAnnulus> sup = SupportAnnulus{std::numeric_limits<double>::infinity(), 0};
  for (const auto &f : factors) {
    if (!f.support) {
      sup.reset();
      break;
    }
    sup->r_lo = std::min(sup->r_lo, f.support->r_lo);
    sup->r_hi = std::max(sup->r_hi, f.support->r_hi);
  }
  MultiplierRep m = make_rule(L, fn, sup);
  m.id = "tensorized(d=" + std::to_string(d) + ")";
  for (const auto &f : factors)
    m.parameter_factors.push_back(std::make_shared<const MultiplierRep>(f));
  return m;
}

} // namespace hormlab
