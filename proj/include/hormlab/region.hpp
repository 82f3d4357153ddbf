#pragma once

// Exponent-region calculator: the sufficient and the necessary smoothness conditions, and the
// interpolation geometry Q(s), R_B, S_B(s), S_B^{l0}(s) with its convex-hull identity.
// Everything is normalized to n = 1 where only s / n enters.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "error.hpp"

namespace hormlab {

using Rational = boost::multiprecision::cpp_rational;

// Strict inequalities on floating inputs are decided outside this band only.
inline constexpr double region_tolerance = 1e-12;

template <class T> struct BasicExponentPoint {
  int l = 2;
  int d = 1;
  int n = 1;
  T u = 2;
  std::vector<T> s;     // d smoothness indices
  std::vector<T> p_inv; // l values 1/p_i

  T inv_p() const {
    T r = 0;
    for (const T &a : p_inv)
      r += a;
    return r;
  }
};
using ExponentPoint = BasicExponentPoint<double>;
using RationalExponentPoint = BasicExponentPoint<Rational>;

inline double as_double(double x) { return x; }
inline double as_double(const Rational &x) { return x.convert_to<double>(); }

template <class T> void check_point(const BasicExponentPoint<T> &pt) {
  require(pt.l >= 1 && pt.l <= 16, ErrorKind::parameter, "region: need 1 <= l <= 16");
  require(pt.d >= 1, ErrorKind::parameter, "region: need d >= 1");
  require(pt.n >= 1, ErrorKind::parameter, "region: need n >= 1");
  require(static_cast<int>(pt.p_inv.size()) == pt.l, ErrorKind::arity, "region: p_inv must have l entries");
  require(static_cast<int>(pt.s.size()) == pt.d, ErrorKind::arity, "region: s must have d entries");
  require(pt.u > 1, ErrorKind::parameter, "region: need u > 1");
  for (const T &a : pt.p_inv)
    require(a > 0 && a < 1, ErrorKind::parameter, "region: need 0 < 1/p_i < 1");
  for (const T &v : pt.s)
    require(v > 0, ErrorKind::parameter, "region: need s_j > 0");
}

enum class ConditionStatus { satisfied, violated, boundary };

inline const char *to_string(ConditionStatus c) {
  switch (c) {
  case ConditionStatus::satisfied: return "satisfied";
  case ConditionStatus::violated: return "violated";
  case ConditionStatus::boundary: return "boundary";
  }
  return "?";
}

struct RegionCondition {
  std::string name;
  std::vector<int> subset; // 1-based indices of I (or B)
  int j = -1;              // 1-based smoothness index, -1 when the condition uses min_j
  double margin = 0;       // positive when satisfied
  bool strict = true;
  ConditionStatus status = ConditionStatus::satisfied;
};

// admissible iff violated and boundary are both empty; a point with boundary conditions and no
// violation is left unclassified.
struct RegionVerdict {
  bool admissible = true;
  bool classified = true;
  std::vector<RegionCondition> violated;
  std::vector<RegionCondition> boundary;
  std::vector<RegionCondition> conditions;
};

inline std::vector<int> subset_from_mask(unsigned mask, int l) {
  std::vector<int> out;
  for (int i = 0; i < l; ++i)
    if (mask >> i & 1u)
      out.push_back(i + 1);
  return out;
}

inline unsigned mask_from_subset(const std::vector<int> &b, int l) {
  unsigned m = 0;
  for (int i : b) {
    require(i >= 1 && i <= l, ErrorKind::parameter, "subset index out of range 1..l");
    m |= 1u << (i - 1);
  }
  return m;
}

namespace detail {

template <class T> ConditionStatus classify_margin(const T &m, bool strict) {
  if constexpr (std::is_same_v<T, double>) {
    if (!strict && m >= 0)
      return ConditionStatus::satisfied;
    if (m > region_tolerance)
      return ConditionStatus::satisfied;
    if (m < -region_tolerance)
      return ConditionStatus::violated;
    return ConditionStatus::boundary;
  } else {
    if (m > 0 || (!strict && m == 0))
      return ConditionStatus::satisfied;
    return ConditionStatus::violated;
  }
}

template <class T>
void add_condition(RegionVerdict &v, std::string name, std::vector<int> subset, int j, const T &margin, bool strict) {
  RegionCondition c{std::move(name), std::move(subset), j, as_double(margin), strict, classify_margin(margin, strict)};
  if (c.status == ConditionStatus::violated)
    v.violated.push_back(c);
  else if (c.status == ConditionStatus::boundary)
    v.boundary.push_back(c);
  v.conditions.push_back(std::move(c));
}

inline void finish(RegionVerdict &v) {
  v.admissible = v.violated.empty() && v.boundary.empty();
  v.classified = v.boundary.empty() || !v.violated.empty();
}

// sum_{i in I} (a_i - c)
template <class T> T subset_excess(const std::vector<T> &a, unsigned mask, const T &c) {
  T r = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (mask >> i & 1u)
      r += a[i] - c;
  return r;
}

} // namespace detail

// Sufficient conditions: 1 < u <= 2, s_j/n > l/u, and 1/p - 1/u' < s_j/n + sum_I (1/p_i - 1/u)
// for every j and every I subset of {1..l}.
template <class T> RegionVerdict sufficiency_check(const BasicExponentPoint<T> &pt) {
  check_point(pt);
  RegionVerdict v;
  const T inv_u = T(1) / pt.u;
  const T inv_uprime = T(1) - inv_u;
  const T ip = pt.inv_p();
  detail::add_condition(v, "u_range", {}, -1, T(2) - pt.u, false);
  for (int j = 0; j < pt.d; ++j) {
    const T sj = pt.s[j] / pt.n;
    detail::add_condition(v, "smoothness_floor", {}, j + 1, sj - pt.l * inv_u, true);
    for (unsigned mask = 0; mask < (1u << pt.l); ++mask) {
      T m = sj + detail::subset_excess(pt.p_inv, mask, inv_u) - (ip - inv_uprime);
      detail::add_condition(v, "index", subset_from_mask(mask, pt.l), j + 1, m, true);
    }
  }
  detail::finish(v);
  return v;
}

// Necessary conditions, with s_min = min_j s_j/n:
//   s_min >= 1/p - 1/2 - sum_I (1/p_i - 1/2) and s_min >= 1/p - 1/u' - sum_I (1/p_i - 1/u) for all I,
//   s_min > l/u and s_min > 1/p - 1/u'.
template <class T> RegionVerdict necessity_check(const BasicExponentPoint<T> &pt) {
  check_point(pt);
  RegionVerdict v;
  const T inv_u = T(1) / pt.u;
  const T inv_uprime = T(1) - inv_u;
  const T half = T(1) / 2;
  const T ip = pt.inv_p();
  T smin = pt.s[0];
  for (const T &x : pt.s)
    smin = std::min<T>(smin, x);
  smin /= pt.n;
  for (unsigned mask = 0; mask < (1u << pt.l); ++mask) {
    auto I = subset_from_mask(mask, pt.l);
    detail::add_condition(v, "two_branch", I, -1, smin - (ip - half - detail::subset_excess(pt.p_inv, mask, half)),
                          false);
    detail::add_condition(v, "u_branch", I, -1,
                          smin - (ip - inv_uprime - detail::subset_excess(pt.p_inv, mask, inv_u)), false);
  }
  detail::add_condition(v, "floor", {}, -1, smin - pt.l * inv_u, true);
  detail::add_condition(v, "index_floor", {}, -1, smin - (ip - inv_uprime), true);
  detail::finish(v);
  return v;
}

// Largest right-hand sides of the two necessary families (over I); the 2-based one is active
// when it is the larger.
template <class T> std::pair<T, T> necessity_branch_maxima(const BasicExponentPoint<T> &pt) {
  const T inv_u = T(1) / pt.u;
  const T half = T(1) / 2;
  const T ip = pt.inv_p();
  T two = ip - half, uu = ip - (T(1) - inv_u);
  for (unsigned mask = 0; mask < (1u << pt.l); ++mask) {
    two = std::max<T>(two, ip - half - detail::subset_excess(pt.p_inv, mask, half));
    uu = std::max<T>(uu, ip - (T(1) - inv_u) - detail::subset_excess(pt.p_inv, mask, inv_u));
  }
  return {two, uu};
}

// ---------------------------------------------------------------------------------------------
// Interpolation geometry (n = 1). x in (0,1)^l stands for (1/p_1, ..., 1/p_l).

struct SBMembership {
  bool in_RB = false;
  bool in_QS = false;
  bool in_SB = false;
  std::map<int, bool> in_SB_l0; // keyed by 1-based l0 in B^c
};

template <class T>
SBMembership sb_membership(const std::vector<T> &x, const std::vector<int> &B, const T &s, const T &u, int l) {
  require(static_cast<int>(x.size()) == l, ErrorKind::arity, "sb_membership: x must have l entries");
  require(u > 1, ErrorKind::parameter, "sb_membership: need u > 1");
  require(s * u > l, ErrorKind::parameter, "sb_membership: need s > l/u");
  const unsigned bm = mask_from_subset(B, l);
  const T inv_u = T(1) / u;
  const T inv_uprime = T(1) - inv_u;
  T sum = 0;
  for (const T &xi : x)
    sum += xi;
  SBMembership r;
  r.in_RB = true;
  for (int i = 0; i < l; ++i) {
    bool ok = x[i] > 0 && x[i] < 1 && ((bm >> i & 1u) ? x[i] <= inv_u : x[i] > inv_u);
    r.in_RB = r.in_RB && ok;
  }
  r.in_QS = true;
  for (int i = 0; i < l; ++i)
    r.in_QS = r.in_QS && x[i] > 0 && x[i] < 1;
  for (unsigned mask = 0; mask < (1u << l) && r.in_QS; ++mask)
    r.in_QS = sum - inv_uprime < s + detail::subset_excess(x, mask, inv_u);
  r.in_SB = r.in_RB && sum - inv_uprime < s + detail::subset_excess(x, bm, inv_u);
  int nb = static_cast<int>(B.size());
  for (int l0 = 0; l0 < l; ++l0) {
    if (bm >> l0 & 1u)
      continue;
    T rest = 0;
    for (int i = 0; i < l; ++i)
      if (!(bm >> i & 1u) && i != l0)
        rest += x[i];
    r.in_SB_l0[l0 + 1] = r.in_RB && s > (nb + 1) * inv_u + rest;
  }
  return r;
}

// Convex decomposition of a point of S_B(s) into points of the union of the S_B^{l0}(s).
// In the coordinates y_i = x_i - 1/u (i in B^c) the sets are y in (0, 1/u')^kappa with
// sum y < beta + 1/u' (for S_B) and sum_{i != l0} y_i < beta (for S_B^{l0}), beta = s - l/u; the
// B coordinates are inert. Moves along e_a - e_b keep sum y fixed. Each split either lands in
// S_B^{a} (y_a pushed next to 1/u') or retires a coordinate to a tiny value, so the recursion
// depth is at most kappa.
struct HullLeaf {
  double weight = 0;
  std::vector<double> x;
  int l0 = 0; // 1-based
};

namespace detail {

struct HullSplitter {
  double c = 0, beta = 0, tiny = 0, gap = 0;
  std::vector<HullLeaf> leaves;

  int member(const std::vector<double> &y) const {
    double sum = 0;
    for (double v : y) {
      if (!(v > 0 && v < c))
        return -1;
      sum += v;
    }
    for (std::size_t k = 0; k < y.size(); ++k)
      if (sum - y[k] < beta)
        return static_cast<int>(k);
    return -1;
  }

  bool split(const std::vector<double> &y, double w, std::vector<int> active, int depth) {
    int k = member(y);
    if (k >= 0) {
      leaves.push_back({w, y, k});
      return true;
    }
    if (active.size() < 2 || depth > 2 * static_cast<int>(y.size()) + 2)
      return false;
    std::sort(active.begin(), active.end(), [&](int i, int j) { return y[i] > y[j]; });
    int a = active.front(), b = active.back();
    // plus: y_a up, y_b down; minus: y_a down, y_b up.
    auto reach_top = [&](double v) { return c - v - std::min(gap, c - v) / 2; };
    auto reach_tiny = [&](double v) { return v - std::min(v, tiny) / 2; };
    double tp = std::min(reach_top(y[a]), reach_tiny(y[b]));
    double tm = std::min(reach_tiny(y[a]), reach_top(y[b]));
    if (!(tp > 0 && tm > 0))
      return false;
    std::vector<double> yp = y, ym = y;
    yp[a] += tp;
    yp[b] -= tp;
    ym[a] -= tm;
    ym[b] += tm;
    std::vector<int> ap, am;
    for (int i : active) {
      if (i != b)
        ap.push_back(i);
      if (i != a)
        am.push_back(i);
    }
    double wp = w * tm / (tp + tm), wm = w * tp / (tp + tm);
    return split(yp, wp, ap, depth + 1) && split(ym, wm, am, depth + 1);
  }
};

} // namespace detail

struct HullDecomposition {
  bool found = false;
  std::vector<HullLeaf> leaves;
};

inline HullDecomposition hull_decompose(const std::vector<double> &x, const std::vector<int> &B, double s, double u,
                                        int l) {
  const unsigned bm = mask_from_subset(B, l);
  std::vector<int> bc;
  for (int i = 0; i < l; ++i)
    if (!(bm >> i & 1u))
      bc.push_back(i);
  require(!bc.empty(), ErrorKind::parameter, "hull_decompose: B must be a proper subset");
  detail::HullSplitter sp;
  sp.c = 1 - 1 / u;
  sp.beta = s - l / u;
  std::vector<double> y;
  double sum = 0;
  for (int i : bc) {
    y.push_back(x[i] - 1 / u);
    sum += y.back();
  }
  sp.gap = sp.beta + sp.c - sum;
  sp.tiny = std::min(sp.beta, sp.gap) / (2.0 * bc.size());
  HullDecomposition out;
  if (!(sp.gap > 0 && sp.beta > 0))
    return out;
  std::vector<int> active(bc.size());
  for (std::size_t k = 0; k < bc.size(); ++k)
    active[k] = static_cast<int>(k);
  out.found = sp.split(y, 1.0, active, 0);
  for (auto &leaf : sp.leaves) {
    std::vector<double> xx = x;
    for (std::size_t k = 0; k < bc.size(); ++k)
      xx[bc[k]] = leaf.x[k] + 1 / u;
    out.leaves.push_back({leaf.weight, std::move(xx), bc[leaf.l0] + 1});
  }
  return out;
}

struct HullReport {
  int l = 3;
  std::vector<int> B;
  double s = 0, u = 2;
  int union_samples = 0;
  int sb_samples = 0;
  int containment_failures = 0;
  int decomposition_failures = 0;
  int max_leaves = 0;
  double max_reconstruction_error = 0;
  std::optional<std::vector<double>> counterexample;
  bool ok() const { return containment_failures == 0 && decomposition_failures == 0 && sb_samples > 0; }
};

namespace detail {

// Rejection sample of a point of R_B satisfying pred; empty when the attempt budget runs out.
template <class Pred>
std::optional<std::vector<double>> sample_rb(int l, unsigned bm, double u, std::mt19937_64 &rng, Pred pred) {
  std::uniform_real_distribution<double> lo(0.0, 1 / u), hi(1 / u, 1.0);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    std::vector<double> x(l);
    for (int i = 0; i < l; ++i)
      x[i] = (bm >> i & 1u) ? lo(rng) : hi(rng);
    if (pred(x))
      return x;
  }
  return std::nullopt;
}

} // namespace detail

// (a) sampled points of each S_B^{l0}(s) lie in S_B(s); (b) sampled points of S_B(s) decompose
// into a convex combination of points of the union, verified leaf by leaf.
inline HullReport hull_identity_check(const std::vector<int> &B, double s, double u, int l, int samples,
                                      std::uint64_t seed) {
  const unsigned bm = mask_from_subset(B, l);
  require(static_cast<int>(B.size()) < l, ErrorKind::parameter, "hull_identity_check: B must be proper");
  require(s * u > l, ErrorKind::parameter, "hull_identity_check: need s > l/u");
  require(samples >= 1, ErrorKind::parameter, "hull_identity_check: need samples >= 1");
  HullReport rep;
  rep.l = l;
  rep.B = B;
  rep.s = s;
  rep.u = u;
  std::mt19937_64 rng(seed);
  std::vector<int> bc;
  for (int i = 0; i < l; ++i)
    if (!(bm >> i & 1u))
      bc.push_back(i + 1);
  std::uniform_int_distribution<std::size_t> pick(0, bc.size() - 1);
  for (int t = 0; t < samples; ++t) {
    int l0 = bc[pick(rng)];
    auto x = detail::sample_rb(l, bm, u, rng, [&](const std::vector<double> &z) {
      return sb_membership(z, B, s, u, l).in_SB_l0.at(l0);
    });
    if (!x)
      continue;
    ++rep.union_samples;
    if (!sb_membership(*x, B, s, u, l).in_SB) {
      ++rep.containment_failures;
      if (!rep.counterexample)
        rep.counterexample = *x;
    }
  }
  for (int t = 0; t < samples; ++t) {
    auto x = detail::sample_rb(l, bm, u, rng,
                               [&](const std::vector<double> &z) { return sb_membership(z, B, s, u, l).in_SB; });
    if (!x)
      continue;
    ++rep.sb_samples;
    HullDecomposition dec = hull_decompose(*x, B, s, u, l);
    bool good = dec.found;
    double wsum = 0;
    std::vector<double> rec(l, 0.0);
    for (const auto &leaf : dec.leaves) {
      good = good && leaf.weight >= 0 && sb_membership(leaf.x, B, s, u, l).in_SB_l0.at(leaf.l0);
      wsum += leaf.weight;
      for (int i = 0; i < l; ++i)
        rec[i] += leaf.weight * leaf.x[i];
    }
    double err = std::abs(wsum - 1);
    for (int i = 0; i < l; ++i)
      err = std::max(err, std::abs(rec[i] - (*x)[i]));
    rep.max_reconstruction_error = std::max(rep.max_reconstruction_error, err);
    rep.max_leaves = std::max(rep.max_leaves, static_cast<int>(dec.leaves.size()));
    if (!good || err > 1e-12) {
      ++rep.decomposition_failures;
      if (!rep.counterexample)
        rep.counterexample = *x;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------------------------
// Scans.

struct IdentityScan {
  int samples = 0;
  int identity_failures = 0;  // in_SB != in_RB && in_QS for some B
  int partition_failures = 0; // number of B with x in R_B is not exactly one
  int union_failures = 0;     // in_QS != (x in some S_B)
};

// R_B cap Q(s) = S_B(s) for every B, and the R_B partition (0,1)^l, on uniform samples.
inline IdentityScan sb_identity_scan(int l, double s, double u, int samples, std::uint64_t seed) {
  IdentityScan r;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < samples; ++t) {
    std::vector<double> x(l);
    for (double &v : x)
      do
        v = unit(rng);
      while (v == 0.0 || v == 1 / u);
    int in_rb = 0;
    bool any_sb = false, qs = false;
    for (unsigned bm = 0; bm < (1u << l); ++bm) {
      auto m = sb_membership(x, subset_from_mask(bm, l), s, u, l);
      if (m.in_SB != (m.in_RB && m.in_QS))
        ++r.identity_failures;
      in_rb += m.in_RB;
      any_sb = any_sb || m.in_SB;
      qs = m.in_QS;
    }
    if (in_rb != 1)
      ++r.partition_failures;
    if (qs != any_sb)
      ++r.union_failures;
    ++r.samples;
  }
  return r;
}

struct ConsistencyScan {
  int samples = 0;
  int exceptions = 0;       // sufficiency admissible but necessity violated
  int skipped_boundary = 0; // some margin within the band
  int sufficient = 0;
  int necessary = 0;
  int two_branch_active = 0; // the 2-based family strictly dominates the u-based one
  int two_branch_active_u_below_2 = 0;
};

inline double min_abs_margin(const RegionVerdict &v) {
  double m = INFINITY;
  for (const auto &c : v.conditions)
    m = std::min(m, std::abs(c.margin));
  return m;
}

// Random points with l in {1..4}, d in {1..3}, u in (1, 3), 1/p_i in (0,1), s_j in (0, 2l).
inline ConsistencyScan consistency_scan(int samples, std::uint64_t seed, double band = 1e-9) {
  ConsistencyScan r;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick_l(1, 4), pick_d(1, 3);
  for (int t = 0; t < samples; ++t) {
    ExponentPoint pt;
    pt.l = pick_l(rng);
    pt.d = pick_d(rng);
    pt.u = 1 + 2 * unit(rng);
    for (int i = 0; i < pt.l; ++i)
      pt.p_inv.push_back(std::clamp(unit(rng), 1e-6, 1 - 1e-6));
    for (int j = 0; j < pt.d; ++j)
      pt.s.push_back(std::max(1e-6, 2.0 * pt.l * unit(rng)));
    ++r.samples;
    auto suf = sufficiency_check(pt);
    auto nec = necessity_check(pt);
    auto [two, uu] = necessity_branch_maxima(pt);
    if (two > uu + band) {
      ++r.two_branch_active;
      if (pt.u < 2)
        ++r.two_branch_active_u_below_2;
    }
    if (min_abs_margin(suf) < band || min_abs_margin(nec) < band) {
      ++r.skipped_boundary;
      continue;
    }
    r.sufficient += suf.admissible;
    r.necessary += nec.admissible;
    if (suf.admissible && !nec.admissible)
      ++r.exceptions;
  }
  return r;
}

struct GapScan {
  int samples = 0;
  int gap_points = 0;           // necessity holds, sufficiency does not (or is undecided)
  double max_gap_margin = 0;    // largest |sufficiency margin| among failing conditions of gap points
  int on_hyperplane_samples = 0;
};

// Points for fixed (l, u); a share of them is moved onto a sufficiency hyperplane by setting s_1
// to the threshold of a random condition. Gap points must sit on such hyperplanes.
inline GapScan gap_scan(int l, double u, int samples, std::uint64_t seed, double hyperplane_share = 0.5) {
  GapScan r;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < samples; ++t) {
    ExponentPoint pt;
    pt.l = l;
    pt.d = 1;
    pt.u = u;
    for (int i = 0; i < l; ++i)
      pt.p_inv.push_back(std::clamp(unit(rng), 1e-6, 1 - 1e-6));
    pt.s.push_back(std::max(1e-6, 2.0 * l * unit(rng)));
    if (unit(rng) < hyperplane_share) {
      unsigned mask = static_cast<unsigned>(unit(rng) * (1u << l)) % (1u << l);
      double thr = pt.inv_p() - (1 - 1 / u) - detail::subset_excess(pt.p_inv, mask, 1 / u);
      if (unit(rng) < 0.3)
        thr = l / u;
      if (thr > 0) {
        pt.s[0] = thr;
        ++r.on_hyperplane_samples;
      }
    }
    ++r.samples;
    auto suf = sufficiency_check(pt);
    bool nec_ok = true;
    for (const auto &c : necessity_check(pt).conditions)
      nec_ok = nec_ok && c.margin >= -region_tolerance;
    if (nec_ok && !suf.admissible) {
      ++r.gap_points;
      for (const auto &c : suf.conditions)
        if (c.status != ConditionStatus::satisfied)
          r.max_gap_margin = std::max(r.max_gap_margin, std::abs(c.margin));
    }
  }
  return r;
}

} // namespace hormlab
