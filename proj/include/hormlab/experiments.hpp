#pragma once

// Experiment runners shared by the CLI and the acceptance binary. Each returns plain data; the
// harness turns it into CSV rows and JSON reports.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "bessel.hpp"
#include "counterexamples.hpp"
#include "fit.hpp"
#include "maximal.hpp"
#include "norms.hpp"
#include "region.hpp"

namespace hormlab {

class Stopwatch {
public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

// Worker count from HORMLAB_THREADS (default 1).
inline int thread_count() {
  const char *v = std::getenv("HORMLAB_THREADS");
  if (!v || !*v)
    return 1;
  int n = std::atoi(v);
  require(n >= 1 && n <= 256, ErrorKind::parameter, "HORMLAB_THREADS must be an integer in 1..256");
  return n;
}

// Runs body(i) for i < count on up to `threads` workers; results must be written by index.
inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)> &body) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i)
      body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  for (int w = 0; w < threads && w < static_cast<int>(count); ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto &t : pool)
    t.join();
  for (auto &e : errors)
    if (e)
      std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------------------------
// Random inputs.

// Gaussian spectrum on |signed index| <= kmax in every axis (optionally without index 0).
inline GridFunction random_band_limited(const Grid &g, long kmax, std::mt19937_64 &rng, bool skip_zero = false) {
  std::normal_distribution<double> nd;
  GridFunction F(g, Domain::spectral);
  std::vector<std::size_t> idx(g.dims);
  for (std::size_t f = 0; f < g.size(); ++f) {
    g.unravel(f, idx);
    bool ok = true;
    for (int a = 0; a < g.dims; ++a) {
      long s = std::abs(g.signed_index(idx[a]));
      ok = ok && s <= kmax && !(skip_zero && s == 0);
    }
    if (ok)
      F.samples[f] = cplx(nd(rng), nd(rng));
  }
  return transform(F, Direction::inverse);
}

// Gaussian spectrum on the 2n-dim product grid where both frequency radii lie in the bank band.
inline GridFunction random_bank_field(const FilterBank &bank, const Grid &g, std::mt19937_64 &rng) {
  std::normal_distribution<double> nd;
  const int n = bank.grid.dims;
  GridFunction Fh(g, Domain::spectral);
  std::vector<std::size_t> idx(g.dims);
  for (std::size_t f = 0; f < g.size(); ++f) {
    g.unravel(f, idx);
    double r1 = 0, r2 = 0;
    for (int a = 0; a < n; ++a) {
      r1 += g.frequency(idx[a]) * g.frequency(idx[a]);
      r2 += g.frequency(idx[n + a]) * g.frequency(idx[n + a]);
    }
    if (bank.in_band(std::sqrt(r1)) && bank.in_band(std::sqrt(r2)))
      Fh.samples[f] = cplx(nd(rng), nd(rng));
  }
  return transform(Fh, Direction::inverse);
}

// ---------------------------------------------------------------------------------------------
// Tensor-bump scaling.

struct TensorScalingParams {
  int l = 2, k = 0;
  std::vector<double> p{2, 2};
  std::vector<int> N{16, 32, 64, 128};
  double period_factor = 64; // grid period P = factor * N
  bool symbol_norms = false;
  std::vector<double> s{1.0, 1.5};
  std::vector<double> u{2.0, 1.5};
  int symbol_N_max = 64; // symbol norms only for N <= this
  int symbol_points_per_N = 64;
  double symbol_period = 4;
  double tol_output = 0.15, tol_testfn = 0.1, tol_symbol = 0.2;
  double time_cap = 900;
  int threads = 1;
};

struct TensorScalingRow {
  int N = 0;
  std::size_t points = 0;
  double output_norm = 0;
  std::vector<double> testfn_norms;
  std::vector<double> a_norms; // per (s, u) pair; empty when not computed at this N
  double seconds = 0;
};

struct TensorScalingResult {
  TensorScalingParams params;
  std::vector<std::pair<double, double>> su; // (s, u) pairs in a_norms order
  std::vector<TensorScalingRow> rows;
  ScalingReport output;
  std::vector<ScalingReport> testfn;
  std::vector<ScalingReport> symbol;
  std::vector<ScalingReport> sharpness; // ratio ||T f||_p / (a_norm prod ||f_i||)
  double estimated_seconds = 0;
  Verdict verdict = Verdict::inconclusive;
  double seconds = 0;
};

inline std::size_t tensor_grid_points(int N, double period_factor, int l) {
  // Nyquist above 1 + l/(100 N) with margin
  return next_pow2(static_cast<std::size_t>(std::ceil(2.2 * period_factor * N * (1 + l / (100.0 * N)))));
}

// Projected runtime from per-term and per-symbol-point costs measured on this code.
inline double tensor_scaling_estimate(const TensorScalingParams &P) {
  double est = 0;
  for (int N : P.N) {
    double terms = static_cast<double>(tensor_bump_family(N, P.k, P.l).index_set.size());
    est += 1.6e-8 * terms * tensor_grid_points(N, P.period_factor, P.l) + 1e-3;
    if (P.symbol_norms && N <= P.symbol_N_max)
      est += 1.1e-6 * std::pow(static_cast<double>(P.symbol_points_per_N) * N, P.l) * (1 + 0.2 * P.s.size());
  }
  return est;
}

inline TensorScalingResult tensor_scaling(const TensorScalingParams &P) {
  Stopwatch sw;
  require(static_cast<int>(P.p.size()) == P.l, ErrorKind::arity, "tensor_scaling: need one p_i per argument");
  require(P.N.size() >= 3, ErrorKind::fit, "tensor_scaling: need at least 3 ladder points");
  for (std::size_t i = 1; i < P.N.size(); ++i)
    require(P.N[i] > P.N[i - 1], ErrorKind::parameter, "tensor_scaling: N ladder must increase");
  require(P.period_factor >= 32, ErrorKind::resolution, "tensor_scaling: period factor must be >= 32");
  TensorScalingResult R;
  R.params = P;
  if (P.symbol_norms) {
    const double pts = std::pow(static_cast<double>(P.symbol_points_per_N) * std::min(P.symbol_N_max, P.N.back()), P.l);
    require(pts <= static_cast<double>(std::size_t(1) << 25), ErrorKind::budget,
            "symbol norms need a " + std::to_string(P.l) + "-D symbol grid of " + std::to_string(pts) +
                " points (budget 2^25); lower symbol_N_max or disable symbol_norms");
    for (double s : P.s)
      for (double u : P.u)
        R.su.push_back({s, u});
  }
  R.estimated_seconds = tensor_scaling_estimate(P);
  require(R.estimated_seconds <= P.time_cap, ErrorKind::budget,
          "projected runtime " + std::to_string(R.estimated_seconds) + " s exceeds the cap " +
              std::to_string(P.time_cap) + " s");

  const double p_out = holder_exponent(P.p);
  R.rows.resize(P.N.size());
  parallel_for(P.N.size(), P.threads, [&](std::size_t q) {
    Stopwatch t;
    const int N = P.N[q];
    TensorScalingRow row;
    row.N = N;
    row.points = tensor_grid_points(N, P.period_factor, P.l);
    Grid g(1, row.points, P.period_factor * N);
    auto fs = tensor_bump_testfns(N, P.k, P.l, g);
    MultiplierRep m = tensor_bump_multiplier(N, P.k, P.l);
    row.output_norm = lp_norm(apply_multilinear(m, fs, {false}), NormSpec::lebesgue(p_out));
    for (int i = 0; i < P.l; ++i)
      row.testfn_norms.push_back(lp_norm(fs[i], NormSpec::lebesgue(P.p[i])));
    if (P.symbol_norms && N <= P.symbol_N_max) {
      ANormOptions o;
      o.symbol_grid = SymbolGrid{Grid(P.l, static_cast<std::size_t>(P.symbol_points_per_N) * N, P.symbol_period), {}};
      std::vector<SobolevSpec> specs;
      for (auto [s, u] : R.su)
        specs.push_back({{s}, u});
      row.a_norms = a_norm(m, specs, o).value;
    }
    row.seconds = t.seconds();
    R.rows[q] = row;
  });

  auto pred = tensor_bump_prediction(P.N.front(), P.k, P.l, P.p);
  const std::string tag = "(l,k)=(" + std::to_string(P.l) + "," + std::to_string(P.k) + ")";
  std::vector<double> x, y;
  for (const auto &r : R.rows) {
    x.push_back(r.N);
    y.push_back(r.output_norm);
  }
  R.output = make_scaling_report("output norm " + tag, x, y, pred.output_exponent(), "N^{1/p - k - 1}",
                                 P.tol_output, false, true, true);
  bool ok = R.output.verdict == Verdict::pass;
  auto fe = pred.testfn_exponents();
  for (int i = 0; i < P.l; ++i) {
    std::vector<double> yi;
    for (const auto &r : R.rows)
      yi.push_back(r.testfn_norms[i]);
    R.testfn.push_back(make_scaling_report("test function " + std::to_string(i + 1) + " " + tag, x, yi, fe[i],
                                           i < P.k ? "N^{1/p_i - 1}" : "N^0", P.tol_testfn));
    ok = ok && R.testfn.back().verdict == Verdict::pass;
  }
  for (std::size_t c = 0; c < R.su.size(); ++c) {
    auto [s, u] = R.su[c];
    std::vector<double> xs, ys, yr;
    for (const auto &r : R.rows)
      if (!r.a_norms.empty()) {
        xs.push_back(r.N);
        ys.push_back(r.a_norms[c]);
        double den = r.a_norms[c];
        for (double f : r.testfn_norms)
          den *= f;
        yr.push_back(r.output_norm / den);
      }
    if (xs.size() < 3)
      continue;
    std::string lab = tag + " s=" + std::to_string(s) + " u=" + std::to_string(u);
    R.symbol.push_back(make_scaling_report("symbol norm " + lab, xs, ys, pred.symbol_exponent(s, u),
                                           "#E_k^N ~ N^{l-k-1}: N^{s-(k+1)/u}", P.tol_symbol, true));
    ok = ok && R.symbol.back().verdict == Verdict::pass;
    double fsum = 0;
    for (double e : fe)
      fsum += e;
    R.sharpness.push_back(make_scaling_report("sharpness ratio " + lab, xs, yr,
                                              pred.output_exponent() - pred.symbol_exponent(s, u) - fsum,
                                              "necessary condition", P.tol_symbol));
  }
  R.verdict = ok ? Verdict::pass : Verdict::fail;
  R.seconds = sw.seconds();
  return R;
}

// ---------------------------------------------------------------------------------------------
// Bessel dichotomy grid.

struct BesselGridParams {
  double u = 2;
  int dim = 1;
  std::vector<double> t{0.25, 0.5, 0.75};
  std::vector<double> gamma{0.5, 1.0, 1.5};
  std::vector<BesselSide> sides{BesselSide::kernel, BesselSide::transform};
};

struct BesselGridResult {
  std::vector<DichotomyResult> cells;
  int misclassified = 0;
  int inconclusive = 0;
  int critical_cells = 0;          // t on the critical line
  int critical_flagged_divergent = 0; // critical cells with gamma <= 2/u reported divergent
  int critical_small_gamma = 0;
  Verdict verdict = Verdict::inconclusive;
  double seconds = 0;
};

inline BesselGridResult bessel_dichotomy_grid(const BesselGridParams &P) {
  Stopwatch sw;
  BesselGridResult R;
  for (BesselSide side : P.sides)
    for (double t : P.t)
      for (double g : P.gamma) {
        auto r = bessel_norm_dichotomy(t, g, P.dim, P.u, side);
        R.misclassified += r.verdict != r.predicted;
        R.inconclusive += r.verdict == Convergence::inconclusive;
        const double e = side == BesselSide::kernel ? P.dim / P.u : P.dim * (1 - 1 / P.u);
        if (std::abs(t - e) <= 1e-12) {
          ++R.critical_cells;
          if (g <= 2 / P.u + 1e-12) {
            ++R.critical_small_gamma;
            R.critical_flagged_divergent += r.verdict == Convergence::divergent;
          }
        }
        R.cells.push_back(std::move(r));
      }
  R.verdict = R.misclassified == 0 && R.critical_flagged_divergent == R.critical_small_gamma ? Verdict::pass
                                                                                               : Verdict::fail;
  R.seconds = sw.seconds();
  return R;
}

// ---------------------------------------------------------------------------------------------
// Hybrid growth.

struct HybridGrowthParams {
  HybridKind kind = HybridKind::SS;
  double u = 1, p = 2, p0 = 1;
  std::vector<std::pair<int, int>> M{{0, 0}, {1, 0}, {1, 1}, {2, 1}, {2, 2}, {3, 3}};
  std::size_t points = 32;
  double period = 16;
  int j_min = -4, j_max = 0;
  int samples = 3;
  std::uint64_t seed = 7;
  double tol = 0.15;
};

struct HybridGrowthResult {
  GrowthScan scan;
  double max_over_min = 0; // spread of the ratios across M
  double seconds = 0;
};

inline HybridGrowthResult hybrid_growth(const HybridGrowthParams &P) {
  Stopwatch sw;
  Grid axis(1, P.points, P.period), g(2, P.points, P.period);
  FilterBank bank = build_dyadic_bank(axis, P.j_min, P.j_max);
  std::mt19937_64 rng(P.seed);
  std::vector<GridFunction> samples;
  for (int i = 0; i < P.samples; ++i)
    samples.push_back(random_bank_field(bank, g, rng));
  HybridSpec base{P.kind, 0, 0, P.u, &bank};
  HybridGrowthResult R;
  R.scan = hybrid_growth_scan(samples, base, P.p, P.p0, P.M, P.tol);
  double lo = INFINITY, hi = 0;
  for (const auto &pt : R.scan.points) {
    lo = std::min(lo, pt.ratio);
    hi = std::max(hi, pt.ratio);
  }
  R.max_over_min = hi / lo;
  R.seconds = sw.seconds();
  return R;
}

// ---------------------------------------------------------------------------------------------
// Paraproduct consistency.

struct ParaproductParams {
  std::size_t points = 16;
  double period = 16;
  int j_min = -4, j_max = -1;
  int pairs = 20;
  long kmax = 8;
  std::uint64_t seed = 10;
  double tol = 1e-9;
};

struct ParaproductResult {
  std::vector<double> errors; // per pair, relative
  double worst = 0;
  Verdict verdict = Verdict::inconclusive;
  double seconds = 0;
};

// Smooth bi-parameter test symbol in (xi_1, xi_2, eta_1, eta_2).
inline MultiplierRep paraproduct_test_symbol() {
  return make_rule({2, 2, 1}, [](std::span<const double> xi) {
    return cplx(std::exp(-(xi[0] * xi[0] + xi[2] * xi[2])), std::sin(xi[1] - xi[3]));
  });
}

inline ParaproductResult paraproduct_consistency(const ParaproductParams &P) {
  Stopwatch sw;
  Grid g(2, P.points, P.period), axis(1, P.points, P.period);
  FilterBank bank = build_dyadic_bank(axis, P.j_min, P.j_max);
  MultiplierRep m = paraproduct_test_symbol();
  std::mt19937_64 rng(P.seed);
  ParaproductResult R;
  for (int t = 0; t < P.pairs; ++t) {
    auto f = random_band_limited(g, P.kmax, rng, true), h = random_band_limited(g, P.kmax, rng, true);
    auto pieces = paraproduct_pieces(m, f, h, bank);
    GridFunction sum(output_grid(g, 2, true), Domain::spatial);
    for (auto &row : pieces.pieces)
      for (auto &piece : row)
        sum += piece;
    R.errors.push_back(relative_error(sum, apply_multilinear(m, {f, h})));
    R.worst = std::max(R.worst, R.errors.back());
  }
  R.verdict = R.worst <= P.tol ? Verdict::pass : Verdict::fail;
  R.seconds = sw.seconds();
  return R;
}

// ---------------------------------------------------------------------------------------------
// Region scan.

struct HullCase {
  std::vector<int> B;
  double s = 0, u = 2;
};

struct RegionScanParams {
  int consistency_samples = 10000;
  int identity_samples = 10000;
  int l = 3;
  std::vector<std::pair<double, double>> identity_su{{1.55, 2.0}, {2.2, 2.0}, {2.1, 1.5}, {2.6, 1.25}};
  std::vector<HullCase> hull{{{3}, 2.2, 2.0}, {{}, 1.55, 2.0}, {{2}, 2.1, 1.5}, {{1}, 2.5, 1.25}};
  int hull_samples = 10000;
  std::uint64_t seed = 1;
};

struct RegionScanResult {
  ConsistencyScan consistency;
  std::vector<std::pair<std::pair<double, double>, IdentityScan>> identity;
  std::vector<HullReport> hull;
  int failures = 0;
  Verdict verdict = Verdict::inconclusive;
  double seconds = 0;
};

inline RegionScanResult region_scan(const RegionScanParams &P) {
  Stopwatch sw;
  RegionScanResult R;
  R.consistency = consistency_scan(P.consistency_samples, P.seed);
  R.failures += R.consistency.exceptions;
  std::uint64_t s = P.seed;
  for (auto su : P.identity_su) {
    auto r = sb_identity_scan(P.l, su.first, su.second, P.identity_samples, ++s);
    R.failures += r.identity_failures + r.partition_failures + r.union_failures;
    R.identity.push_back({su, r});
  }
  for (const auto &c : P.hull) {
    auto r = hull_identity_check(c.B, c.s, c.u, P.l, P.hull_samples, ++s);
    R.failures += r.containment_failures + r.decomposition_failures + (r.sb_samples == 0);
    R.hull.push_back(std::move(r));
  }
  R.verdict = R.failures == 0 ? Verdict::pass : Verdict::fail;
  R.seconds = sw.seconds();
  return R;
}

// ---------------------------------------------------------------------------------------------
// Kernel shell decay for the shifted Bessel symbol.

struct ShellDecayParams {
  double t = 2, gamma = 2, M = 4;
  // symbol grid centred on the shift point, where the symbol lives; spatial period = points / period
  // (the lattice sampler's FFT budget caps the spatial period at 256)
  std::size_t symbol_points = 64;
  double symbol_period = 0.25;
  int M_min = 5; // first shell past the window scale 10 l
  int M_max = 7;
  double u = 2; // norm of each shell piece
};

struct ShellDecayResult {
  std::vector<int> shell;
  std::vector<double> norms;
  ScalingReport report; // log2 norm against M, shells M >= 1
  bool monotone = false;
  Verdict verdict = Verdict::inconclusive;
  double seconds = 0;
};

inline ShellDecayResult shell_decay(const ShellDecayParams &P) {
  Stopwatch sw;
  Grid arg(1, 256, 80.0);
  MultiplierRep m = bessel_multiplier(BesselFamily::Mode::shifted, BesselFamily{P.t, P.gamma, 2, P.M}, 2, 1, arg);
  const double nu = 1 / std::sqrt(2.0);
  SymbolGrid sg{Grid(2, P.symbol_points, P.symbol_period), {nu, nu}};
  LocalizedSymbol L = localize_symbol(m, {0}, WindowKind::annulus_window, sg);
  ShellDecomposition D = shell_decompose(L, m.layout, P.M_max);
  ShellDecayResult R;
  for (int M = 0; M <= P.M_max; ++M) {
    auto it = D.shells.find({M});
    R.shell.push_back(M);
    R.norms.push_back(it == D.shells.end() ? 0.0 : lp_norm(it->second, NormSpec::lebesgue(P.u)));
  }
  std::vector<double> x, y;
  R.monotone = true;
  require(P.M_min >= 0 && P.M_min + 2 <= P.M_max, ErrorKind::parameter, "shell decay: need M_min + 2 <= M_max");
  for (int M = P.M_min; M <= P.M_max; ++M) {
    if (R.norms[M] <= 0)
      break;
    x.push_back(M);
    y.push_back(std::log2(R.norms[M]));
    if (M > P.M_min)
      R.monotone = R.monotone && R.norms[M] <= R.norms[M - 1];
  }
  require(x.size() >= 3, ErrorKind::fit, "shell decay: fewer than 3 nonzero shells; enlarge the kernel grid");
  R.report = make_scaling_report("kernel shell decay", x, y, std::nullopt, "shell pieces decay in M", 0, false, false);
  R.report.x_name = "M";
  R.verdict = R.monotone && R.report.fitted_slope < 0 ? Verdict::pass : Verdict::fail;
  R.report.verdict = R.verdict;
  R.seconds = sw.seconds();
  return R;
}

} // namespace hormlab
