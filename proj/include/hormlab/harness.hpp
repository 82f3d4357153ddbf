#pragma once

// Experiment configs, dispatch and report files. Raw measurements go to <output>.csv (no timings, so
// identical configs give identical bytes); verdicts, fits and timings go to <output>.json.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <json.hpp>

#include "experiments.hpp"

namespace hormlab {

using json = nlohmann::json;

inline constexpr int config_schema_version = 1;

enum class ExperimentKind { tensor_scaling, bessel_dichotomy, hybrid_growth, paraproduct_consistency, region_scan, shell_decay };

inline const std::vector<std::pair<ExperimentKind, std::string>> &experiment_kinds() {
  static const std::vector<std::pair<ExperimentKind, std::string>> k{
      {ExperimentKind::tensor_scaling, "tensor_scaling"},
      {ExperimentKind::bessel_dichotomy, "bessel_dichotomy"},
      {ExperimentKind::hybrid_growth, "hybrid_growth"},
      {ExperimentKind::paraproduct_consistency, "paraproduct_consistency"},
      {ExperimentKind::region_scan, "region_scan"},
      {ExperimentKind::shell_decay, "shell_decay"}};
  return k;
}

inline std::string to_string(ExperimentKind k) {
  for (const auto &[kind, name] : experiment_kinds())
    if (kind == k)
      return name;
  return "?";
}

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::tensor_scaling;
  std::uint64_t seed = 0;
  std::string output;
  double time_cap = 900; // seconds
  int threads = 1;
  json params = json::object();
};

// ---------------------------------------------------------------------------------------------
// Typed field access with schema errors that name the offending field.

namespace detail {

template <class T> struct JsonType;
template <> struct JsonType<double> {
  static bool ok(const json &v) { return v.is_number(); }
  static const char *name() { return "a number"; }
  static const char *plural() { return "numbers"; }
};
template <> struct JsonType<int> {
  static bool ok(const json &v) { return v.is_number_integer(); }
  static const char *name() { return "an integer"; }
  static const char *plural() { return "integers"; }
};
template <> struct JsonType<std::uint64_t> {
  static bool ok(const json &v) { return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0); }
  static const char *name() { return "a non-negative integer"; }
  static const char *plural() { return "non-negative integers"; }
};
template <> struct JsonType<bool> {
  static bool ok(const json &v) { return v.is_boolean(); }
  static const char *name() { return "a boolean"; }
  static const char *plural() { return "booleans"; }
};
template <> struct JsonType<std::string> {
  static bool ok(const json &v) { return v.is_string(); }
  static const char *name() { return "a string"; }
  static const char *plural() { return "strings"; }
};
template <class E> struct JsonType<std::vector<E>> {
  static bool ok(const json &v) {
    if (!v.is_array())
      return false;
    for (const auto &e : v)
      if (!JsonType<E>::ok(e))
        return false;
    return true;
  }
  static std::string name() { return std::string("an array of ") + plural(); }
  static std::string plural() { return std::string("arrays of ") + JsonType<E>::plural(); }
};
template <> struct JsonType<std::pair<int, int>> {
  static bool ok(const json &v) { return v.is_array() && v.size() == 2 && v[0].is_number_integer() && v[1].is_number_integer(); }
  static const char *name() { return "an [integer, integer] pair"; }
  static const char *plural() { return "[integer, integer] pairs"; }
};

} // namespace detail

class FieldReader {
public:
  FieldReader(const json &obj, std::string prefix) : obj_(obj), prefix_(std::move(prefix)) {
    require(obj.is_object(), ErrorKind::schema, "field '" + (prefix_.empty() ? std::string("(root)") : prefix_) +
                                                    "' must be an object");
  }

  std::string path(const std::string &key) const { return prefix_.empty() ? key : prefix_ + "." + key; }
  bool has(const std::string &key) const { return obj_.contains(key); }
  // Marks a field whose value the caller validates itself.
  void mark(const std::string &key) { used_.insert(key); }

  template <class T> T get(const std::string &key, T fallback) {
    used_.insert(key);
    if (!obj_.contains(key))
      return fallback;
    return convert<T>(key);
  }

  template <class T> T required(const std::string &key) {
    used_.insert(key);
    require(obj_.contains(key), ErrorKind::schema, "missing required field '" + path(key) + "'");
    return convert<T>(key);
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      require(used_.count(it.key()), ErrorKind::schema, "unknown field '" + path(it.key()) + "'");
  }

private:
  template <class T> T convert(const std::string &key) const {
    const json &v = obj_.at(key);
    require(detail::JsonType<T>::ok(v), ErrorKind::schema,
            "field '" + path(key) + "' must be " + std::string(detail::JsonType<T>::name()));
    return v.get<T>();
  }

  const json &obj_;
  std::string prefix_;
  std::set<std::string> used_;
};

inline ExperimentConfig parse_config(const json &j) {
  FieldReader r(j, "");
  const int version = r.get<int>("schema_version", config_schema_version);
  require(version == config_schema_version, ErrorKind::schema,
          "field 'schema_version' must be " + std::to_string(config_schema_version));
  ExperimentConfig c;
  const std::string kind = r.required<std::string>("kind");
  bool known = false;
  for (const auto &[k, name] : experiment_kinds())
    if (name == kind) {
      c.kind = k;
      known = true;
    }
  require(known, ErrorKind::schema, "field 'kind' has unknown value '" + kind + "'");
  c.seed = r.required<std::uint64_t>("seed");
  c.output = r.required<std::string>("output");
  require(!c.output.empty(), ErrorKind::schema, "field 'output' must be a non-empty path prefix");
  c.time_cap = r.get<double>("time_cap", c.time_cap);
  require(c.time_cap > 0, ErrorKind::schema, "field 'time_cap' must be positive");
  c.threads = r.get<int>("threads", 0);
  require(c.threads >= 0, ErrorKind::schema, "field 'threads' must be >= 0 (0 = environment)");
  r.mark("params");
  if (r.has("params")) {
    require(j.at("params").is_object(), ErrorKind::schema, "field 'params' must be an object");
    c.params = j.at("params");
  }
  r.finish();
  return c;
}

inline ExperimentConfig load_config(const std::string &file) {
  std::ifstream in(file);
  require(in.good(), ErrorKind::io, "cannot open config '" + file + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error &e) {
    throw Error(ErrorKind::schema, "config '" + file + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------------------------
// Output helpers.

inline std::string fmt_num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Writes via a sibling temp file and rename, so readers never see a partial file.
inline void write_atomic(const std::string &path, const std::string &content) {
  namespace fs = std::filesystem;
  fs::path p(path);
  if (p.has_parent_path())
    fs::create_directories(p.parent_path());
  const fs::path tmp = p.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorKind::io, "cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    require(out.good(), ErrorKind::io, "write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorKind::io, "cannot rename into '" + path + "': " + ec.message());
  }
}

inline json to_json(const ScalingReport &r) {
  json j{{"label", r.label},
         {"x_name", r.x_name},
         {"x", r.x},
         {"y", r.y},
         {"fitted_slope", r.fitted_slope},
         {"stderr", r.stderr_slope},
         {"predicted_slope", r.predicted_slope ? json(*r.predicted_slope) : json(nullptr)},
         {"predicted_ref", r.predicted_ref},
         {"tolerance", r.tolerance},
         {"one_sided", r.one_sided},
         {"dropped_first", r.dropped_first},
         {"verdict", to_string(r.verdict)},
         {"runtime_seconds", r.runtime_seconds}};
  return j;
}

struct RunOutput {
  Verdict verdict = Verdict::inconclusive;
  std::string csv;
  json report;
};

// ---------------------------------------------------------------------------------------------
// Per-kind runners: read params, run, format.

namespace detail {

inline RunOutput run_tensor_scaling(const ExperimentConfig &c, int threads) {
  FieldReader r(c.params, "params");
  TensorScalingParams P;
  P.l = r.get<int>("l", P.l);
  P.k = r.get<int>("k", P.k);
  require(P.l >= 2 && P.l <= 6, ErrorKind::schema, "field 'params.l' must be in 2..6");
  require(P.k >= 0 && P.k < P.l, ErrorKind::schema, "field 'params.k' must be in 0..l-1");
  P.p = r.get<std::vector<double>>("p", std::vector<double>(P.l, static_cast<double>(P.l)));
  require(static_cast<int>(P.p.size()) == P.l, ErrorKind::schema, "field 'params.p' must have l entries");
  P.N = r.get<std::vector<int>>("N", P.N);
  P.period_factor = r.get<double>("period_factor", P.period_factor);
  P.symbol_norms = r.get<bool>("symbol_norms", P.l == 2);
  P.s = r.get<std::vector<double>>("s", P.s);
  P.u = r.get<std::vector<double>>("u", P.u);
  P.symbol_N_max = r.get<int>("symbol_N_max", P.symbol_N_max);
  P.symbol_points_per_N = r.get<int>("symbol_points_per_N", P.symbol_points_per_N);
  P.symbol_period = r.get<double>("symbol_period", P.symbol_period);
  P.tol_output = r.get<double>("tol_output", P.tol_output);
  P.tol_testfn = r.get<double>("tol_testfn", P.tol_testfn);
  P.tol_symbol = r.get<double>("tol_symbol", P.tol_symbol);
  r.finish();
  P.time_cap = c.time_cap;
  P.threads = threads;
  auto R = tensor_scaling(P);

  std::ostringstream csv;
  csv << "N,points,output_norm";
  for (int i = 1; i <= P.l; ++i)
    csv << ",testfn_norm_" << i;
  for (auto [s, u] : R.su)
    csv << ",a_norm_s" << fmt_num(s) << "_u" << fmt_num(u);
  csv << "\n";
  for (const auto &row : R.rows) {
    csv << row.N << "," << row.points << "," << fmt_num(row.output_norm);
    for (double v : row.testfn_norms)
      csv << "," << fmt_num(v);
    for (std::size_t q = 0; q < R.su.size(); ++q)
      csv << "," << (row.a_norms.empty() ? std::string() : fmt_num(row.a_norms[q]));
    csv << "\n";
  }
  json reports = json::array();
  reports.push_back(to_json(R.output));
  for (const auto &x : R.testfn)
    reports.push_back(to_json(x));
  for (const auto &x : R.symbol)
    reports.push_back(to_json(x));
  json sharp = json::array();
  for (const auto &x : R.sharpness)
    sharp.push_back(to_json(x));
  json rows = json::array();
  for (const auto &row : R.rows)
    rows.push_back({{"N", row.N}, {"seconds", row.seconds}});
  auto pred = tensor_bump_prediction(P.N.front(), P.k, P.l, P.p);
  json summary{{"estimated_seconds", R.estimated_seconds},
               {"rows", rows},
               {"sharpness_ratios", sharp},
               {"thresholds", json::object()}};
  for (double u : P.u)
    summary["thresholds"][fmt_num(u)] = pred.threshold(u);
  return {R.verdict, csv.str(), {{"reports", reports}, {"summary", summary}, {"runtime_seconds", R.seconds}}};
}

inline RunOutput run_bessel(const ExperimentConfig &c) {
  FieldReader r(c.params, "params");
  BesselGridParams P;
  P.u = r.get<double>("u", P.u);
  P.dim = r.get<int>("dim", P.dim);
  P.t = r.get<std::vector<double>>("t", P.t);
  P.gamma = r.get<std::vector<double>>("gamma", P.gamma);
  std::vector<std::string> sides = r.get<std::vector<std::string>>("sides", {"kernel", "transform"});
  r.finish();
  P.sides.clear();
  for (const auto &s : sides) {
    require(s == "kernel" || s == "transform", ErrorKind::schema,
            "field 'params.sides' entries must be \"kernel\" or \"transform\"");
    P.sides.push_back(parse_bessel_side(s));
  }
  auto R = bessel_dichotomy_grid(P);
  std::ostringstream csv;
  csv << "side,t,gamma,u,dim,predicted,verdict\n";
  for (const auto &cell : R.cells)
    csv << to_string(cell.side) << "," << fmt_num(cell.t) << "," << fmt_num(cell.gamma) << "," << fmt_num(cell.u)
        << "," << cell.dim << "," << to_string(cell.predicted) << "," << to_string(cell.verdict) << "\n";
  json summary{{"cells", R.cells.size()},
               {"misclassified", R.misclassified},
               {"inconclusive", R.inconclusive},
               {"critical_cells", R.critical_cells},
               {"critical_small_gamma", R.critical_small_gamma},
               {"critical_flagged_divergent", R.critical_flagged_divergent},
               {"predicted_ref", "L^u finite iff t > dim/u (kernel) or t > dim(1 - 1/u), or t on the line with gamma > 2/u"}};
  return {R.verdict, csv.str(), {{"reports", json::array()}, {"summary", summary}, {"runtime_seconds", R.seconds}}};
}

inline RunOutput run_hybrid(const ExperimentConfig &c) {
  FieldReader r(c.params, "params");
  HybridGrowthParams P;
  P.kind = parse_hybrid_kind(r.get<std::string>("kind", "SS"));
  P.u = r.get<double>("u", P.u);
  P.p = r.get<double>("p", P.p);
  P.p0 = r.get<double>("p0", P.p0);
  P.M = r.get<std::vector<std::pair<int, int>>>("M", P.M);
  P.points = r.get<std::size_t>("points", P.points);
  P.period = r.get<double>("period", P.period);
  P.j_min = r.get<int>("j_min", P.j_min);
  P.j_max = r.get<int>("j_max", P.j_max);
  P.samples = r.get<int>("samples", P.samples);
  P.tol = r.get<double>("tol", P.tol);
  r.finish();
  require(P.samples >= 1, ErrorKind::schema, "field 'params.samples' must be >= 1");
  P.seed = c.seed;
  auto R = hybrid_growth(P);
  std::ostringstream csv;
  csv << "kind,M1,M2,u,p,p0,ratio\n";
  for (const auto &pt : R.scan.points)
    csv << to_string(P.kind) << "," << pt.M1 << "," << pt.M2 << "," << fmt_num(P.u) << "," << fmt_num(P.p) << ","
        << fmt_num(P.p0) << "," << fmt_num(pt.ratio) << "\n";
  json summary{{"max_over_min", R.max_over_min}};
  return {R.scan.report.verdict, csv.str(),
          {{"reports", json::array({to_json(R.scan.report)})}, {"summary", summary}, {"runtime_seconds", R.seconds}}};
}

inline RunOutput run_paraproduct(const ExperimentConfig &c) {
  FieldReader r(c.params, "params");
  ParaproductParams P;
  P.points = r.get<std::size_t>("points", P.points);
  P.period = r.get<double>("period", P.period);
  P.j_min = r.get<int>("j_min", P.j_min);
  P.j_max = r.get<int>("j_max", P.j_max);
  P.pairs = r.get<int>("pairs", P.pairs);
  P.kmax = r.get<int>("kmax", static_cast<int>(P.kmax));
  P.tol = r.get<double>("tol", P.tol);
  r.finish();
  require(P.pairs >= 1, ErrorKind::schema, "field 'params.pairs' must be >= 1");
  P.seed = c.seed;
  auto R = paraproduct_consistency(P);
  std::ostringstream csv;
  csv << "pair,relative_error\n";
  for (std::size_t i = 0; i < R.errors.size(); ++i)
    csv << i << "," << fmt_num(R.errors[i]) << "\n";
  json summary{{"worst", R.worst}, {"tolerance", P.tol}, {"pieces", 9}};
  return {R.verdict, csv.str(), {{"reports", json::array()}, {"summary", summary}, {"runtime_seconds", R.seconds}}};
}

inline RunOutput run_region(const ExperimentConfig &c) {
  FieldReader r(c.params, "params");
  RegionScanParams P;
  P.consistency_samples = r.get<int>("consistency_samples", P.consistency_samples);
  P.identity_samples = r.get<int>("identity_samples", P.identity_samples);
  P.hull_samples = r.get<int>("hull_samples", P.hull_samples);
  r.finish();
  require(P.consistency_samples >= 1 && P.identity_samples >= 1 && P.hull_samples >= 1, ErrorKind::schema,
          "fields 'params.*_samples' must be >= 1");
  P.seed = c.seed;
  auto R = region_scan(P);
  std::ostringstream csv;
  csv << "check,case,samples,failures\n";
  csv << "consistency,all," << P.consistency_samples << "," << R.consistency.exceptions << "\n";
  for (const auto &[su, s] : R.identity)
    csv << "sb_identity,s=" << fmt_num(su.first) << " u=" << fmt_num(su.second) << "," << s.samples << ","
        << s.identity_failures + s.partition_failures + s.union_failures << "\n";
  for (std::size_t i = 0; i < R.hull.size(); ++i) {
    const auto &h = R.hull[i];
    std::string B;
    for (int b : P.hull[i].B)
      B += (B.empty() ? "" : " ") + std::to_string(b);
    csv << "hull,B={" << B << "} s=" << fmt_num(P.hull[i].s) << " u=" << fmt_num(P.hull[i].u) << ","
        << h.union_samples << "," << h.containment_failures + h.decomposition_failures << "\n";
  }
  json summary{{"failures", R.failures},
               {"consistency_skipped_boundary", R.consistency.skipped_boundary},
               {"consistency_sufficient", R.consistency.sufficient},
               {"consistency_necessary", R.consistency.necessary}};
  return {R.verdict, csv.str(), {{"reports", json::array()}, {"summary", summary}, {"runtime_seconds", R.seconds}}};
}

inline RunOutput run_shell(const ExperimentConfig &c) {
  FieldReader r(c.params, "params");
  ShellDecayParams P;
  P.t = r.get<double>("t", P.t);
  P.gamma = r.get<double>("gamma", P.gamma);
  P.M = r.get<double>("M", P.M);
  P.symbol_points = r.get<std::size_t>("symbol_points", P.symbol_points);
  P.symbol_period = r.get<double>("symbol_period", P.symbol_period);
  P.M_min = r.get<int>("M_min", P.M_min);
  P.M_max = r.get<int>("M_max", P.M_max);
  P.u = r.get<double>("u", P.u);
  r.finish();
  auto R = shell_decay(P);
  std::ostringstream csv;
  csv << "M,kernel_norm\n";
  for (std::size_t i = 0; i < R.shell.size(); ++i)
    csv << R.shell[i] << "," << fmt_num(R.norms[i]) << "\n";
  json summary{{"monotone", R.monotone}, {"fit_from_shell", P.M_min}};
  return {R.verdict, csv.str(),
          {{"reports", json::array({to_json(R.report)})}, {"summary", summary}, {"runtime_seconds", R.seconds}}};
}

} // namespace detail

// Runs the experiment without touching the filesystem. Budget refusals throw before any work.
inline RunOutput run_experiment(const ExperimentConfig &c) {
  const int threads = c.threads > 0 ? c.threads : thread_count();
  RunOutput out;
  switch (c.kind) {
  case ExperimentKind::tensor_scaling: out = detail::run_tensor_scaling(c, threads); break;
  case ExperimentKind::bessel_dichotomy: out = detail::run_bessel(c); break;
  case ExperimentKind::hybrid_growth: out = detail::run_hybrid(c); break;
  case ExperimentKind::paraproduct_consistency: out = detail::run_paraproduct(c); break;
  case ExperimentKind::region_scan: out = detail::run_region(c); break;
  case ExperimentKind::shell_decay: out = detail::run_shell(c); break;
  }
  out.report["schema_version"] = config_schema_version;
  out.report["kind"] = to_string(c.kind);
  out.report["seed"] = c.seed;
  out.report["params"] = c.params;
  out.report["verdict"] = to_string(out.verdict);
  return out;
}

struct WrittenRun {
  RunOutput output;
  std::string csv_path, json_path;
};

inline WrittenRun run_and_write(const ExperimentConfig &c) {
  WrittenRun w{run_experiment(c), c.output + ".csv", c.output + ".json"};
  write_atomic(w.csv_path, w.output.csv);
  write_atomic(w.json_path, w.output.report.dump(2) + "\n");
  return w;
}

// ---------------------------------------------------------------------------------------------
// Symbol and grid-function files used by the a-norm and apply subcommands.

inline SymbolLayout parse_layout(FieldReader &r, const std::string &key) {
  auto v = r.required<std::vector<int>>(key);
  require(v.size() == 3, ErrorKind::schema, "field '" + r.path(key) + "' must be [l, d, n]");
  SymbolLayout L{v[0], v[1], v[2]};
  return L;
}

inline cplx parse_complex(const json &v, const std::string &path) {
  if (v.is_number())
    return cplx(v.get<double>(), 0);
  require(v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number(), ErrorKind::schema,
          "field '" + path + "' must be a number or [re, im]");
  return cplx(v[0].get<double>(), v[1].get<double>());
}

inline MultiplierRep parse_symbol(const json &j) {
  FieldReader r(j, "");
  const std::string family = r.required<std::string>("family");
  MultiplierRep m;
  if (family == "tensor_bump") {
    int N = r.required<int>("N"), k = r.get<int>("k", 0), l = r.get<int>("l", 2);
    m = tensor_bump_multiplier(N, k, l);
  } else if (family == "bessel_shifted") {
    double t = r.required<double>("t"), g = r.required<double>("gamma"), M = r.required<double>("M");
    int l = r.get<int>("l", 2), n = r.get<int>("n", 1);
    Grid arg(n, r.get<std::size_t>("arg_points", 256), r.get<double>("arg_period", 80.0 * l / 2));
    m = bessel_multiplier(BesselFamily::Mode::shifted, BesselFamily{t, g, l * n, M}, l, n, arg);
  } else if (family == "constant") {
    SymbolLayout L = parse_layout(r, "layout");
    r.mark("value");
    m = constant_symbol(L, r.has("value") ? parse_complex(j.at("value"), "value") : cplx(1));
  } else if (family == "separable") {
    SymbolLayout L = parse_layout(r, "layout");
    const json &fj = j.contains("factors") ? j.at("factors") : json();
    r.mark("factors");
    require(fj.is_array() && static_cast<int>(fj.size()) == L.l, ErrorKind::schema,
            "field 'factors' must list factor arrays for each of the l arguments");
    SeparableSum s;
    for (std::size_t i = 0; i < fj.size(); ++i) {
      require(fj[i].is_array(), ErrorKind::schema, "field 'factors[" + std::to_string(i) + "]' must be an array");
      s.factors.emplace_back();
      for (std::size_t q = 0; q < fj[i].size(); ++q) {
        FieldReader fr(fj[i][q], "factors[" + std::to_string(i) + "][" + std::to_string(q) + "]");
        auto kind = fr.required<std::string>("kind");
        auto params = fr.get<std::vector<double>>("params", {});
        fr.finish();
        s.factors.back().push_back(make_factor(kind, params));
      }
    }
    auto terms = r.required<std::vector<std::vector<int>>>("terms");
    s.terms = terms;
    if (j.contains("coeffs")) {
      r.mark("coeffs");
      require(j.at("coeffs").is_array(), ErrorKind::schema, "field 'coeffs' must be an array");
      for (std::size_t t = 0; t < j.at("coeffs").size(); ++t)
        s.coeffs.push_back(parse_complex(j.at("coeffs")[t], "coeffs[" + std::to_string(t) + "]"));
    }
    m = make_separable(L, std::move(s));
  } else {
    throw Error(ErrorKind::schema,
                "field 'family' has unknown value '" + family + "' (tensor_bump, bessel_shifted, constant, separable)");
  }
  r.finish();
  return m;
}

inline json read_json_file(const std::string &file) {
  std::ifstream in(file);
  require(in.good(), ErrorKind::io, "cannot open '" + file + "'");
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::parse_error &e) {
    throw Error(ErrorKind::schema, "'" + file + "' is not valid JSON: " + e.what());
  }
}

// {"grid": {"dims", "points", "period"}, "re": [...], "im": [...]} in row-major order, spatial domain.
inline GridFunction parse_grid_function(const json &j) {
  FieldReader r(j, "");
  const json &gj = j.contains("grid") ? j.at("grid") : json();
  r.mark("grid");
  require(j.contains("grid"), ErrorKind::schema, "missing required field 'grid'");
  FieldReader gr(gj, "grid");
  Grid g(gr.get<int>("dims", 1), gr.required<std::size_t>("points"), gr.required<double>("period"));
  gr.finish();
  auto re = r.required<std::vector<double>>("re");
  auto im = r.get<std::vector<double>>("im", std::vector<double>(re.size(), 0.0));
  r.finish();
  require(re.size() == g.size() && im.size() == g.size(), ErrorKind::schema,
          "fields 're'/'im' must hold " + std::to_string(g.size()) + " samples");
  GridFunction f(g, Domain::spatial);
  for (std::size_t i = 0; i < g.size(); ++i)
    f.samples[i] = cplx(re[i], im[i]);
  return f;
}

inline json grid_function_json(const GridFunction &f) {
  require(f.domain == Domain::spatial, ErrorKind::structural, "only spatial functions are written");
  std::vector<double> re(f.size()), im(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    re[i] = f.samples[i].real();
    im[i] = f.samples[i].imag();
  }
  return {{"grid", {{"dims", f.grid.dims}, {"points", f.grid.points}, {"period", f.grid.period}}}, {"re", re}, {"im", im}};
}

inline json to_json(const RegionCondition &c) {
  return {{"name", c.name}, {"subset", c.subset}, {"j", c.j}, {"margin", c.margin},
          {"strict", c.strict}, {"status", to_string(c.status)}};
}

inline json to_json(const RegionVerdict &v) {
  json conds = json::array(), viol = json::array(), bnd = json::array();
  for (const auto &c : v.conditions)
    conds.push_back(to_json(c));
  for (const auto &c : v.violated)
    viol.push_back(to_json(c));
  for (const auto &c : v.boundary)
    bnd.push_back(to_json(c));
  return {{"admissible", v.admissible}, {"classified", v.classified}, {"violated", viol}, {"boundary", bnd},
          {"conditions", conds}};
}

} // namespace hormlab
