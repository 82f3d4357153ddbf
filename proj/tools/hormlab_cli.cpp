// hormlab command line: run experiments, check exponent points, compute symbol norms, apply
// multipliers, run the invariant suite. Exit codes: 0 pass, 1 verdict fail, 2 error.

#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hormlab/harness.hpp"
#include "hormlab/selftest.hpp"

using namespace hormlab;

namespace {

constexpr int exit_pass = 0, exit_fail = 1, exit_error = 2;

int verdict_code(Verdict v) { return v == Verdict::pass ? exit_pass : exit_fail; }

// key=value with value parsed as JSON, or taken as a string when it is not valid JSON.
void apply_override(json &params, const std::string &kv) {
  auto eq = kv.find('=');
  require(eq != std::string::npos && eq > 0, ErrorKind::parameter, "--set expects key=value, got '" + kv + "'");
  const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
  json v = json::parse(val, nullptr, false);
  params[key] = v.is_discarded() ? json(val) : v;
}

int cmd_run(const std::string &file, const std::vector<std::string> &sets, const std::optional<std::uint64_t> &seed,
            const std::optional<std::string> &output, const std::optional<double> &time_cap,
            const std::optional<int> &threads) {
  json j = read_json_file(file);
  require(j.is_object(), ErrorKind::schema, "config root must be an object");
  if (!j.contains("params"))
    j["params"] = json::object();
  for (const auto &kv : sets)
    apply_override(j["params"], kv);
  if (seed)
    j["seed"] = *seed;
  if (output)
    j["output"] = *output;
  if (time_cap)
    j["time_cap"] = *time_cap;
  if (threads)
    j["threads"] = *threads;
  ExperimentConfig c = parse_config(j);
  WrittenRun w = run_and_write(c);
  const json &rep = w.output.report;
  for (const auto &r : rep.at("reports")) {
    std::cout << r.at("label").get<std::string>() << ": slope " << r.at("fitted_slope").get<double>();
    if (!r.at("predicted_slope").is_null())
      std::cout << " (predicted " << r.at("predicted_slope").get<double>() << ", tol "
                << (r.at("one_sided").get<bool>() ? "+" : "+-") << r.at("tolerance").get<double>() << ")";
    std::cout << " " << r.at("verdict").get<std::string>() << "\n";
  }
  std::cout << to_string(c.kind) << ": " << to_string(w.output.verdict) << " in " << rep.at("runtime_seconds").get<double>()
            << " s\n  " << w.csv_path << "\n  " << w.json_path << "\n";
  return verdict_code(w.output.verdict);
}

double inverse_exponent(double p) {
  require(p >= 1, ErrorKind::parameter, "Lebesgue exponents must be >= 1 (use inf for infinity)");
  return std::isinf(p) ? 0.0 : 1 / p;
}

int cmd_check_region(std::optional<int> l, std::optional<double> u, std::vector<double> s, std::vector<double> p,
                     int n, const std::string &file) {
  if (!file.empty()) {
    json j = read_json_file(file);
    FieldReader r(j, "");
    l = r.required<int>("l");
    u = r.required<double>("u");
    s = r.required<std::vector<double>>("s");
    p = r.required<std::vector<double>>("p");
    n = r.get<int>("n", n);
    r.finish();
  }
  require(l && u && !s.empty() && !p.empty(), ErrorKind::parameter, "check-region needs --l, --u, --s and --p (or a file)");
  require(static_cast<int>(p.size()) == *l, ErrorKind::arity, "check-region: --p needs l values");
  ExponentPoint pt;
  pt.l = *l;
  pt.d = static_cast<int>(s.size());
  pt.n = n;
  pt.u = *u;
  pt.s = s;
  for (double x : p)
    pt.p_inv.push_back(inverse_exponent(x));
  auto suff = sufficiency_check(pt), nec = necessity_check(pt);
  json out{{"l", pt.l}, {"d", pt.d}, {"n", pt.n}, {"u", pt.u}, {"s", pt.s}, {"p", p},
           {"admissible", suff.admissible}, {"classified", suff.classified},
           {"sufficiency", to_json(suff)}, {"necessity", to_json(nec)}};
  std::cout << out.dump(2) << "\n";
  return suff.admissible ? exit_pass : exit_fail;
}

SymbolGrid symbol_grid_for(const MultiplierRep &m, std::size_t points, double period) {
  return SymbolGrid{Grid(m.layout.l * m.layout.n, points, period), {}};
}

int cmd_a_norm(const std::string &file, const std::vector<double> &s, const std::vector<double> &us,
               std::size_t points, double period, const std::string &window) {
  MultiplierRep m = parse_symbol(read_json_file(file));
  require(static_cast<int>(s.size()) == m.layout.d, ErrorKind::arity,
          "a-norm: --s needs one value per parameter (" + std::to_string(m.layout.d) + ")");
  std::vector<SobolevSpec> specs;
  for (double u : us)
    specs.push_back({s, u});
  ANormOptions o;
  o.window = parse_window_kind(window);
  if (m.form != SymbolForm::dense)
    o.symbol_grid = symbol_grid_for(m, points, period);
  auto r = a_norm(m, specs, o);
  json out{{"symbol", m.id}, {"s", s}, {"u", us}, {"value", r.value}, {"argmax", r.argmax}};
  std::cout << out.dump(2) << "\n";
  return exit_pass;
}

int cmd_apply(const std::string &symbol, const std::vector<std::string> &inputs, const std::string &out,
              bool no_dealias) {
  MultiplierRep m = parse_symbol(read_json_file(symbol));
  std::vector<GridFunction> fs;
  for (const auto &f : inputs)
    fs.push_back(parse_grid_function(read_json_file(f)));
  GridFunction r = apply_multilinear(m, fs, {!no_dealias});
  write_atomic(out, grid_function_json(r).dump() + "\n");
  std::cout << "wrote " << out << " (" << r.grid.points << " points per axis, dims " << r.grid.dims << ")\n";
  return exit_pass;
}

int cmd_selftest() {
  Stopwatch sw;
  SelftestResult r = run_selftest();
  for (const auto &c : r.checks)
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.value << " (tol " << c.tolerance << ")\n";
  std::cout << (r.pass() ? "selftest passed" : "selftest FAILED") << " in " << sw.seconds() << " s\n";
  return r.pass() ? exit_pass : exit_fail;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"hormlab: numerical laboratory for multilinear multi-parameter Fourier multipliers"};
  app.require_subcommand(1);

  auto *run = app.add_subcommand("run", "run an experiment config, writing <output>.csv and <output>.json");
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  std::optional<double> time_cap;
  std::optional<int> threads;
  run->add_option("config", config, "experiment config (JSON)")->required();
  run->add_option("--set", sets, "override a params field: key=value (value is JSON)");
  run->add_option("--seed", seed, "override the seed");
  run->add_option("--output", output, "override the output path prefix");
  run->add_option("--time-cap", time_cap, "override the runtime cap in seconds");
  run->add_option("--threads", threads, "worker threads (default: HORMLAB_THREADS or 1)");

  auto *region = app.add_subcommand("check-region", "classify an exponent point; prints a JSON verdict");
  std::optional<int> rl;
  std::optional<double> ru;
  std::vector<double> rs, rp;
  int rn = 1;
  std::string rfile;
  region->add_option("--l", rl, "number of inputs");
  region->add_option("--u", ru, "Sobolev integrability u");
  region->add_option("--s", rs, "smoothness per parameter");
  region->add_option("--p", rp, "input exponents p_1..p_l (inf allowed)");
  region->add_option("--n", rn, "dimension per parameter")->check(CLI::PositiveNumber);
  region->add_option("file", rfile, "JSON file with l, u, s, p (and optionally n)");

  auto *anorm = app.add_subcommand("a-norm", "sup-over-dilations Sobolev norm of a symbol file");
  std::string afile, awindow = "annulus";
  std::vector<double> as, au;
  std::size_t apoints = 256;
  double aperiod = 4;
  anorm->add_option("symbol", afile, "symbol file (JSON)")->required();
  anorm->add_option("--s", as, "smoothness per parameter")->required();
  anorm->add_option("--u", au, "one or more u values")->required();
  anorm->add_option("--points", apoints, "symbol grid points per axis");
  anorm->add_option("--period", aperiod, "symbol grid period");
  anorm->add_option("--window", awindow, "annulus or tilde");

  auto *apply = app.add_subcommand("apply", "apply a multiplier to grid-function files");
  std::string psym, pout;
  std::vector<std::string> pin;
  bool no_dealias = false;
  apply->add_option("symbol", psym, "symbol file (JSON)")->required();
  apply->add_option("inputs", pin, "input grid-function files (JSON)")->required();
  apply->add_option("--out", pout, "output grid-function file")->required();
  apply->add_flag("--no-dealias", no_dealias, "keep the input grid instead of padding");

  auto *self = app.add_subcommand("selftest", "run the numerical invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    return rc == 0 ? exit_pass : exit_error;
  }

  try {
    if (*run)
      return cmd_run(config, sets, seed, output, time_cap, threads);
    if (*region)
      return cmd_check_region(rl, ru, rs, rp, rn, rfile);
    if (*anorm)
      return cmd_a_norm(afile, as, au, apoints, aperiod, awindow);
    if (*apply)
      return cmd_apply(psym, pin, pout, no_dealias);
    if (*self)
      return cmd_selftest();
  } catch (const Error &e) {
    std::cerr << e.what() << "\n";
    return exit_error;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_error;
  }
  return exit_error;
}
