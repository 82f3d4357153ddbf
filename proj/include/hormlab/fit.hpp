#pragma once

// Least-squares slopes and self-describing scaling reports.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"

namespace hormlab {

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double stderr_slope = 0;
  std::vector<double> residuals;
};

inline LineFit fit_line(const std::vector<double> &x, const std::vector<double> &y) {
  require(x.size() == y.size(), ErrorKind::fit, "fit: x and y lengths differ");
  require(x.size() >= 2, ErrorKind::fit, "fit: need at least 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0, ErrorKind::fit, "fit: x values are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - (f.intercept + f.slope * x[i]);
    f.residuals.push_back(r);
    ss += r * r;
  }
  f.stderr_slope = x.size() > 2 ? std::sqrt(ss / (n - 2) / sxx) : 0.0;
  return f;
}

// Slope of log y against log x.
inline LineFit fit_loglog_slope(const std::vector<double> &x, const std::vector<double> &y) {
  require(x.size() >= 3, ErrorKind::fit, "log-log fit needs at least 3 points, got " + std::to_string(x.size()));
  require(x.size() == y.size(), ErrorKind::fit, "fit: x and y lengths differ");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0 && y[i] > 0, ErrorKind::fit, "log-log fit needs positive values (point " + std::to_string(i) + ")");
    if (i > 0)
      require(x[i] > x[i - 1], ErrorKind::fit, "log-log fit needs strictly increasing x");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return fit_line(lx, ly);
}

enum class Verdict { pass, fail, inconclusive };

inline const char *to_string(Verdict v) {
  switch (v) {
  case Verdict::pass: return "pass";
  case Verdict::fail: return "fail";
  case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct ScalingReport {
  std::string label;
  std::string x_name = "N";
  std::vector<double> x, y;
  double fitted_slope = 0;
  double stderr_slope = 0;
  std::optional<double> predicted_slope;
  std::string predicted_ref;
  double tolerance = 0.15;
  bool one_sided = false; // pass iff fitted <= predicted + tolerance
  bool dropped_first = false;
  Verdict verdict = Verdict::inconclusive;
  double runtime_seconds = 0;

  void decide() {
    if (!predicted_slope) {
      verdict = Verdict::inconclusive;
      return;
    }
    bool ok = one_sided ? fitted_slope <= *predicted_slope + tolerance
                        : std::abs(fitted_slope - *predicted_slope) <= tolerance;
    verdict = ok ? Verdict::pass : Verdict::fail;
  }
};

// Fit and judge. With allow_drop, the smallest-x point is left out when its residual exceeds 3x
// every other residual (pre-asymptotic), and the drop is recorded.
inline ScalingReport make_scaling_report(std::string label, std::vector<double> x, std::vector<double> y,
                                         std::optional<double> predicted, std::string ref, double tol,
                                         bool one_sided = false, bool loglog = true, bool allow_drop = false) {
  ScalingReport r;
  r.label = std::move(label);
  r.x = x;
  r.y = y;
  r.predicted_slope = predicted;
  r.predicted_ref = std::move(ref);
  r.tolerance = tol;
  r.one_sided = one_sided;
  auto fit = [&](const std::vector<double> &a, const std::vector<double> &b) {
    if (loglog)
      return fit_loglog_slope(a, b);
    require(a.size() >= 3, ErrorKind::fit, "fit needs at least 3 points, got " + std::to_string(a.size()));
    return fit_line(a, b);
  };
  LineFit f = fit(x, y);
  if (allow_drop && x.size() >= 4) {
    double rest = 0;
    for (std::size_t i = 1; i < f.residuals.size(); ++i)
      rest = std::max(rest, std::abs(f.residuals[i]));
    if (std::abs(f.residuals[0]) > 3 * rest) {
      f = fit(std::vector<double>(x.begin() + 1, x.end()), std::vector<double>(y.begin() + 1, y.end()));
      r.dropped_first = true;
    }
  }
  r.fitted_slope = f.slope;
  r.stderr_slope = f.stderr_slope;
  r.decide();
  return r;
}

} // namespace hormlab
