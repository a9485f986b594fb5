#include "phbhm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "phbhm/error.hpp"

namespace phbhm {

const char* to_string(FitKind k) noexcept {
  switch (k) {
    case FitKind::PowerLaw: return "power_law";
    case FitKind::Exponential: return "exponential";
    case FitKind::LuttingerScaling: return "luttinger";
    case FitKind::LinearExtrapolation: return "linear_extrapolation";
  }
  return "unknown";
}

namespace {

struct Line {
  double slope, intercept, se_slope, se_intercept, cov, r2, rms;
};

// Ordinary least squares y = a + b x.
Line fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double mx = 0, my = 0;
  for (size_t k = 0; k < n; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t k = 0; k < n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  require(sxx > 0.0, "fit needs at least two distinct abscissae");
  Line l{};
  l.slope = sxy / sxx;
  l.intercept = my - l.slope * mx;
  double rss = 0;
  for (size_t k = 0; k < n; ++k) {
    const double e = y[k] - l.intercept - l.slope * x[k];
    rss += e * e;
  }
  l.rms = std::sqrt(rss / n);
  l.r2 = syy > 0.0 ? std::clamp(1.0 - rss / syy, 0.0, 1.0) : 1.0;
  const double s2 = n > 2 ? rss / (n - 2) : 0.0;
  l.se_slope = std::sqrt(s2 / sxx);
  l.se_intercept = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  l.cov = -mx * s2 / sxx;
  return l;
}

void windowed(const Series& s, FitWindow w, bool log_x, std::vector<double>& x, std::vector<double>& y) {
  require(s.r.size() == s.y.size(), "series abscissa and values differ in length");
  require(w.hi >= w.lo, "fit window is empty");
  std::vector<double> bad;
  for (size_t k = 0; k < s.r.size(); ++k) {
    if (s.r[k] < w.lo || s.r[k] > w.hi) continue;
    if (!(s.y[k] > 0.0)) {
      bad.push_back(s.r[k]);
      continue;
    }
    x.push_back(log_x ? std::log(s.r[k]) : s.r[k]);
    y.push_back(std::log(s.y[k]));
  }
  if (!bad.empty()) {
    std::ostringstream os;
    os << "nonpositive values at separations";
    for (double r : bad) os << ' ' << r;
    fail(ErrorCode::InvalidInput, os.str(), bad.front());
  }
  if (x.size() < 4) {
    std::ostringstream os;
    os << "fit window [" << w.lo << ", " << w.hi << "] holds " << x.size() << " points; need at least 4";
    fail(ErrorCode::InvalidInput, os.str());
  }
}

}  // namespace

Series separation_series(const std::vector<double>& row, int i0) {
  const int n = static_cast<int>(row.size());
  require(i0 >= 1 && i0 <= n, "reference site out of range");
  Series s;
  const int c = i0 - 1;
  for (int r = 1; r < n; ++r) {
    double sum = 0.0;
    int cnt = 0;
    if (c + r < n) {
      sum += std::abs(row[c + r]);
      ++cnt;
    }
    if (c - r >= 0) {
      sum += std::abs(row[c - r]);
      ++cnt;
    }
    if (cnt == 0) break;
    s.r.push_back(r);
    s.y.push_back(sum / cnt);
  }
  return s;
}

Series separation_series(const Eigen::MatrixXd& c, int i0) {
  require(i0 >= 1 && i0 <= c.rows(), "reference site out of range");
  std::vector<double> row(c.cols());
  for (Eigen::Index j = 0; j < c.cols(); ++j) row[j] = c(i0 - 1, j);
  return separation_series(row, i0);
}

FitWindow default_power_law_window(int n_sites) { return {2.0, std::floor(n_sites / 4.0)}; }
FitWindow default_exponential_window(int n_sites) { return {2.0, std::floor(n_sites / 3.0)}; }

FitResult fit_power_law(const Series& s, FitWindow window) {
  std::vector<double> x, y;
  windowed(s, window, true, x, y);
  const Line l = fit_line(x, y);
  FitResult f;
  f.kind = FitKind::PowerLaw;
  f.value = -l.slope;
  f.std_error = l.se_slope;
  f.slope = l.slope;
  f.intercept = l.intercept;
  f.window = window;
  f.n_points = static_cast<int>(x.size());
  f.r_squared = l.r2;
  f.residual = l.rms;
  return f;
}

FitResult fit_exponential(const Series& s, FitWindow window) {
  std::vector<double> x, y;
  windowed(s, window, false, x, y);
  const Line l = fit_line(x, y);
  if (!(l.slope < 0.0)) fail(ErrorCode::NotDecaying, "correlations do not decay in the fit window", l.slope);
  FitResult f;
  f.kind = FitKind::Exponential;
  f.value = -1.0 / l.slope;
  f.std_error = l.se_slope / (l.slope * l.slope);
  f.slope = l.slope;
  f.intercept = l.intercept;
  f.window = window;
  f.n_points = static_cast<int>(x.size());
  f.r_squared = l.r2;
  f.residual = l.rms;
  return f;
}

FitResult extrapolate_critical_point(const std::vector<double>& u, const std::vector<double>& xi) {
  require(u.size() == xi.size(), "u and xi differ in length");
  require(u.size() >= 3, "critical-point extrapolation needs at least 3 points");
  std::vector<double> inv(xi.size());
  for (size_t k = 0; k < xi.size(); ++k) {
    require(xi[k] > 0.0 && std::isfinite(xi[k]), "correlation lengths must be positive");
    inv[k] = 1.0 / xi[k];
  }
  const Line l = fit_line(u, inv);
  if (!(l.slope > 0.0))
    fail(ErrorCode::InvalidRegime, "1/xi does not grow with U; not in the insulating regime", l.slope);
  FitResult f;
  f.kind = FitKind::LinearExtrapolation;
  f.value = -l.intercept / l.slope;
  // Delta method for U_c = -a/b.
  const double da = -1.0 / l.slope, db = l.intercept / (l.slope * l.slope);
  const double var = da * da * l.se_intercept * l.se_intercept + db * db * l.se_slope * l.se_slope + 2 * da * db * l.cov;
  f.std_error = std::sqrt(std::max(0.0, var));
  f.slope = l.slope;
  f.intercept = l.intercept;
  f.window = {*std::min_element(u.begin(), u.end()), *std::max_element(u.begin(), u.end())};
  f.n_points = static_cast<int>(u.size());
  f.r_squared = l.r2;
  f.residual = l.rms;
  return f;
}

FitResult extrapolate_critical_point_auto(const std::vector<double>& u, const std::vector<double>& xi,
                                          double min_r2) {
  require(u.size() == xi.size(), "u and xi differ in length");
  require(u.size() >= 3, "critical-point extrapolation needs at least 3 points");
  std::vector<size_t> order(u.size());
  for (size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return u[a] < u[b]; });
  for (size_t start = 0; start + 3 <= order.size(); ++start) {
    std::vector<double> us, xs;
    for (size_t k = start; k < order.size(); ++k) {
      us.push_back(u[order[k]]);
      xs.push_back(xi[order[k]]);
    }
    try {
      FitResult f = extrapolate_critical_point(us, xs);
      if (f.r_squared >= min_r2) return f;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InvalidRegime) throw;
    }
  }
  fail(ErrorCode::InvalidRegime, "no suffix of at least 3 points is linear enough");
}

FitResult fit_luttinger_coefficient(const std::vector<std::pair<double, double>>& u_alpha, double n0) {
  require(!u_alpha.empty(), "no (U, alpha) pairs to fit");
  require(u_alpha.size() >= 3, "Luttinger fit needs at least 3 points");
  require(n0 > 0.0, "mean density must be positive");
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [u, a] : u_alpha) {
    require(u > 0.0, "Luttinger fit needs U/t > 0");
    const double x = std::sqrt(u / n0);
    sxx += x * x;
    sxy += x * a;
    syy += a * a;
  }
  FitResult f;
  f.kind = FitKind::LuttingerScaling;
  f.value = sxy / sxx;
  double rss = 0;
  for (const auto& [u, a] : u_alpha) {
    const double e = a - f.value * std::sqrt(u / n0);
    rss += e * e;
  }
  const size_t n = u_alpha.size();
  f.std_error = std::sqrt(rss / (n - 1) / sxx);
  f.slope = f.value;
  f.window = {u_alpha.front().first, u_alpha.back().first};
  for (const auto& p : u_alpha) {
    f.window.lo = std::min(f.window.lo, p.first);
    f.window.hi = std::max(f.window.hi, p.first);
  }
  f.n_points = static_cast<int>(n);
  // Uncentred r^2 for a fit through the origin.
  f.r_squared = syy > 0.0 ? std::clamp(1.0 - rss / syy, 0.0, 1.0) : 1.0;
  f.residual = std::sqrt(rss / n);
  return f;
}

}  // namespace phbhm
