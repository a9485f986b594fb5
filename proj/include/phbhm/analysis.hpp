#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace phbhm {

enum class FitKind { PowerLaw, Exponential, LuttingerScaling, LinearExtrapolation };

const char* to_string(FitKind k) noexcept;

// Inclusive range of the abscissa used by a fit (separations or U/t values).
struct FitWindow {
  double lo = 0.0;
  double hi = 0.0;
};

struct FitResult {
  FitKind kind = FitKind::PowerLaw;
  double value = 0.0;   // alpha, xi, A or U_c
  double std_error = 0.0;
  double slope = 0.0;   // of the underlying linear fit
  double intercept = 0.0;
  FitWindow window;
  int n_points = 0;
  double r_squared = 0.0;
  double residual = 0.0;  // root-mean-square residual of the linear fit
};

// y(r) for r = 1, 2, ...
struct Series {
  std::vector<double> r;
  std::vector<double> y;
};

// |C(i0, i0 + r)| averaged with |C(i0, i0 - r)| where both exist; i0 is 1-based.
Series separation_series(const Eigen::MatrixXd& c, int i0);
Series separation_series(const std::vector<double>& row, int i0);

// Default windows in separation units.
FitWindow default_power_law_window(int n_sites);
FitWindow default_exponential_window(int n_sites);

// log y = log c - alpha log r; alpha = -slope.
FitResult fit_power_law(const Series& s, FitWindow window);
// log y = log c - r / xi.
FitResult fit_exponential(const Series& s, FitWindow window);

// Linear fit of 1/xi against U/t; U_c is where 1/xi vanishes.
FitResult extrapolate_critical_point(const std::vector<double>& u, const std::vector<double>& xi);
// Largest suffix (highest U values, at least three points) whose linear fit reaches r^2 >= min_r2.
FitResult extrapolate_critical_point_auto(const std::vector<double>& u, const std::vector<double>& xi,
                                          double min_r2 = 0.99);

// Least-squares A in alpha = A sqrt(U / n0), no intercept.
FitResult fit_luttinger_coefficient(const std::vector<std::pair<double, double>>& u_alpha, double n0);

}  // namespace phbhm
