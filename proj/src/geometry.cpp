#include "phbhm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "phbhm/error.hpp"

namespace phbhm {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInput: return "invalid-input";
    case ErrorCode::NotConverged: return "not-converged";
    case ErrorCode::InfeasibleSector: return "infeasible-sector";
    case ErrorCode::EmptySector: return "empty-sector";
    case ErrorCode::TrapDestabilized: return "trap-destabilized";
    case ErrorCode::UndefinedGap: return "undefined-gap";
    case ErrorCode::DivisionGuard: return "division-guard";
    case ErrorCode::NotDecaying: return "not-decaying";
    case ErrorCode::InvalidRegime: return "invalid-regime";
    case ErrorCode::Refused: return "refused";
    case ErrorCode::ConfigError: return "config-error";
    case ErrorCode::IoError: return "io-error";
  }
  return "unknown";
}

namespace {

double paul_energy(const Eigen::VectorXd& z) {
  double e = 0.5 * z.squaredNorm();
  for (Eigen::Index i = 0; i < z.size(); ++i)
    for (Eigen::Index j = 0; j < i; ++j) e += 1.0 / std::abs(z(i) - z(j));
  return e;
}

Eigen::VectorXd paul_gradient(const Eigen::VectorXd& z) {
  Eigen::VectorXd g = z;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      if (i == j) continue;
      double d = z(i) - z(j);
      g(i) -= (d > 0 ? 1.0 : -1.0) / (d * d);
    }
  return g;
}

Eigen::MatrixXd paul_hessian(const Eigen::VectorXd& z) {
  const Eigen::Index n = z.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      double k = 2.0 / std::pow(std::abs(z(i) - z(j)), 3);
      h(i, j) = -k;
      h(i, i) += k;
    }
  return h;
}

bool strictly_increasing(const Eigen::VectorXd& z) {
  for (Eigen::Index i = 1; i < z.size(); ++i)
    if (!(z(i) > z(i - 1))) return false;
  return true;
}

double min_adjacent_spacing(const std::vector<double>& z) {
  double m = 1.0;
  for (size_t i = 1; i < z.size(); ++i) m = (i == 1) ? z[1] - z[0] : std::min(m, z[i] - z[i - 1]);
  return m;
}

}  // namespace

double paul_force_residual(const std::vector<double>& positions) {
  Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(positions.data(), positions.size());
  return positions.empty() ? 0.0 : paul_gradient(z).lpNorm<Eigen::Infinity>();
}

ChainGeometry solve_paul_trap_positions(int n_ions, double tol) {
  require(n_ions >= 1, "n_ions must be >= 1");
  require(tol > 0.0, "tol must be positive");

  ChainGeometry geo;
  geo.kind = TrapKind::PaulTrap;
  if (n_ions == 1) {
    geo.positions = {0.0};
    geo.min_spacing = 1.0;
    return geo;
  }

  const double n = static_cast<double>(n_ions);
  const double step = 2.0 / std::pow(n, 0.56);
  Eigen::VectorXd z(n_ions);
  for (int i = 0; i < n_ions; ++i) z(i) = (i + 1 - (n + 1) / 2.0) * step;

  constexpr int kMaxIter = 200;
  double gnorm = paul_gradient(z).lpNorm<Eigen::Infinity>();
  for (int iter = 0; iter < kMaxIter && gnorm > tol; ++iter) {
    Eigen::VectorXd g = paul_gradient(z);
    Eigen::VectorXd dz = paul_hessian(z).ldlt().solve(-g);
    double e0 = paul_energy(z);
    double lambda = 1.0;
    Eigen::VectorXd trial = z + dz;
    // Backtrack until ordering survives and either the energy or the force
    // residual goes down; near the minimum the energy change is rounding noise.
    while (lambda > 1e-10) {
      trial = z + lambda * dz;
      if (strictly_increasing(trial) &&
          (paul_energy(trial) <= e0 || paul_gradient(trial).lpNorm<Eigen::Infinity>() < gnorm))
        break;
      lambda *= 0.5;
    }
    z = trial;
    gnorm = paul_gradient(z).lpNorm<Eigen::Infinity>();
  }
  if (gnorm > tol) {
    std::ostringstream os;
    os << "Paul trap equilibrium did not converge; last gradient norm " << gnorm;
    fail(ErrorCode::NotConverged, os.str(), gnorm);
  }

  geo.positions.assign(z.data(), z.data() + z.size());
  geo.min_spacing = min_adjacent_spacing(geo.positions);
  return geo;
}

ChainGeometry microtrap_positions(int n_ions) {
  require(n_ions >= 1, "n_ions must be >= 1");
  ChainGeometry geo;
  geo.kind = TrapKind::MicrotrapArray;
  geo.positions.resize(n_ions);
  for (int i = 0; i < n_ions; ++i) geo.positions[i] = i;
  geo.min_spacing = 1.0;
  return geo;
}

HoppingScale hopping_scale(double beta_x, double omega_x) {
  require(beta_x > 0.0 && omega_x > 0.0, "beta_x and omega_x must be positive");
  return {beta_x * omega_x / 2.0, beta_x / 2.0 >= kRwaWarningThreshold};
}

}  // namespace phbhm
