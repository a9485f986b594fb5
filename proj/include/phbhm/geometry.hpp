#pragma once

#include <vector>

namespace phbhm {

enum class TrapKind { PaulTrap, MicrotrapArray };

// Physical trap description. Only used for unit conversion of display
// columns; every solver input downstream is dimensionless.
struct TrapConfig {
  TrapKind kind = TrapKind::MicrotrapArray;
  int n_ions = 1;
  double spacing_d0 = 1.0;
  double axial_frequency = 0.0;  // Paul trap only
  double radial_frequency = 1.0;
  double beta_x = 0.02;
};

// Axial equilibrium positions. Paul-trap positions are in units of the
// Coulomb length (e^2 / m w_z^2)^(1/3); microtrap positions in units of d0.
struct ChainGeometry {
  TrapKind kind = TrapKind::MicrotrapArray;
  std::vector<double> positions;
  double min_spacing = 1.0;

  int size() const { return static_cast<int>(positions.size()); }
};

inline constexpr double kDefaultPositionTol = 1e-12;

// Minimizes sum z^2/2 + sum_{i>j} 1/|z_i - z_j| by damped Newton iteration.
ChainGeometry solve_paul_trap_positions(int n_ions, double tol = kDefaultPositionTol);

ChainGeometry microtrap_positions(int n_ions);

// Max-norm of the force residual z_i - sum_{j != i} sign(z_i - z_j)/(z_i - z_j)^2.
double paul_force_residual(const std::vector<double>& positions);

struct HoppingScale {
  double t = 0.0;
  bool rwa_warning = false;  // set when t / w_x = beta_x / 2 >= 0.1
};

inline constexpr double kRwaWarningThreshold = 0.1;

HoppingScale hopping_scale(double beta_x, double omega_x);

}  // namespace phbhm
