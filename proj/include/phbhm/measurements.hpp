#pragma once

#include <vector>

#include <Eigen/Dense>

namespace phbhm {

// Raw ground-state expectation values, independent of the solver.
struct RawMeasurements {
  std::vector<double> density;     // <n_i>
  std::vector<double> density_sq;  // <n_i^2>
  Eigen::MatrixXd hop;             // <a+_i a_j>, diagonal = <n_i>
  Eigen::MatrixXd dens;            // <n_i n_j>, diagonal = <n_i^2>
};

}  // namespace phbhm
