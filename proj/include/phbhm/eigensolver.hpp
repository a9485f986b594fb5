#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace phbhm {

// y = H x for a real symmetric operator of dimension `dim`.
using LinearOperator = std::function<void(std::span<const double> x, std::span<double> y)>;

struct EigenOptions {
  int n_eigen = 1;
  double residual_tol = 1e-10;
  // If > 0, also stop once every residual has dropped by this factor relative
  // to the first Ritz estimate (useful with a good starting guess).
  double relative_tol = 0.0;
  int max_iterations = 2000;
  int max_subspace = 0;  // 0 = automatic
  std::uint64_t seed = 12345;
};

struct EigenResult {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns normalized
  std::vector<double> residuals;
  int iterations = 0;
  int matvecs = 0;
  bool converged = false;
};

// Block Davidson for the lowest eigenpairs, restarted from the current Ritz
// vectors when the subspace fills. `diagonal` (optional) drives the
// preconditioner; `guess` (optional) seeds the subspace, random seeded vectors
// fill the rest of the starting block.
EigenResult davidson_lowest(const LinearOperator& op, Eigen::Index dim, const EigenOptions& options,
                            std::span<const double> diagonal = {}, const Eigen::MatrixXd* guess = nullptr);

// Dense symmetric diagonalization of an explicit matrix (k lowest pairs).
EigenResult dense_lowest(const Eigen::MatrixXd& h, int n_eigen);

}  // namespace phbhm
