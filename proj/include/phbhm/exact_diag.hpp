#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "phbhm/measurements.hpp"
#include "phbhm/model.hpp"
#include "phbhm/sector_basis.hpp"

namespace phbhm {

// Fixed-sector Hamiltonian. Storage follows the dimension: an explicit dense
// matrix for small sectors, CSR while the nonzeros fit in memory, and
// matrix-free row evaluation beyond. Every route computes each output row
// with the same summation order, so results do not depend on thread count.
class SectorHamiltonian {
 public:
  enum class Storage { Dense, Sparse, MatrixFree };

  SectorHamiltonian(const BoseHubbardModel& model, const SectorBasis& basis, int threads = 0);

  std::int64_t dimension() const { return basis_->dimension(); }
  Storage storage() const { return storage_; }
  const std::vector<double>& diagonal() const { return diag_; }

  void apply(std::span<const double> x, std::span<double> y) const;
  Eigen::MatrixXd to_dense() const;

  static constexpr std::int64_t kDenseLimit = 1500;
  static constexpr std::int64_t kSparseNonzeroLimit = 40'000'000;

 private:
  template <class Visit>
  void visit_row(std::int64_t row, std::vector<std::uint8_t>& scratch, Visit&& visit) const;
  void parallel_rows(const std::function<void(std::int64_t, std::int64_t)>& body) const;

  const BoseHubbardModel* model_;
  const SectorBasis* basis_;
  int threads_;
  Storage storage_;
  std::vector<double> diag_;
  std::vector<std::pair<int, int>> hops_;  // (i, j) with t_ij != 0, i != j
  Eigen::MatrixXd dense_;
  std::vector<std::int64_t> row_ptr_;
  std::vector<std::int64_t> col_;
  std::vector<double> val_;
};

struct Eigenpair {
  double energy = 0.0;
  Eigen::VectorXd vector;
  double residual = 0.0;
};

struct EdResult {
  std::vector<Eigenpair> pairs;  // ascending; at least k entries
  int ground_degeneracy = 1;     // eigenvalues within the degeneracy window of E0
  bool degenerate = false;
};

struct EdOptions {
  double residual_tol = 1e-11;
  std::uint64_t seed = 2024;
  int threads = 0;
};

// Degeneracy window around E0.
inline double degeneracy_window(double e0) { return 1e-9 * std::max(1.0, std::abs(e0)); }

// k lowest eigenpairs of the sector Hamiltonian. If the ground level is
// degenerate the list is extended until the whole ground manifold is included.
EdResult ed_ground_state(const BoseHubbardModel& model, const SectorBasis& basis, int k,
                         const EdOptions& options = {});

// E1 - E0 within the same sector.
double ed_gap(const BoseHubbardModel& model, const SectorBasis& basis, const EdOptions& options = {});

// Raw expectation values of a sector vector.
RawMeasurements measure_exact(const SectorBasis& basis, const Eigen::VectorXd& psi);

// Average over an orthonormal set of states (e.g. a degenerate ground manifold).
RawMeasurements measure_exact(const SectorBasis& basis, const std::vector<Eigen::VectorXd>& states);

}  // namespace phbhm
