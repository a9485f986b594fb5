#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phbhm/model.hpp"

namespace phbhm {

class DmrgState;

struct SweepRecord {
  int sweep = 0;
  double energy = 0.0;      // energy of the state left by this sweep
  double min_energy = 0.0;  // lowest superblock energy seen during the sweep
  double max_truncation = 0.0;
  double noise = 0.0;
  int max_kept = 0;
  long matvecs = 0;
  double seconds = 0.0;
};

struct DmrgConfig {
  int kept_states_m = 100;
  int max_sweeps = 12;
  double energy_tol = 1e-9;
  int n_max = 0;  // 0: use the model cap
  std::uint64_t seed = 7;

  // Density-matrix perturbation for the first sweeps; sweep k uses noise / 10^k.
  double noise = 1e-4;
  int noise_sweeps = 3;
  double davidson_tol = 1e-9;
  double coupling_svd_cutoff = 1e-13;

  // Called after every full sweep with a snapshot of the current state.
  std::function<void(const SweepRecord&, const DmrgState&)> on_sweep;

  void validate() const;
};

struct DmrgResult {
  double energy = 0.0;
  bool converged = false;
  int sweeps = 0;
  std::vector<SweepRecord> history;
  std::vector<double> truncation_weights;  // every truncation step, in order
  double gap_estimate = 0.0;               // E1 - E0 of the central superblock, last sweep
  bool near_degenerate = false;            // gap_estimate < kNearDegenerateGap
  std::vector<double> center_spectrum;     // leading reduced-density-matrix weights at the center bond
};

inline constexpr double kNearDegenerateGap = 1e-6;

enum class OnePoint { Density, DensitySquared };
enum class TwoPoint { HopCorr, DensCorr };

namespace detail {
struct MpsData;
}

// Converged (or flagged) ground state as a number-conserving MPS.
class DmrgState {
 public:
  DmrgState();
  DmrgState(std::shared_ptr<const detail::MpsData> mps, DmrgResult result);
  DmrgState(const DmrgState&) = default;
  DmrgState(DmrgState&&) noexcept = default;
  DmrgState& operator=(const DmrgState&) = default;
  DmrgState& operator=(DmrgState&&) noexcept = default;
  ~DmrgState();

  const DmrgResult& result() const { return result_; }
  double energy() const { return result_.energy; }
  int n_sites() const;
  int n_phonons() const;
  int n_max() const;
  std::vector<int> bond_dimensions() const;

  std::vector<double> measure_one_point(OnePoint which) const;
  // <a+_i a_j> or <n_i n_j>; sites are 1-based.
  double measure_two_point(TwoPoint kind, int i, int j) const;
  Eigen::MatrixXd two_point_matrix(TwoPoint kind) const;

  // Versioned binary checkpoint (MPS tensors plus solver metadata).
  void save(const std::string& path) const;
  static DmrgState load(const std::string& path);

  const detail::MpsData& mps() const { return *mps_; }

 private:
  std::shared_ptr<const detail::MpsData> mps_;
  DmrgResult result_;
};

// Finite-system two-site DMRG in the fixed n_phonons sector. With `resume`
// the sweeps start from that state instead of a seeded random one.
DmrgState dmrg_ground_state(const BoseHubbardModel& model, int n_phonons, const DmrgConfig& config,
                            const DmrgState* resume = nullptr);

}  // namespace phbhm
