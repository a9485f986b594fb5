#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phbhm/geometry.hpp"

namespace phbhm {

enum class SitePattern { Uniform, AlternatingOddEven, LeftRightSplit };

// Bose-Hubbard Hamiltonian in units of the largest tunneling t:
//   H = sum_{i<j} t_ij (a+_i a_j + h.c.) + sum_i eps_i n_i + sum_i U_i n_i (n_i - 1)
struct BoseHubbardModel {
  int n_sites = 0;
  std::vector<double> hopping;  // row-major n_sites x n_sites, symmetric, zero diagonal
  std::vector<double> onsite_energy;
  std::vector<double> onsite_interaction;
  int n_max = 1;
  int n_phonons = 0;
  std::optional<int> hopping_range_cutoff;  // nullopt == full range
  SitePattern pattern = SitePattern::Uniform;
  TrapKind trap = TrapKind::MicrotrapArray;

  double t(int i, int j) const { return hopping[static_cast<size_t>(i) * n_sites + j]; }
  double& t(int i, int j) { return hopping[static_cast<size_t>(i) * n_sites + j]; }

  // Throws InvalidInput / InfeasibleSector if an invariant is broken.
  void validate() const;

  // Stable 64-bit FNV-1a digest of every coefficient; used in report metadata.
  std::uint64_t hash() const;
};

struct BuildOptions {
  std::optional<int> cutoff;  // hop range R, nullopt == full
  bool flat_onsite = false;   // zero eps_i for controlled comparisons
};

BoseHubbardModel build_model(const ChainGeometry& geometry, double u_over_t, int n_phonons, int n_max,
                             const BuildOptions& options = {});

// Replaces the interaction profile. AlternatingOddEven uses 1-based parity
// (site 1 is odd); LeftRightSplit puts u_odd on the left half, u_even on the right.
BoseHubbardModel apply_site_pattern(const BoseHubbardModel& model, SitePattern pattern, double u_odd,
                                    double u_even);

struct StandingWaveConfig {
  double amplitude_F = 0.0;
  double lamb_dicke_eta = 0.0;
  int delta = 0;  // 0: potential maximum, 1: minimum
};

struct StandingWaveResult {
  double U = 0.0;
  double shifted_omega_x = 0.0;
  bool curvature_warning = false;  // eta^2 F >= 0.1 w_x
  bool quartic_warning = false;    // F eta^4 >= 0.1 w_x
};

// U = 2 (-1)^delta F eta^4 and the radial frequency renormalized by the
// quadratic part of the standing-wave potential.
StandingWaveResult standing_wave_interaction(const StandingWaveConfig& sw, double omega_x);

const char* to_string(SitePattern p) noexcept;

}  // namespace phbhm
