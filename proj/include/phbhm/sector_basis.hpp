#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace phbhm {

// Fock states with fixed total phonon number and a per-site cap, in
// descending lexicographic order: (N_ph, 0, ..., 0) comes first.
class SectorBasis {
 public:
  SectorBasis(int n_sites, int n_phonons, int n_max);

  int n_sites() const { return n_sites_; }
  int n_phonons() const { return n_phonons_; }
  int n_max() const { return n_max_; }
  std::int64_t dimension() const { return dim_; }

  std::span<const std::uint8_t> state(std::int64_t index) const {
    return {states_.data() + index * n_sites_, static_cast<size_t>(n_sites_)};
  }

  // Ordinal of an occupation vector; -1 if it does not belong to the sector.
  std::int64_t index_of(std::span<const std::uint8_t> occupation) const;

  // Number of capped compositions of `n_phonons` into `n_sites` parts,
  // saturating at kCountSaturation.
  static std::int64_t count(int n_sites, int n_phonons, int n_max);
  static constexpr std::int64_t kCountSaturation = std::int64_t{1} << 62;
  static constexpr std::int64_t kMaxDimension = std::int64_t{1} << 31;

 private:
  std::int64_t ways(int sites_left, int phonons) const {
    return ways_[static_cast<size_t>(sites_left) * (n_phonons_ + 1) + phonons];
  }

  int n_sites_, n_phonons_, n_max_;
  std::int64_t dim_ = 0;
  std::vector<std::int64_t> ways_;  // ways_[k][n]: compositions of n into k capped parts
  std::vector<std::uint8_t> states_;
};

}  // namespace phbhm
