#pragma once

#include <iosfwd>
#include <vector>

#include "dmrg/block_sparse.hpp"

namespace phbhm::detail {

// One site tensor. Bond labels count the phonons to the left of the bond;
// block (l, s) maps left sector l with local state s to right label
// label(l) + s.
struct MpsSite {
  SectorList left, right;
  int d = 0;
  std::vector<Matrix> M;  // [l * d + s]

  bool has(int l, int s) const {
    const size_t k = static_cast<size_t>(l) * d + s;
    return s >= 0 && s < d && k < M.size() && M[k].size() > 0;
  }
  const Matrix& at(int l, int s) const { return M[static_cast<size_t>(l) * d + s]; }
  Matrix& at(int l, int s) { return M[static_cast<size_t>(l) * d + s]; }
};

struct MpsData {
  int n_phonons = 0;
  int n_max = 0;
  std::vector<MpsSite> sites;

  int n_sites() const { return static_cast<int>(sites.size()); }
};

// Identity environments and charged-string transfer for expectation values.
class MpsMeasure {
 public:
  explicit MpsMeasure(const MpsData& mps);

  double norm2() const { return norm2_; }
  double one_point(int site, const SiteOp& op) const;
  // <O1_i O2_j> for i < j (0-based).
  double two_point(int i, const SiteOp& o1, int j, const SiteOp& o2) const;
  // Row i of <O1_i O2_j> for all j > i.
  std::vector<double> two_point_row(int i, const SiteOp& o1, const SiteOp& o2) const;

 private:
  BlockOp transfer(const BlockOp& env, int site, const SiteOp& op) const;
  double close(const BlockOp& env, int bond) const;

  const MpsData* mps_;
  std::vector<BlockOp> left_, right_;  // left_[b]: sites < b, right_[b]: sites >= b
  double norm2_ = 0.0;
};

// In-place right-to-left rotation to right-canonical form on sites 1..N-1;
// the norm ends up in site 0.
void right_canonicalize(MpsData& mps);

void write_mps(std::ostream& os, const MpsData& mps);
MpsData read_mps(std::istream& is);

}  // namespace phbhm::detail
