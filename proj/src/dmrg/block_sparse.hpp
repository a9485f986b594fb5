#pragma once

// U(1) block-sparse primitives shared by the sweep engine and the MPS
// measurement code. Every basis is split into sectors with a definite
// phonon-number label; operators store one dense block per source sector.

#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace phbhm::detail {

using Matrix = Eigen::MatrixXd;

class SectorList {
 public:
  int add(int label, int dim);
  int find(int label) const {
    return (label >= 0 && label < static_cast<int>(index_.size())) ? index_[label] : -1;
  }
  int size() const { return static_cast<int>(labels_.size()); }
  int label(int idx) const { return labels_[idx]; }
  int dim(int idx) const { return dims_[idx]; }
  int offset(int idx) const { return offsets_[idx]; }
  int total() const { return total_; }
  void set_dim(int idx, int dim);  // recomputes offsets

 private:
  std::vector<int> labels_, dims_, offsets_, index_;
  int total_ = 0;
};

// Diagonal-in-shape local operator: |s> -> coef[s] |s + shift>.
struct SiteOp {
  int shift = 0;
  std::vector<double> coef;

  static SiteOp identity(int d);
  static SiteOp annihilator(int d);
  static SiteOp creator(int d);
  static SiteOp number(int d);
  static SiteOp number_squared(int d);
  double at(int s) const {
    int t = s + shift;
    return (s < 0 || s >= static_cast<int>(coef.size()) || t < 0 || t >= static_cast<int>(coef.size())) ? 0.0
                                                                                                      : coef[s];
  }
};

// Operator on a sector basis that maps label n to label n + shift.
// blocks[src] is (dim(target) x dim(src)) or empty when the target is absent.
struct BlockOp {
  int shift = 0;
  std::vector<Matrix> blocks;

  static BlockOp zero(const SectorList& basis, int shift);
  bool has(int src) const { return src < static_cast<int>(blocks.size()) && blocks[src].size() > 0; }
  void axpy(double a, const BlockOp& x);
  BlockOp transposed(const SectorList& basis) const;
  double max_abs() const;
};

// Block (x) site product space, grouped by combined label.
struct Enlarged {
  struct Piece {
    int block_sector;
    int s;
    int offset;  // row offset inside the combined sector
  };
  SectorList sectors;
  std::vector<std::vector<Piece>> pieces;  // per combined sector
  std::vector<int> piece_offset;           // [block_sector * d + s] -> offset or -1
  int d = 0;

  // Combined labels outside [lo, hi] are dropped.
  static Enlarged build(const SectorList& block, int d, int lo, int hi);
  int offset_of(int block_sector, int s) const {
    return (s < 0 || s >= d) ? -1 : piece_offset[static_cast<size_t>(block_sector) * d + s];
  }
};

// Truncation map from an enlarged basis to a kept basis.
struct Isometry {
  Enlarged enl;
  SectorList basis;
  std::vector<int> source;  // kept sector -> enlarged sector
  std::vector<Matrix> Q;    // per kept sector: (enl dim x kept dim)
};

// Projected (O_block (x) O_site) on the new basis: Q^T (O_b (x) O_s) Q.
// A null block operator is the identity.
BlockOp project(const Isometry& iso, const SectorList& old_basis, const BlockOp* block_op, const SiteOp& site_op);

struct Block {
  SectorList basis;
  BlockOp H;
  std::vector<int> sites;
  std::vector<BlockOp> ann;  // a_i for sites[k]
  std::shared_ptr<const Isometry> iso;
  int added_site = -1;

  static Block vacuum();
  int index_of_site(int site) const;
};

}  // namespace phbhm::detail
