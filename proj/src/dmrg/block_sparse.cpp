#include "dmrg/block_sparse.hpp"

#include <algorithm>
#include <cmath>

#include "phbhm/error.hpp"

namespace phbhm::detail {

int SectorList::add(int label, int dim) {
  require(label >= 0, "sector labels are nonnegative");
  require(find(label) < 0, "duplicate sector label");
  if (label >= static_cast<int>(index_.size())) index_.resize(label + 1, -1);
  index_[label] = size();
  labels_.push_back(label);
  dims_.push_back(dim);
  offsets_.push_back(total_);
  total_ += dim;
  return size() - 1;
}

void SectorList::set_dim(int idx, int dim) {
  dims_[idx] = dim;
  total_ = 0;
  for (int k = 0; k < size(); ++k) {
    offsets_[k] = total_;
    total_ += dims_[k];
  }
}

SiteOp SiteOp::identity(int d) { return {0, std::vector<double>(d, 1.0)}; }

SiteOp SiteOp::annihilator(int d) {
  SiteOp op{-1, std::vector<double>(d)};
  for (int s = 0; s < d; ++s) op.coef[s] = std::sqrt(static_cast<double>(s));
  return op;
}

SiteOp SiteOp::creator(int d) {
  SiteOp op{+1, std::vector<double>(d)};
  for (int s = 0; s < d; ++s) op.coef[s] = std::sqrt(static_cast<double>(s + 1));
  return op;
}

SiteOp SiteOp::number(int d) {
  SiteOp op{0, std::vector<double>(d)};
  for (int s = 0; s < d; ++s) op.coef[s] = s;
  return op;
}

SiteOp SiteOp::number_squared(int d) {
  SiteOp op{0, std::vector<double>(d)};
  for (int s = 0; s < d; ++s) op.coef[s] = static_cast<double>(s) * s;
  return op;
}

BlockOp BlockOp::zero(const SectorList& basis, int shift) {
  BlockOp op;
  op.shift = shift;
  op.blocks.resize(basis.size());
  for (int k = 0; k < basis.size(); ++k) {
    int t = basis.find(basis.label(k) + shift);
    if (t >= 0) op.blocks[k] = Matrix::Zero(basis.dim(t), basis.dim(k));
  }
  return op;
}

void BlockOp::axpy(double a, const BlockOp& x) {
  if (blocks.size() < x.blocks.size()) blocks.resize(x.blocks.size());
  for (size_t k = 0; k < x.blocks.size(); ++k) {
    if (x.blocks[k].size() == 0) continue;
    if (blocks[k].size() == 0)
      blocks[k] = a * x.blocks[k];
    else
      blocks[k].noalias() += a * x.blocks[k];
  }
}

BlockOp BlockOp::transposed(const SectorList& basis) const {
  BlockOp t;
  t.shift = -shift;
  t.blocks.resize(basis.size());
  for (int k = 0; k < static_cast<int>(blocks.size()); ++k) {
    if (blocks[k].size() == 0) continue;
    int dst = basis.find(basis.label(k) + shift);
    t.blocks[dst] = blocks[k].transpose();
  }
  return t;
}

double BlockOp::max_abs() const {
  double m = 0.0;
  for (const auto& b : blocks)
    if (b.size()) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

Enlarged Enlarged::build(const SectorList& block, int d, int lo, int hi) {
  Enlarged e;
  e.d = d;
  e.piece_offset.assign(static_cast<size_t>(block.size()) * d, -1);
  for (int n = std::max(lo, 0); n <= hi; ++n) {
    std::vector<Piece> list;
    int rows = 0;
    for (int b = 0; b < block.size(); ++b) {
      int s = n - block.label(b);
      if (s < 0 || s >= d || block.dim(b) == 0) continue;
      list.push_back({b, s, rows});
      e.piece_offset[static_cast<size_t>(b) * d + s] = rows;
      rows += block.dim(b);
    }
    if (rows == 0) continue;
    e.sectors.add(n, rows);
    e.pieces.push_back(std::move(list));
  }
  return e;
}

BlockOp project(const Isometry& iso, const SectorList& old_basis, const BlockOp* block_op, const SiteOp& site_op) {
  const int qb = block_op ? block_op->shift : 0;
  const int q = qb + site_op.shift;
  BlockOp out;
  out.shift = q;
  out.blocks.resize(iso.basis.size());
  for (int ns = 0; ns < iso.basis.size(); ++ns) {
    const int es = iso.source[ns];
    const int nt = iso.basis.find(iso.basis.label(ns) + q);
    if (nt < 0) continue;
    const Matrix& Qs = iso.Q[ns];
    const Matrix& Qt = iso.Q[nt];
    Matrix acc = Matrix::Zero(Qt.cols(), Qs.cols());
    bool any = false;
    for (const auto& piece : iso.enl.pieces[es]) {
      const double c = site_op.at(piece.s);
      if (c == 0.0) continue;
      int b2 = piece.block_sector;
      if (block_op) {
        if (!block_op->has(piece.block_sector)) continue;
        b2 = old_basis.find(old_basis.label(piece.block_sector) + qb);
      }
      const int off2 = iso.enl.offset_of(b2, piece.s + site_op.shift);
      if (off2 < 0) continue;
      const int db = old_basis.dim(piece.block_sector), db2 = old_basis.dim(b2);
      auto src = Qs.middleRows(piece.offset, db);
      auto dst = Qt.middleRows(off2, db2);
      if (block_op) {
        Matrix x = block_op->blocks[piece.block_sector] * src;
        acc.noalias() += c * (dst.transpose() * x);
      } else {
        acc.noalias() += c * (dst.transpose() * src);
      }
      any = true;
    }
    if (any) out.blocks[ns] = std::move(acc);
  }
  return out;
}

Block Block::vacuum() {
  Block b;
  b.basis.add(0, 1);
  b.H.shift = 0;
  b.H.blocks = {Matrix::Zero(1, 1)};
  return b;
}

int Block::index_of_site(int site) const {
  auto it = std::find(sites.begin(), sites.end(), site);
  return it == sites.end() ? -1 : static_cast<int>(it - sites.begin());
}

}  // namespace phbhm::detail
