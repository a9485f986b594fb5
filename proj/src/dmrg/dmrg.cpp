#include "phbhm/dmrg.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <cmath>
#include <deque>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "dmrg/block_sparse.hpp"
#include "dmrg/mps.hpp"
#include "phbhm/eigensolver.hpp"
#include "phbhm/error.hpp"

namespace phbhm {

using detail::Block;
using detail::BlockOp;
using detail::Enlarged;
using detail::Isometry;
using detail::Matrix;
using detail::MpsData;
using detail::MpsSite;
using detail::SectorList;
using detail::SiteOp;

void DmrgConfig::validate() const {
  require(kept_states_m >= 1, "kept_states_m must be >= 1");
  require(max_sweeps >= 1, "max_sweeps must be >= 1");
  require(energy_tol > 0.0, "energy_tol must be positive");
  require(n_max >= 0, "n_max must be >= 0 (0 = model cap)");
  require(noise >= 0.0 && noise_sweeps >= 0, "noise settings must be nonnegative");
  require(davidson_tol > 0.0, "davidson_tol must be positive");
}

namespace {

// Two-site wavefunction psi(alpha, s1, s2, beta) restricted to a fixed total.
struct Layout {
  struct Blk {
    int iL, s1, s2, iR, rows, cols;
    Eigen::Index offset;
  };
  const SectorList* L = nullptr;
  const SectorList* R = nullptr;
  int d = 0;
  int total = 0;
  std::vector<Blk> blocks;
  std::vector<int> lookup;
  Eigen::Index dim = 0;

  Layout(const SectorList& left, const SectorList& right, int d_, int total_) : L(&left), R(&right), d(d_), total(total_) {
    lookup.assign(static_cast<size_t>(left.size()) * d * d, -1);
    for (int iL = 0; iL < left.size(); ++iL)
      for (int s1 = 0; s1 < d; ++s1)
        for (int s2 = 0; s2 < d; ++s2) {
          const int iR = right.find(total - left.label(iL) - s1 - s2);
          if (iR < 0 || left.dim(iL) == 0 || right.dim(iR) == 0) continue;
          lookup[(static_cast<size_t>(iL) * d + s1) * d + s2] = static_cast<int>(blocks.size());
          blocks.push_back({iL, s1, s2, iR, left.dim(iL), right.dim(iR), dim});
          dim += static_cast<Eigen::Index>(left.dim(iL)) * right.dim(iR);
        }
  }
  int find(int iL, int s1, int s2) const {
    if (iL < 0 || s1 < 0 || s2 < 0 || s1 >= d || s2 >= d) return -1;
    return lookup[(static_cast<size_t>(iL) * d + s1) * d + s2];
  }
};

// Y += c A B. Eigen's blocked GEMM has a large fixed cost, so tiny blocks
// go through the coefficient-wise product instead.
template <class Dst, class A, class B>
void add_product(Dst&& y, double c, const A& a, const B& b) {
  if (a.rows() * a.cols() * b.cols() <= 4096)
    y += c * a.lazyProduct(b);
  else
    y.noalias() += c * (a * b);
}

struct Term {
  double c;
  const BlockOp* L;
  const SiteOp* o1;
  const SiteOp* o2;
  const BlockOp* R;
};

class Superblock {
 public:
  Superblock(const Block& left, const Block& right, int p, const BoseHubbardModel& model, int d, int total,
             double svd_cutoff)
      : layout_(left.basis, right.basis, d, total),
        a_(SiteOp::annihilator(d)),
        adag_(SiteOp::creator(d)) {
    const int q = p + 1;
    if (!left.sites.empty()) terms_.push_back({1.0, &left.H, nullptr, nullptr, nullptr});
    if (!right.sites.empty()) terms_.push_back({1.0, nullptr, nullptr, nullptr, &right.H});

    local_.resize(static_cast<size_t>(d) * d);
    for (int s1 = 0; s1 < d; ++s1)
      for (int s2 = 0; s2 < d; ++s2)
        local_[s1 * d + s2] = model.onsite_energy[p] * s1 + model.onsite_interaction[p] * s1 * (s1 - 1.0) +
                              model.onsite_energy[q] * s2 + model.onsite_interaction[q] * s2 * (s2 - 1.0);

    if (const double t12 = model.t(p, q); t12 != 0.0) {
      terms_.push_back({t12, nullptr, &adag_, &a_, nullptr});
      terms_.push_back({t12, nullptr, &a_, &adag_, nullptr});
    }

    for (int slot = 0; slot < 2; ++slot) {
      const int x = slot == 0 ? p : q;
      const SiteOp* ax1 = slot == 0 ? &a_ : nullptr;
      const SiteOp* ax2 = slot == 0 ? nullptr : &a_;
      const SiteOp* cx1 = slot == 0 ? &adag_ : nullptr;
      const SiteOp* cx2 = slot == 0 ? nullptr : &adag_;
      if (const BlockOp* c = coupling(left, x, model)) {
        const BlockOp& ct = own(c->transposed(left.basis));
        terms_.push_back({1.0, &ct, ax1, ax2, nullptr});
        terms_.push_back({1.0, c, cx1, cx2, nullptr});
      }
      if (const BlockOp* c = coupling(right, x, model)) {
        const BlockOp& ct = own(c->transposed(right.basis));
        terms_.push_back({1.0, nullptr, cx1, cx2, c});
        terms_.push_back({1.0, nullptr, ax1, ax2, &ct});
      }
    }

    // Block-block hopping through the SVD of the coupling matrix; terms below
    // the cutoff are dropped, which is exact to that precision.
    const int nl = static_cast<int>(left.sites.size()), nr = static_cast<int>(right.sites.size());
    if (nl > 0 && nr > 0) {
      Eigen::MatrixXd T(nl, nr);
      for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nr; ++j) T(i, j) = model.t(left.sites[i], right.sites[j]);
      if (T.cwiseAbs().maxCoeff() > 0.0) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(T, Eigen::ComputeThinU | Eigen::ComputeThinV);
        for (int k = 0; k < svd.singularValues().size(); ++k) {
          const double sigma = svd.singularValues()(k);
          if (sigma <= svd_cutoff) break;
          BlockOp P = BlockOp::zero(left.basis, -1), Q = BlockOp::zero(right.basis, -1);
          for (int i = 0; i < nl; ++i)
            if (svd.matrixU()(i, k) != 0.0) P.axpy(svd.matrixU()(i, k), left.ann[i]);
          for (int j = 0; j < nr; ++j)
            if (svd.matrixV()(j, k) != 0.0) Q.axpy(svd.matrixV()(j, k), right.ann[j]);
          const BlockOp& Pr = own(std::move(P));
          const BlockOp& Qr = own(std::move(Q));
          const BlockOp& Pt = own(Pr.transposed(left.basis));
          const BlockOp& Qt = own(Qr.transposed(right.basis));
          terms_.push_back({sigma, &Pt, nullptr, nullptr, &Qr});
          terms_.push_back({sigma, &Pr, nullptr, nullptr, &Qt});
          ++coupling_rank_;
        }
      }
    }

    diag_.resize(layout_.dim);
    for (const auto& b : layout_.blocks) {
      const double loc = local_[b.s1 * d + b.s2];
      for (int c = 0; c < b.cols; ++c)
        for (int r = 0; r < b.rows; ++r) {
          double v = loc;
          if (!left.sites.empty() && left.H.has(b.iL)) v += left.H.blocks[b.iL](r, r);
          if (!right.sites.empty() && right.H.has(b.iR)) v += right.H.blocks[b.iR](c, c);
          diag_[b.offset + static_cast<Eigen::Index>(c) * b.rows + r] = v;
        }
    }
  }

  const Layout& layout() const { return layout_; }
  const std::vector<double>& diagonal() const { return diag_; }
  int coupling_rank() const { return coupling_rank_; }

  void apply(std::span<const double> x, std::span<double> y) const {
    const int d = layout_.d;
    for (const auto& b : layout_.blocks) {
      Eigen::Map<const Matrix> X(x.data() + b.offset, b.rows, b.cols);
      Eigen::Map<Matrix> Y(y.data() + b.offset, b.rows, b.cols);
      Y = local_[b.s1 * d + b.s2] * X;
    }
    for (const Term& t : terms_) apply_term(t, x, y);
  }

 private:
  const BlockOp& own(BlockOp op) {
    owned_.push_back(std::move(op));
    return owned_.back();
  }

  const BlockOp* coupling(const Block& blk, int x, const BoseHubbardModel& model) {
    BlockOp c = BlockOp::zero(blk.basis, -1);
    bool any = false;
    for (size_t k = 0; k < blk.sites.size(); ++k) {
      const double t = model.t(blk.sites[k], x);
      if (t == 0.0) continue;
      c.axpy(t, blk.ann[k]);
      any = true;
    }
    return any ? &own(std::move(c)) : nullptr;
  }

  void apply_term(const Term& t, std::span<const double> x, std::span<double> y) const {
    const SectorList& L = *layout_.L;
    const SectorList& R = *layout_.R;
    for (const auto& b : layout_.blocks) {
      int iL = b.iL, iR = b.iR, s1 = b.s1, s2 = b.s2;
      double c = t.c;
      if (t.L) {
        if (!t.L->has(iL)) continue;
        iL = L.find(L.label(iL) + t.L->shift);
      }
      if (t.R) {
        if (!t.R->has(iR)) continue;
        iR = R.find(R.label(iR) + t.R->shift);
      }
      if (t.o1) {
        c *= t.o1->at(s1);
        s1 += t.o1->shift;
      }
      if (t.o2) {
        c *= t.o2->at(s2);
        s2 += t.o2->shift;
      }
      if (c == 0.0) continue;
      const int out = layout_.find(iL, s1, s2);
      if (out < 0) continue;
      const auto& ob = layout_.blocks[out];
      if (ob.iR != iR) continue;
      Eigen::Map<const Matrix> X(x.data() + b.offset, b.rows, b.cols);
      Eigen::Map<Matrix> Y(y.data() + ob.offset, ob.rows, ob.cols);
      if (t.L && t.R) {
        thread_local Matrix tmp;
        tmp.resize(ob.rows, b.cols);
        tmp.setZero();
        add_product(tmp, 1.0, t.L->blocks[b.iL], X);
        add_product(Y, c, tmp, t.R->blocks[b.iR].transpose());
      } else if (t.L) {
        add_product(Y, c, t.L->blocks[b.iL], X);
      } else if (t.R) {
        add_product(Y, c, X, t.R->blocks[b.iR].transpose());
      } else {
        Y += c * X;
      }
    }
  }

  Layout layout_;
  SiteOp a_, adag_;
  std::vector<double> local_;
  std::vector<Term> terms_;
  std::deque<BlockOp> owned_;
  std::vector<double> diag_;
  int coupling_rank_ = 0;
};

// Operator on the half being truncated, used for the density-matrix perturbation.
struct NoiseOp {
  const BlockOp* block;  // null = identity
  SiteOp site;
};

struct Truncation {
  Isometry iso;
  std::vector<Matrix> phi;  // per kept sector: Q^T M (kept x complementary columns)
  Enlarged columns;         // complementary enlarged space
  double weight = 0.0;      // discarded weight
  std::vector<double> spectrum;
};

// Splits psi at the bond between s1 and s2. `keep_left` selects which half
// (block (x) adjacent site) becomes the new block.
Truncation truncate(const Layout& lay, std::span<const double> psi, bool keep_left, int lo, int hi, int m,
                    double noise, const std::vector<NoiseOp>& noise_ops) {
  const SectorList& rowBlock = keep_left ? *lay.L : *lay.R;
  const SectorList& colBlock = keep_left ? *lay.R : *lay.L;
  Truncation tr;
  tr.iso.enl = Enlarged::build(rowBlock, lay.d, lo, hi);
  tr.columns = Enlarged::build(colBlock, lay.d, 0, lay.total);
  const Enlarged& rows = tr.iso.enl;
  const Enlarged& cols = tr.columns;

  const int ns = rows.sectors.size();
  std::vector<Matrix> M(ns);
  std::vector<int> colSector(ns, -1);
  for (int k = 0; k < ns; ++k) {
    colSector[k] = cols.sectors.find(lay.total - rows.sectors.label(k));
    M[k] = Matrix::Zero(rows.sectors.dim(k), colSector[k] >= 0 ? cols.sectors.dim(colSector[k]) : 0);
  }
  for (const auto& b : lay.blocks) {
    Eigen::Map<const Matrix> X(psi.data() + b.offset, b.rows, b.cols);
    const int rb = keep_left ? b.iL : b.iR, rs = keep_left ? b.s1 : b.s2;
    const int cb = keep_left ? b.iR : b.iL, cs = keep_left ? b.s2 : b.s1;
    const int k = rows.sectors.find(rowBlock.label(rb) + rs);
    if (k < 0) continue;
    const int ro = rows.offset_of(rb, rs), co = cols.offset_of(cb, cs);
    if (keep_left)
      M[k].block(ro, co, b.rows, b.cols) = X;
    else
      M[k].block(ro, co, b.cols, b.rows) = X.transpose();
  }

  std::vector<Matrix> rho(ns);
  double total_weight = 0.0;
  for (int k = 0; k < ns; ++k) {
    rho[k] = M[k] * M[k].transpose();
    total_weight += rho[k].trace();
  }
  std::vector<Matrix> rho_eff = rho;
  if (noise > 0.0) {
    for (const NoiseOp& op : noise_ops) {
      const int q = (op.block ? op.block->shift : 0) + op.site.shift;
      for (int k = 0; k < ns; ++k) {
        const int kt = rows.sectors.find(rows.sectors.label(k) + q);
        if (kt < 0 || M[k].cols() == 0) continue;
        Matrix T = Matrix::Zero(rows.sectors.dim(kt), M[k].cols());
        bool any = false;
        for (const auto& piece : rows.pieces[k]) {
          const double c = op.site.at(piece.s);
          if (c == 0.0) continue;
          int b2 = piece.block_sector;
          if (op.block) {
            if (!op.block->has(piece.block_sector)) continue;
            b2 = rowBlock.find(rowBlock.label(piece.block_sector) + op.block->shift);
          }
          const int o2 = rows.offset_of(b2, piece.s + op.site.shift);
          if (o2 < 0) continue;
          auto src = M[k].middleRows(piece.offset, rowBlock.dim(piece.block_sector));
          if (op.block)
            T.middleRows(o2, rowBlock.dim(b2)).noalias() += c * (op.block->blocks[piece.block_sector] * src);
          else
            T.middleRows(o2, rowBlock.dim(b2)) += c * src;
          any = true;
        }
        if (any) rho_eff[kt].noalias() += noise * (T * T.transpose());
      }
    }
  }

  struct Candidate {
    double w;
    int sector, idx;
  };
  std::vector<Candidate> cand;
  std::vector<Eigen::SelfAdjointEigenSolver<Matrix>> eig(ns);
  for (int k = 0; k < ns; ++k) {
    if (rho_eff[k].rows() == 0) continue;
    eig[k].compute(rho_eff[k]);
    const auto& ev = eig[k].eigenvalues();
    for (int i = static_cast<int>(ev.size()) - 1; i >= 0; --i) cand.push_back({std::max(0.0, ev(i)), k, i});
  }
  std::stable_sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) { return a.w > b.w; });
  size_t keep = std::min<size_t>(m, cand.size());
  // Never split a degenerate multiplet across the cut.
  if (keep > 0 && keep < cand.size() && cand[keep - 1].w > 1e-12) {
    const double wm = cand[keep - 1].w;
    while (keep < cand.size() && std::abs(cand[keep].w - wm) <= 1e-8 * wm) ++keep;
  }
  std::vector<std::vector<int>> kept(ns);
  for (size_t c = 0; c < keep; ++c) kept[cand[c].sector].push_back(cand[c].idx);
  for (size_t c = 0; c < std::min<size_t>(cand.size(), 8); ++c) tr.spectrum.push_back(cand[c].w);

  double kept_weight = 0.0;
  for (int k = 0; k < ns; ++k) {
    if (kept[k].empty()) continue;
    Matrix Q(rows.sectors.dim(k), static_cast<Eigen::Index>(kept[k].size()));
    for (size_t c = 0; c < kept[k].size(); ++c) Q.col(static_cast<Eigen::Index>(c)) = eig[k].eigenvectors().col(kept[k][c]);
    kept_weight += (Q.transpose() * rho[k] * Q).trace();
    tr.iso.basis.add(rows.sectors.label(k), static_cast<int>(Q.cols()));
    tr.iso.source.push_back(k);
    tr.phi.push_back(Q.transpose() * M[k]);
    tr.iso.Q.push_back(std::move(Q));
  }
  tr.weight = total_weight > 0.0 ? std::clamp(1.0 - kept_weight / total_weight, 0.0, 1.0) : 0.0;
  return tr;
}

// Grows `old` by one site through `iso`. The kept basis is rotated within
// each sector so the block Hamiltonian comes out diagonal, which makes the
// superblock diagonal a much better Davidson preconditioner. The rotations
// are returned so callers can carry wavefunctions along.
// Hamiltonian of (old block + site) projected through `iso`.
BlockOp block_hamiltonian(const Block& old, int site, const Isometry& iso, const BoseHubbardModel& model, int d) {
  const SiteOp id = SiteOp::identity(d);
  const SiteOp a = SiteOp::annihilator(d), adag = SiteOp::creator(d);
  SiteOp local{0, std::vector<double>(d)};
  for (int s = 0; s < d; ++s)
    local.coef[s] = model.onsite_energy[site] * s + model.onsite_interaction[site] * s * (s - 1.0);

  BlockOp H = detail::project(iso, old.basis, nullptr, local);
  if (!old.sites.empty()) H.axpy(1.0, detail::project(iso, old.basis, &old.H, id));
  BlockOp c = BlockOp::zero(old.basis, -1);
  bool any = false;
  for (size_t k = 0; k < old.sites.size(); ++k) {
    const double t = model.t(old.sites[k], site);
    if (t == 0.0) continue;
    c.axpy(t, old.ann[k]);
    any = true;
  }
  if (any) {
    BlockOp ct = c.transposed(old.basis);
    H.axpy(1.0, detail::project(iso, old.basis, &ct, a));
    H.axpy(1.0, detail::project(iso, old.basis, &c, adag));
  }
  return H;
}

Block build_block(const Block& old, int site, Isometry iso_in, const BoseHubbardModel& model, int d,
                  std::vector<Matrix>* rotations = nullptr) {
  auto iso = std::make_shared<Isometry>(std::move(iso_in));
  Block b;
  b.basis = iso->basis;
  b.added_site = site;
  b.sites = old.sites;
  b.sites.push_back(site);
  const SiteOp id = SiteOp::identity(d);
  const SiteOp a = SiteOp::annihilator(d);
  b.H = block_hamiltonian(old, site, *iso, model, d);
  if (rotations) rotations->assign(b.basis.size(), Matrix());
  for (int k = 0; k < b.basis.size(); ++k) {
    if (!b.H.has(k)) continue;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (b.H.blocks[k] + b.H.blocks[k].transpose()));
    iso->Q[k] = iso->Q[k] * es.eigenvectors();
    b.H.blocks[k] = es.eigenvalues().asDiagonal();
    if (rotations) (*rotations)[k] = es.eigenvectors();
  }
  b.ann.reserve(b.sites.size());
  for (const BlockOp& op : old.ann) b.ann.push_back(detail::project(*iso, old.basis, &op, id));
  b.ann.push_back(detail::project(*iso, old.basis, nullptr, a));
  b.iso = std::move(iso);
  return b;
}

class Engine {
 public:
  Engine(const BoseHubbardModel& model, int n_phonons, const DmrgConfig& config)
      : model_(model), cfg_(config), n_(model.n_sites), total_(n_phonons) {
    nmax_ = config.n_max > 0 ? config.n_max : model.n_max;
    d_ = nmax_ + 1;
    left_.resize(n_ + 1);
    right_.resize(n_ + 1);
    left_[0] = Block::vacuum();
    right_[n_] = Block::vacuum();
  }

  DmrgState run(const DmrgState* resume);

 private:
  int left_lo(int size) const { return std::max(0, total_ - (n_ - size) * nmax_); }
  int left_hi(int size) const { return std::min(total_, size * nmax_); }
  // Right block covering sites r..n-1.
  int right_lo(int r) const { return std::max(0, total_ - r * nmax_); }
  int right_hi(int r) const { return std::min(total_, (n_ - r) * nmax_); }

  void warm_up();
  std::vector<double> resume_from(const MpsData& mps);
  std::vector<double> guess_after_right_move(const Truncation& tr, int p) const;
  std::vector<double> guess_after_left_move(const Truncation& tr, int p) const;
  double step(int p, bool moving_right, double noise, std::vector<double>& guess, bool want_gap, SweepRecord& rec);
  std::shared_ptr<const MpsData> extract(int p, const Layout& lay, std::span<const double> psi) const;

  const BoseHubbardModel& model_;
  const DmrgConfig& cfg_;
  int n_, total_, nmax_, d_;
  std::vector<Block> left_, right_;
  std::vector<double> last_psi_;
  std::unique_ptr<Layout> last_layout_;
  DmrgResult result_;
  double gap_ = 0.0;
  bool have_gap_ = false;
  std::vector<double> center_spectrum_;
};

constexpr double kWarmUpMixing = 1e-3;

void Engine::warm_up() {
  std::mt19937_64 rng(cfg_.seed);
  std::normal_distribution<double> normal;
  const double density = static_cast<double>(total_) / n_;
  for (int r = n_ - 1; r >= 2; --r) {
    auto iso = std::make_shared<Isometry>();
    iso->enl = Enlarged::build(right_[r + 1].basis, d_, right_lo(r), right_hi(r));
    const SectorList& es = iso->enl.sectors;
    if (es.size() == 0) fail(ErrorCode::InfeasibleSector, "no feasible right-block sectors during warm-up");
    std::vector<int> alloc(es.size(), 0);
    if (es.total() <= cfg_.kept_states_m) {
      for (int k = 0; k < es.size(); ++k) alloc[k] = es.dim(k);
    } else {
      // Budget per sector, weighted toward the mean density of the block.
      const double len = n_ - r;
      const double mean = density * len;
      const double width = std::max(1.5, std::sqrt(len * density * (1.0 + density)));
      std::vector<double> w(es.size());
      for (int k = 0; k < es.size(); ++k) w[k] = std::exp(-0.5 * std::pow((es.label(k) - mean) / width, 2));
      int budget = cfg_.kept_states_m;
      std::vector<int> order(es.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return w[a] > w[b]; });
      for (int k : order)
        if (budget > 0) {
          alloc[k] = 1;
          --budget;
        }
      while (budget > 0) {
        int best = -1;
        double score = -1.0;
        for (int k = 0; k < es.size(); ++k)
          if (alloc[k] < es.dim(k) && w[k] / (alloc[k] + 1.0) > score) {
            score = w[k] / (alloc[k] + 1.0);
            best = k;
          }
        if (best < 0) break;
        ++alloc[best];
        --budget;
      }
    }
    // Within each sector keep the lowest states of the isolated enlarged
    // block, with a small seeded admixture so degenerate levels are not
    // picked by eigensolver ordering alone.
    Isometry full;
    full.enl = iso->enl;
    for (int k = 0; k < es.size(); ++k) {
      full.basis.add(es.label(k), es.dim(k));
      full.source.push_back(k);
      full.Q.push_back(Matrix::Identity(es.dim(k), es.dim(k)));
    }
    const BlockOp h = block_hamiltonian(right_[r + 1], r, full, model_, d_);
    for (int k = 0; k < es.size(); ++k) {
      if (alloc[k] == 0) continue;
      Matrix Q;
      if (alloc[k] == es.dim(k)) {
        Q = Matrix::Identity(es.dim(k), es.dim(k));
      } else {
        Matrix g(es.dim(k), alloc[k]);
        if (h.has(k)) {
          Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (h.blocks[k] + h.blocks[k].transpose()));
          g = eig.eigenvectors().leftCols(alloc[k]);
        } else {
          g.setZero();
        }
        for (Eigen::Index c = 0; c < g.cols(); ++c)
          for (Eigen::Index rr = 0; rr < g.rows(); ++rr) g(rr, c) += kWarmUpMixing * normal(rng);
        Eigen::HouseholderQR<Matrix> qr(g);
        Q = qr.householderQ() * Matrix::Identity(es.dim(k), alloc[k]);
      }
      iso->basis.add(es.label(k), static_cast<int>(Q.cols()));
      iso->source.push_back(k);
      iso->Q.push_back(std::move(Q));
    }
    right_[r] = build_block(right_[r + 1], r, std::move(*iso), model_, d_);
  }
}

std::vector<double> Engine::resume_from(const MpsData& src) {
  require(src.n_sites() == n_ && src.n_phonons == total_, "resume state does not match the model sector");
  require(src.sites[0].d == d_, "resume state has a different local cap");
  MpsData mps = src;
  detail::right_canonicalize(mps);
  // Rebuild right blocks r = n-1 .. 2 from the right-canonical tensors.
  for (int r = n_ - 1; r >= 2; --r) {
    const MpsSite& site = mps.sites[r];
    const Block& old = right_[r + 1];
    auto iso = std::make_shared<Isometry>();
    iso->enl = Enlarged::build(old.basis, d_, right_lo(r), right_hi(r));
    for (int l = 0; l < site.left.size(); ++l) {
      const int label = total_ - site.left.label(l);
      const int k = iso->enl.sectors.find(label);
      if (k < 0 || site.left.dim(l) == 0) continue;
      Matrix Q = Matrix::Zero(iso->enl.sectors.dim(k), site.left.dim(l));
      for (int s = 0; s < d_; ++s) {
        if (!site.has(l, s)) continue;
        const int ob = old.basis.find(label - s);
        const int off = ob >= 0 ? iso->enl.offset_of(ob, s) : -1;
        if (off < 0) continue;
        Q.middleRows(off, old.basis.dim(ob)) = site.at(l, s).transpose();
      }
      iso->basis.add(label, static_cast<int>(Q.cols()));
      iso->source.push_back(k);
      iso->Q.push_back(std::move(Q));
    }
    right_[r] = build_block(old, r, std::move(*iso), model_, d_);
  }
  // Merge sites 0 and 1 into the starting two-site guess.
  Layout lay(left_[0].basis, right_[2].basis, d_, total_);
  std::vector<double> psi(lay.dim, 0.0);
  const MpsSite& s0 = mps.sites[0];
  const MpsSite& s1 = mps.sites[1];
  for (const auto& b : lay.blocks) {
    if (!s0.has(0, b.s1)) continue;
    const int mid = s1.left.find(b.s1);
    if (mid < 0 || !s1.has(mid, b.s2)) continue;
    Matrix block = s0.at(0, b.s1) * s1.at(mid, b.s2);
    // Right bond of site 1 lists labels counted from the left; the block uses
    // the same ordering as right_[2] by construction.
    const int rb = s1.right.find(b.s1 + b.s2);
    if (rb < 0 || block.cols() != b.cols) continue;
    Eigen::Map<Matrix>(psi.data() + b.offset, b.rows, b.cols) = block;
  }
  return psi;
}

std::vector<double> Engine::guess_after_right_move(const Truncation& tr, int p) const {
  // Next superblock: left_[p+1], sites p+1, p+2, right_[p+3].
  const Block& newL = left_[p + 1];
  const Block& oldR = right_[p + 2];
  const Block& nextR = right_[p + 3];
  Layout lay(newL.basis, nextR.basis, d_, total_);
  std::vector<double> psi(lay.dim, 0.0);
  const Isometry& rin = *oldR.iso;
  for (const auto& b : lay.blocks) {
    const int nR = total_ - newL.basis.label(b.iL) - b.s1;
    const int ro = oldR.basis.find(nR);
    if (ro < 0) continue;
    const int co = tr.columns.offset_of(ro, b.s1);
    const int q2 = rin.enl.offset_of(b.iR, b.s2);
    if (co < 0 || q2 < 0 || rin.source[ro] != rin.enl.sectors.find(nR)) continue;
    auto phi = tr.phi[b.iL].middleCols(co, oldR.basis.dim(ro));
    auto q = rin.Q[ro].middleRows(q2, nextR.basis.dim(b.iR));
    Eigen::Map<Matrix>(psi.data() + b.offset, b.rows, b.cols) = phi * q.transpose();
  }
  return psi;
}

std::vector<double> Engine::guess_after_left_move(const Truncation& tr, int p) const {
  // Next superblock: left_[p-1], sites p-1, p, right_[p+1].
  const Block& newR = right_[p + 1];
  const Block& oldL = left_[p];
  const Block& nextL = left_[p - 1];
  Layout lay(nextL.basis, newR.basis, d_, total_);
  std::vector<double> psi(lay.dim, 0.0);
  const Isometry& lin = *oldL.iso;
  for (const auto& b : lay.blocks) {
    const int nL = nextL.basis.label(b.iL) + b.s1;
    const int lo = oldL.basis.find(nL);
    if (lo < 0) continue;
    const int co = tr.columns.offset_of(lo, b.s2);
    const int q1 = lin.enl.offset_of(b.iL, b.s1);
    if (co < 0 || q1 < 0) continue;
    auto phi = tr.phi[b.iR].middleCols(co, oldL.basis.dim(lo));
    auto q = lin.Q[lo].middleRows(q1, nextL.basis.dim(b.iL));
    Eigen::Map<Matrix>(psi.data() + b.offset, b.rows, b.cols) = q * phi.transpose();
  }
  return psi;
}

double Engine::step(int p, bool moving_right, double noise, std::vector<double>& guess, bool want_gap,
                    SweepRecord& rec) {
  const Block& L = left_[p];
  const Block& R = right_[p + 2];
  Superblock sb(L, R, p, model_, d_, total_, cfg_.coupling_svd_cutoff);
  const Layout& lay = sb.layout();
  if (lay.dim == 0) fail(ErrorCode::InfeasibleSector, "superblock has no states in the requested sector");

  EigenOptions eo;
  eo.n_eigen = want_gap && lay.dim >= 2 ? 2 : 1;
  // Noisy sweeps only shape the basis; a loose solve is enough there.
  eo.residual_tol = noise > 0.0 ? std::max(cfg_.davidson_tol, 1e-6) : cfg_.davidson_tol;
  eo.seed = cfg_.seed + static_cast<std::uint64_t>(p);
  eo.max_iterations = 400;
  Matrix g;
  if (guess.size() == static_cast<size_t>(lay.dim)) {
    g = Eigen::Map<const Eigen::VectorXd>(guess.data(), lay.dim);
    if (g.norm() == 0.0) g.resize(0, 0);
  }
  // Each step only has to improve on the carried-over state; the sweeps do the rest.
  if (g.size() && eo.n_eigen == 1) eo.relative_tol = 1e-3;
  LinearOperator op = [&sb](std::span<const double> x, std::span<double> y) { sb.apply(x, y); };
  EigenResult er = davidson_lowest(op, lay.dim, eo, sb.diagonal(), g.size() ? &g : nullptr);
  const double energy = er.values(0);
  rec.matvecs += er.matvecs;
  if (eo.n_eigen == 2 && er.values.size() >= 2) {
    gap_ = er.values(1) - er.values(0);
    have_gap_ = true;
  }
  std::vector<double> psi(er.vectors.col(0).data(), er.vectors.col(0).data() + lay.dim);
  rec.min_energy = std::min(rec.min_energy, energy);

  const bool last_right = moving_right && p == n_ - 2;
  const bool last_left = !moving_right && p == 0;
  if (last_right || last_left || n_ == 2) {
    last_layout_ = std::make_unique<Layout>(L.basis, R.basis, d_, total_);
    last_psi_ = std::move(psi);
    guess.clear();
    return energy;
  }

  const double alpha = noise;
  if (moving_right) {
    // New left block left_[p+1] = left_[p] (x) site p.
    std::vector<NoiseOp> ops;
    ops.push_back({nullptr, SiteOp::annihilator(d_)});
    ops.push_back({nullptr, SiteOp::creator(d_)});
    BlockOp c = BlockOp::zero(L.basis, -1);
    bool any = false;
    for (size_t k = 0; k < L.sites.size(); ++k)
      if (double t = model_.t(L.sites[k], p + 1); t != 0.0) {
        c.axpy(t, L.ann[k]);
        any = true;
      }
    BlockOp ct;
    if (any) {
      ct = c.transposed(L.basis);
      ops.push_back({&c, SiteOp::identity(d_)});
      ops.push_back({&ct, SiteOp::identity(d_)});
    }
    Truncation tr = truncate(lay, psi, true, left_lo(p + 1), left_hi(p + 1), cfg_.kept_states_m, alpha, ops);
    result_.truncation_weights.push_back(tr.weight);
    rec.max_truncation = std::max(rec.max_truncation, tr.weight);
    rec.max_kept = std::max(rec.max_kept, tr.iso.basis.total());
    if (p == (n_ - 2) / 2) center_spectrum_ = tr.spectrum;
    std::vector<Matrix> rot;
    left_[p + 1] = build_block(L, p, std::move(tr.iso), model_, d_, &rot);
    for (size_t k = 0; k < rot.size(); ++k)
      if (rot[k].size()) tr.phi[k] = rot[k].transpose() * tr.phi[k];
    guess = guess_after_right_move(tr, p);
  } else {
    // New right block right_[p+1] = site p+1 (x) right_[p+2].
    std::vector<NoiseOp> ops;
    ops.push_back({nullptr, SiteOp::annihilator(d_)});
    ops.push_back({nullptr, SiteOp::creator(d_)});
    BlockOp c = BlockOp::zero(R.basis, -1);
    bool any = false;
    for (size_t k = 0; k < R.sites.size(); ++k)
      if (double t = model_.t(R.sites[k], p); t != 0.0) {
        c.axpy(t, R.ann[k]);
        any = true;
      }
    BlockOp ct;
    if (any) {
      ct = c.transposed(R.basis);
      ops.push_back({&c, SiteOp::identity(d_)});
      ops.push_back({&ct, SiteOp::identity(d_)});
    }
    Truncation tr = truncate(lay, psi, false, right_lo(p + 1), right_hi(p + 1), cfg_.kept_states_m, alpha, ops);
    result_.truncation_weights.push_back(tr.weight);
    rec.max_truncation = std::max(rec.max_truncation, tr.weight);
    rec.max_kept = std::max(rec.max_kept, tr.iso.basis.total());
    if (p == (n_ - 2) / 2) center_spectrum_ = tr.spectrum;
    std::vector<Matrix> rot;
    right_[p + 1] = build_block(R, p + 1, std::move(tr.iso), model_, d_, &rot);
    for (size_t k = 0; k < rot.size(); ++k)
      if (rot[k].size()) tr.phi[k] = rot[k].transpose() * tr.phi[k];
    guess = guess_after_left_move(tr, p);
  }
  return energy;
}

std::shared_ptr<const MpsData> Engine::extract(int p, const Layout& lay, std::span<const double> psi) const {
  auto mps = std::make_shared<MpsData>();
  mps->n_phonons = total_;
  mps->n_max = nmax_;
  mps->sites.resize(n_);

  auto flipped = [this](const SectorList& rb) {
    SectorList out;
    for (int k = 0; k < rb.size(); ++k) out.add(total_ - rb.label(k), rb.dim(k));
    return out;
  };

  for (int s = 0; s < p; ++s) {
    const Block& nb = left_[s + 1];
    const Block& ob = left_[s];
    MpsSite& site = mps->sites[s];
    site.d = d_;
    site.left = ob.basis;
    site.right = nb.basis;
    site.M.assign(static_cast<size_t>(site.left.size()) * d_, Matrix());
    for (int l = 0; l < ob.basis.size(); ++l)
      for (int sig = 0; sig < d_; ++sig) {
        const int nr = nb.basis.find(ob.basis.label(l) + sig);
        if (nr < 0) continue;
        const int off = nb.iso->enl.offset_of(l, sig);
        if (off < 0) continue;
        site.at(l, sig) = nb.iso->Q[nr].middleRows(off, ob.basis.dim(l));
      }
  }
  for (int s = p + 2; s < n_; ++s) {
    const Block& nb = right_[s];
    const Block& ob = right_[s + 1];
    MpsSite& site = mps->sites[s];
    site.d = d_;
    site.left = flipped(nb.basis);
    site.right = flipped(ob.basis);
    site.M.assign(static_cast<size_t>(site.left.size()) * d_, Matrix());
    for (int l = 0; l < nb.basis.size(); ++l)
      for (int sig = 0; sig < d_; ++sig) {
        const int o = ob.basis.find(nb.basis.label(l) - sig);
        if (o < 0) continue;
        const int off = nb.iso->enl.offset_of(o, sig);
        if (off < 0) continue;
        site.at(l, sig) = nb.iso->Q[l].middleRows(off, ob.basis.dim(o)).transpose();
      }
  }

  // Center: exact SVD of the two-site tensor, grouped by the middle label.
  const SectorList& L = *lay.L;
  const SectorList& R = *lay.R;
  Enlarged rows = Enlarged::build(L, d_, 0, total_);
  Enlarged cols = Enlarged::build(R, d_, 0, total_);
  std::vector<Matrix> theta(rows.sectors.size());
  for (int k = 0; k < rows.sectors.size(); ++k) {
    const int c = cols.sectors.find(total_ - rows.sectors.label(k));
    theta[k] = Matrix::Zero(rows.sectors.dim(k), c >= 0 ? cols.sectors.dim(c) : 0);
  }
  for (const auto& b : lay.blocks) {
    const int k = rows.sectors.find(L.label(b.iL) + b.s1);
    theta[k].block(rows.offset_of(b.iL, b.s1), cols.offset_of(b.iR, b.s2), b.rows, b.cols) =
        Eigen::Map<const Matrix>(psi.data() + b.offset, b.rows, b.cols);
  }
  MpsSite& sp = mps->sites[p];
  MpsSite& sq = mps->sites[p + 1];
  sp.d = sq.d = d_;
  sp.left = L;
  sq.right = flipped(R);
  std::vector<Matrix> U(rows.sectors.size()), SV(rows.sectors.size());
  for (int k = 0; k < rows.sectors.size(); ++k) {
    if (theta[k].cols() == 0 || theta[k].rows() == 0) continue;
    Eigen::BDCSVD<Matrix> svd(theta[k], Eigen::ComputeThinU | Eigen::ComputeThinV);
    int r = 0;
    const auto& sv = svd.singularValues();
    while (r < sv.size() && sv(r) > 1e-15) ++r;
    if (r == 0) continue;
    U[k] = svd.matrixU().leftCols(r);
    SV[k] = sv.head(r).asDiagonal() * svd.matrixV().leftCols(r).transpose();
    sp.right.add(rows.sectors.label(k), r);
  }
  sq.left = sp.right;
  sp.M.assign(static_cast<size_t>(sp.left.size()) * d_, Matrix());
  sq.M.assign(static_cast<size_t>(sq.left.size()) * d_, Matrix());
  for (int k = 0; k < rows.sectors.size(); ++k) {
    if (U[k].size() == 0) continue;
    const int mid = sp.right.find(rows.sectors.label(k));
    for (const auto& piece : rows.pieces[k])
      sp.at(piece.block_sector, piece.s) = U[k].middleRows(piece.offset, L.dim(piece.block_sector));
    const int c = cols.sectors.find(total_ - rows.sectors.label(k));
    for (const auto& piece : cols.pieces[c]) {
      // Column piece (right sector, s2): site p+1 maps mid -> label total - nR.
      sq.at(mid, piece.s) = SV[k].middleCols(piece.offset, R.dim(piece.block_sector));
    }
  }
  return mps;
}

DmrgState Engine::run(const DmrgState* resume) {
  using clock = std::chrono::steady_clock;
  std::vector<double> guess;
  if (resume)
    guess = resume_from(resume->mps());
  else
    warm_up();

  double prev = std::numeric_limits<double>::infinity();
  std::shared_ptr<const MpsData> snapshot;
  for (int sweep = 0; sweep < cfg_.max_sweeps; ++sweep) {
    const auto t0 = clock::now();
    const double noise = sweep < cfg_.noise_sweeps ? cfg_.noise / std::pow(10.0, sweep) : 0.0;
    SweepRecord rec;
    rec.sweep = sweep + 1;
    rec.noise = noise;
    rec.min_energy = std::numeric_limits<double>::infinity();
    double e = 0.0;
    have_gap_ = false;
    if (n_ == 2) {
      e = step(0, true, noise, guess, true, rec);
    } else {
      for (int p = 0; p <= n_ - 2; ++p) e = step(p, true, noise, guess, false, rec);
      // The right half ends at p = n-2; start the left half from that state.
      guess = last_psi_;
      for (int p = n_ - 2; p >= 0; --p) e = step(p, false, noise, guess, p == (n_ - 2) / 2, rec);
    }
    rec.energy = e;
    rec.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    result_.history.push_back(rec);
    result_.sweeps = sweep + 1;
    result_.energy = e;
    if (have_gap_) result_.gap_estimate = gap_;

    const int center = 0;
    snapshot = extract(center, *last_layout_, last_psi_);
    if (cfg_.on_sweep) {
      DmrgResult partial = result_;
      partial.center_spectrum = center_spectrum_;
      cfg_.on_sweep(rec, DmrgState(snapshot, partial));
    }
    if (std::getenv("PHBHM_VERBOSE"))
      std::cerr << "[dmrg] sweep " << rec.sweep << " E=" << std::setprecision(14) << e << " dE=" << e - prev
                << " trunc=" << rec.max_truncation << " m=" << rec.max_kept << " mv=" << rec.matvecs << " noise=" << noise << " t="
                << rec.seconds << "s\n";
    if (noise == 0.0 && std::abs(e - prev) < cfg_.energy_tol) {
      result_.converged = true;
      break;
    }
    prev = e;
    if (n_ == 2 && noise == 0.0) {
      result_.converged = true;
      break;
    }
    guess = last_psi_;
  }
  result_.center_spectrum = center_spectrum_;
  result_.near_degenerate = result_.gap_estimate < kNearDegenerateGap;
  return DmrgState(snapshot, result_);
}

}  // namespace

DmrgState dmrg_ground_state(const BoseHubbardModel& model, int n_phonons, const DmrgConfig& config,
                            const DmrgState* resume) {
  config.validate();
  model.validate();
  require(model.n_sites >= 2, "DMRG needs at least two sites");
  const int cap = config.n_max > 0 ? config.n_max : model.n_max;
  if (n_phonons < 0 || static_cast<long>(n_phonons) > static_cast<long>(model.n_sites) * cap) {
    std::ostringstream os;
    os << "sector N_ph=" << n_phonons << " infeasible for N=" << model.n_sites << ", n_max=" << cap;
    fail(ErrorCode::InfeasibleSector, os.str());
  }
  Engine engine(model, n_phonons, config);
  return engine.run(resume);
}

// ---- DmrgState ----

DmrgState::DmrgState() = default;
DmrgState::DmrgState(std::shared_ptr<const detail::MpsData> mps, DmrgResult result)
    : mps_(std::move(mps)), result_(std::move(result)) {}
DmrgState::~DmrgState() = default;

int DmrgState::n_sites() const { return mps_ ? mps_->n_sites() : 0; }
int DmrgState::n_phonons() const { return mps_ ? mps_->n_phonons : 0; }
int DmrgState::n_max() const { return mps_ ? mps_->n_max : 0; }

std::vector<int> DmrgState::bond_dimensions() const {
  std::vector<int> out;
  if (!mps_) return out;
  for (const auto& s : mps_->sites) out.push_back(s.right.total());
  return out;
}

std::vector<double> DmrgState::measure_one_point(OnePoint which) const {
  require(mps_ != nullptr, "empty DMRG state");
  detail::MpsMeasure meas(*mps_);
  const int d = mps_->sites[0].d;
  const SiteOp op = which == OnePoint::Density ? SiteOp::number(d) : SiteOp::number_squared(d);
  std::vector<double> out(n_sites());
  for (int i = 0; i < n_sites(); ++i) out[i] = meas.one_point(i, op);
  return out;
}

double DmrgState::measure_two_point(TwoPoint kind, int i, int j) const {
  require(mps_ != nullptr, "empty DMRG state");
  const int n = n_sites();
  require(i >= 1 && i <= n && j >= 1 && j <= n, "site index out of range");
  detail::MpsMeasure meas(*mps_);
  const int d = mps_->sites[0].d;
  if (i == j)
    return meas.one_point(i - 1, kind == TwoPoint::HopCorr ? SiteOp::number(d) : SiteOp::number_squared(d));
  const int a = std::min(i, j) - 1, b = std::max(i, j) - 1;
  if (kind == TwoPoint::HopCorr) return meas.two_point(a, SiteOp::creator(d), b, SiteOp::annihilator(d));
  return meas.two_point(a, SiteOp::number(d), b, SiteOp::number(d));
}

Eigen::MatrixXd DmrgState::two_point_matrix(TwoPoint kind) const {
  require(mps_ != nullptr, "empty DMRG state");
  detail::MpsMeasure meas(*mps_);
  const int n = n_sites();
  const int d = mps_->sites[0].d;
  Eigen::MatrixXd out(n, n);
  const SiteOp o1 = kind == TwoPoint::HopCorr ? SiteOp::creator(d) : SiteOp::number(d);
  const SiteOp o2 = kind == TwoPoint::HopCorr ? SiteOp::annihilator(d) : SiteOp::number(d);
  const SiteOp diag = kind == TwoPoint::HopCorr ? SiteOp::number(d) : SiteOp::number_squared(d);
  for (int i = 0; i < n; ++i) {
    out(i, i) = meas.one_point(i, diag);
    std::vector<double> row = meas.two_point_row(i, o1, o2);
    for (int j = i + 1; j < n; ++j) out(i, j) = out(j, i) = row[j];
  }
  return out;
}

namespace {
constexpr char kStateMagic[8] = {'P', 'H', 'B', 'H', 'M', 'C', 'K', 'P'};
constexpr std::uint32_t kStateVersion = 1;
}  // namespace

void DmrgState::save(const std::string& path) const {
  require(mps_ != nullptr, "empty DMRG state");
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::IoError, "cannot open checkpoint for writing: " + path);
  os.write(kStateMagic, sizeof kStateMagic);
  os.write(reinterpret_cast<const char*>(&kStateVersion), sizeof kStateVersion);
  const double e = result_.energy;
  const std::int32_t sweeps = result_.sweeps, conv = result_.converged;
  os.write(reinterpret_cast<const char*>(&e), sizeof e);
  os.write(reinterpret_cast<const char*>(&sweeps), sizeof sweeps);
  os.write(reinterpret_cast<const char*>(&conv), sizeof conv);
  detail::write_mps(os, *mps_);
  if (!os) fail(ErrorCode::IoError, "failed writing checkpoint: " + path);
}

DmrgState DmrgState::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::IoError, "cannot open checkpoint: " + path);
  char magic[8];
  std::uint32_t version = 0;
  is.read(magic, sizeof magic);
  is.read(reinterpret_cast<char*>(&version), sizeof version);
  if (!is || std::memcmp(magic, kStateMagic, sizeof magic) != 0) fail(ErrorCode::IoError, "not a checkpoint: " + path);
  if (version != kStateVersion) fail(ErrorCode::IoError, "unsupported checkpoint version");
  DmrgResult r;
  std::int32_t sweeps = 0, conv = 0;
  is.read(reinterpret_cast<char*>(&r.energy), sizeof r.energy);
  is.read(reinterpret_cast<char*>(&sweeps), sizeof sweeps);
  is.read(reinterpret_cast<char*>(&conv), sizeof conv);
  if (!is) fail(ErrorCode::IoError, "truncated checkpoint: " + path);
  r.sweeps = sweeps;
  r.converged = conv != 0;
  auto mps = std::make_shared<detail::MpsData>(detail::read_mps(is));
  return DmrgState(std::move(mps), std::move(r));
}

}  // namespace phbhm
