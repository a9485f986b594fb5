#include "dmrg/mps.hpp"

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include "phbhm/error.hpp"

namespace phbhm::detail {

MpsMeasure::MpsMeasure(const MpsData& mps) : mps_(&mps) {
  const int n = mps.n_sites();
  require(n >= 1, "empty MPS");
  left_.resize(n + 1);
  right_.resize(n + 1);

  const SiteOp id = SiteOp::identity(mps.sites[0].d);
  left_[0].shift = 0;
  left_[0].blocks = {Matrix::Ones(1, 1)};
  for (int b = 1; b <= n; ++b) left_[b] = transfer(left_[b - 1], b - 1, id);

  right_[n].shift = 0;
  right_[n].blocks = {Matrix::Ones(1, 1)};
  for (int b = n - 1; b >= 0; --b) {
    const MpsSite& site = mps.sites[b];
    BlockOp env;
    env.shift = 0;
    env.blocks.resize(site.left.size());
    for (int l = 0; l < site.left.size(); ++l) {
      Matrix acc = Matrix::Zero(site.left.dim(l), site.left.dim(l));
      for (int s = 0; s < site.d; ++s) {
        if (!site.has(l, s)) continue;
        const int r = site.right.find(site.left.label(l) + s);
        if (r < 0 || !right_[b + 1].has(r)) continue;
        const Matrix& m = site.at(l, s);
        acc.noalias() += m * (right_[b + 1].blocks[r] * m.transpose());
      }
      env.blocks[l] = std::move(acc);
    }
    right_[b] = std::move(env);
  }
  norm2_ = left_[n].has(0) ? left_[n].blocks[0](0, 0) : 0.0;
  if (!(norm2_ > 0.0)) fail(ErrorCode::InvalidInput, "MPS has zero norm");
}

BlockOp MpsMeasure::transfer(const BlockOp& env, int k, const SiteOp& op) const {
  const MpsSite& site = mps_->sites[k];
  BlockOp out;
  out.shift = env.shift + op.shift;
  out.blocks.resize(site.right.size());
  for (int l = 0; l < static_cast<int>(env.blocks.size()); ++l) {
    if (!env.has(l)) continue;
    const int lb = site.left.find(site.left.label(l) + env.shift);
    if (lb < 0) continue;
    for (int s = 0; s < site.d; ++s) {
      const double c = op.at(s);
      const int sb = s + op.shift;
      if (c == 0.0 || !site.has(l, s) || !site.has(lb, sb)) continue;
      const int rk = site.right.find(site.left.label(l) + s);
      const Matrix& ket = site.at(l, s);
      const Matrix& bra = site.at(lb, sb);
      Matrix x = site.at(lb, sb).transpose() * env.blocks[l];
      if (out.blocks[rk].size() == 0) out.blocks[rk] = Matrix::Zero(bra.cols(), ket.cols());
      out.blocks[rk].noalias() += c * (x * ket);
    }
  }
  return out;
}

double MpsMeasure::close(const BlockOp& env, int bond) const {
  // Only shift-0 strings survive; bra and ket sectors coincide.
  const BlockOp& r = right_[bond];
  double v = 0.0;
  for (int l = 0; l < static_cast<int>(env.blocks.size()); ++l)
    if (env.has(l) && r.has(l)) v += env.blocks[l].cwiseProduct(r.blocks[l]).sum();
  return v;
}

double MpsMeasure::one_point(int i, const SiteOp& op) const {
  require(op.shift == 0, "one-point operators must conserve the phonon number");
  return close(transfer(left_[i], i, op), i + 1) / norm2_;
}

double MpsMeasure::two_point(int i, const SiteOp& o1, int j, const SiteOp& o2) const {
  require(i < j, "two_point expects i < j");
  require(o1.shift + o2.shift == 0, "two-point string must conserve the phonon number");
  const SiteOp id = SiteOp::identity(mps_->sites[0].d);
  BlockOp e = transfer(left_[i], i, o1);
  for (int k = i + 1; k < j; ++k) e = transfer(e, k, id);
  return close(transfer(e, j, o2), j + 1) / norm2_;
}

std::vector<double> MpsMeasure::two_point_row(int i, const SiteOp& o1, const SiteOp& o2) const {
  require(o1.shift + o2.shift == 0, "two-point string must conserve the phonon number");
  const int n = mps_->n_sites();
  const SiteOp id = SiteOp::identity(mps_->sites[0].d);
  std::vector<double> row(n, 0.0);
  BlockOp e = transfer(left_[i], i, o1);
  for (int j = i + 1; j < n; ++j) {
    row[j] = close(transfer(e, j, o2), j + 1) / norm2_;
    if (j + 1 < n) e = transfer(e, j, id);
  }
  return row;
}

void right_canonicalize(MpsData& mps) {
  const int n = mps.n_sites();
  for (int k = n - 1; k >= 1; --k) {
    MpsSite& site = mps.sites[k];
    MpsSite& prev = mps.sites[k - 1];
    for (int l = 0; l < site.left.size(); ++l) {
      const int dl = site.left.dim(l);
      int cols = 0;
      for (int s = 0; s < site.d; ++s)
        if (site.has(l, s)) cols += static_cast<int>(site.at(l, s).cols());
      if (dl == 0 || cols == 0) continue;
      Matrix w(dl, cols);
      int c = 0;
      for (int s = 0; s < site.d; ++s)
        if (site.has(l, s)) {
          w.middleCols(c, site.at(l, s).cols()) = site.at(l, s);
          c += static_cast<int>(site.at(l, s).cols());
        }
      const int r = std::min(dl, cols);
      Eigen::HouseholderQR<Matrix> qr(w.transpose());
      Matrix q = qr.householderQ() * Matrix::Identity(cols, r);
      Matrix rt = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
      rt.transposeInPlace();  // dl x r
      c = 0;
      for (int s = 0; s < site.d; ++s)
        if (site.has(l, s)) {
          const int dc = static_cast<int>(site.at(l, s).cols());
          site.at(l, s) = q.middleRows(c, dc).transpose();
          c += dc;
        }
      const int pr = prev.right.find(site.left.label(l));
      for (int pl = 0; pl < prev.left.size(); ++pl) {
        const int s = site.left.label(l) - prev.left.label(pl);
        if (prev.has(pl, s)) prev.at(pl, s) = prev.at(pl, s) * rt;
      }
      site.left.set_dim(l, r);
      if (pr >= 0) prev.right.set_dim(pr, r);
    }
  }
}

namespace {

constexpr char kMagic[8] = {'P', 'H', 'B', 'H', 'M', 'M', 'P', 'S'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) fail(ErrorCode::IoError, "truncated MPS checkpoint");
  return v;
}

void put_sectors(std::ostream& os, const SectorList& s) {
  put<std::int32_t>(os, s.size());
  for (int k = 0; k < s.size(); ++k) {
    put<std::int32_t>(os, s.label(k));
    put<std::int32_t>(os, s.dim(k));
  }
}

SectorList get_sectors(std::istream& is) {
  SectorList s;
  const int n = get<std::int32_t>(is);
  for (int k = 0; k < n; ++k) {
    int label = get<std::int32_t>(is);
    int dim = get<std::int32_t>(is);
    s.add(label, dim);
  }
  return s;
}

}  // namespace

void write_mps(std::ostream& os, const MpsData& mps) {
  os.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(os, kVersion);
  put<std::int32_t>(os, mps.n_sites());
  put<std::int32_t>(os, mps.n_phonons);
  put<std::int32_t>(os, mps.n_max);
  for (const MpsSite& site : mps.sites) {
    put<std::int32_t>(os, site.d);
    put_sectors(os, site.left);
    put_sectors(os, site.right);
    std::int32_t nblocks = 0;
    for (const Matrix& m : site.M) nblocks += m.size() > 0;
    put(os, nblocks);
    for (int l = 0; l < site.left.size(); ++l)
      for (int s = 0; s < site.d; ++s) {
        if (!site.has(l, s)) continue;
        const Matrix& m = site.at(l, s);
        put<std::int32_t>(os, l);
        put<std::int32_t>(os, s);
        put<std::int32_t>(os, static_cast<std::int32_t>(m.rows()));
        put<std::int32_t>(os, static_cast<std::int32_t>(m.cols()));
        os.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
      }
  }
  if (!os) fail(ErrorCode::IoError, "failed writing MPS checkpoint");
}

MpsData read_mps(std::istream& is) {
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0) fail(ErrorCode::IoError, "not an MPS checkpoint");
  const auto version = get<std::uint32_t>(is);
  if (version != kVersion) fail(ErrorCode::IoError, "unsupported MPS checkpoint version");
  MpsData mps;
  const int n = get<std::int32_t>(is);
  mps.n_phonons = get<std::int32_t>(is);
  mps.n_max = get<std::int32_t>(is);
  if (n < 1 || n > 100000) fail(ErrorCode::IoError, "corrupt MPS checkpoint");
  mps.sites.resize(n);
  for (MpsSite& site : mps.sites) {
    site.d = get<std::int32_t>(is);
    site.left = get_sectors(is);
    site.right = get_sectors(is);
    site.M.assign(static_cast<size_t>(site.left.size()) * site.d, Matrix());
    const int nblocks = get<std::int32_t>(is);
    for (int b = 0; b < nblocks; ++b) {
      const int l = get<std::int32_t>(is), s = get<std::int32_t>(is);
      const int rows = get<std::int32_t>(is), cols = get<std::int32_t>(is);
      if (l < 0 || l >= site.left.size() || s < 0 || s >= site.d || rows < 0 || cols < 0)
        fail(ErrorCode::IoError, "corrupt MPS checkpoint block");
      Matrix m(rows, cols);
      is.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
      if (!is) fail(ErrorCode::IoError, "truncated MPS checkpoint");
      site.at(l, s) = std::move(m);
    }
  }
  return mps;
}

}  // namespace phbhm::detail
