#include "phbhm/exact_diag.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "phbhm/eigensolver.hpp"
#include "phbhm/error.hpp"

namespace phbhm {

SectorHamiltonian::SectorHamiltonian(const BoseHubbardModel& model, const SectorBasis& basis, int threads)
    : model_(&model), basis_(&basis) {
  model.validate();
  require(basis.n_sites() == model.n_sites, "basis and model disagree on the number of sites");
  require(basis.n_max() <= model.n_max, "basis cap exceeds the model cap");
  threads_ = threads > 0 ? threads : std::max(1u, std::thread::hardware_concurrency());

  const int n = model.n_sites;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && model.t(i, j) != 0.0) hops_.emplace_back(i, j);

  const std::int64_t dim = basis.dimension();
  diag_.resize(dim);
  parallel_rows([&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t r = lo; r < hi; ++r) {
      auto occ = basis.state(r);
      double d = 0.0;
      for (int i = 0; i < n; ++i) d += model.onsite_energy[i] * occ[i] + model.onsite_interaction[i] * occ[i] * (occ[i] - 1.0);
      diag_[r] = d;
    }
  });

  if (dim <= kDenseLimit) {
    storage_ = Storage::Dense;
    dense_ = Eigen::MatrixXd::Zero(dim, dim);
    std::vector<std::uint8_t> scratch;
    for (std::int64_t r = 0; r < dim; ++r) {
      dense_(r, r) = diag_[r];
      visit_row(r, scratch, [&](std::int64_t c, double v) { dense_(r, c) += v; });
    }
    return;
  }

  const double nnz_estimate = static_cast<double>(dim) * (1.0 + hops_.size());
  if (nnz_estimate > kSparseNonzeroLimit) {
    storage_ = Storage::MatrixFree;
    return;
  }
  storage_ = Storage::Sparse;
  // Rows are filled chunk-wise into per-row buffers, then concatenated in row order.
  std::vector<std::vector<std::pair<std::int64_t, double>>> rows(dim);
  parallel_rows([&](std::int64_t lo, std::int64_t hi) {
    std::vector<std::uint8_t> scratch;
    for (std::int64_t r = lo; r < hi; ++r)
      visit_row(r, scratch, [&](std::int64_t c, double v) { rows[r].emplace_back(c, v); });
  });
  row_ptr_.assign(dim + 1, 0);
  for (std::int64_t r = 0; r < dim; ++r) row_ptr_[r + 1] = row_ptr_[r] + static_cast<std::int64_t>(rows[r].size());
  col_.resize(row_ptr_[dim]);
  val_.resize(row_ptr_[dim]);
  for (std::int64_t r = 0; r < dim; ++r) {
    std::int64_t p = row_ptr_[r];
    for (auto& [c, v] : rows[r]) {
      col_[p] = c;
      val_[p] = v;
      ++p;
    }
    std::vector<std::pair<std::int64_t, double>>().swap(rows[r]);
  }
}

template <class Visit>
void SectorHamiltonian::visit_row(std::int64_t row, std::vector<std::uint8_t>& scratch, Visit&& visit) const {
  auto occ = basis_->state(row);
  scratch.assign(occ.begin(), occ.end());
  const int cap = basis_->n_max();
  // <row| t_ij a+_i a_j |col>: col has one more phonon on j and one fewer on i.
  for (auto [i, j] : hops_) {
    if (occ[i] == 0 || occ[j] >= cap) continue;
    scratch[i] -= 1;
    scratch[j] += 1;
    std::int64_t c = basis_->index_of(scratch);
    scratch[i] += 1;
    scratch[j] -= 1;
    visit(c, model_->t(i, j) * std::sqrt(static_cast<double>(occ[i]) * (occ[j] + 1)));
  }
}

void SectorHamiltonian::parallel_rows(const std::function<void(std::int64_t, std::int64_t)>& body) const {
  const std::int64_t dim = basis_->dimension();
  const int nt = static_cast<int>(std::min<std::int64_t>(threads_, std::max<std::int64_t>(1, dim / 4096)));
  if (nt <= 1) {
    body(0, dim);
    return;
  }
  std::vector<std::thread> pool;
  const std::int64_t chunk = (dim + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    std::int64_t lo = t * chunk, hi = std::min(dim, lo + chunk);
    if (lo < hi) pool.emplace_back(body, lo, hi);
  }
  for (auto& th : pool) th.join();
}

void SectorHamiltonian::apply(std::span<const double> x, std::span<double> y) const {
  const std::int64_t dim = dimension();
  switch (storage_) {
    case Storage::Dense: {
      Eigen::Map<const Eigen::VectorXd> xv(x.data(), dim);
      Eigen::Map<Eigen::VectorXd> yv(y.data(), dim);
      yv.noalias() = dense_ * xv;
      return;
    }
    case Storage::Sparse:
      parallel_rows([&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t r = lo; r < hi; ++r) {
          double s = diag_[r] * x[r];
          for (std::int64_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) s += val_[p] * x[col_[p]];
          y[r] = s;
        }
      });
      return;
    case Storage::MatrixFree:
      parallel_rows([&](std::int64_t lo, std::int64_t hi) {
        std::vector<std::uint8_t> scratch;
        for (std::int64_t r = lo; r < hi; ++r) {
          double s = diag_[r] * x[r];
          visit_row(r, scratch, [&](std::int64_t c, double v) { s += v * x[c]; });
          y[r] = s;
        }
      });
      return;
  }
}

Eigen::MatrixXd SectorHamiltonian::to_dense() const {
  if (storage_ == Storage::Dense) return dense_;
  const std::int64_t dim = dimension();
  Eigen::MatrixXd h(dim, dim);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(dim), col(dim);
  for (std::int64_t c = 0; c < dim; ++c) {
    e(c) = 1.0;
    apply({e.data(), static_cast<size_t>(dim)}, {col.data(), static_cast<size_t>(dim)});
    h.col(c) = col;
    e(c) = 0.0;
  }
  return h;
}

namespace {

EdResult collect(const Eigen::VectorXd& values, const Eigen::MatrixXd& vectors, const std::vector<double>& residuals,
                 int k) {
  EdResult out;
  const double e0 = values(0);
  int g = 0;
  while (g < values.size() && values(g) - e0 <= degeneracy_window(e0)) ++g;
  out.ground_degeneracy = g;
  out.degenerate = g > 1;
  const int keep = std::min<int>(static_cast<int>(values.size()), std::max(k, g));
  for (int i = 0; i < keep; ++i) out.pairs.push_back({values(i), vectors.col(i), residuals[i]});
  return out;
}

}  // namespace

EdResult ed_ground_state(const BoseHubbardModel& model, const SectorBasis& basis, int k, const EdOptions& options) {
  require(k >= 1, "k must be >= 1");
  require(basis.dimension() >= k, "sector dimension is smaller than the requested number of eigenpairs");
  SectorHamiltonian h(model, basis, options.threads);
  const std::int64_t dim = basis.dimension();

  if (h.storage() == SectorHamiltonian::Storage::Dense) {
    EigenResult r = dense_lowest(h.to_dense(), static_cast<int>(dim));
    return collect(r.values, r.vectors, r.residuals, k);
  }

  LinearOperator op = [&h](std::span<const double> x, std::span<double> y) { h.apply(x, y); };
  int want = k;
  Eigen::MatrixXd previous;
  for (;;) {
    EigenOptions eo;
    eo.n_eigen = want;
    eo.residual_tol = options.residual_tol;
    eo.seed = options.seed;
    EigenResult r = davidson_lowest(op, dim, eo, h.diagonal(), previous.size() ? &previous : nullptr);
    double worst = 0.0;
    for (double v : r.residuals) worst = std::max(worst, v);
    if (!r.converged || worst > 1e-10) {
      std::ostringstream os;
      os << "sector eigensolver did not converge; residual " << worst;
      fail(ErrorCode::NotConverged, os.str(), worst);
    }
    const double e0 = r.values(0);
    // Variational bound: E0 cannot exceed the smallest diagonal element.
    const double dmin = *std::min_element(h.diagonal().begin(), h.diagonal().end());
    if (e0 > dmin + 1e-9 * std::max(1.0, std::abs(dmin)))
      fail(ErrorCode::NotConverged, "sector eigensolver converged above the lowest diagonal element", e0 - dmin);
    const bool top_degenerate = r.values(want - 1) - e0 <= degeneracy_window(e0);
    if (!top_degenerate || want >= dim) return collect(r.values, r.vectors, r.residuals, k);
    previous = r.vectors;
    want = static_cast<int>(std::min<std::int64_t>(dim, 2 * want));
  }
}

double ed_gap(const BoseHubbardModel& model, const SectorBasis& basis, const EdOptions& options) {
  if (basis.dimension() < 2) fail(ErrorCode::UndefinedGap, "gap needs a sector of dimension >= 2");
  EdResult r = ed_ground_state(model, basis, 2, options);
  return std::max(0.0, r.pairs[1].energy - r.pairs[0].energy);
}

RawMeasurements measure_exact(const SectorBasis& basis, const Eigen::VectorXd& psi) {
  require(psi.size() == basis.dimension(), "vector does not match the sector");
  const int n = basis.n_sites();
  const int cap = basis.n_max();
  RawMeasurements m;
  m.density.assign(n, 0.0);
  m.density_sq.assign(n, 0.0);
  m.hop = Eigen::MatrixXd::Zero(n, n);
  m.dens = Eigen::MatrixXd::Zero(n, n);
  const double norm2 = psi.squaredNorm();
  std::vector<std::uint8_t> scratch;
  for (std::int64_t r = 0; r < basis.dimension(); ++r) {
    auto occ = basis.state(r);
    const double w = psi(r) * psi(r);
    for (int i = 0; i < n; ++i) {
      m.density[i] += w * occ[i];
      m.density_sq[i] += w * occ[i] * occ[i];
      for (int j = 0; j < n; ++j) m.dens(i, j) += w * occ[i] * occ[j];
    }
    scratch.assign(occ.begin(), occ.end());
    // <psi| a+_i a_j |psi>: |r> -> phonon moved from j to i.
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j || occ[j] == 0 || occ[i] >= cap) continue;
        scratch[j] -= 1;
        scratch[i] += 1;
        std::int64_t c = basis.index_of(scratch);
        scratch[j] += 1;
        scratch[i] -= 1;
        m.hop(i, j) += psi(c) * psi(r) * std::sqrt(static_cast<double>(occ[j]) * (occ[i] + 1));
      }
  }
  for (int i = 0; i < n; ++i) {
    m.density[i] /= norm2;
    m.density_sq[i] /= norm2;
    m.hop(i, i) = m.density[i];
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i != j) m.hop(i, j) /= norm2;
      m.dens(i, j) /= norm2;
    }
  return m;
}

RawMeasurements measure_exact(const SectorBasis& basis, const std::vector<Eigen::VectorXd>& states) {
  require(!states.empty(), "no states to average over");
  RawMeasurements avg = measure_exact(basis, states[0]);
  for (size_t k = 1; k < states.size(); ++k) {
    RawMeasurements m = measure_exact(basis, states[k]);
    for (size_t i = 0; i < avg.density.size(); ++i) {
      avg.density[i] += m.density[i];
      avg.density_sq[i] += m.density_sq[i];
    }
    avg.hop += m.hop;
    avg.dens += m.dens;
  }
  const double w = 1.0 / static_cast<double>(states.size());
  for (size_t i = 0; i < avg.density.size(); ++i) {
    avg.density[i] *= w;
    avg.density_sq[i] *= w;
  }
  avg.hop *= w;
  avg.dens *= w;
  return avg;
}

}  // namespace phbhm
