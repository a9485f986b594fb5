#include "phbhm/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "phbhm/error.hpp"

namespace phbhm {

namespace {

constexpr Eigen::Index kDenseFallbackDim = 64;

void apply(const LinearOperator& op, const Eigen::VectorXd& x, Eigen::VectorXd& y) {
  y.resize(x.size());
  op(std::span<const double>(x.data(), x.size()), std::span<double>(y.data(), y.size()));
}

// Two-pass Gram-Schmidt against the first `nv` columns of V. Returns the norm
// after projection.
double orthogonalize(const Eigen::MatrixXd& V, Eigen::Index nv, Eigen::VectorXd& t) {
  for (int pass = 0; pass < 2; ++pass) {
    if (nv == 0) break;
    Eigen::VectorXd c = V.leftCols(nv).transpose() * t;
    t.noalias() -= V.leftCols(nv) * c;
  }
  return t.norm();
}

EigenResult from_dense_spectrum(const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& es,
                                const Eigen::MatrixXd& h, int n_eigen) {
  EigenResult r;
  const int k = std::min<int>(n_eigen, static_cast<int>(h.rows()));
  r.values = es.eigenvalues().head(k);
  r.vectors = es.eigenvectors().leftCols(k);
  r.residuals.resize(k);
  for (int i = 0; i < k; ++i) r.residuals[i] = (h * r.vectors.col(i) - r.values(i) * r.vectors.col(i)).norm();
  r.converged = true;
  return r;
}

}  // namespace

EigenResult dense_lowest(const Eigen::MatrixXd& h, int n_eigen) {
  require(h.rows() == h.cols() && h.rows() > 0, "dense_lowest needs a nonempty square matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success) fail(ErrorCode::NotConverged, "dense eigensolver failed");
  return from_dense_spectrum(es, h, n_eigen);
}

EigenResult davidson_lowest(const LinearOperator& op, Eigen::Index dim, const EigenOptions& options,
                            std::span<const double> diagonal, const Eigen::MatrixXd* guess) {
  require(dim > 0, "operator dimension must be positive");
  require(options.n_eigen >= 1, "n_eigen must be >= 1");
  const int k = static_cast<int>(std::min<Eigen::Index>(options.n_eigen, dim));

  if (dim <= kDenseFallbackDim) {
    Eigen::MatrixXd h(dim, dim);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim), y;
    for (Eigen::Index c = 0; c < dim; ++c) {
      e.setZero();
      e(c) = 1.0;
      apply(op, e, y);
      h.col(c) = y;
    }
    h = 0.5 * (h + h.transpose()).eval();
    EigenResult r = dense_lowest(h, k);
    r.matvecs = static_cast<int>(dim);
    return r;
  }

  const Eigen::Index cap = std::min<Eigen::Index>(
      dim, options.max_subspace > 0 ? options.max_subspace : std::max<Eigen::Index>(24, 4 * k + 8));
  const Eigen::Index keep_on_restart = std::min<Eigen::Index>(cap - k, std::max(2 * k, k + 4));

  Eigen::MatrixXd V(dim, cap), AV(dim, cap);
  Eigen::Index nv = 0;
  int matvecs = 0;
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;

  auto push = [&](Eigen::VectorXd t) -> bool {
    double before = t.norm();
    if (before == 0.0) return false;
    double after = orthogonalize(V, nv, t);
    if (after < 1e-10 * before || after < 1e-300) return false;
    V.col(nv) = t / after;
    Eigen::VectorXd y;
    apply(op, V.col(nv), y);
    ++matvecs;
    AV.col(nv) = y;
    ++nv;
    return true;
  };
  auto random_vector = [&] {
    Eigen::VectorXd t(dim);
    for (Eigen::Index i = 0; i < dim; ++i) t(i) = normal(rng);
    return t;
  };

  if (guess)
    for (Eigen::Index c = 0; c < guess->cols() && nv < cap; ++c) push(guess->col(c));
  if (!guess && !diagonal.empty()) {
    // Unit vectors on the lowest diagonal entries. Without them a nearly
    // diagonal operator can trap the preconditioned search at an interior
    // eigenvalue, because corrections only grow near the current Ritz value.
    const Eigen::Index n_unit = std::min<Eigen::Index>({dim, cap - k, 2 * k + 2});
    std::vector<Eigen::Index> idx(dim);
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::partial_sort(idx.begin(), idx.begin() + n_unit, idx.end(),
                      [&](Eigen::Index a, Eigen::Index b) { return diagonal[a] < diagonal[b]; });
    for (Eigen::Index u = 0; u < n_unit; ++u) push(Eigen::VectorXd::Unit(dim, idx[u]));
  }
  for (int attempts = 0; (nv < k || attempts < k) && nv < cap && attempts < 10 * k + 10; ++attempts)
    push(random_vector());

  EigenResult out;
  double tol = options.residual_tol;
  Eigen::VectorXd theta;
  Eigen::MatrixXd Y;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    Eigen::MatrixXd G = V.leftCols(nv).transpose() * AV.leftCols(nv);
    G = 0.5 * (G + G.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    theta = es.eigenvalues();
    Y = es.eigenvectors();

    const int kk = static_cast<int>(std::min<Eigen::Index>(k, nv));
    Eigen::MatrixXd X = V.leftCols(nv) * Y.leftCols(kk);
    Eigen::MatrixXd R = AV.leftCols(nv) * Y.leftCols(kk);
    for (int i = 0; i < kk; ++i) R.col(i) -= theta(i) * X.col(i);

    out.values = theta.head(kk);
    out.vectors = X;
    out.residuals.assign(kk, 0.0);
    for (int i = 0; i < kk; ++i) out.residuals[i] = R.col(i).norm();
    if (iter == 0 && options.relative_tol > 0.0 && kk == k)
      tol = std::max(tol, options.relative_tol * *std::max_element(out.residuals.begin(), out.residuals.end()));
    bool all = kk == k;
    for (int i = 0; i < kk; ++i)
      if (out.residuals[i] > tol) all = false;
    out.iterations = iter + 1;
    out.matvecs = matvecs;
    if (all || nv == dim) {
      out.converged = all || nv == dim;
      return out;
    }

    int pending = 0;
    for (int i = 0; i < kk; ++i)
      if (out.residuals[i] > tol) ++pending;
    if (nv + pending > cap) {
      const Eigen::Index keep = std::min<Eigen::Index>(nv, keep_on_restart);
      Eigen::MatrixXd nV = V.leftCols(nv) * Y.leftCols(keep);
      Eigen::MatrixXd nAV = AV.leftCols(nv) * Y.leftCols(keep);
      V.leftCols(keep) = nV;
      AV.leftCols(keep) = nAV;
      nv = keep;
    }

    bool added = false;
    for (int i = 0; i < kk && nv < cap; ++i) {
      if (out.residuals[i] <= tol) continue;
      Eigen::VectorXd r = R.col(i);
      if (!diagonal.empty()) {
        Eigen::VectorXd t(dim);
        for (Eigen::Index a = 0; a < dim; ++a) {
          double d = diagonal[a] - theta(i);
          if (std::abs(d) < 1e-8) d = d < 0 ? -1e-8 : 1e-8;
          t(a) = r(a) / d;
        }
        Eigen::VectorXd probe = t;
        double before = probe.norm();
        double after = orthogonalize(V, nv, probe);
        // An exact diagonal preconditioner maps the residual back into the
        // subspace; fall back to the plain residual then.
        if (after > 1e-3 * before) {
          added |= push(t);
          continue;
        }
      }
      added |= push(r);
    }
    if (!added && nv < cap) added = push(random_vector());
    if (!added) {
      out.converged = false;
      return out;
    }
  }
  out.converged = false;
  return out;
}

}  // namespace phbhm
