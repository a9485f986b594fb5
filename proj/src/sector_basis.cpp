#include "phbhm/sector_basis.hpp"

#include <algorithm>
#include <sstream>

#include "phbhm/error.hpp"

namespace phbhm {

namespace {

std::vector<std::int64_t> ways_table(int n_sites, int n_phonons, int n_max) {
  std::vector<std::int64_t> w(static_cast<size_t>(n_sites + 1) * (n_phonons + 1), 0);
  auto at = [&](int k, int n) -> std::int64_t& { return w[static_cast<size_t>(k) * (n_phonons + 1) + n]; };
  at(0, 0) = 1;
  for (int k = 1; k <= n_sites; ++k)
    for (int n = 0; n <= n_phonons; ++n) {
      std::int64_t s = 0;
      // Saturating, so count() stays meaningful as "too large" far beyond ED reach.
      for (int v = 0; v <= std::min(n, n_max); ++v) s = std::min(s + at(k - 1, n - v), SectorBasis::kCountSaturation);
      at(k, n) = s;
    }
  return w;
}

}  // namespace

std::int64_t SectorBasis::count(int n_sites, int n_phonons, int n_max) {
  require(n_sites >= 0 && n_phonons >= 0 && n_max >= 0, "sector arguments must be nonnegative");
  return ways_table(n_sites, n_phonons, n_max)[static_cast<size_t>(n_sites) * (n_phonons + 1) + n_phonons];
}

SectorBasis::SectorBasis(int n_sites, int n_phonons, int n_max)
    : n_sites_(n_sites), n_phonons_(n_phonons), n_max_(n_max) {
  require(n_sites >= 1 && n_phonons >= 0 && n_max >= 0, "sector arguments must be nonnegative, n_sites >= 1");
  require(n_max <= 255, "n_max above 255 is not supported");
  if (static_cast<long>(n_phonons) > static_cast<long>(n_sites) * n_max) {
    std::ostringstream os;
    os << "sector (N=" << n_sites << ", N_ph=" << n_phonons << ", n_max=" << n_max << ") is empty";
    fail(ErrorCode::EmptySector, os.str());
  }
  ways_ = ways_table(n_sites, n_phonons, n_max);
  dim_ = ways(n_sites, n_phonons);
  if (dim_ > kMaxDimension) {
    std::ostringstream os;
    os << "sector dimension " << dim_ << (dim_ >= kCountSaturation ? "+" : "") << " exceeds the ED limit " << kMaxDimension;
    fail(ErrorCode::Refused, os.str(), static_cast<double>(dim_));
  }
  states_.resize(static_cast<size_t>(dim_) * n_sites);

  // Depth-first fill in descending lexicographic order.
  std::vector<std::uint8_t> cur(n_sites, 0);
  std::int64_t row = 0;
  auto fill = [&](auto&& self, int site, int left) -> void {
    if (site == n_sites - 1) {
      cur[site] = static_cast<std::uint8_t>(left);
      std::copy(cur.begin(), cur.end(), states_.begin() + row * n_sites);
      ++row;
      return;
    }
    for (int v = std::min(left, n_max); v >= 0; --v) {
      if (ways(n_sites - site - 1, left - v) == 0) continue;
      cur[site] = static_cast<std::uint8_t>(v);
      self(self, site + 1, left - v);
    }
  };
  fill(fill, 0, n_phonons);
}

std::int64_t SectorBasis::index_of(std::span<const std::uint8_t> occ) const {
  if (static_cast<int>(occ.size()) != n_sites_) return -1;
  std::int64_t rank = 0;
  int left = n_phonons_;
  for (int site = 0; site < n_sites_; ++site) {
    int v = occ[site];
    if (v > n_max_ || v > left) return -1;
    for (int w = std::min(left, n_max_); w > v; --w) rank += ways(n_sites_ - site - 1, left - w);
    left -= v;
  }
  return left == 0 ? rank : -1;
}

}  // namespace phbhm
