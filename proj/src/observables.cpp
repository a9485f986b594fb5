#include "phbhm/observables.hpp"

#include <cmath>
#include <sstream>

#include "phbhm/error.hpp"

namespace phbhm {

RawMeasurements measure_all(const DmrgState& state) {
  RawMeasurements raw;
  raw.density = state.measure_one_point(OnePoint::Density);
  raw.density_sq = state.measure_one_point(OnePoint::DensitySquared);
  raw.hop = state.two_point_matrix(TwoPoint::HopCorr);
  raw.dens = state.two_point_matrix(TwoPoint::DensCorr);
  return raw;
}

ObservableReport build_report(const RawMeasurements& raw, const ReportMetadata& metadata,
                              const ReportOptions& options) {
  const int n = static_cast<int>(raw.density.size());
  require(n >= 1, "empty measurement set");
  require(static_cast<int>(raw.density_sq.size()) == n && raw.hop.rows() == n && raw.hop.cols() == n &&
              raw.dens.rows() == n && raw.dens.cols() == n,
          "measurement arrays have inconsistent sizes");

  ObservableReport rep;
  rep.metadata = metadata;
  rep.density = raw.density;
  rep.fluctuations.resize(n);
  rep.hop_raw = raw.hop;
  rep.dens_raw = raw.dens;
  double occ = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    // Rounding can push the variance slightly below zero.
    rep.fluctuations[i] = std::sqrt(std::max(0.0, raw.density_sq[i] - raw.density[i] * raw.density[i]));
    occ += raw.density_sq[i] - raw.density[i];
    sq += raw.density_sq[i];
  }
  rep.tonks_O = occ / n;
  rep.attractive_O = sq / (static_cast<double>(n) * n);

  rep.cnn.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) rep.cnn(i, j) = raw.dens(i, j) - raw.density[i] * raw.density[j];

  if (options.rescaled_hop) {
    for (int i = 0; i < n; ++i)
      if (!(raw.density[i] > 1e-14)) {
        std::ostringstream os;
        os << "C^aa undefined: <n_" << i + 1 << "> = " << raw.density[i];
        fail(ErrorCode::DivisionGuard, os.str(), i + 1);
      }
    rep.caa.resize(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        rep.caa(i, j) = i == j ? 1.0 : raw.hop(i, j) / std::sqrt(raw.density[i] * raw.density[j]);
  }
  return rep;
}

std::vector<double> spin_correlator(const ObservableReport& report, int i0) {
  if (report.metadata.pattern != SitePattern::AlternatingOddEven)
    fail(ErrorCode::Refused, "spin mapping needs the alternating odd/even interaction pattern");
  const int n = report.n_sites();
  require(i0 >= 1 && i0 <= n, "reference site out of range");
  auto c = [](int site) { return site % 2 == 1 ? std::sqrt(3.0) : std::sqrt(2.0); };
  std::vector<double> out(n);
  for (int j = 1; j <= n; ++j) out[j - 1] = report.hop_raw(i0 - 1, j - 1) / (c(i0) * c(j));
  return out;
}

}  // namespace phbhm
