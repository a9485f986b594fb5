#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phbhm/dmrg.hpp"
#include "phbhm/measurements.hpp"
#include "phbhm/model.hpp"

namespace phbhm {

struct ReportMetadata {
  std::uint64_t model_hash = 0;
  std::string solver;  // "ed" or "dmrg"
  bool converged = true;
  bool near_degenerate = false;
  SitePattern pattern = SitePattern::Uniform;
  std::vector<std::string> warnings;
};

struct ObservableReport {
  std::vector<double> density;
  std::vector<double> fluctuations;  // sqrt(<n^2> - <n>^2)
  Eigen::MatrixXd caa;               // <a+_i a_j> / sqrt(<n_i><n_j>)
  Eigen::MatrixXd cnn;               // <n_i n_j> - <n_i><n_j>
  Eigen::MatrixXd hop_raw;
  Eigen::MatrixXd dens_raw;
  double tonks_O = 0.0;      // sum <n_i (n_i - 1)> / N
  double attractive_O = 0.0; // sum <n_i^2> / N^2
  std::optional<std::vector<double>> spin_corr;
  ReportMetadata metadata;

  int n_sites() const { return static_cast<int>(density.size()); }
};

struct ReportOptions {
  bool rescaled_hop = true;  // compute C^aa (needs <n_i> > 0 everywhere)
};

// Samples every one- and two-point function from a DMRG state.
RawMeasurements measure_all(const DmrgState& state);

ObservableReport build_report(const RawMeasurements& raw, const ReportMetadata& metadata,
                              const ReportOptions& options = {});

// Two-level spin reading of the alternating-interaction model at filling 2:
// <s+_{i0} s-_j> = <a+_{i0} a_j> / (c_{i0} c_j), c = sqrt(3) on odd sites and
// sqrt(2) on even sites (1-based). Refused unless the model used that pattern.
std::vector<double> spin_correlator(const ObservableReport& report, int i0);

// Reference site used by the fits: ceil(N/2) + 1 (1-based).
inline int default_reference_site(int n) { return (n + 1) / 2 + 1; }

}  // namespace phbhm
