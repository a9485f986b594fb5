#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "phbhm/analysis.hpp"
#include "phbhm/config.hpp"
#include "phbhm/dmrg.hpp"
#include "phbhm/error.hpp"
#include "phbhm/observables.hpp"

namespace phbhm {

inline constexpr int kSummarySchemaVersion = 1;
inline constexpr int kCompareMaxSites = 6;

struct PointOutcome {
  int index = 0;
  double parameter = 0.0;  // the swept value
  double u_over_t = 0.0;
  double u_even = 0.0;  // second interaction value of a two-valued pattern
  std::uint64_t model_hash = 0;
  std::vector<double> onsite_interaction;

  std::string solver;
  double energy = 0.0;
  std::optional<double> energy_ed, energy_dmrg;
  std::optional<double> gap;
  int ground_degeneracy = 1;
  std::optional<DmrgResult> dmrg;

  std::optional<ObservableReport> report;
  std::optional<FitResult> power_law, exponential, spin_power_law;
  std::vector<std::string> warnings;

  std::optional<ErrorCode> error_code;  // set when the point failed
  std::string error;
};

struct RunOutcome {
  std::vector<PointOutcome> points;  // ordered by sweep index
  std::optional<FitResult> critical_point;
  std::optional<FitResult> luttinger;
  std::vector<std::string> warnings;

  // First failed point, if any.
  const PointOutcome* first_failure() const;
};

struct RunOptions {
  int workers = 1;
  std::string output_dir;  // empty: config value
  std::function<void(const PointOutcome&)> on_point;  // called from worker threads
};

// Geometry, model and solver for one sweep point. Solver errors are captured
// in the outcome, not thrown.
PointOutcome solve_point(const RunConfig& config, int index, const std::string& checkpoint_dir = {});

// Full pipeline: every sweep point, then cross-point analysis. Writes the
// report directory when `options.output_dir` or the config names one.
RunOutcome run_experiment(const RunConfig& config, const RunOptions& options = {});

void write_reports(const RunConfig& config, const RunOutcome& outcome, const std::string& directory);

struct SolverDiscrepancy {
  double parameter = 0.0;
  double energy_ed = 0.0, energy_dmrg = 0.0;
  double energy = 0.0, density = 0.0, cnn = 0.0, caa = 0.0;  // max absolute differences
};

// ED against DMRG on every sweep point; refused above kCompareMaxSites.
std::vector<SolverDiscrepancy> compare_solvers(const RunConfig& config);

// Number of basis states of the sector (floating point, no saturation).
double sector_dimension_estimate(int n_sites, int n_phonons, int n_max);

}  // namespace phbhm
