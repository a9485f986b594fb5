#pragma once

#include <optional>
#include <string>
#include <vector>

#include "phbhm/analysis.hpp"
#include "phbhm/dmrg.hpp"
#include "phbhm/geometry.hpp"
#include "phbhm/model.hpp"

namespace phbhm {

enum class SolverMode { ED, DMRG, Both };
enum class SweepParameter { UOverT, UEvenRatio };
enum class CriticalMode { Off, Auto, Manual };

const char* to_string(SolverMode m) noexcept;

struct RunConfig {
  // [geometry]
  TrapKind trap = TrapKind::MicrotrapArray;
  int n_ions = 0;

  // [model]
  double u_over_t = 0.0;
  SweepParameter sweep = SweepParameter::UOverT;
  std::vector<double> sweep_values;  // empty: single point at the base value
  SitePattern pattern = SitePattern::Uniform;
  double u_even_ratio = 2.0;  // u_even = ratio * u_over_t for the two-valued patterns
  int n_phonons = 0;
  int n_max = 0;  // 0: ceil(6 <n>)
  std::optional<int> cutoff;
  bool flat_onsite = false;

  // [standing_wave] (optional; derives u_over_t from the laser parameters)
  std::optional<StandingWaveConfig> standing_wave;

  // [solver], [exactdiag], [dmrg]
  SolverMode solver = SolverMode::DMRG;
  int ed_threads = 0;
  DmrgConfig dmrg;
  bool save_checkpoints = false;

  // [observables]
  int i0 = 0;  // 0: default_reference_site(N)
  bool spin_correlator = false;

  // [analysis]
  bool fit_power_law = true;
  bool fit_exponential = true;
  std::optional<FitWindow> power_law_window;
  std::optional<FitWindow> exponential_window;
  CriticalMode critical = CriticalMode::Off;
  std::optional<FitWindow> critical_window;  // U range for the manual mode
  bool luttinger = false;
  double luttinger_n0 = 0.0;  // 0: N_ph / N

  // [output]
  std::string output_dir = "out";
  bool write_matrices = true;

  // [units]
  std::optional<double> beta_x;
  std::optional<double> omega_x;

  std::string source_text;  // verbatim config, embedded in reports

  int effective_n_max() const;
  std::vector<double> points() const;  // sweep values or the single base value
  // Throws Error(ConfigError / InfeasibleSector) naming the offending field.
  void validate() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace phbhm
