// Command-line driver. Talks to the library only through the C interface.
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "phbhm/phbhm.h"

namespace {

enum Exit { kOk = 0, kConfigError = 1, kSolverError = 2 };

int report(phbhm_status s, const char* stage) {
  std::fprintf(stderr, "phbhm: %s failed [%s]: %s\n", stage, phbhm_status_name(s), phbhm_last_error());
  switch (s) {
    case PHBHM_ERR_CONFIG:
    case PHBHM_ERR_INFEASIBLE_SECTOR:
    case PHBHM_ERR_EMPTY_SECTOR:
    case PHBHM_ERR_IO:
    case PHBHM_ERR_REFUSED:
    case PHBHM_ERR_INVALID_INPUT:
      return kConfigError;
    default:
      return kSolverError;
  }
}

phbhm_config* load_valid(const std::string& path, int& code) {
  phbhm_config* cfg = nullptr;
  phbhm_status s = phbhm_config_load(path.c_str(), &cfg);
  if (s == PHBHM_OK) s = phbhm_config_validate(cfg);
  if (s != PHBHM_OK) {
    std::fprintf(stderr, "phbhm: invalid config %s [%s]: %s\n", path.c_str(), phbhm_status_name(s), phbhm_last_error());
    phbhm_config_free(cfg);
    code = kConfigError;
    return nullptr;
  }
  return cfg;
}

int cmd_run(const std::string& path, const std::string& out, int workers, bool validate_only) {
  int code = kOk;
  phbhm_config* cfg = load_valid(path, code);
  if (!cfg) return code;
  if (validate_only) {
    int n = 0;
    phbhm_config_point_count(cfg, &n);
    std::printf("config ok: %d point(s)\n", n);
    phbhm_config_free(cfg);
    return kOk;
  }
  phbhm_run* run = nullptr;
  const phbhm_status s = phbhm_run_config(cfg, out.empty() ? nullptr : out.c_str(), workers, 1, &run);
  phbhm_config_free(cfg);
  if (run) {
    std::printf("%d point(s), %d failed\n", phbhm_run_point_count(run), phbhm_run_failed_points(run));
    phbhm_run_free(run);
  }
  if (s == PHBHM_OK) return kOk;
  // Once the run has started, any failure other than writing output is a solver error.
  const int mapped = report(s, "run");
  return run && s != PHBHM_ERR_IO ? kSolverError : mapped;
}

int cmd_compare(const std::string& path) {
  int code = kOk;
  phbhm_config* cfg = load_valid(path, code);
  if (!cfg) return code;
  phbhm_comparison* cmp = nullptr;
  const phbhm_status s = phbhm_compare(cfg, &cmp);
  phbhm_config_free(cfg);
  if (s != PHBHM_OK) return report(s, "compare");
  std::printf("parameter,energy_ed,energy_dmrg,max_abs_energy,max_abs_density,max_abs_cnn,max_abs_caa\n");
  for (int r = 0; r < phbhm_comparison_rows(cmp); ++r) {
    double v[7];
    phbhm_comparison_row(cmp, r, v);
    std::printf("%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", v[0], v[1], v[2], v[3], v[4], v[5], v[6]);
  }
  phbhm_comparison_free(cmp);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phonon Bose-Hubbard ground states of trapped-ion chains"};
  app.require_subcommand(1);

  std::string run_config, out_dir;
  int workers = 1;
  bool validate_only = false;
  CLI::App* run = app.add_subcommand("run", "Run every sweep point of a config and write reports");
  run->add_option("config", run_config, "Config file")->required();
  run->add_option("--out", out_dir, "Output directory (overrides [output] directory)");
  run->add_option("--workers", workers, "Sweep points solved concurrently")->check(CLI::PositiveNumber);
  run->add_flag("--validate-only", validate_only, "Parse and validate, then exit");

  std::string cmp_config;
  CLI::App* cmp = app.add_subcommand("compare", "Compare exact diagonalization with DMRG (N <= 6)");
  cmp->add_option("config", cmp_config, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }
  if (*run) return cmd_run(run_config, out_dir, workers, validate_only);
  return cmd_compare(cmp_config);
}
