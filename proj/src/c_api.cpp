#include "phbhm/phbhm.h"

#include <cstdio>
#include <exception>
#include <string>

#include "phbhm/config.hpp"
#include "phbhm/exact_diag.hpp"
#include "phbhm/runner.hpp"
#include "phbhm/sector_basis.hpp"

struct phbhm_config {
  phbhm::RunConfig cfg;
};
struct phbhm_run {
  phbhm::RunOutcome outcome;
};
struct phbhm_comparison {
  std::vector<phbhm::SolverDiscrepancy> rows;
};
struct phbhm_model {
  phbhm::BoseHubbardModel model;
};
struct phbhm_state {
  phbhm::DmrgState state;
};

namespace {

thread_local std::string g_last_error;

phbhm_status set_error(phbhm_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

phbhm_status from_code(phbhm::ErrorCode c) { return static_cast<phbhm_status>(static_cast<int>(c)); }

template <class F>
phbhm_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return PHBHM_OK;
  } catch (const phbhm::Error& e) {
    return set_error(from_code(e.code()), e.what());
  } catch (const std::exception& e) {
    return set_error(PHBHM_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(PHBHM_ERR_INTERNAL, "unknown exception");
  }
}

phbhm_status null_arg(const char* name) { return set_error(PHBHM_ERR_INVALID_INPUT, std::string(name) + " is NULL"); }

}  // namespace

extern "C" {

const char* phbhm_last_error(void) { return g_last_error.c_str(); }

const char* phbhm_status_name(phbhm_status status) {
  if (status == PHBHM_OK) return "ok";
  if (status == PHBHM_ERR_INTERNAL) return "internal";
  return phbhm::to_string(static_cast<phbhm::ErrorCode>(status));
}

const char* phbhm_version(void) { return "1.0.0"; }

phbhm_status phbhm_config_load(const char* path, phbhm_config** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new phbhm_config{phbhm::load_config(path)}; });
}

phbhm_status phbhm_config_parse(const char* text, phbhm_config** out) {
  if (!text) return null_arg("text");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new phbhm_config{phbhm::parse_config_text(text)}; });
}

phbhm_status phbhm_config_validate(const phbhm_config* config) {
  if (!config) return null_arg("config");
  return guarded([&] { config->cfg.validate(); });
}

phbhm_status phbhm_config_point_count(const phbhm_config* config, int* out) {
  if (!config) return null_arg("config");
  if (!out) return null_arg("out");
  *out = static_cast<int>(config->cfg.points().size());
  return PHBHM_OK;
}

void phbhm_config_free(phbhm_config* config) { delete config; }

phbhm_status phbhm_run_config(const phbhm_config* config, const char* out_dir, int workers, int progress,
                              phbhm_run** out) {
  if (!config) return null_arg("config");
  if (!out) return null_arg("out");
  *out = nullptr;
  phbhm_status st = guarded([&] {
    phbhm::RunOptions opts;
    opts.workers = workers;
    if (out_dir) opts.output_dir = out_dir;
    if (progress) {
      opts.on_point = [](const phbhm::PointOutcome& p) {
        if (p.error_code)
          std::fprintf(stderr, "point %d (%.6g): %s\n", p.index, p.parameter, p.error.c_str());
        else
          std::fprintf(stderr, "point %d (%.6g): E = %.12g\n", p.index, p.parameter, p.energy);
      };
    }
    *out = new phbhm_run{phbhm::run_experiment(config->cfg, opts)};
  });
  if (st != PHBHM_OK || !*out) return st;
  if (const phbhm::PointOutcome* f = (*out)->outcome.first_failure())
    return set_error(from_code(*f->error_code), "point " + std::to_string(f->index) + ": " + f->error);
  return PHBHM_OK;
}

int phbhm_run_point_count(const phbhm_run* run) { return run ? static_cast<int>(run->outcome.points.size()) : 0; }

phbhm_status phbhm_run_point_energy(const phbhm_run* run, int index, double* energy) {
  if (!run) return null_arg("run");
  if (!energy) return null_arg("energy");
  if (index < 0 || index >= phbhm_run_point_count(run)) return set_error(PHBHM_ERR_INVALID_INPUT, "index out of range");
  const auto& p = run->outcome.points[index];
  if (p.error_code) return set_error(from_code(*p.error_code), p.error);
  *energy = p.energy;
  return PHBHM_OK;
}

int phbhm_run_failed_points(const phbhm_run* run) {
  if (!run) return 0;
  int n = 0;
  for (const auto& p : run->outcome.points) n += p.error_code.has_value();
  return n;
}

void phbhm_run_free(phbhm_run* run) { delete run; }

phbhm_status phbhm_compare(const phbhm_config* config, phbhm_comparison** out) {
  if (!config) return null_arg("config");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new phbhm_comparison{phbhm::compare_solvers(config->cfg)}; });
}

int phbhm_comparison_rows(const phbhm_comparison* cmp) { return cmp ? static_cast<int>(cmp->rows.size()) : 0; }

phbhm_status phbhm_comparison_row(const phbhm_comparison* cmp, int row, double values[7]) {
  if (!cmp) return null_arg("cmp");
  if (!values) return null_arg("values");
  if (row < 0 || row >= phbhm_comparison_rows(cmp)) return set_error(PHBHM_ERR_INVALID_INPUT, "row out of range");
  const auto& r = cmp->rows[row];
  const double v[7] = {r.parameter, r.energy_ed, r.energy_dmrg, r.energy, r.density, r.cnn, r.caa};
  for (int k = 0; k < 7; ++k) values[k] = v[k];
  return PHBHM_OK;
}

void phbhm_comparison_free(phbhm_comparison* cmp) { delete cmp; }

phbhm_status phbhm_model_create(phbhm_trap trap, int n_ions, double u_over_t, int n_phonons, int n_max, int cutoff,
                                phbhm_model** out) {
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    const phbhm::ChainGeometry geo = trap == PHBHM_TRAP_PAUL ? phbhm::solve_paul_trap_positions(n_ions)
                                                             : phbhm::microtrap_positions(n_ions);
    phbhm::BuildOptions opts;
    if (cutoff > 0) opts.cutoff = cutoff;
    *out = new phbhm_model{phbhm::build_model(geo, u_over_t, n_phonons, n_max, opts)};
  });
}

phbhm_status phbhm_model_n_sites(const phbhm_model* model, int* out) {
  if (!model) return null_arg("model");
  if (!out) return null_arg("out");
  *out = model->model.n_sites;
  return PHBHM_OK;
}

phbhm_status phbhm_model_hopping(const phbhm_model* model, int i, int j, double* out) {
  if (!model) return null_arg("model");
  if (!out) return null_arg("out");
  const int n = model->model.n_sites;
  if (i < 1 || j < 1 || i > n || j > n) return set_error(PHBHM_ERR_INVALID_INPUT, "site out of range");
  *out = model->model.t(i - 1, j - 1);
  return PHBHM_OK;
}

void phbhm_model_free(phbhm_model* model) { delete model; }

phbhm_status phbhm_ed_ground_energy(const phbhm_model* model, double* energy, double* gap) {
  if (!model) return null_arg("model");
  if (!energy) return null_arg("energy");
  return guarded([&] {
    const auto& m = model->model;
    const phbhm::SectorBasis basis(m.n_sites, m.n_phonons, m.n_max);
    const phbhm::EdResult r = phbhm::ed_ground_state(m, basis, basis.dimension() >= 2 && gap ? 2 : 1);
    *energy = r.pairs[0].energy;
    if (gap) {
      if (r.pairs.size() < 2) phbhm::fail(phbhm::ErrorCode::UndefinedGap, "sector has a single state");
      *gap = r.pairs[1].energy - r.pairs[0].energy;
    }
  });
}

phbhm_status phbhm_dmrg_run(const phbhm_model* model, int kept_states, int max_sweeps, uint64_t seed,
                            phbhm_state** out) {
  if (!model) return null_arg("model");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    phbhm::DmrgConfig cfg;
    if (kept_states > 0) cfg.kept_states_m = kept_states;
    if (max_sweeps > 0) cfg.max_sweeps = max_sweeps;
    cfg.seed = seed;
    *out = new phbhm_state{phbhm::dmrg_ground_state(model->model, model->model.n_phonons, cfg)};
  });
}

phbhm_status phbhm_state_energy(const phbhm_state* state, double* energy, int* converged) {
  if (!state) return null_arg("state");
  if (!energy) return null_arg("energy");
  *energy = state->state.energy();
  if (converged) *converged = state->state.result().converged ? 1 : 0;
  return PHBHM_OK;
}

phbhm_status phbhm_state_density(const phbhm_state* state, double* out, size_t len) {
  if (!state) return null_arg("state");
  if (!out) return null_arg("out");
  return guarded([&] {
    const auto d = state->state.measure_one_point(phbhm::OnePoint::Density);
    if (len < d.size()) phbhm::fail(phbhm::ErrorCode::InvalidInput, "output buffer shorter than n_sites");
    for (size_t i = 0; i < d.size(); ++i) out[i] = d[i];
  });
}

phbhm_status phbhm_state_save(const phbhm_state* state, const char* path) {
  if (!state) return null_arg("state");
  if (!path) return null_arg("path");
  return guarded([&] { state->state.save(path); });
}

phbhm_status phbhm_state_load(const char* path, phbhm_state** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new phbhm_state{phbhm::DmrgState::load(path)}; });
}

void phbhm_state_free(phbhm_state* state) { delete state; }

}  // extern "C"
