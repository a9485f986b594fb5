/* C interface to the phonon Bose-Hubbard solver library.
 *
 * Every function returns a phbhm_status. On failure a message for the
 * calling thread is available from phbhm_last_error() until the next call.
 * Handles are opaque and must be released with the matching *_free(). */
#ifndef PHBHM_H
#define PHBHM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define PHBHM_API __declspec(dllexport)
#else
#define PHBHM_API __attribute__((visibility("default")))
#endif

typedef enum phbhm_status {
  PHBHM_OK = 0,
  PHBHM_ERR_INVALID_INPUT = 1,
  PHBHM_ERR_NOT_CONVERGED = 2,
  PHBHM_ERR_INFEASIBLE_SECTOR = 3,
  PHBHM_ERR_EMPTY_SECTOR = 4,
  PHBHM_ERR_TRAP_DESTABILIZED = 5,
  PHBHM_ERR_UNDEFINED_GAP = 6,
  PHBHM_ERR_DIVISION_GUARD = 7,
  PHBHM_ERR_NOT_DECAYING = 8,
  PHBHM_ERR_INVALID_REGIME = 9,
  PHBHM_ERR_REFUSED = 10,
  PHBHM_ERR_CONFIG = 11,
  PHBHM_ERR_IO = 12,
  PHBHM_ERR_INTERNAL = 100
} phbhm_status;

typedef enum phbhm_trap { PHBHM_TRAP_PAUL = 0, PHBHM_TRAP_MICROTRAP = 1 } phbhm_trap;

typedef struct phbhm_config phbhm_config;
typedef struct phbhm_run phbhm_run;
typedef struct phbhm_comparison phbhm_comparison;
typedef struct phbhm_model phbhm_model;
typedef struct phbhm_state phbhm_state;

PHBHM_API const char* phbhm_last_error(void);
PHBHM_API const char* phbhm_status_name(phbhm_status status);
PHBHM_API const char* phbhm_version(void);

/* Configuration files. */
PHBHM_API phbhm_status phbhm_config_load(const char* path, phbhm_config** out);
PHBHM_API phbhm_status phbhm_config_parse(const char* text, phbhm_config** out);
PHBHM_API phbhm_status phbhm_config_validate(const phbhm_config* config);
PHBHM_API phbhm_status phbhm_config_point_count(const phbhm_config* config, int* out);
PHBHM_API void phbhm_config_free(phbhm_config* config);

/* Runs every sweep point and writes the report directory (out_dir may be
 * NULL to use the configured one). A handle is returned whenever the run got
 * past validation, also if some points failed; the status is then the first
 * point error. */
PHBHM_API phbhm_status phbhm_run_config(const phbhm_config* config, const char* out_dir, int workers, int progress,
                                        phbhm_run** out);
PHBHM_API int phbhm_run_point_count(const phbhm_run* run);
PHBHM_API phbhm_status phbhm_run_point_energy(const phbhm_run* run, int index, double* energy);
PHBHM_API int phbhm_run_failed_points(const phbhm_run* run);
PHBHM_API void phbhm_run_free(phbhm_run* run);

/* ED against DMRG on each sweep point (N <= 6). */
PHBHM_API phbhm_status phbhm_compare(const phbhm_config* config, phbhm_comparison** out);
PHBHM_API int phbhm_comparison_rows(const phbhm_comparison* cmp);
/* values: parameter, E_ed, E_dmrg, |dE|, max |d density|, max |d C^nn|, max |d C^aa| */
PHBHM_API phbhm_status phbhm_comparison_row(const phbhm_comparison* cmp, int row, double values[7]);
PHBHM_API void phbhm_comparison_free(phbhm_comparison* cmp);

/* Direct model and solver access. cutoff <= 0 keeps the full hopping range. */
PHBHM_API phbhm_status phbhm_model_create(phbhm_trap trap, int n_ions, double u_over_t, int n_phonons, int n_max,
                                          int cutoff, phbhm_model** out);
PHBHM_API phbhm_status phbhm_model_n_sites(const phbhm_model* model, int* out);
PHBHM_API phbhm_status phbhm_model_hopping(const phbhm_model* model, int i, int j, double* out);
PHBHM_API void phbhm_model_free(phbhm_model* model);

PHBHM_API phbhm_status phbhm_ed_ground_energy(const phbhm_model* model, double* energy, double* gap);
PHBHM_API phbhm_status phbhm_dmrg_run(const phbhm_model* model, int kept_states, int max_sweeps, uint64_t seed,
                                      phbhm_state** out);
PHBHM_API phbhm_status phbhm_state_energy(const phbhm_state* state, double* energy, int* converged);
/* Writes n_sites values of <n_i>. */
PHBHM_API phbhm_status phbhm_state_density(const phbhm_state* state, double* out, size_t len);
PHBHM_API phbhm_status phbhm_state_save(const phbhm_state* state, const char* path);
PHBHM_API phbhm_status phbhm_state_load(const char* path, phbhm_state** out);
PHBHM_API void phbhm_state_free(phbhm_state* state);

#ifdef __cplusplus
}
#endif

#endif /* PHBHM_H */
