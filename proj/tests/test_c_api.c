/* Exercises the C interface from plain C. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "phbhm/phbhm.h"

static int failures = 0;

#define CHECK(cond)                                                  \
  do {                                                               \
    if (!(cond)) {                                                   \
      fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                    \
    }                                                                \
  } while (0)

int main(void) {
  /* Parse errors come back as status codes with a message. */
  phbhm_config* cfg = NULL;
  CHECK(phbhm_config_parse("[geometry]\nn_ions = 3\nbogus = 1\n", &cfg) == PHBHM_ERR_CONFIG);
  CHECK(cfg == NULL);
  CHECK(strstr(phbhm_last_error(), "geometry.bogus") != NULL);
  CHECK(phbhm_config_load("/nonexistent/phbhm.ini", &cfg) == PHBHM_ERR_CONFIG);

  CHECK(phbhm_config_parse("[geometry]\nn_ions = 3\n[model]\nn_phonons = 9\nn_max = 2\n", &cfg) == PHBHM_OK);
  CHECK(phbhm_config_validate(cfg) == PHBHM_ERR_INFEASIBLE_SECTOR);
  phbhm_config_free(cfg);

  /* Model, ED and DMRG through handles. */
  phbhm_model* model = NULL;
  CHECK(phbhm_model_create(PHBHM_TRAP_MICROTRAP, 4, 1.5, 4, 4, 0, &model) == PHBHM_OK);
  int n = 0;
  CHECK(phbhm_model_n_sites(model, &n) == PHBHM_OK && n == 4);
  double t12 = 0.0, t13 = 0.0;
  CHECK(phbhm_model_hopping(model, 1, 2, &t12) == PHBHM_OK && fabs(t12 - 1.0) < 1e-14);
  CHECK(phbhm_model_hopping(model, 1, 3, &t13) == PHBHM_OK && fabs(t13 - 0.125) < 1e-14);
  CHECK(phbhm_model_hopping(model, 0, 3, &t13) == PHBHM_ERR_INVALID_INPUT);

  double e_ed = 0.0, gap = 0.0;
  CHECK(phbhm_ed_ground_energy(model, &e_ed, &gap) == PHBHM_OK);
  CHECK(gap > 0.0);

  phbhm_state* state = NULL;
  CHECK(phbhm_dmrg_run(model, 50, 0, 3, &state) == PHBHM_OK);
  double e_dmrg = 0.0;
  int converged = 0;
  CHECK(phbhm_state_energy(state, &e_dmrg, &converged) == PHBHM_OK);
  CHECK(converged == 1);
  CHECK(fabs(e_dmrg - e_ed) < 1e-8);

  double density[4], total = 0.0;
  CHECK(phbhm_state_density(state, density, 4) == PHBHM_OK);
  for (int i = 0; i < 4; ++i) total += density[i];
  CHECK(fabs(total - 4.0) < 1e-8);
  CHECK(phbhm_state_density(state, density, 2) == PHBHM_ERR_INVALID_INPUT);

  const char* ckpt = "phbhm_c_api_test.ckpt";
  CHECK(phbhm_state_save(state, ckpt) == PHBHM_OK);
  phbhm_state* loaded = NULL;
  CHECK(phbhm_state_load(ckpt, &loaded) == PHBHM_OK);
  double e_loaded = 0.0;
  CHECK(phbhm_state_energy(loaded, &e_loaded, NULL) == PHBHM_OK && e_loaded == e_dmrg);
  remove(ckpt);
  phbhm_state_free(loaded);
  phbhm_state_free(state);
  phbhm_model_free(model);

  /* Comparison table. */
  CHECK(phbhm_config_parse("[geometry]\nn_ions = 3\n[model]\nsweep_values = 0, 4\nn_phonons = 3\nn_max = 3\n", &cfg) ==
        PHBHM_OK);
  phbhm_comparison* cmp = NULL;
  CHECK(phbhm_compare(cfg, &cmp) == PHBHM_OK);
  CHECK(phbhm_comparison_rows(cmp) == 2);
  double row[7];
  CHECK(phbhm_comparison_row(cmp, 1, row) == PHBHM_OK);
  CHECK(row[0] == 4.0 && row[3] < 1e-8);
  CHECK(phbhm_comparison_row(cmp, 2, row) == PHBHM_ERR_INVALID_INPUT);
  phbhm_comparison_free(cmp);
  phbhm_config_free(cfg);

  CHECK(strcmp(phbhm_status_name(PHBHM_ERR_REFUSED), "refused") == 0);
  CHECK(strcmp(phbhm_status_name(PHBHM_OK), "ok") == 0);
  if (failures) fprintf(stderr, "%d failure(s)\n", failures);
  return failures ? EXIT_FAILURE : EXIT_SUCCESS;
}
