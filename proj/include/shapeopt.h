/* C interface of the shapeopt library.  All entry points return a status
 * code; on failure so_last_error() describes what went wrong on the calling
 * thread.  Configurations are opaque handles owned by the caller. */
#ifndef SHAPEOPT_H
#define SHAPEOPT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum so_status {
  SO_OK = 0,
  SO_ERR_CONFIG = 1, /* bad configuration or arguments */
  SO_ERR_RUNTIME = 2, /* solver or I/O failure */
  SO_ERR_MESH = 3     /* mesh became or was invalid */
} so_status;

typedef struct so_config so_config;

typedef struct so_run_summary {
  int iterations;
  double initial_objective;
  double final_objective;
  double final_grad_norm;
} so_run_summary;

const char* so_version(void);

/* Message of the most recent failure on this thread; empty when the last
 * call succeeded.  The pointer stays valid until the next library call on
 * the same thread. */
const char* so_last_error(void);

so_status so_config_load(const char* path, so_config** out);
so_status so_config_load_string(const char* text, so_config** out);
void so_config_free(so_config* cfg);

/* Overrides applied after loading. */
so_status so_config_set_seed(so_config* cfg, uint64_t seed);
so_status so_config_set_output_dir(so_config* cfg, const char* dir);
so_status so_config_set_iterations(so_config* cfg, int iterations);
so_status so_config_set_snapshots(so_config* cfg, const int* iters, size_t count);

/* Runs the configured experiment; artifacts land in the output directory.
 * summary may be NULL. */
so_status so_run(const so_config* cfg, so_run_summary* summary);

/* Writes only the target reference field (target.vtk). */
so_status so_generate_target(const so_config* cfg);

/* Writes one realization of the random coefficient (kappa_<index>.vtk). */
so_status so_sample_field(const so_config* cfg, uint64_t index);

/* Built-in numerical self checks on a mesh with `resolution` nodes per side;
 * verbose != 0 prints one line per check.  SO_OK when all pass. */
so_status so_verify(int resolution, int verbose);

#ifdef __cplusplus
}
#endif

#endif /* SHAPEOPT_H */
