#include "shapeopt.h"

#include <string>

#include "shapeopt/config.hpp"
#include "shapeopt/errors.hpp"
#include "shapeopt/experiment.hpp"

struct so_config {
  shapeopt::ExperimentConfig rep;
};

namespace {

thread_local std::string g_last_error;

so_status status_of(shapeopt::ErrorCategory cat) {
  switch (cat) {
    case shapeopt::ErrorCategory::config: return SO_ERR_CONFIG;
    case shapeopt::ErrorCategory::runtime: return SO_ERR_RUNTIME;
    case shapeopt::ErrorCategory::mesh: return SO_ERR_MESH;
  }
  return SO_ERR_RUNTIME;
}

template <class Fn>
so_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return SO_OK;
  } catch (const shapeopt::Error& e) {
    g_last_error = e.what();
    return status_of(e.category);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SO_ERR_RUNTIME;
  }
}

so_status bad_argument(const char* what) {
  g_last_error = what;
  return SO_ERR_CONFIG;
}

}  // namespace

extern "C" {

const char* so_version(void) { return "1.0.0"; }

const char* so_last_error(void) { return g_last_error.c_str(); }

so_status so_config_load(const char* path, so_config** out) {
  if (!path || !out) return bad_argument("so_config_load: null argument");
  *out = nullptr;
  return guarded([&] { *out = new so_config{shapeopt::parse_config_file(path)}; });
}

so_status so_config_load_string(const char* text, so_config** out) {
  if (!text || !out) return bad_argument("so_config_load_string: null argument");
  *out = nullptr;
  return guarded([&] { *out = new so_config{shapeopt::parse_config_text(text)}; });
}

void so_config_free(so_config* cfg) { delete cfg; }

so_status so_config_set_seed(so_config* cfg, uint64_t seed) {
  if (!cfg) return bad_argument("so_config_set_seed: null config");
  cfg->rep.seed = seed;
  g_last_error.clear();
  return SO_OK;
}

so_status so_config_set_output_dir(so_config* cfg, const char* dir) {
  if (!cfg || !dir || !*dir) return bad_argument("so_config_set_output_dir: null or empty");
  cfg->rep.output_dir = dir;
  g_last_error.clear();
  return SO_OK;
}

so_status so_config_set_iterations(so_config* cfg, int iterations) {
  if (!cfg) return bad_argument("so_config_set_iterations: null config");
  if (iterations < 1) return bad_argument("so_config_set_iterations: need at least 1");
  cfg->rep.iterations = iterations;
  g_last_error.clear();
  return SO_OK;
}

so_status so_config_set_snapshots(so_config* cfg, const int* iters, size_t count) {
  if (!cfg || (count && !iters)) return bad_argument("so_config_set_snapshots: null argument");
  for (size_t i = 0; i < count; ++i)
    if (iters[i] < 0) return bad_argument("so_config_set_snapshots: negative iteration");
  cfg->rep.snapshots.assign(iters, iters + count);
  g_last_error.clear();
  return SO_OK;
}

so_status so_run(const so_config* cfg, so_run_summary* summary) {
  if (!cfg) return bad_argument("so_run: null config");
  return guarded([&] {
    shapeopt::RunSummary s = shapeopt::run_experiment(cfg->rep);
    if (summary) {
      summary->iterations = s.iterations;
      summary->initial_objective = s.initial_objective;
      summary->final_objective = s.final_objective;
      summary->final_grad_norm = s.final_grad_norm;
    }
  });
}

so_status so_generate_target(const so_config* cfg) {
  if (!cfg) return bad_argument("so_generate_target: null config");
  return guarded([&] { shapeopt::write_target_artifacts(cfg->rep); });
}

so_status so_sample_field(const so_config* cfg, uint64_t index) {
  if (!cfg) return bad_argument("so_sample_field: null config");
  return guarded([&] { shapeopt::write_sample_field(cfg->rep, index); });
}

so_status so_verify(int resolution, int verbose) {
  if (resolution < 5) return bad_argument("so_verify: resolution must be at least 5");
  return guarded([&] {
    if (!shapeopt::run_verification(resolution, verbose != 0))
      throw shapeopt::SolverDivergence("one or more self checks failed");
  });
}

}  // extern "C"
