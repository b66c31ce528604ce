#pragma once

#include <cstdint>
#include <string>

#include "shapeopt/config.hpp"

namespace shapeopt {

struct RunSummary {
  int iterations = 0;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  double final_grad_norm = 0.0;
  std::string output_dir;
};

// Runs the configured experiment and writes every artifact under
// cfg.output_dir: resolved_config.cfg, target.vtk, log.csv, requested
// state_<k>.vtk snapshots, and final.vtk.  Robustness runs produce three
// sub-runs (stochastic/, kappa_min/, kappa_max/) plus robustness_summary.csv.
// The directory is guarded by a .lock file for the duration of the run.
RunSummary run_experiment(const ExperimentConfig& cfg);

// Writes only the target configuration (target.vtk) for inspection.
void write_target_artifacts(const ExperimentConfig& cfg);

// Writes one realization of the random coefficient on the labeled initial
// mesh as kappa_<index>.vtk (cell data, evaluated at centroids).
void write_sample_field(const ExperimentConfig& cfg, std::uint64_t index);

// Built-in self checks: finite-difference consistency of the shape
// derivative, substructured vs monolithic deformation solve, and the
// convergence order of the potential solver.  Returns true when all pass;
// prints one line per check when verbose.
bool run_verification(int resolution, bool verbose);

}  // namespace shapeopt
