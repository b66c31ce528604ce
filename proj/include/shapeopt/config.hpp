#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shapeopt/deformation.hpp"
#include "shapeopt/optimizer.hpp"
#include "shapeopt/shapes.hpp"

namespace shapeopt {

// Full experiment description.  Parsed from a flat sectioned key=value text;
// see the grammar notes in the README.  Every field not listed as required
// there has the default below.
struct ExperimentConfig {
  enum class Kind { deterministic, deterministic_fixed, stochastic, robustness };

  Kind kind = Kind::deterministic;
  int iterations = 400;
  std::uint64_t seed = 1;
  std::vector<int> snapshots;

  int resolution = 48;
  int target_resolution = 48;

  std::vector<ShapeSpec> target_shapes;
  std::vector<double> target_kappa;
  std::vector<ShapeSpec> initial_shapes;
  std::vector<double> kappa;

  double g = 1000.0;
  std::vector<double> nu;

  ArmijoSettings armijo;
  StepSchedule schedule;
  int batch = 1;

  double kl_corr_len = 0.5;
  int kl_terms = 20;
  std::vector<double> kl_widths;

  DeformationSettings deformation;
  double rtol = 1e-10;
  int max_iter = 20000;

  std::vector<double> robust_kappa_min;
  std::vector<double> robust_kappa_max;

  std::string output_dir = "out";
};

// Parses and validates; all problems are collected and reported together in
// one ConfigError, each message prefixed with its line number.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Canonical form: parsing the output reproduces the config exactly.
std::string serialize_config(const ExperimentConfig& cfg);

std::string to_string(ExperimentConfig::Kind kind);

}  // namespace shapeopt
