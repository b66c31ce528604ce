// Command-line front end; talks to the library exclusively through the C API.
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shapeopt.h"

namespace {

struct ConfigDeleter {
  void operator()(so_config* c) const { so_config_free(c); }
};
using ConfigHandle = std::unique_ptr<so_config, ConfigDeleter>;

int fail(so_status status, const char* action) {
  std::fprintf(stderr, "shapeopt: %s failed: %s\n", action, so_last_error());
  return static_cast<int>(status);
}

struct CommonOpts {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
  int iterations = 0;
  bool iterations_set = false;
  std::vector<int> snapshots;
  bool snapshots_set = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_overrides) {
  cmd->add_option("-c,--config", o.config_path, "experiment configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out_dir, "override the output directory");
  if (with_overrides) {
    cmd->add_option("--seed", o.seed, "override the random seed")
        ->each([&o](const std::string&) { o.seed_set = true; });
    cmd->add_option("--iterations", o.iterations, "override the iteration count")
        ->each([&o](const std::string&) { o.iterations_set = true; });
    cmd->add_option("--snapshots", o.snapshots,
                    "comma-separated snapshot iterations (overrides the config list)")
        ->delimiter(',')
        ->each([&o](const std::string&) { o.snapshots_set = true; });
  }
}

int load_config(const CommonOpts& o, ConfigHandle& cfg) {
  so_config* raw = nullptr;
  so_status st = so_config_load(o.config_path.c_str(), &raw);
  if (st != SO_OK) return fail(st, "loading the configuration");
  cfg.reset(raw);
  if (!o.out_dir.empty()) {
    st = so_config_set_output_dir(cfg.get(), o.out_dir.c_str());
    if (st != SO_OK) return fail(st, "setting the output directory");
  }
  if (o.seed_set) {
    st = so_config_set_seed(cfg.get(), o.seed);
    if (st != SO_OK) return fail(st, "setting the seed");
  }
  if (o.iterations_set) {
    st = so_config_set_iterations(cfg.get(), o.iterations);
    if (st != SO_OK) return fail(st, "setting the iteration count");
  }
  if (o.snapshots_set) {
    st = so_config_set_snapshots(cfg.get(), o.snapshots.data(), o.snapshots.size());
    if (st != SO_OK) return fail(st, "setting the snapshot list");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interface identification by shape optimization on the unit square"};
  app.set_version_flag("--version", std::string(so_version()));
  app.require_subcommand(1);

  CommonOpts run_opts;
  CLI::App* run = app.add_subcommand("run", "run the configured experiment");
  add_common(run, run_opts, true);

  CommonOpts target_opts;
  CLI::App* target =
      app.add_subcommand("generate-target", "write only the target reference field");
  add_common(target, target_opts, false);

  CommonOpts sample_opts;
  std::uint64_t sample_draws = 1;
  CLI::App* sample =
      app.add_subcommand("sample-field", "write realizations of the random coefficient");
  add_common(sample, sample_opts, true);
  sample->add_option("--draws", sample_draws, "number of realizations to write")
      ->check(CLI::Range(1, 100000));

  int verify_resolution = 20;
  bool verify_quiet = false;
  CLI::App* verify = app.add_subcommand("verify", "run the built-in numerical self checks");
  verify->add_option("--resolution", verify_resolution, "mesh nodes per side")
      ->check(CLI::Range(5, 200));
  verify->add_flag("--quiet", verify_quiet, "suppress the per-check report");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    ConfigHandle cfg;
    if (int rc = load_config(run_opts, cfg)) return rc;
    so_run_summary summary{};
    so_status st = so_run(cfg.get(), &summary);
    if (st != SO_OK) return fail(st, "running the experiment");
    std::printf("completed %d iterations: objective %.6g -> %.6g, gradient norm %.6g\n",
                summary.iterations, summary.initial_objective, summary.final_objective,
                summary.final_grad_norm);
    return 0;
  }

  if (target->parsed()) {
    ConfigHandle cfg;
    if (int rc = load_config(target_opts, cfg)) return rc;
    so_status st = so_generate_target(cfg.get());
    if (st != SO_OK) return fail(st, "generating the target");
    std::printf("target written\n");
    return 0;
  }

  if (sample->parsed()) {
    ConfigHandle cfg;
    if (int rc = load_config(sample_opts, cfg)) return rc;
    for (std::uint64_t i = 0; i < sample_draws; ++i) {
      so_status st = so_sample_field(cfg.get(), i);
      if (st != SO_OK) return fail(st, "sampling the coefficient field");
    }
    std::printf("%" PRIu64 " realization%s written\n", sample_draws,
                sample_draws == 1 ? "" : "s");
    return 0;
  }

  so_status st = so_verify(verify_resolution, verify_quiet ? 0 : 1);
  if (st != SO_OK) return fail(st, "verification");
  std::printf("all checks passed\n");
  return 0;
}
