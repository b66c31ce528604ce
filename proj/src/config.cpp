#include "shapeopt/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct RawEntry {
  std::string value;
  int line = 0;
  bool used = false;
};

class Parser {
 public:
  explicit Parser(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') {
          fail(lineno, "unterminated section header");
          continue;
        }
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) fail(lineno, "empty section name");
        continue;
      }
      std::size_t eq = line.find('=');
      if (eq == std::string::npos) {
        fail(lineno, "expected key = value");
        continue;
      }
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key.empty()) {
        fail(lineno, "empty key");
        continue;
      }
      if (section.empty()) {
        fail(lineno, "key '" + key + "' appears before any [section]");
        continue;
      }
      std::string full = section + "." + key;
      if (entries_.count(full)) {
        fail(lineno, "duplicate key '" + full + "' (first at line " +
                         std::to_string(entries_[full].line) + ")");
        continue;
      }
      entries_[full] = {value, lineno, false};
    }
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  const RawEntry* take(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  void fail(int line, const std::string& msg) {
    errors_.push_back("line " + std::to_string(line) + ": " + msg);
  }
  void fail(const std::string& msg) { errors_.push_back(msg); }

  void require_all_used() {
    for (const auto& [key, e] : entries_)
      if (!e.used) fail(e.line, "unknown key '" + key + "'");
  }

  void finish() {
    if (errors_.empty()) return;
    std::string joined = "invalid config (" + std::to_string(errors_.size()) + " problems):";
    for (const auto& e : errors_) joined += "\n  " + e;
    throw ConfigError(joined);
  }

  // typed accessors; on parse failure they record an error and leave the
  // destination untouched
  void get_int(const std::string& key, int& dst, int lo, int hi) {
    const RawEntry* e = take(key);
    if (!e) return;
    try {
      std::size_t pos = 0;
      long v = std::stol(e->value, &pos);
      if (pos != e->value.size()) throw std::invalid_argument("");
      if (v < lo || v > hi) {
        fail(e->line, key + ": value " + std::to_string(v) + " outside [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return;
      }
      dst = static_cast<int>(v);
    } catch (const std::exception&) {
      fail(e->line, key + ": '" + e->value + "' is not an integer");
    }
  }

  void get_uint64(const std::string& key, std::uint64_t& dst) {
    const RawEntry* e = take(key);
    if (!e) return;
    try {
      std::size_t pos = 0;
      unsigned long long v = std::stoull(e->value, &pos);
      if (pos != e->value.size()) throw std::invalid_argument("");
      dst = v;
    } catch (const std::exception&) {
      fail(e->line, key + ": '" + e->value + "' is not a nonnegative integer");
    }
  }

  void get_double(const std::string& key, double& dst, double lo, double hi,
                  bool lo_strict = false) {
    const RawEntry* e = take(key);
    if (!e) return;
    try {
      std::size_t pos = 0;
      double v = std::stod(e->value, &pos);
      if (pos != e->value.size()) throw std::invalid_argument("");
      bool ok = lo_strict ? (v > lo) : (v >= lo);
      if (!ok || v > hi) {
        fail(e->line, key + ": value " + e->value + " outside " +
                          (lo_strict ? "(" : "[") + num(lo) + ", " + num(hi) + "]");
        return;
      }
      dst = v;
    } catch (const std::exception&) {
      fail(e->line, key + ": '" + e->value + "' is not a number");
    }
  }

  void get_bool(const std::string& key, bool& dst) {
    const RawEntry* e = take(key);
    if (!e) return;
    if (e->value == "true") dst = true;
    else if (e->value == "false") dst = false;
    else fail(e->line, key + ": '" + e->value + "' is not true/false");
  }

  void get_double_list(const std::string& key, std::vector<double>& dst) {
    const RawEntry* e = take(key);
    if (!e) return;
    std::istringstream in(e->value);
    std::vector<double> vals;
    double v;
    while (in >> v) vals.push_back(v);
    if (!in.eof() || vals.empty()) {
      fail(e->line, key + ": '" + e->value + "' is not a list of numbers");
      return;
    }
    dst = std::move(vals);
  }

  void get_int_list(const std::string& key, std::vector<int>& dst) {
    const RawEntry* e = take(key);
    if (!e) return;
    std::istringstream in(e->value);
    std::vector<int> vals;
    int v;
    while (in >> v) vals.push_back(v);
    if (!in.eof()) {
      fail(e->line, key + ": '" + e->value + "' is not a list of integers");
      return;
    }
    dst = std::move(vals);
  }

  void get_string(const std::string& key, std::string& dst) {
    const RawEntry* e = take(key);
    if (!e) return;
    if (e->value.empty()) {
      fail(e->line, key + ": empty value");
      return;
    }
    dst = e->value;
  }

  void get_shapes(const std::string& section, std::vector<ShapeSpec>& dst) {
    std::vector<ShapeSpec> shapes;
    for (int i = 1;; ++i) {
      std::string key = section + ".shape" + std::to_string(i);
      const RawEntry* e = take(key);
      if (!e) break;
      try {
        shapes.push_back(parse_shape_spec(e->value));
      } catch (const ConfigError& err) {
        fail(e->line, key + ": " + err.what());
      }
    }
    if (!shapes.empty()) dst = std::move(shapes);
  }

  void require(const std::string& key, const std::string& what) {
    if (!entries_.count(key)) fail("missing required key '" + key + "' (" + what + ")");
  }

 private:
  std::map<std::string, RawEntry> entries_;
  std::vector<std::string> errors_;
};

}  // namespace

std::string to_string(ExperimentConfig::Kind kind) {
  switch (kind) {
    case ExperimentConfig::Kind::deterministic: return "deterministic";
    case ExperimentConfig::Kind::deterministic_fixed: return "deterministic-fixed";
    case ExperimentConfig::Kind::stochastic: return "stochastic";
    case ExperimentConfig::Kind::robustness: return "robustness";
  }
  return {};
}

ExperimentConfig parse_config_text(const std::string& text) {
  Parser p(text);
  ExperimentConfig cfg;

  p.require("experiment.kind", "deterministic | deterministic-fixed | stochastic | robustness");
  p.require("target.shape1", "at least one target shape");
  p.require("initial.shape1", "at least one initial shape");
  p.require("target.kappa", "coefficients on the target configuration");
  p.require("initial.kappa", "coefficients used by the optimization");
  p.require("problem.g", "boundary flux");
  p.require("problem.nu", "perimeter weights");

  if (const RawEntry* e = p.take("experiment.kind")) {
    if (e->value == "deterministic") cfg.kind = ExperimentConfig::Kind::deterministic;
    else if (e->value == "deterministic-fixed") cfg.kind = ExperimentConfig::Kind::deterministic_fixed;
    else if (e->value == "stochastic") cfg.kind = ExperimentConfig::Kind::stochastic;
    else if (e->value == "robustness") cfg.kind = ExperimentConfig::Kind::robustness;
    else p.fail(e->line, "experiment.kind: unknown kind '" + e->value + "'");
  }
  p.get_int("experiment.iterations", cfg.iterations, 1, 1000000);
  p.get_uint64("experiment.seed", cfg.seed);
  p.get_int_list("experiment.snapshots", cfg.snapshots);

  p.get_int("mesh.resolution", cfg.resolution, 2, 4096);
  p.get_int("target.resolution", cfg.target_resolution, 2, 4096);

  p.get_shapes("target", cfg.target_shapes);
  p.get_double_list("target.kappa", cfg.target_kappa);
  p.get_shapes("initial", cfg.initial_shapes);
  p.get_double_list("initial.kappa", cfg.kappa);

  p.get_double("problem.g", cfg.g, -1e12, 1e12);
  p.get_double_list("problem.nu", cfg.nu);

  p.get_double("armijo.alpha_hat", cfg.armijo.alpha_hat, 0.0, 1e6, true);
  p.get_double("armijo.rho", cfg.armijo.rho, 0.0, 1.0, true);
  p.get_double("armijo.sigma", cfg.armijo.sigma, 0.0, 1.0, true);
  p.get_int("armijo.max_backtracks", cfg.armijo.max_backtracks, 1, 1000);
  p.get_bool("armijo.scale_alpha", cfg.armijo.scale_by_diameter);

  if (const RawEntry* e = p.take("schedule.kind")) {
    if (e->value == "constant") cfg.schedule.kind = StepSchedule::Kind::constant;
    else if (e->value == "robbins-monro") cfg.schedule.kind = StepSchedule::Kind::inverse;
    else if (e->value == "warm-start") cfg.schedule.kind = StepSchedule::Kind::warm_inverse;
    else p.fail(e->line, "schedule.kind: unknown kind '" + e->value + "'");
  }
  p.get_double("schedule.c", cfg.schedule.c, 0.0, 1e6, true);
  p.get_int("schedule.warm_iters", cfg.schedule.warm_iters, 0, 1000000);
  p.get_int("schedule.batch", cfg.batch, 1, 65536);

  p.get_double("kl.correlation_length", cfg.kl_corr_len, 0.0, 100.0, true);
  p.get_int("kl.terms", cfg.kl_terms, 1, 4096);
  p.get_double_list("kl.widths", cfg.kl_widths);

  p.get_double("deformation.mu_min", cfg.deformation.mu_min, 0.0, 1e12, true);
  p.get_double("deformation.mu_max", cfg.deformation.mu_max, 0.0, 1e12, true);
  p.get_double("deformation.lambda", cfg.deformation.lambda, 0.0, 1e12);

  p.get_double("solver.rtol", cfg.rtol, 0.0, 1e-2, true);
  p.get_int("solver.max_iter", cfg.max_iter, 100, 100000000);
  cfg.deformation.rtol = cfg.rtol;
  cfg.deformation.max_iter = cfg.max_iter;

  p.get_double_list("robustness.kappa_min", cfg.robust_kappa_min);
  p.get_double_list("robustness.kappa_max", cfg.robust_kappa_max);

  p.get_string("output.directory", cfg.output_dir);

  p.require_all_used();

  // cross-field consistency
  std::size_t n_shapes = cfg.target_shapes.size();
  if (!cfg.initial_shapes.empty() && cfg.initial_shapes.size() != n_shapes)
    p.fail("initial.shape*: " + std::to_string(cfg.initial_shapes.size()) +
           " shapes but target has " + std::to_string(n_shapes));
  auto check_kappa = [&](const std::vector<double>& k, const std::string& key, bool required) {
    if (k.empty()) return;
    if (n_shapes && k.size() != n_shapes + 1)
      p.fail(key + ": need " + std::to_string(n_shapes + 1) +
             " values (outer region first), got " + std::to_string(k.size()));
    for (double v : k)
      if (!(v > 0.0)) p.fail(key + ": coefficients must be positive");
    (void)required;
  };
  check_kappa(cfg.target_kappa, "target.kappa", true);
  check_kappa(cfg.kappa, "initial.kappa", true);
  if (n_shapes && !cfg.nu.empty() && cfg.nu.size() != n_shapes)
    p.fail("problem.nu: need one weight per shape (" + std::to_string(n_shapes) + ")");
  for (double v : cfg.nu)
    if (v < 0.0) p.fail("problem.nu: weights must be nonnegative");

  if (cfg.deformation.mu_max < cfg.deformation.mu_min)
    p.fail("deformation.mu_max is below deformation.mu_min");

  bool needs_kl = cfg.kind == ExperimentConfig::Kind::stochastic ||
                  cfg.kind == ExperimentConfig::Kind::robustness;
  if (needs_kl) {
    if (cfg.kl_widths.empty())
      p.fail("missing required key 'kl.widths' (" + to_string(cfg.kind) + " run)");
    else if (n_shapes && cfg.kl_widths.size() != n_shapes + 1)
      p.fail("kl.widths: need " + std::to_string(n_shapes + 1) + " values, got " +
             std::to_string(cfg.kl_widths.size()));
  }
  if (cfg.kind == ExperimentConfig::Kind::robustness) {
    if (cfg.robust_kappa_min.empty())
      p.fail("missing required key 'robustness.kappa_min' (robustness run)");
    if (cfg.robust_kappa_max.empty())
      p.fail("missing required key 'robustness.kappa_max' (robustness run)");
    check_kappa(cfg.robust_kappa_min, "robustness.kappa_min", false);
    check_kappa(cfg.robust_kappa_max, "robustness.kappa_max", false);
  }
  for (int s : cfg.snapshots)
    if (s < 0 || s > cfg.iterations)
      p.fail("experiment.snapshots: iteration " + std::to_string(s) + " outside [0, " +
             std::to_string(cfg.iterations) + "]");

  p.finish();
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + num(v[i]);
    return s;
  };

  out << "[experiment]\n";
  out << "kind = " << to_string(cfg.kind) << "\n";
  out << "iterations = " << cfg.iterations << "\n";
  out << "seed = " << cfg.seed << "\n";
  if (!cfg.snapshots.empty()) {
    out << "snapshots =";
    for (int s : cfg.snapshots) out << " " << s;
    out << "\n";
  }
  out << "\n[mesh]\n";
  out << "resolution = " << cfg.resolution << "\n";
  out << "\n[target]\n";
  out << "resolution = " << cfg.target_resolution << "\n";
  for (std::size_t i = 0; i < cfg.target_shapes.size(); ++i)
    out << "shape" << i + 1 << " = " << format_shape_spec(cfg.target_shapes[i]) << "\n";
  out << "kappa = " << list(cfg.target_kappa) << "\n";
  out << "\n[initial]\n";
  for (std::size_t i = 0; i < cfg.initial_shapes.size(); ++i)
    out << "shape" << i + 1 << " = " << format_shape_spec(cfg.initial_shapes[i]) << "\n";
  out << "kappa = " << list(cfg.kappa) << "\n";
  out << "\n[problem]\n";
  out << "g = " << num(cfg.g) << "\n";
  out << "nu = " << list(cfg.nu) << "\n";
  out << "\n[armijo]\n";
  out << "alpha_hat = " << num(cfg.armijo.alpha_hat) << "\n";
  out << "rho = " << num(cfg.armijo.rho) << "\n";
  out << "sigma = " << num(cfg.armijo.sigma) << "\n";
  out << "max_backtracks = " << cfg.armijo.max_backtracks << "\n";
  out << "scale_alpha = " << (cfg.armijo.scale_by_diameter ? "true" : "false") << "\n";
  out << "\n[schedule]\n";
  out << "kind = "
      << (cfg.schedule.kind == StepSchedule::Kind::constant
              ? "constant"
              : cfg.schedule.kind == StepSchedule::Kind::inverse ? "robbins-monro" : "warm-start")
      << "\n";
  out << "c = " << num(cfg.schedule.c) << "\n";
  out << "warm_iters = " << cfg.schedule.warm_iters << "\n";
  out << "batch = " << cfg.batch << "\n";
  out << "\n[kl]\n";
  out << "correlation_length = " << num(cfg.kl_corr_len) << "\n";
  out << "terms = " << cfg.kl_terms << "\n";
  if (!cfg.kl_widths.empty()) out << "widths = " << list(cfg.kl_widths) << "\n";
  out << "\n[deformation]\n";
  out << "mu_min = " << num(cfg.deformation.mu_min) << "\n";
  out << "mu_max = " << num(cfg.deformation.mu_max) << "\n";
  out << "lambda = " << num(cfg.deformation.lambda) << "\n";
  out << "\n[solver]\n";
  out << "rtol = " << num(cfg.rtol) << "\n";
  out << "max_iter = " << cfg.max_iter << "\n";
  if (!cfg.robust_kappa_min.empty() || !cfg.robust_kappa_max.empty()) {
    out << "\n[robustness]\n";
    if (!cfg.robust_kappa_min.empty()) out << "kappa_min = " << list(cfg.robust_kappa_min) << "\n";
    if (!cfg.robust_kappa_max.empty()) out << "kappa_max = " << list(cfg.robust_kappa_max) << "\n";
  }
  out << "\n[output]\n";
  out << "directory = " << cfg.output_dir << "\n";
  return out.str();
}

}  // namespace shapeopt
