#include "shapeopt/experiment.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "shapeopt/errors.hpp"
#include "shapeopt/optimizer.hpp"
#include "shapeopt/physics.hpp"
#include "shapeopt/shape_calculus.hpp"
#include "shapeopt/vtk_io.hpp"

namespace fs = std::filesystem;

namespace shapeopt {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Exclusive marker file so two runs cannot write into the same directory.
class DirLock {
 public:
  explicit DirLock(const std::string& dir) : path_(dir + "/.lock") {
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      if (errno == EEXIST)
        throw IoError("output directory '" + dir +
                      "' is already in use (stale .lock? remove it to proceed)");
      throw IoError("cannot create lock file '" + path_ + "': " + std::strerror(errno));
    }
  }
  ~DirLock() {
    if (fd_ >= 0) {
      ::close(fd_);
      ::unlink(path_.c_str());
    }
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  std::string path_;
  int fd_ = -1;
};

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

TriMesh build_initial_mesh(const ExperimentConfig& cfg) {
  TriMesh mesh = build_unit_square_mesh(cfg.resolution);
  std::vector<std::vector<int>> loops;
  for (const ShapeSpec& shape : cfg.initial_shapes)
    loops.push_back(conforming_loop(mesh, [&shape](Vec2 p) { return shape.inside(p); }));
  return label_subdomains(mesh, loops);
}

void write_target_vtk(const std::string& path, const TargetData& target,
                      const std::vector<double>& kappa) {
  std::vector<double> cell_kappa(target.mesh.cells.size());
  for (int c = 0; c < target.mesh.num_cells(); ++c)
    cell_kappa[c] = kappa.at(target.mesh.cell_subdomain[c]);
  VtkExtras ex;
  ex.point_scalars.push_back({"ybar", &target.ybar});
  ex.cell_scalars.push_back({"kappa", std::move(cell_kappa)});
  write_vtk(path, target.mesh, ex);
}

void write_state_vtk(const std::string& path, const TriMesh& mesh, const GradientEval& ev) {
  VtkExtras ex;
  ex.point_scalars.push_back({"y", &ev.y});
  ex.point_scalars.push_back({"mu", &ev.mu});
  ex.point_vectors.push_back({"V", &ev.V});
  write_vtk(path, mesh, ex);
}

class CsvLog {
 public:
  explicit CsvLog(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot open '" + path + "' for writing");
    out_ << "iter,objective,tracking,perimeter,grad_norm,step,min_quality,seed\n";
  }
  void row(int iter, const StepRecord& rec, std::uint64_t seed) {
    out_ << iter << ',' << num(rec.objective) << ',' << num(rec.tracking) << ','
         << num(rec.perimeter) << ',' << num(rec.grad_norm) << ',' << num(rec.step) << ','
         << num(rec.min_quality) << ',' << seed << '\n';
  }
  void close(const std::string& path) {
    out_.close();
    if (out_.fail()) throw IoError("write to '" + path + "' failed");
  }

 private:
  std::ofstream out_;
};

struct LoopResult {
  TriMesh mesh;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  double final_grad_norm = 0.0;
};

// The descent loop shared by the three non-robustness kinds.  Logs the
// objective of the pre-step iterate each row; a trailing row records the
// final iterate with step 0.
LoopResult run_descent(const ExperimentConfig& cfg, const TargetData& target, TriMesh mesh,
                       const std::string& dir) {
  DescentContext ctx{target, cfg.nu, cfg.deformation, cfg.g, cfg.rtol, cfg.max_iter};

  CoefficientField mean_field = CoefficientField::piecewise_constant(cfg.kappa);
  bool stochastic = cfg.kind == ExperimentConfig::Kind::stochastic;
  KlSpec spec;
  if (stochastic) spec = make_kl_spec(cfg.kappa, cfg.kl_widths, cfg.kl_corr_len, cfg.kl_terms);

  auto batch_fields = [&](int iter) {
    std::vector<CoefficientField> fields;
    if (!stochastic) {
      fields.push_back(mean_field);
      return fields;
    }
    fields.reserve(cfg.batch);
    for (int s = 0; s < cfg.batch; ++s)
      fields.push_back(
          CoefficientField::realization(spec, draw_sample(spec, cfg.seed, draw_index(iter, s))));
    return fields;
  };

  std::string csv_path = dir + "/log.csv";
  CsvLog log(csv_path);
  LoopResult result;

  for (int k = 0; k < cfg.iterations; ++k) {
    bool snap = std::find(cfg.snapshots.begin(), cfg.snapshots.end(), k) != cfg.snapshots.end();
    TriMesh pre;
    if (snap) pre = mesh;

    GradientEval ev;
    StepRecord rec;
    if (cfg.kind == ExperimentConfig::Kind::deterministic)
      rec = armijo_step(mesh, mean_field, ctx, cfg.armijo, snap ? &ev : nullptr);
    else
      rec = fixed_step(mesh, batch_fields(k), cfg.schedule.at(k), ctx, snap ? &ev : nullptr);

    log.row(k, rec, cfg.seed);
    if (k == 0) result.initial_objective = rec.objective;
    if (snap) write_state_vtk(dir + "/state_" + std::to_string(k) + ".vtk", pre, ev);
  }

  // closing evaluation on the final iterate
  GradientEval ev = evaluate_direction(mesh, batch_fields(cfg.iterations), ctx);
  StepRecord rec;
  rec.objective = ev.obj.objective;
  rec.tracking = ev.obj.tracking;
  rec.perimeter = ev.obj.perimeter;
  rec.grad_norm = std::sqrt(std::max(ev.energy, 0.0));
  rec.min_quality = quality_report(mesh).min_signed_area;
  log.row(cfg.iterations, rec, cfg.seed);
  log.close(csv_path);

  write_state_vtk(dir + "/final.vtk", mesh, ev);
  if (std::find(cfg.snapshots.begin(), cfg.snapshots.end(), cfg.iterations) !=
      cfg.snapshots.end())
    write_state_vtk(dir + "/state_" + std::to_string(cfg.iterations) + ".vtk", mesh, ev);

  result.mesh = std::move(mesh);
  result.final_objective = rec.objective;
  result.final_grad_norm = rec.grad_norm;
  return result;
}

RunSummary run_robustness(const ExperimentConfig& cfg) {
  struct SubRun {
    std::string name;
    ExperimentConfig cfg;
  };
  std::vector<SubRun> subs;

  ExperimentConfig base = cfg;
  base.robust_kappa_min.clear();
  base.robust_kappa_max.clear();

  {
    ExperimentConfig c = base;
    c.kind = ExperimentConfig::Kind::stochastic;
    c.output_dir = cfg.output_dir + "/stochastic";
    subs.push_back({"stochastic", std::move(c)});
  }
  {
    ExperimentConfig c = base;
    c.kind = ExperimentConfig::Kind::deterministic;
    c.kappa = cfg.robust_kappa_min;
    c.kl_widths.clear();
    c.output_dir = cfg.output_dir + "/kappa_min";
    subs.push_back({"kappa_min", std::move(c)});
  }
  {
    ExperimentConfig c = base;
    c.kind = ExperimentConfig::Kind::deterministic;
    c.kappa = cfg.robust_kappa_max;
    c.kl_widths.clear();
    c.output_dir = cfg.output_dir + "/kappa_max";
    subs.push_back({"kappa_max", std::move(c)});
  }

  RunSummary stochastic_summary;
  for (const SubRun& sub : subs) {
    RunSummary s = run_experiment(sub.cfg);
    if (sub.name == "stochastic") stochastic_summary = s;
  }

  std::string csv_path = cfg.output_dir + "/robustness_summary.csv";
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + csv_path + "' for writing");
  out << "run,shape,symmetric_difference\n";
  for (const SubRun& sub : subs) {
    TriMesh final_mesh = read_vtk_mesh(sub.cfg.output_dir + "/final.vtk");
    for (std::size_t s = 0; s < cfg.target_shapes.size(); ++s) {
      double sd = symmetric_difference_area(final_mesh, static_cast<int>(s) + 1,
                                            cfg.target_shapes[s]);
      out << sub.name << ',' << s + 1 << ',' << num(sd) << '\n';
    }
  }
  out.close();
  if (out.fail()) throw IoError("write to '" + csv_path + "' failed");

  RunSummary summary = stochastic_summary;
  summary.output_dir = cfg.output_dir;
  return summary;
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& cfg) {
  ensure_dir(cfg.output_dir);
  DirLock lock(cfg.output_dir);

  write_text_file(cfg.output_dir + "/resolved_config.cfg", serialize_config(cfg));

  TargetData target = generate_target(cfg.target_resolution, cfg.target_shapes,
                                      cfg.target_kappa, cfg.g, cfg.rtol, cfg.max_iter);
  write_target_vtk(cfg.output_dir + "/target.vtk", target, cfg.target_kappa);

  if (cfg.kind == ExperimentConfig::Kind::robustness) return run_robustness(cfg);

  LoopResult r = run_descent(cfg, target, build_initial_mesh(cfg), cfg.output_dir);

  RunSummary summary;
  summary.iterations = cfg.iterations;
  summary.initial_objective = r.initial_objective;
  summary.final_objective = r.final_objective;
  summary.final_grad_norm = r.final_grad_norm;
  summary.output_dir = cfg.output_dir;
  return summary;
}

void write_target_artifacts(const ExperimentConfig& cfg) {
  ensure_dir(cfg.output_dir);
  TargetData target = generate_target(cfg.target_resolution, cfg.target_shapes,
                                      cfg.target_kappa, cfg.g, cfg.rtol, cfg.max_iter);
  write_target_vtk(cfg.output_dir + "/target.vtk", target, cfg.target_kappa);
}

void write_sample_field(const ExperimentConfig& cfg, std::uint64_t index) {
  if (cfg.kl_widths.empty())
    throw ConfigError("kl.widths is required to sample the random coefficient");
  ensure_dir(cfg.output_dir);

  KlSpec spec = make_kl_spec(cfg.kappa, cfg.kl_widths, cfg.kl_corr_len, cfg.kl_terms);
  SampleDraw draw = draw_sample(spec, cfg.seed, index);

  TriMesh mesh = build_initial_mesh(cfg);
  std::vector<double> cell_kappa(mesh.cells.size());
  for (int c = 0; c < mesh.num_cells(); ++c)
    cell_kappa[c] = evaluate_kappa(spec, draw, cell_centroid(mesh, c), mesh.cell_subdomain[c]);

  VtkExtras ex;
  ex.cell_scalars.push_back({"kappa", std::move(cell_kappa)});
  write_vtk(cfg.output_dir + "/kappa_" + std::to_string(index) + ".vtk", mesh, ex);
}

namespace {

// A smooth displacement test pattern that vanishes on the square boundary.
VectorField smooth_test_field(const TriMesh& mesh) {
  VectorField W(mesh.nodes.size());
  constexpr double pi = 3.14159265358979323846;
  for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
    Vec2 p = mesh.nodes[n];
    double bump = std::sin(pi * p.x) * std::sin(pi * p.y);
    W[n] = {bump * (0.6 + 0.4 * std::cos(pi * p.y)), bump * (0.3 - 0.5 * std::sin(2 * pi * p.x))};
  }
  return W;
}

// A second smooth boundary-vanishing field, used to push every interior node
// to a generic position before differentiating.
VectorField generic_shift_field(const TriMesh& mesh) {
  VectorField W(mesh.nodes.size());
  constexpr double pi = 3.14159265358979323846;
  for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
    Vec2 p = mesh.nodes[n];
    double bump = std::sin(pi * p.x) * std::sin(pi * p.y);
    W[n] = {bump * (p.y - 0.4), bump * (0.7 - p.x)};
  }
  return W;
}

}  // namespace

bool run_verification(int resolution, bool verbose) {
  bool all_ok = true;
  auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    all_ok = all_ok && ok;
    if (verbose)
      std::printf("check %-28s %s  (%s)\n", name.c_str(), ok ? "ok    " : "FAILED",
                  detail.c_str());
  };

  // 1. finite-difference consistency of the interface derivative.  The
  // objective is only piecewise smooth in the node positions: the gradient of
  // the interpolated target jumps across target-mesh edges.  Differentiating
  // at a kink is meaningless, so the comparison point must be generic: the
  // target lives on a mesh of coprime resolution (removes coincidences with
  // horizontal and vertical target edges) and the whole mesh is then nudged
  // by a smooth field (removes the remaining coincidences, e.g. nodes on the
  // main diagonal, which both structured triangulations cut along y = x).
  {
    std::vector<ShapeSpec> target_shapes{parse_shape_spec("circle 0.5 0.5 0.3")};
    std::vector<double> kappa_values{1000.0, 5000.0};
    double g = 1000.0;
    std::vector<double> nu{1e-4};

    TargetData target = generate_target(resolution + 9, target_shapes, kappa_values, g);
    CoefficientField kappa = CoefficientField::piecewise_constant(kappa_values);

    TriMesh mesh = build_unit_square_mesh(resolution);
    ShapeSpec init = parse_shape_spec("circle 0.5 0.5 0.25");
    mesh = label_subdomains(
        mesh, {conforming_loop(mesh, [&init](Vec2 p) { return init.inside(p); })});
    mesh = deform(mesh, generic_shift_field(mesh), -7e-3);

    // solves far tighter than the production tolerance so the difference
    // quotient is not dominated by solver noise
    double tight = 1e-13;
    int iters = 400000;
    auto objective_of = [&](const TriMesh& m) {
      StateSolution st = solve_state(m, kappa, g, tight, iters);
      return evaluate_objective(m, st.field, target, nu).objective;
    };
    StateSolution state = solve_state(mesh, kappa, g, tight, iters);
    StateSolution adj = solve_adjoint(mesh, kappa, state.field, target, tight, iters);
    VectorField rhs = assemble_shape_derivative({mesh, kappa, state.field, adj.field,
                                                 state.multiplier, adj.multiplier, target, nu});
    VectorField W = smooth_test_field(mesh);
    double exact = apply_functional(rhs, W);
    double j0 = objective_of(mesh);
    double rel_prev = 0.0, rel_last = 0.0;
    bool decayed = true;
    std::string detail;
    for (double t : {1e-3, 1e-4, 1e-5}) {
      double fd = (objective_of(deform(mesh, W, -t)) - j0) / t;
      double rel = std::abs(fd - exact) / std::max(std::abs(exact), 1e-14);
      if (!detail.empty()) {
        detail += ", ";
        decayed = decayed && rel < 0.5 * rel_prev;
      }
      detail += num(rel);
      rel_prev = rel;
      rel_last = rel;
    }
    report("derivative-consistency", rel_last < 1e-2 && decayed,
           "relative errors " + detail + " at steps 1e-3, 1e-4, 1e-5");

    // 2. substructured deformation solve against the monolithic one
    {
      ScalarField mu = solve_mu_field(mesh, 10.0, 25.0);
      VectorField load = apply_locality_mask(mesh, VectorField(rhs));
      VectorField mono = solve_deformation(mesh, mu, 0.0, load, 1e-12, 200000);

      std::vector<int> part(mesh.cells.size());
      double split = 2.0 / (resolution - 1);
      for (int c = 0; c < mesh.num_cells(); ++c)
        part[c] = cell_centroid(mesh, c).x < split ? 0 : 1;
      VectorField sub = solve_deformation_partitioned(mesh, mu, 0.0, load, part);

      double diff2 = 0.0, norm2 = 0.0;
      for (std::size_t n = 0; n < mono.size(); ++n) {
        Vec2 d = mono[n] - sub[n];
        diff2 += dot(d, d);
        norm2 += dot(mono[n], mono[n]);
      }
      double rel_v = std::sqrt(diff2 / std::max(norm2, 1e-300));
      report("substructured-solve", rel_v < 1e-8, "relative difference " + num(rel_v));
    }
  }

  // 3. convergence order of the potential solver against a closed-form field
  {
    constexpr double pi = 3.14159265358979323846;
    auto l2_error = [&](int res) {
      TriMesh m = build_unit_square_mesh(res);
      SparseMatrix K = assemble_diffusion(m, [](Vec2, int) { return 1.0; });
      std::vector<double> b = assemble_volume_load(m, [](Vec2 p) {
        return 2.0 * pi * pi * std::cos(pi * p.x) * std::cos(pi * p.y);
      });
      MeanSolveResult r = solve_mean_constrained(m, K, b, 1e-12, 100000);
      SparseMatrix M = assemble_mass(m);
      std::vector<double> e(m.nodes.size());
      for (std::size_t n = 0; n < e.size(); ++n)
        e[n] = r.y[n] - std::cos(pi * m.nodes[n].x) * std::cos(pi * m.nodes[n].y);
      std::vector<double> Me(e.size());
      M.multiply(e, Me);
      double err2 = 0.0;
      for (std::size_t n = 0; n < e.size(); ++n) err2 += e[n] * Me[n];
      return std::sqrt(err2);
    };
    double e1 = l2_error(9), e2 = l2_error(17), e3 = l2_error(33);
    double o1 = std::log2(e1 / e2), o2 = std::log2(e2 / e3);
    bool ok = o1 > 1.7 && o1 < 2.3 && o2 > 1.7 && o2 < 2.3;
    report("potential-convergence", ok, "orders " + num(o1) + ", " + num(o2));
  }

  return all_ok;
}

}  // namespace shapeopt
