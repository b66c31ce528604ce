#include "shapeopt/physics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shapeopt/errors.hpp"

namespace shapeopt {

CoefficientField CoefficientField::piecewise_constant(std::vector<double> kappa_bar) {
  for (double k : kappa_bar)
    if (!(k > 0.0)) throw NonpositiveCoefficient("piecewise-constant coefficient must be positive");
  CoefficientField f;
  f.kappa_bar_ = std::move(kappa_bar);
  return f;
}

CoefficientField CoefficientField::realization(KlSpec spec, SampleDraw draw) {
  CoefficientField f;
  f.kappa_bar_ = spec.kappa_bar;
  f.spec_ = std::move(spec);
  f.draw_ = std::move(draw);
  return f;
}

double CoefficientField::value(Vec2 x, int subdomain) const {
  if (spec_) return evaluate_kappa(*spec_, *draw_, x, subdomain);
  return kappa_bar_.at(subdomain);
}

Vec2 CoefficientField::gradient(Vec2 x, int subdomain) const {
  if (spec_) return evaluate_kappa_gradient(*spec_, *draw_, x, subdomain);
  return {0.0, 0.0};
}

Coefficient CoefficientField::evaluator() const {
  return [this](Vec2 x, int subdomain) { return value(x, subdomain); };
}

void CellLocator::build(const TriMesh& mesh) {
  mesh_ = &mesh;
  int cells = mesh.num_cells();
  grid_ = std::clamp(static_cast<int>(std::sqrt(cells / 2.0)), 4, 128);
  bins_.assign(static_cast<std::size_t>(grid_) * grid_, {});
  for (int c = 0; c < cells; ++c) {
    const auto& t = mesh.cells[c];
    double x0 = 1.0, x1 = 0.0, y0 = 1.0, y1 = 0.0;
    for (int v : t) {
      x0 = std::min(x0, mesh.nodes[v].x);
      x1 = std::max(x1, mesh.nodes[v].x);
      y0 = std::min(y0, mesh.nodes[v].y);
      y1 = std::max(y1, mesh.nodes[v].y);
    }
    int i0 = std::clamp(static_cast<int>(x0 * grid_), 0, grid_ - 1);
    int i1 = std::clamp(static_cast<int>(x1 * grid_), 0, grid_ - 1);
    int j0 = std::clamp(static_cast<int>(y0 * grid_), 0, grid_ - 1);
    int j1 = std::clamp(static_cast<int>(y1 * grid_), 0, grid_ - 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) bins_[static_cast<std::size_t>(j) * grid_ + i].push_back(c);
  }
}

namespace {

// signed-area barycentric membership with a small slack
bool cell_contains(const TriMesh& mesh, int cell, Vec2 p) {
  const auto& t = mesh.cells[cell];
  Vec2 a = mesh.nodes[t[0]], b = mesh.nodes[t[1]], c = mesh.nodes[t[2]];
  double twice_area = cross(b - a, c - a);
  double eps = -1e-12 * twice_area;
  double w0 = cross(b - p, c - p);
  double w1 = cross(c - p, a - p);
  double w2 = cross(a - p, b - p);
  return w0 >= eps && w1 >= eps && w2 >= eps;
}

}  // namespace

int CellLocator::locate(Vec2 x) const {
  if (!mesh_) throw InvalidMesh("cell locator not built");
  const TriMesh& mesh = *mesh_;
  Vec2 p{std::clamp(x.x, 0.0, 1.0), std::clamp(x.y, 0.0, 1.0)};
  int i = std::clamp(static_cast<int>(p.x * grid_), 0, grid_ - 1);
  int j = std::clamp(static_cast<int>(p.y * grid_), 0, grid_ - 1);
  // bins hold ascending cell indices, so the first hit is the lowest index
  for (int c : bins_[static_cast<std::size_t>(j) * grid_ + i])
    if (cell_contains(mesh, c, p)) return c;
  // the point can sit on a bin boundary; check the 8 neighbors
  for (int dj = -1; dj <= 1; ++dj) {
    for (int di = -1; di <= 1; ++di) {
      int ii = i + di, jj = j + dj;
      if (ii < 0 || jj < 0 || ii >= grid_ || jj >= grid_ || (di == 0 && dj == 0)) continue;
      for (int c : bins_[static_cast<std::size_t>(jj) * grid_ + ii])
        if (cell_contains(mesh, c, p)) return c;
    }
  }
  for (int c = 0; c < mesh.num_cells(); ++c)
    if (cell_contains(mesh, c, p)) return c;
  throw InvalidMesh("point (" + std::to_string(x.x) + ", " + std::to_string(x.y) +
                    ") not found in the mesh");
}

double TargetData::value(Vec2 x) const {
  int c = locator.locate(x);
  const auto& t = mesh.cells[c];
  Vec2 a = mesh.nodes[t[0]], b = mesh.nodes[t[1]], d = mesh.nodes[t[2]];
  double twice_area = cross(b - a, d - a);
  double w0 = cross(b - x, d - x) / twice_area;
  double w1 = cross(d - x, a - x) / twice_area;
  double w2 = 1.0 - w0 - w1;
  return w0 * ybar[t[0]] + w1 * ybar[t[1]] + w2 * ybar[t[2]];
}

Vec2 TargetData::gradient(Vec2 x) const {
  int c = locator.locate(x);
  P1Gradients g = p1_gradients(mesh, c);
  const auto& t = mesh.cells[c];
  return ybar[t[0]] * g.g[0] + ybar[t[1]] * g.g[1] + ybar[t[2]] * g.g[2];
}

StateSolution solve_state(const TriMesh& mesh, const CoefficientField& kappa, double g,
                          double rtol, int max_iter) {
  SparseMatrix K = assemble_diffusion(mesh, kappa.evaluator());
  std::vector<double> rhs = assemble_boundary_load(mesh, g);
  MeanSolveResult r = solve_mean_constrained(mesh, K, rhs, rtol, max_iter);
  return {std::move(r.y), r.multiplier, r.cg};
}

ScalarField interpolate_target(const TriMesh& mesh, const TargetData& target) {
  ScalarField out(mesh.nodes.size());
  for (int n = 0; n < mesh.num_nodes(); ++n) out[n] = target.value(mesh.nodes[n]);
  return out;
}

StateSolution solve_adjoint(const TriMesh& mesh, const CoefficientField& kappa,
                            const ScalarField& y, const TargetData& target,
                            double rtol, int max_iter) {
  SparseMatrix K = assemble_diffusion(mesh, kappa.evaluator());
  SparseMatrix M = assemble_mass(mesh);
  ScalarField ybar_i = interpolate_target(mesh, target);
  std::vector<double> diff(mesh.num_nodes());
  for (int n = 0; n < mesh.num_nodes(); ++n) diff[n] = ybar_i[n] - y[n];
  std::vector<double> rhs;
  M.multiply(diff, rhs);
  MeanSolveResult r = solve_mean_constrained(mesh, K, rhs, rtol, max_iter);
  return {std::move(r.y), r.multiplier, r.cg};
}

ObjectiveValue evaluate_objective(const TriMesh& mesh, const ScalarField& y,
                                  const TargetData& target, const std::vector<double>& nu) {
  if (static_cast<int>(nu.size()) != mesh.num_shapes)
    throw ConfigError("need one perimeter weight per shape");

  ScalarField ybar_i = interpolate_target(mesh, target);
  ObjectiveValue out;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.cells[c];
    double e0 = y[t[0]] - ybar_i[t[0]];
    double e1 = y[t[1]] - ybar_i[t[1]];
    double e2 = y[t[2]] - ybar_i[t[2]];
    // exact integral of the squared P1 difference over the cell
    double q = (e0 * e0 + e1 * e1 + e2 * e2 + e0 * e1 + e0 * e2 + e1 * e2) / 6.0;
    out.tracking += 0.5 * cell_signed_area(mesh, c) * q;
  }
  for (int s = 1; s <= mesh.num_shapes; ++s) {
    double len = interface_length(mesh, s);
    out.interface_lengths.push_back(len);
    out.perimeter += nu[s - 1] * len;
  }
  out.objective = out.tracking + out.perimeter;
  return out;
}

double symmetric_difference_area(const TriMesh& mesh, int shape_id, const ShapeSpec& shape,
                                 int n) {
  CellLocator locator(mesh);
  long long mismatched = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      Vec2 p{(i + 0.5) / n, (j + 0.5) / n};
      bool in_mesh = mesh.cell_subdomain[locator.locate(p)] == shape_id;
      if (in_mesh != shape.inside(p)) ++mismatched;
    }
  }
  return static_cast<double>(mismatched) / (static_cast<double>(n) * n);
}

TargetData generate_target(int resolution, const std::vector<ShapeSpec>& shapes,
                           const std::vector<double>& kappa, double g,
                           double rtol, int max_iter) {
  if (kappa.size() != shapes.size() + 1)
    throw ConfigError("need one coefficient for the outer region plus one per shape");

  TriMesh base = build_unit_square_mesh(resolution);
  std::vector<std::vector<int>> loops;
  loops.reserve(shapes.size());
  for (const auto& s : shapes)
    loops.push_back(conforming_loop(base, [&s](Vec2 p) { return s.inside(p); }));

  TargetData target;
  target.mesh = label_subdomains(base, loops);
  CoefficientField field = CoefficientField::piecewise_constant(kappa);
  target.ybar = solve_state(target.mesh, field, g, rtol, max_iter).field;
  target.build_locator();
  return target;
}

}  // namespace shapeopt
