#pragma once

#include <optional>
#include <vector>

#include "shapeopt/fem.hpp"
#include "shapeopt/fields.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/randomfield.hpp"
#include "shapeopt/shapes.hpp"

namespace shapeopt {

// Diffusion coefficient, either piecewise constant per subdomain or one
// realization of the truncated expansion.  Both variants share the same
// evaluation code so that a zero-width random field reproduces the constant
// field bit for bit.
class CoefficientField {
 public:
  static CoefficientField piecewise_constant(std::vector<double> kappa_bar);
  static CoefficientField realization(KlSpec spec, SampleDraw draw);

  double value(Vec2 x, int subdomain) const;
  Vec2 gradient(Vec2 x, int subdomain) const;
  Coefficient evaluator() const;  // adapter for the assembly routines
  int num_subdomains() const { return static_cast<int>(kappa_bar_.size()); }

 private:
  std::vector<double> kappa_bar_;
  std::optional<KlSpec> spec_;
  std::optional<SampleDraw> draw_;
};

// Uniform-grid point location on a mesh covering the unit square.  Queries
// are clamped into the square; on ties the lowest cell index wins.
class CellLocator {
 public:
  CellLocator() = default;
  explicit CellLocator(const TriMesh& mesh) { build(mesh); }
  void build(const TriMesh& mesh);
  int locate(Vec2 x) const;
  bool ready() const { return mesh_ != nullptr; }

 private:
  const TriMesh* mesh_ = nullptr;
  int grid_ = 0;
  std::vector<std::vector<int>> bins_;
};

// Reference configuration: the labeled target mesh, the state solved on it,
// and a cell locator so the field can be evaluated anywhere in the square.
struct TargetData {
  TriMesh mesh;
  ScalarField ybar;

  void build_locator() { locator.build(mesh); }
  double value(Vec2 x) const;   // P1 interpolation of ybar
  Vec2 gradient(Vec2 x) const;  // elementwise gradient of the containing cell

  CellLocator locator;
};

struct StateSolution {
  ScalarField field;
  double multiplier = 0.0;  // mean-constraint multiplier of the solve
  CgStats cg;
};

// Potential equation: kappa grad y . grad v integrated over the square equals
// the boundary flux term g v, for all mean-free v.
StateSolution solve_state(const TriMesh& mesh, const CoefficientField& kappa, double g,
                          double rtol = 1e-10, int max_iter = 20000);

// Adjoint of the tracking term: kappa grad p . grad v = (ybar - y) v.
StateSolution solve_adjoint(const TriMesh& mesh, const CoefficientField& kappa,
                            const ScalarField& y, const TargetData& target,
                            double rtol = 1e-10, int max_iter = 20000);

ScalarField interpolate_target(const TriMesh& mesh, const TargetData& target);

struct ObjectiveValue {
  double objective = 0.0;  // tracking + perimeter
  double tracking = 0.0;
  double perimeter = 0.0;                 // sum of nu_i * interface length i
  std::vector<double> interface_lengths;  // per shape
};

// Tracking misfit with elementwise-exact quadrature of the squared P1
// difference, plus the weighted interface lengths.
ObjectiveValue evaluate_objective(const TriMesh& mesh, const ScalarField& y,
                                  const TargetData& target, const std::vector<double>& nu);

// Builds the target configuration: meshes the square, snaps the shapes on,
// solves the state with the given constants, and prepares the locator.
TargetData generate_target(int resolution, const std::vector<ShapeSpec>& shapes,
                           const std::vector<double>& kappa, double g,
                           double rtol = 1e-10, int max_iter = 20000);

// Area of the symmetric difference between the cells labeled `shape_id` and
// the analytic region, measured on an n x n midpoint grid.
double symmetric_difference_area(const TriMesh& mesh, int shape_id, const ShapeSpec& shape,
                                 int n = 800);

}  // namespace shapeopt
