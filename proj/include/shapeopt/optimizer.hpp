#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "shapeopt/deformation.hpp"
#include "shapeopt/physics.hpp"
#include "shapeopt/shape_calculus.hpp"

namespace shapeopt {

// Step-size rule shared by the fixed-step runs: a constant value, a
// Robbins-Monro decay c/(k+1), or a constant warm start followed by the decay
// c/(k - warm_iters + 1).
struct StepSchedule {
  enum class Kind { constant, inverse, warm_inverse };
  Kind kind = Kind::constant;
  double c = 0.01;
  int warm_iters = 0;

  double at(int k) const {
    switch (kind) {
      case Kind::constant: return c;
      case Kind::inverse: return c / (k + 1);
      case Kind::warm_inverse: return k < warm_iters ? c : c / (k - warm_iters + 1);
    }
    return c;
  }
};

struct ArmijoSettings {
  double alpha_hat = 0.0175;
  double rho = 0.9;
  double sigma = 1e-4;
  int max_backtracks = 50;
  bool scale_by_diameter = true;
};

// Longest cell edge of the standard 48-node-per-side mesh; the initial Armijo
// step is scaled by the current mesh diameter relative to this.
inline constexpr double reference_diameter = 0.030086677265799056;  // sqrt(2)/47

// Problem data every descent step needs besides the coefficient.
struct DescentContext {
  const TargetData& target;
  std::vector<double> nu;
  DeformationSettings deformation;
  double g = 1000.0;
  double rtol = 1e-10;
  int max_iter = 20000;
};

struct StepRecord {
  double objective = 0.0;  // at the pre-step iterate (batch mean for samples)
  double tracking = 0.0;
  double perimeter = 0.0;
  double grad_norm = 0.0;  // sqrt(a(V, V))
  double step = 0.0;       // accepted step length, 0 when the iterate is stationary
  double min_quality = 0.0;  // min signed cell area of the accepted mesh
  int backtracks = 0;
};

struct GradientEval {
  VectorField rhs;     // masked shape-derivative load, batch mean
  ObjectiveValue obj;  // batch mean
  ScalarField y;       // state of the first sample, kept for snapshots
  ScalarField mu;
  VectorField V;
  double energy = 0.0;  // a(V, V)
};

// One deformation solve against the batch-averaged derivative load.
GradientEval evaluate_direction(const TriMesh& mesh,
                                const std::vector<CoefficientField>& fields,
                                const DescentContext& ctx);

// Steepest descent with Armijo backtracking; trial meshes must stay valid and
// produce sufficient decrease of the true objective.  Commits the accepted
// mesh in place.  When `captured` is given it receives the pre-step direction
// evaluation (for snapshot output).
StepRecord armijo_step(TriMesh& mesh, const CoefficientField& kappa,
                       const DescentContext& ctx, const ArmijoSettings& armijo,
                       GradientEval* captured = nullptr);

// Fixed-step descent along the averaged direction; an invalid trial mesh gets
// one halved retry before the step fails.
StepRecord fixed_step(TriMesh& mesh, const std::vector<CoefficientField>& fields,
                      double t, const DescentContext& ctx,
                      GradientEval* captured = nullptr);

// Draw index for sample `sample` of iteration `iter`, keeping streams
// disjoint for batch sizes up to 2^16.
inline std::uint64_t draw_index(int iter, int sample) {
  return (static_cast<std::uint64_t>(iter) << 16) | static_cast<std::uint64_t>(sample);
}

}  // namespace shapeopt
