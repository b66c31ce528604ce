#pragma once

#include <vector>

#include "shapeopt/fields.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/physics.hpp"

namespace shapeopt {

// Everything the derivative assembly needs from the forward problem.  The two
// multipliers come out of the mean-constrained state and adjoint solves; they
// enter because the zero-mean normalization itself moves with the mesh.
struct ShapeDerivativeInput {
  const TriMesh& mesh;
  const CoefficientField& kappa;
  const ScalarField& y;
  const ScalarField& p;
  double state_multiplier = 0.0;
  double adjoint_multiplier = 0.0;
  const TargetData& target;
  const std::vector<double>& nu;
};

// Volume form of the objective derivative as a nodal load: the returned field
// r satisfies dj(u)[W] = sum_n r_n . W_n for P1 deformations W that vanish on
// the square boundary.  The assembly differentiates the discrete objective
// exactly, so difference quotients of the discrete j converge to it at first
// order in the step.  Works for constant and sampled coefficients alike (the
// coefficient-gradient term vanishes for the former).
VectorField assemble_shape_derivative(const ShapeDerivativeInput& in);

// Pairing sum_n r_n . W_n.
double apply_functional(const VectorField& r, const VectorField& W);

// Zeroes the load at every node none of whose cells touches an interface
// node, confining mesh motion to neighborhoods of the shapes.
VectorField apply_locality_mask(const TriMesh& mesh, VectorField r);

}  // namespace shapeopt
