#pragma once

#include <vector>

#include "shapeopt/fem.hpp"
#include "shapeopt/fields.hpp"
#include "shapeopt/mesh.hpp"

namespace shapeopt {

struct DeformationSettings {
  double mu_min = 10.0;
  double mu_max = 25.0;
  double lambda = 0.0;
  double rtol = 1e-10;
  int max_iter = 20000;
};

// Discrete harmonic stiffness modulation: mu_max on the interfaces, mu_min on
// the square boundary, Laplace in between.
ScalarField solve_mu_field(const TriMesh& mesh, double mu_min, double mu_max,
                           double rtol = 1e-10, int max_iter = 20000);

// Solves the elasticity system a(V, W) = sum_n rhs_n . W_n with V = 0 on the
// square boundary.
VectorField solve_deformation(const TriMesh& mesh, const ScalarField& mu, double lambda,
                              const VectorField& rhs, double rtol = 1e-10,
                              int max_iter = 20000, CgStats* stats = nullptr);

// Energy a(V, V) of the elasticity form, evaluated elementwise.
double deformation_energy(const TriMesh& mesh, const ScalarField& mu, double lambda,
                          const VectorField& V);

// Same problem solved through non-overlapping substructuring: per-part
// interior blocks are condensed onto the shared skeleton, the dense Schur
// system is factorized, and the interiors are recovered.  cell_part assigns
// every cell to a part; each shape (interface and enclosed cells) must sit
// strictly inside one part.
VectorField solve_deformation_partitioned(const TriMesh& mesh, const ScalarField& mu,
                                          double lambda, const VectorField& rhs,
                                          const std::vector<int>& cell_part,
                                          double inner_rtol = 1e-13,
                                          int max_iter = 200000);

}  // namespace shapeopt
