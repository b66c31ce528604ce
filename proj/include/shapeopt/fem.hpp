#pragma once

#include <functional>
#include <vector>

#include "shapeopt/fields.hpp"
#include "shapeopt/mesh.hpp"

namespace shapeopt {

struct SparseMatrix {
  int n = 0;
  std::vector<int> row_ptr;
  std::vector<int> col;
  std::vector<double> val;

  void multiply(const std::vector<double>& x, std::vector<double>& y) const;
  double& diagonal(int i);
};

struct Triplet {
  int i, j;
  double v;
};

SparseMatrix csr_from_triplets(int n, std::vector<Triplet> triplets);

// Constant P1 gradients and the area of one cell.
struct P1Gradients {
  Vec2 g[3];
  double area;
};
P1Gradients p1_gradients(const TriMesh& mesh, int cell);

// Scalar coefficient sampled at the cell centroid, keyed by subdomain label.
using Coefficient = std::function<double(Vec2, int)>;

// Stiffness of -div(kappa grad y) with one-point (centroid) quadrature.
SparseMatrix assemble_diffusion(const TriMesh& mesh, const Coefficient& kappa);

// Load from a constant Neumann flux g on the square boundary: each boundary
// edge contributes g*|e|/2 to both endpoints.
std::vector<double> assemble_boundary_load(const TriMesh& mesh, double g);

// Volume load with centroid quadrature.
std::vector<double> assemble_volume_load(const TriMesh& mesh,
                                         const std::function<double(Vec2)>& f);

// Consistent P1 mass matrix and its row-sum lumping.
SparseMatrix assemble_mass(const TriMesh& mesh);
std::vector<double> lumped_mass(const TriMesh& mesh);

// 6x6 element matrix of linear elasticity on one cell, local dofs ordered
// (v0x, v0y, v1x, v1y, v2x, v2y).
void element_elasticity(const TriMesh& mesh, int cell, double mu_c, double lambda,
                        double out[6][6]);

// Linear elasticity on vector P1 elements, dofs interleaved as
// (x_0, y_0, x_1, y_1, ...).  mu is nodal and sampled per cell as the vertex
// mean; lambda is constant.
SparseMatrix assemble_elasticity(const TriMesh& mesh, const ScalarField& mu, double lambda);

// Symmetric elimination of fixed dofs: fixed rows/columns are zeroed, the
// diagonal set to 1, and the known values folded into the right-hand side.
void apply_dirichlet(SparseMatrix& A, std::vector<double>& rhs,
                     const std::vector<unsigned char>& fixed,
                     const std::vector<double>& values);

struct CgStats {
  int iterations = 0;
  double rel_residual = 0.0;
};

// Jacobi-preconditioned conjugate gradients; throws SolverDivergence when the
// iteration cap is hit or the matrix is found indefinite.
CgStats solve_spd(const SparseMatrix& A, const std::vector<double>& rhs,
                  std::vector<double>& x, double rtol = 1e-10, int max_iter = 20000);

struct MeanSolveResult {
  ScalarField y;
  double multiplier = 0.0;  // enforces the zero-mean constraint
  CgStats cg;
};

// Pure-Neumann solve of K y = rhs subject to the mass-weighted zero-mean
// constraint.  The multiplier absorbs any net load; the kernel component is
// fixed by shifting the converged iterate.
MeanSolveResult solve_mean_constrained(const TriMesh& mesh, const SparseMatrix& K,
                                       const std::vector<double>& rhs,
                                       double rtol = 1e-10, int max_iter = 20000);

}  // namespace shapeopt
