#include "shapeopt/fem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shapeopt/errors.hpp"

namespace shapeopt {

void SparseMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
  y.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
    y[i] = s;
  }
}

double& SparseMatrix::diagonal(int i) {
  for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
    if (col[k] == i) return val[k];
  throw SolverDivergence("matrix row " + std::to_string(i) + " has no diagonal entry");
}

SparseMatrix csr_from_triplets(int n, std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });

  SparseMatrix A;
  A.n = n;
  A.row_ptr.assign(n + 1, 0);
  for (std::size_t k = 0; k < triplets.size();) {
    std::size_t k2 = k;
    double s = 0.0;
    while (k2 < triplets.size() && triplets[k2].i == triplets[k].i && triplets[k2].j == triplets[k].j)
      s += triplets[k2++].v;
    A.col.push_back(triplets[k].j);
    A.val.push_back(s);
    ++A.row_ptr[triplets[k].i + 1];
    k = k2;
  }
  for (int i = 0; i < n; ++i) A.row_ptr[i + 1] += A.row_ptr[i];
  return A;
}

P1Gradients p1_gradients(const TriMesh& mesh, int cell) {
  const auto& t = mesh.cells[cell];
  Vec2 p0 = mesh.nodes[t[0]], p1 = mesh.nodes[t[1]], p2 = mesh.nodes[t[2]];
  double twice_area = cross(p1 - p0, p2 - p0);
  P1Gradients out;
  out.area = 0.5 * twice_area;
  out.g[0] = {(p1.y - p2.y) / twice_area, (p2.x - p1.x) / twice_area};
  out.g[1] = {(p2.y - p0.y) / twice_area, (p0.x - p2.x) / twice_area};
  out.g[2] = {(p0.y - p1.y) / twice_area, (p1.x - p0.x) / twice_area};
  return out;
}

SparseMatrix assemble_diffusion(const TriMesh& mesh, const Coefficient& kappa) {
  std::vector<Triplet> trip;
  trip.reserve(9u * mesh.cells.size());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    P1Gradients p = p1_gradients(mesh, c);
    double k = kappa(cell_centroid(mesh, c), mesh.cell_subdomain[c]);
    if (!(k > 0.0))
      throw NonpositiveCoefficient("diffusion coefficient is not positive at cell " +
                                   std::to_string(c));
    const auto& t = mesh.cells[c];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        trip.push_back({t[a], t[b], k * p.area * dot(p.g[a], p.g[b])});
  }
  return csr_from_triplets(mesh.num_nodes(), std::move(trip));
}

std::vector<double> assemble_boundary_load(const TriMesh& mesh, double g) {
  std::vector<double> rhs(mesh.num_nodes(), 0.0);
  for (const auto& e : mesh.boundary_edges) {
    double half = 0.5 * g * norm(mesh.nodes[e[1]] - mesh.nodes[e[0]]);
    rhs[e[0]] += half;
    rhs[e[1]] += half;
  }
  return rhs;
}

std::vector<double> assemble_volume_load(const TriMesh& mesh,
                                         const std::function<double(Vec2)>& f) {
  std::vector<double> rhs(mesh.num_nodes(), 0.0);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    double w = f(cell_centroid(mesh, c)) * cell_signed_area(mesh, c) / 3.0;
    for (int v : mesh.cells[c]) rhs[v] += w;
  }
  return rhs;
}

SparseMatrix assemble_mass(const TriMesh& mesh) {
  std::vector<Triplet> trip;
  trip.reserve(9u * mesh.cells.size());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    double a12 = cell_signed_area(mesh, c) / 12.0;
    const auto& t = mesh.cells[c];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        trip.push_back({t[a], t[b], (a == b ? 2.0 : 1.0) * a12});
  }
  return csr_from_triplets(mesh.num_nodes(), std::move(trip));
}

std::vector<double> lumped_mass(const TriMesh& mesh) {
  std::vector<double> m(mesh.num_nodes(), 0.0);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    double third = cell_signed_area(mesh, c) / 3.0;
    for (int v : mesh.cells[c]) m[v] += third;
  }
  return m;
}

void element_elasticity(const TriMesh& mesh, int cell, double mu_c, double lambda,
                        double out[6][6]) {
  P1Gradients p = p1_gradients(mesh, cell);
  // a((n,alpha),(m,beta)) = area * [ lambda gn_a gm_b
  //                                + mu (delta_ab gn.gm + gn_b gm_a) ]
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      double gg = dot(p.g[a], p.g[b]);
      double ga[2] = {p.g[a].x, p.g[a].y};
      double gb[2] = {p.g[b].x, p.g[b].y};
      for (int alpha = 0; alpha < 2; ++alpha)
        for (int beta = 0; beta < 2; ++beta)
          out[2 * a + alpha][2 * b + beta] =
              p.area * (lambda * ga[alpha] * gb[beta] +
                        mu_c * ((alpha == beta ? gg : 0.0) + ga[beta] * gb[alpha]));
    }
  }
}

SparseMatrix assemble_elasticity(const TriMesh& mesh, const ScalarField& mu, double lambda) {
  if (mu.size() != mesh.nodes.size())
    throw InvalidMesh("mu field size does not match mesh");
  std::vector<Triplet> trip;
  trip.reserve(36u * mesh.cells.size());
  double local[6][6];
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.cells[c];
    double mu_c = (mu[t[0]] + mu[t[1]] + mu[t[2]]) / 3.0;
    if (!(mu_c > 0.0))
      throw NonpositiveMu("elasticity mu is not positive at cell " + std::to_string(c));
    element_elasticity(mesh, c, mu_c, lambda, local);
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b)
        trip.push_back({2 * t[a / 2] + a % 2, 2 * t[b / 2] + b % 2, local[a][b]});
  }
  return csr_from_triplets(2 * mesh.num_nodes(), std::move(trip));
}

void apply_dirichlet(SparseMatrix& A, std::vector<double>& rhs,
                     const std::vector<unsigned char>& fixed,
                     const std::vector<double>& values) {
  for (int i = 0; i < A.n; ++i) {
    if (fixed[i]) {
      for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
        A.val[k] = (A.col[k] == i) ? 1.0 : 0.0;
      rhs[i] = values[i];
    } else {
      for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
        int j = A.col[k];
        if (fixed[j]) {
          rhs[i] -= A.val[k] * values[j];
          A.val[k] = 0.0;
        }
      }
    }
  }
}

namespace {

double dot_vec(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

CgStats solve_spd(const SparseMatrix& A, const std::vector<double>& rhs,
                  std::vector<double>& x, double rtol, int max_iter) {
  int n = A.n;
  x.assign(n, 0.0);
  double bnorm = std::sqrt(dot_vec(rhs, rhs));
  if (bnorm == 0.0) return {0, 0.0};

  std::vector<double> diag(n);
  for (int i = 0; i < n; ++i) {
    double d = 0.0;
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
      if (A.col[k] == i) d = A.val[k];
    if (!(d > 0.0)) throw SolverDivergence("nonpositive diagonal in CG preconditioner");
    diag[i] = d;
  }

  std::vector<double> r = rhs, z(n), p(n), Ap(n);
  for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
  p = z;
  double rz = dot_vec(r, z);

  for (int it = 1; it <= max_iter; ++it) {
    A.multiply(p, Ap);
    double pAp = dot_vec(p, Ap);
    if (!(pAp > 0.0)) throw SolverDivergence("CG encountered a nonpositive curvature direction");
    double alpha = rz / pAp;
    for (int i = 0; i < n; ++i) x[i] += alpha * p[i];
    for (int i = 0; i < n; ++i) r[i] -= alpha * Ap[i];
    double rnorm = std::sqrt(dot_vec(r, r));
    if (rnorm <= rtol * bnorm) return {it, rnorm / bnorm};
    for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    double rz_new = dot_vec(r, z);
    double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw SolverDivergence("CG did not reach rtol " + std::to_string(rtol) + " in " +
                         std::to_string(max_iter) + " iterations");
}

MeanSolveResult solve_mean_constrained(const TriMesh& mesh, const SparseMatrix& K,
                                       const std::vector<double>& rhs,
                                       double rtol, int max_iter) {
  std::vector<double> m = lumped_mass(mesh);
  double area = 0.0, net = 0.0;
  for (double v : m) area += v;
  for (double v : rhs) net += v;

  // The multiplier turns the (generally incompatible) load into one the
  // pure-Neumann operator can balance.
  double lam = net / area;
  std::vector<double> b = rhs;
  for (int i = 0; i < K.n; ++i) b[i] -= lam * m[i];

  MeanSolveResult out;
  out.multiplier = lam;
  std::vector<double> y;
  out.cg = solve_spd(K, b, y, rtol, max_iter);

  // remove the kernel component so the mass-weighted mean vanishes
  double my = 0.0;
  for (int i = 0; i < K.n; ++i) my += m[i] * y[i];
  double shift = my / area;
  for (double& v : y) v -= shift;

  out.y.v = std::move(y);
  return out;
}

}  // namespace shapeopt
