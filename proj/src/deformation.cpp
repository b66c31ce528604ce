#include "shapeopt/deformation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "shapeopt/errors.hpp"

namespace shapeopt {

ScalarField solve_mu_field(const TriMesh& mesh, double mu_min, double mu_max,
                           double rtol, int max_iter) {
  if (!(mu_min > 0.0) || !(mu_max > 0.0))
    throw NonpositiveMu("mu bounds must be positive");
  if (mu_max < mu_min) throw ConfigError("mu_max must not be below mu_min");

  SparseMatrix A = assemble_diffusion(mesh, [](Vec2, int) { return 1.0; });
  std::vector<unsigned char> fixed(mesh.num_nodes(), 0);
  std::vector<double> values(mesh.num_nodes(), 0.0);
  for (int n = 0; n < mesh.num_nodes(); ++n)
    if (mesh.node_on_boundary[n]) {
      fixed[n] = 1;
      values[n] = mu_min;
    }
  std::vector<unsigned char> iface = interface_node_mask(mesh);
  for (int n = 0; n < mesh.num_nodes(); ++n)
    if (iface[n]) {
      fixed[n] = 1;
      values[n] = mu_max;
    }

  std::vector<double> rhs(mesh.num_nodes(), 0.0);
  apply_dirichlet(A, rhs, fixed, values);
  std::vector<double> mu;
  solve_spd(A, rhs, mu, rtol, max_iter);
  ScalarField out;
  out.v = std::move(mu);
  return out;
}

VectorField solve_deformation(const TriMesh& mesh, const ScalarField& mu, double lambda,
                              const VectorField& rhs, double rtol, int max_iter,
                              CgStats* stats) {
  if (rhs.size() != mesh.nodes.size())
    throw InvalidMesh("deformation load size does not match mesh");

  SparseMatrix A = assemble_elasticity(mesh, mu, lambda);
  std::vector<double> b(2u * mesh.num_nodes());
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    b[2 * n] = rhs[n].x;
    b[2 * n + 1] = rhs[n].y;
  }
  std::vector<unsigned char> fixed(2u * mesh.num_nodes(), 0);
  std::vector<double> values(2u * mesh.num_nodes(), 0.0);
  for (int n = 0; n < mesh.num_nodes(); ++n)
    if (mesh.node_on_boundary[n]) fixed[2 * n] = fixed[2 * n + 1] = 1;
  apply_dirichlet(A, b, fixed, values);

  std::vector<double> x;
  CgStats st = solve_spd(A, b, x, rtol, max_iter);
  if (stats) *stats = st;

  VectorField V(mesh.nodes.size());
  for (int n = 0; n < mesh.num_nodes(); ++n) V[n] = {x[2 * n], x[2 * n + 1]};
  return V;
}

double deformation_energy(const TriMesh& mesh, const ScalarField& mu, double lambda,
                          const VectorField& V) {
  if (V.size() != mesh.nodes.size() || mu.size() != mesh.nodes.size())
    throw InvalidMesh("field size does not match mesh");
  double energy = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    P1Gradients p = p1_gradients(mesh, c);
    const auto& t = mesh.cells[c];
    double mu_c = (mu[t[0]] + mu[t[1]] + mu[t[2]]) / 3.0;
    // grad V = sum_n V_n (x) g_n
    double dxx = 0.0, dxy = 0.0, dyx = 0.0, dyy = 0.0;
    for (int v = 0; v < 3; ++v) {
      dxx += V[t[v]].x * p.g[v].x;
      dxy += V[t[v]].x * p.g[v].y;
      dyx += V[t[v]].y * p.g[v].x;
      dyy += V[t[v]].y * p.g[v].y;
    }
    double exy = 0.5 * (dxy + dyx);
    double trace = dxx + dyy;
    double eps2 = dxx * dxx + dyy * dyy + 2.0 * exy * exy;
    energy += p.area * (lambda * trace * trace + 2.0 * mu_c * eps2);
  }
  return energy;
}

namespace {

// Dense SPD Cholesky solve, sized for skeleton systems of a few hundred dofs.
void cholesky_solve(std::vector<double>& A, std::vector<double>& b, int n) {
  for (int j = 0; j < n; ++j) {
    double d = A[j * n + j];
    for (int k = 0; k < j; ++k) d -= A[j * n + k] * A[j * n + k];
    if (!(d > 0.0)) throw SolverDivergence("skeleton system is not positive definite");
    d = std::sqrt(d);
    A[j * n + j] = d;
    for (int i = j + 1; i < n; ++i) {
      double s = A[i * n + j];
      for (int k = 0; k < j; ++k) s -= A[i * n + k] * A[j * n + k];
      A[i * n + j] = s / d;
    }
  }
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= A[i * n + k] * b[k];
    b[i] = s / A[i * n + i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int k = i + 1; k < n; ++k) s -= A[k * n + i] * b[k];
    b[i] = s / A[i * n + i];
  }
}

}  // namespace

VectorField solve_deformation_partitioned(const TriMesh& mesh, const ScalarField& mu,
                                          double lambda, const VectorField& rhs,
                                          const std::vector<int>& cell_part,
                                          double inner_rtol, int max_iter) {
  if (cell_part.size() != mesh.cells.size())
    throw InvalidPartition("cell_part size does not match mesh");
  int parts = 0;
  for (int p : cell_part) {
    if (p < 0) throw InvalidPartition("negative part id");
    parts = std::max(parts, p + 1);
  }
  if (parts < 2) throw InvalidPartition("need at least two parts");

  // parts adjacent to each node
  std::vector<std::set<int>> node_parts(mesh.nodes.size());
  for (int c = 0; c < mesh.num_cells(); ++c)
    for (int v : mesh.cells[c]) node_parts[v].insert(cell_part[c]);

  // every shape must stay clear of the skeleton
  std::vector<unsigned char> iface = interface_node_mask(mesh);
  for (int n = 0; n < mesh.num_nodes(); ++n)
    if (iface[n] && node_parts[n].size() > 1)
      throw InvalidPartition("a shape interface crosses the partition skeleton at node " +
                             std::to_string(n));
  for (int c = 0; c < mesh.num_cells(); ++c)
    if (mesh.cell_subdomain[c] != 0)
      for (int v : mesh.cells[c])
        if (node_parts[v].size() > 1)
          throw InvalidPartition("an enclosed shape touches the partition skeleton");

  // dof numbering: per-part interior dofs and shared skeleton dofs
  const int nn = mesh.num_nodes();
  std::vector<int> interior_id(2u * nn, -1), skeleton_id(2u * nn, -1), dof_part(2u * nn, -1);
  std::vector<int> interior_count(parts, 0);
  int skeleton_count = 0;
  for (int n = 0; n < nn; ++n) {
    if (mesh.node_on_boundary[n]) continue;  // pinned
    if (node_parts[n].size() == 1) {
      int p = *node_parts[n].begin();
      for (int a = 0; a < 2; ++a) {
        interior_id[2 * n + a] = interior_count[p]++;
        dof_part[2 * n + a] = p;
      }
    } else {
      for (int a = 0; a < 2; ++a) skeleton_id[2 * n + a] = skeleton_count++;
    }
  }
  if (skeleton_count == 0) throw InvalidPartition("partition has no shared skeleton");

  // per-part interior blocks, interior-to-skeleton couplings (stored by
  // skeleton column), and the skeleton-skeleton block accumulated densely
  std::vector<std::vector<Triplet>> aii_trip(parts);
  std::vector<std::vector<std::vector<std::pair<int, double>>>> cols(
      parts, std::vector<std::vector<std::pair<int, double>>>(skeleton_count));
  std::vector<double> S(static_cast<std::size_t>(skeleton_count) * skeleton_count, 0.0);

  double local[6][6];
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.cells[c];
    double mu_c = (mu[t[0]] + mu[t[1]] + mu[t[2]]) / 3.0;
    if (!(mu_c > 0.0)) throw NonpositiveMu("elasticity mu is not positive");
    element_elasticity(mesh, c, mu_c, lambda, local);
    int p = cell_part[c];
    for (int a = 0; a < 6; ++a) {
      int gi = 2 * t[a / 2] + a % 2;
      for (int b = 0; b < 6; ++b) {
        int gj = 2 * t[b / 2] + b % 2;
        double v = local[a][b];
        if (interior_id[gi] >= 0 && interior_id[gj] >= 0) {
          aii_trip[p].push_back({interior_id[gi], interior_id[gj], v});
        } else if (interior_id[gi] >= 0 && skeleton_id[gj] >= 0) {
          cols[p][skeleton_id[gj]].push_back({interior_id[gi], v});
        } else if (skeleton_id[gi] >= 0 && skeleton_id[gj] >= 0) {
          S[static_cast<std::size_t>(skeleton_id[gi]) * skeleton_count + skeleton_id[gj]] += v;
        }
        // fixed square-boundary dofs drop out (homogeneous pin)
      }
    }
  }

  // merge duplicate entries within each coupling column
  for (int p = 0; p < parts; ++p) {
    for (auto& col : cols[p]) {
      std::sort(col.begin(), col.end());
      std::size_t w = 0;
      for (std::size_t r = 0; r < col.size();) {
        std::size_t r2 = r;
        double s = 0.0;
        while (r2 < col.size() && col[r2].first == col[r].first) s += col[r2++].second;
        col[w++] = {col[r].first, s};
        r = r2;
      }
      col.resize(w);
    }
  }

  std::vector<SparseMatrix> aii(parts);
  for (int p = 0; p < parts; ++p)
    aii[p] = csr_from_triplets(interior_count[p], std::move(aii_trip[p]));

  // interior loads and skeleton load
  std::vector<std::vector<double>> fi(parts);
  for (int p = 0; p < parts; ++p) fi[p].assign(interior_count[p], 0.0);
  std::vector<double> fs(skeleton_count, 0.0);
  for (int n = 0; n < nn; ++n) {
    double comp[2] = {rhs[n].x, rhs[n].y};
    for (int a = 0; a < 2; ++a) {
      int g = 2 * n + a;
      if (interior_id[g] >= 0)
        fi[dof_part[g]][interior_id[g]] = comp[a];
      else if (skeleton_id[g] >= 0)
        fs[skeleton_id[g]] = comp[a];
    }
  }

  // condensation: S -= sum_p Asi Aii^-1 Ais,  fs -= sum_p Asi Aii^-1 fi
  std::vector<double> z;
  std::vector<std::vector<double>> zf(parts);
  for (int p = 0; p < parts; ++p) {
    if (interior_count[p] == 0) {
      zf[p] = {};
      continue;
    }
    solve_spd(aii[p], fi[p], zf[p], inner_rtol, max_iter);
    for (int s = 0; s < skeleton_count; ++s)
      for (const auto& [il, v] : cols[p][s]) fs[s] -= v * zf[p][il];

    std::vector<double> w(interior_count[p]);
    for (int s = 0; s < skeleton_count; ++s) {
      if (cols[p][s].empty()) continue;
      std::fill(w.begin(), w.end(), 0.0);
      for (const auto& [il, v] : cols[p][s]) w[il] = v;
      solve_spd(aii[p], w, z, inner_rtol, max_iter);
      for (int s2 = 0; s2 < skeleton_count; ++s2) {
        double acc = 0.0;
        for (const auto& [il, v] : cols[p][s2]) acc += v * z[il];
        S[static_cast<std::size_t>(s2) * skeleton_count + s] -= acc;
      }
    }
  }

  // symmetrize away condensation roundoff before factorizing
  for (int i = 0; i < skeleton_count; ++i)
    for (int j = i + 1; j < skeleton_count; ++j) {
      double m = 0.5 * (S[static_cast<std::size_t>(i) * skeleton_count + j] +
                        S[static_cast<std::size_t>(j) * skeleton_count + i]);
      S[static_cast<std::size_t>(i) * skeleton_count + j] = m;
      S[static_cast<std::size_t>(j) * skeleton_count + i] = m;
    }
  cholesky_solve(S, fs, skeleton_count);  // fs now holds the skeleton solution

  VectorField V(mesh.nodes.size());
  for (int n = 0; n < nn; ++n) V[n] = {0.0, 0.0};

  // interior recovery part by part
  for (int p = 0; p < parts; ++p) {
    if (interior_count[p] == 0) continue;
    std::vector<double> b = fi[p];
    for (int s = 0; s < skeleton_count; ++s)
      for (const auto& [il, v] : cols[p][s]) b[il] -= v * fs[s];
    solve_spd(aii[p], b, z, inner_rtol, max_iter);
    for (int n = 0; n < nn; ++n)
      for (int a = 0; a < 2; ++a) {
        int g = 2 * n + a;
        if (interior_id[g] >= 0 && dof_part[g] == p)
          (a == 0 ? V[n].x : V[n].y) = z[interior_id[g]];
      }
  }
  for (int n = 0; n < nn; ++n)
    for (int a = 0; a < 2; ++a) {
      int g = 2 * n + a;
      if (skeleton_id[g] >= 0) (a == 0 ? V[n].x : V[n].y) = fs[skeleton_id[g]];
    }
  return V;
}

}  // namespace shapeopt
