#include "shapeopt/shape_calculus.hpp"

#include <string>

#include "shapeopt/errors.hpp"
#include "shapeopt/fem.hpp"

namespace shapeopt {

VectorField assemble_shape_derivative(const ShapeDerivativeInput& in) {
  const TriMesh& mesh = in.mesh;
  int nn = mesh.num_nodes();
  if (static_cast<int>(in.y.size()) != nn || static_cast<int>(in.p.size()) != nn)
    throw InvalidMesh("state or adjoint field size does not match mesh");
  if (static_cast<int>(in.nu.size()) != mesh.num_shapes)
    throw ConfigError("need one perimeter weight per shape");

  ScalarField ybar_i = interpolate_target(mesh, in.target);
  std::vector<double> e(nn);
  for (int n = 0; n < nn; ++n) e[n] = in.y[n] - ybar_i[n];

  VectorField r(static_cast<std::size_t>(nn));

  for (int c = 0; c < mesh.num_cells(); ++c) {
    P1Gradients g = p1_gradients(mesh, c);
    const auto& t = mesh.cells[c];
    Vec2 centroid = cell_centroid(mesh, c);
    int sub = mesh.cell_subdomain[c];

    Vec2 gy = in.y[t[0]] * g.g[0] + in.y[t[1]] * g.g[1] + in.y[t[2]] * g.g[2];
    Vec2 gp = in.p[t[0]] * g.g[0] + in.p[t[1]] * g.g[1] + in.p[t[2]] * g.g[2];
    double kap = in.kappa.value(centroid, sub);
    Vec2 gk = in.kappa.gradient(centroid, sub);
    double gygp = dot(gy, gp);

    double e0 = e[t[0]], e1 = e[t[1]], e2 = e[t[2]];
    double q = (e0 * e0 + e1 * e1 + e2 * e2 + e0 * e1 + e0 * e2 + e1 * e2) / 6.0;
    double ym = (in.y[t[0]] + in.y[t[1]] + in.y[t[2]]) / 3.0;
    double pm = (in.p[t[0]] + in.p[t[1]] + in.p[t[2]]) / 3.0;

    // coefficient of div W: transport of the misfit area, the stiffness
    // geometry, and the moving zero-mean normalizations
    double divw = kap * gygp + 0.5 * q + in.state_multiplier * pm + in.adjoint_multiplier * ym;

    double a3 = g.area / 3.0 * gygp;
    for (int v = 0; v < 3; ++v) {
      // convection of grad y . grad p through the deforming elements
      Vec2 contrib = (-kap * g.area) * (dot(g.g[v], gp) * gy + dot(g.g[v], gy) * gp);
      // coefficient advection (zero for piecewise-constant kappa)
      contrib = contrib + a3 * gk;
      contrib = contrib + (g.area * divw) * g.g[v];
      r[t[v]] = r[t[v]] + contrib;
    }
  }

  // data term: nodes sweep through the fixed target field
  SparseMatrix M = assemble_mass(mesh);
  std::vector<double> me;
  M.multiply(e, me);
  for (int n = 0; n < nn; ++n)
    r[n] = r[n] - me[n] * in.target.gradient(mesh.nodes[n]);

  // perimeter term: exact gradient of the polygonal interface lengths
  for (int s = 1; s <= mesh.num_shapes; ++s) {
    double w = in.nu[s - 1];
    for (const auto& edge : mesh.interface_edges(s)) {
      Vec2 d = mesh.nodes[edge[1]] - mesh.nodes[edge[0]];
      Vec2 tau = (1.0 / norm(d)) * d;
      r[edge[0]] = r[edge[0]] - w * tau;
      r[edge[1]] = r[edge[1]] + w * tau;
    }
  }

  // admissible deformations vanish on the square boundary
  for (int n = 0; n < nn; ++n)
    if (mesh.node_on_boundary[n]) r[n] = {0.0, 0.0};

  return r;
}

double apply_functional(const VectorField& r, const VectorField& W) {
  if (r.size() != W.size()) throw InvalidMesh("field sizes do not match");
  double s = 0.0;
  for (std::size_t n = 0; n < r.size(); ++n) s += dot(r[n], W[n]);
  return s;
}

VectorField apply_locality_mask(const TriMesh& mesh, VectorField r) {
  if (r.size() != mesh.nodes.size()) throw InvalidMesh("field size does not match mesh");
  std::vector<unsigned char> iface = interface_node_mask(mesh);

  std::vector<unsigned char> cell_touches(mesh.cells.size(), 0);
  for (int c = 0; c < mesh.num_cells(); ++c)
    for (int v : mesh.cells[c])
      if (iface[v]) {
        cell_touches[c] = 1;
        break;
      }

  std::vector<unsigned char> keep(mesh.nodes.size(), 0);
  for (int c = 0; c < mesh.num_cells(); ++c)
    if (cell_touches[c])
      for (int v : mesh.cells[c]) keep[v] = 1;

  for (std::size_t n = 0; n < r.size(); ++n)
    if (!keep[n]) r[n] = {0.0, 0.0};
  return r;
}

}  // namespace shapeopt
