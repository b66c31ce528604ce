#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "shapeopt/deformation.hpp"
#include "shapeopt/errors.hpp"
#include "shapeopt/fem.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/shapes.hpp"

using namespace shapeopt;

namespace {

TriMesh labeled_circle(int res, const char* spec_text) {
  TriMesh mesh = build_unit_square_mesh(res);
  ShapeSpec s = parse_shape_spec(spec_text);
  return label_subdomains(mesh, {conforming_loop(mesh, [&s](Vec2 p) { return s.inside(p); })});
}

VectorField interface_pull(const TriMesh& mesh) {
  auto iface = interface_node_mask(mesh);
  VectorField load(mesh.nodes.size());
  for (int n = 0; n < mesh.num_nodes(); ++n)
    if (iface[n]) load[n] = {0.3 * (mesh.nodes[n].x - 0.5), 0.7};
  return load;
}

double rel_l2_diff(const VectorField& a, const VectorField& b) {
  double d2 = 0.0, n2 = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    Vec2 d = a[n] - b[n];
    d2 += dot(d, d);
    n2 += dot(a[n], a[n]);
  }
  return std::sqrt(d2 / std::max(n2, 1e-300));
}

}  // namespace

TEST_CASE("the stiffness modulation obeys boundary values and the maximum principle") {
  TriMesh mesh = labeled_circle(22, "circle 0.45 0.55 0.2");
  double mu_min = 10.0, mu_max = 25.0;
  ScalarField mu = solve_mu_field(mesh, mu_min, mu_max, 1e-12, 200000);
  auto iface = interface_node_mask(mesh);

  int strict_interior = 0;
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    if (iface[n]) {
      CHECK(mu[n] == doctest::Approx(mu_max).epsilon(1e-9));
    } else if (mesh.node_on_boundary[n]) {
      CHECK(mu[n] == doctest::Approx(mu_min).epsilon(1e-9));
    } else {
      CHECK(mu[n] > mu_min - 1e-9);
      CHECK(mu[n] < mu_max + 1e-9);
      if (mu[n] > mu_min + 1e-6 && mu[n] < mu_max - 1e-6) strict_interior++;
    }
  }
  CHECK(strict_interior > 0);

  // harmonic comparison: raising the interface value raises the whole field
  ScalarField hi = solve_mu_field(mesh, mu_min, 40.0, 1e-12, 200000);
  for (int n = 0; n < mesh.num_nodes(); ++n) CHECK(hi[n] >= mu[n] - 1e-8);
}

TEST_CASE("the deformation solve vanishes on the boundary and satisfies the energy identity") {
  TriMesh mesh = labeled_circle(20, "circle 0.45 0.55 0.2");
  ScalarField mu = solve_mu_field(mesh, 10.0, 25.0, 1e-12, 200000);
  VectorField load = interface_pull(mesh);

  for (double lambda : {0.0, 10.0}) {
    CgStats stats;
    VectorField V = solve_deformation(mesh, mu, lambda, load, 1e-12, 200000, &stats);
    CHECK(stats.iterations > 0);
    for (int n = 0; n < mesh.num_nodes(); ++n)
      if (mesh.node_on_boundary[n]) {
        CHECK(V[n].x == 0.0);
        CHECK(V[n].y == 0.0);
      }
    double energy = deformation_energy(mesh, mu, lambda, V);
    double work = 0.0;
    for (std::size_t n = 0; n < V.size(); ++n) work += dot(load[n], V[n]);
    CHECK(energy > 0.0);
    CHECK(work == doctest::Approx(energy).epsilon(1e-8));
  }
}

TEST_CASE("the elementwise energy equals the assembled quadratic form") {
  TriMesh mesh = labeled_circle(15, "circle 0.5 0.5 0.22");
  ScalarField mu = solve_mu_field(mesh, 10.0, 25.0, 1e-12, 200000);
  VectorField V(mesh.nodes.size());
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    if (mesh.node_on_boundary[n]) continue;
    Vec2 p = mesh.nodes[n];
    V[n] = {std::sin(2 * p.x) * p.y, p.x - p.y * p.y};
  }
  double lambda = 3.0;
  SparseMatrix A = assemble_elasticity(mesh, mu, lambda);
  std::vector<double> flat(2 * mesh.num_nodes()), Af;
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    flat[2 * n] = V[n].x;
    flat[2 * n + 1] = V[n].y;
  }
  A.multiply(flat, Af);
  double quad = 0.0;
  for (std::size_t i = 0; i < flat.size(); ++i) quad += flat[i] * Af[i];
  CHECK(deformation_energy(mesh, mu, lambda, V) == doctest::Approx(quad).epsilon(1e-12));
}

TEST_CASE("stiffer interfaces comply less with the same load") {
  TriMesh mesh = labeled_circle(20, "circle 0.45 0.55 0.2");
  VectorField load = interface_pull(mesh);
  double compliance[2];
  int i = 0;
  for (double mu_max : {25.0, 60.0}) {
    ScalarField mu = solve_mu_field(mesh, 10.0, mu_max, 1e-12, 200000);
    VectorField V = solve_deformation(mesh, mu, 0.0, load, 1e-12, 200000);
    double work = 0.0;
    for (std::size_t n = 0; n < V.size(); ++n) work += dot(load[n], V[n]);
    compliance[i++] = work;
  }
  CHECK(compliance[1] < compliance[0]);
  CHECK(compliance[1] > 0.0);
}

TEST_CASE("substructured solves agree with the monolithic one on several partitions") {
  TriMesh mesh = labeled_circle(24, "circle 0.42 0.55 0.18");
  ScalarField mu = solve_mu_field(mesh, 10.0, 25.0, 1e-12, 200000);
  VectorField load = interface_pull(mesh);
  VectorField mono = solve_deformation(mesh, mu, 0.0, load, 1e-13, 400000);

  SUBCASE("two parts split to the right of the circle") {
    std::vector<int> part(mesh.cells.size());
    for (int c = 0; c < mesh.num_cells(); ++c)
      part[c] = cell_centroid(mesh, c).x < 0.75 ? 0 : 1;
    VectorField sub = solve_deformation_partitioned(mesh, mu, 0.0, load, part);
    CHECK(rel_l2_diff(mono, sub) < 1e-8);
  }

  SUBCASE("three vertical stripes") {
    std::vector<int> part(mesh.cells.size());
    for (int c = 0; c < mesh.num_cells(); ++c) {
      double x = cell_centroid(mesh, c).x;
      part[c] = x < 0.13 ? 0 : (x < 0.84 ? 1 : 2);
    }
    VectorField sub = solve_deformation_partitioned(mesh, mu, 0.0, load, part);
    CHECK(rel_l2_diff(mono, sub) < 1e-8);
  }

  SUBCASE("horizontal split below the circle") {
    std::vector<int> part(mesh.cells.size());
    for (int c = 0; c < mesh.num_cells(); ++c)
      part[c] = cell_centroid(mesh, c).y < 0.2 ? 0 : 1;
    VectorField sub = solve_deformation_partitioned(mesh, mu, 0.0, load, part);
    CHECK(rel_l2_diff(mono, sub) < 1e-8);
  }
}

TEST_CASE("partitions that cut a shape or are degenerate are rejected") {
  TriMesh mesh = labeled_circle(18, "circle 0.5 0.5 0.22");
  ScalarField mu = solve_mu_field(mesh, 10.0, 25.0, 1e-12, 200000);
  VectorField load = interface_pull(mesh);

  std::vector<int> through(mesh.cells.size());
  for (int c = 0; c < mesh.num_cells(); ++c)
    through[c] = cell_centroid(mesh, c).x < 0.5 ? 0 : 1;  // slices the circle
  CHECK_THROWS_AS(solve_deformation_partitioned(mesh, mu, 0.0, load, through),
                  InvalidPartition);

  std::vector<int> single(mesh.cells.size(), 0);
  CHECK_THROWS_AS(solve_deformation_partitioned(mesh, mu, 0.0, load, single),
                  InvalidPartition);

  std::vector<int> short_part(3, 0);
  CHECK_THROWS_AS(solve_deformation_partitioned(mesh, mu, 0.0, load, short_part),
                  InvalidPartition);

  std::vector<int> negative(mesh.cells.size(), 0);
  negative[0] = -1;
  CHECK_THROWS_AS(solve_deformation_partitioned(mesh, mu, 0.0, load, negative),
                  InvalidPartition);
}
