#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "shapeopt/errors.hpp"
#include "shapeopt/fem.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/physics.hpp"
#include "shapeopt/shapes.hpp"

using namespace shapeopt;

namespace {

TriMesh labeled_circle(int res, const char* spec_text) {
  TriMesh mesh = build_unit_square_mesh(res);
  ShapeSpec s = parse_shape_spec(spec_text);
  return label_subdomains(mesh, {conforming_loop(mesh, [&s](Vec2 p) { return s.inside(p); })});
}

}  // namespace

TEST_CASE("piecewise-constant coefficients evaluate by label with zero gradient") {
  CoefficientField f = CoefficientField::piecewise_constant({1000.0, 7.5, 5.0});
  CHECK(f.num_subdomains() == 3);
  CHECK(f.value({0.3, 0.4}, 0) == 1000.0);
  CHECK(f.value({0.3, 0.4}, 1) == 7.5);
  CHECK(f.value({0.9, 0.1}, 2) == 5.0);
  Vec2 g = f.gradient({0.64, 0.2}, 1);
  CHECK(g.x == 0.0);
  CHECK(g.y == 0.0);
  Coefficient ev = f.evaluator();
  CHECK(ev({0.5, 0.5}, 2) == 5.0);
}

TEST_CASE("a zero-width realization reproduces the constant field bit for bit") {
  KlSpec spec = make_kl_spec({1000.0, 7.5}, {0.0, 0.0}, 0.5, 20);
  SampleDraw draw = draw_sample(spec, 3, 12);
  CoefficientField sampled = CoefficientField::realization(spec, draw);
  CoefficientField constant = CoefficientField::piecewise_constant({1000.0, 7.5});
  for (Vec2 x : {Vec2{0.21, 0.84}, Vec2{0.5, 0.5}, Vec2{0.03, 0.97}})
    for (int sub : {0, 1}) {
      CHECK(sampled.value(x, sub) == constant.value(x, sub));
      Vec2 gs = sampled.gradient(x, sub);
      CHECK(gs.x == 0.0);
      CHECK(gs.y == 0.0);
    }
}

TEST_CASE("a nonzero realization matches the expansion it wraps") {
  KlSpec spec = make_kl_spec({1000.0, 7.5}, {75.0, 4.5}, 0.5, 20);
  SampleDraw draw = draw_sample(spec, 8, 4);
  CoefficientField f = CoefficientField::realization(spec, draw);
  Vec2 x{0.37, 0.58};
  for (int sub : {0, 1}) {
    CHECK(f.value(x, sub) == evaluate_kappa(spec, draw, x, sub));
    Vec2 a = f.gradient(x, sub);
    Vec2 b = evaluate_kappa_gradient(spec, draw, x, sub);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
  }
}

TEST_CASE("the cell locator finds the containing cell everywhere in the square") {
  TriMesh mesh = labeled_circle(19, "circle 0.5 0.5 0.27");
  CellLocator loc(mesh);
  REQUIRE(loc.ready());
  for (int c = 0; c < mesh.num_cells(); ++c)
    CHECK(loc.locate(cell_centroid(mesh, c)) == c);

  // queries outside the square are clamped inside
  for (Vec2 q : {Vec2{-0.5, 0.5}, Vec2{1.5, 0.2}, Vec2{0.7, -3.0}, Vec2{2.0, 2.0}}) {
    int c = loc.locate(q);
    CHECK(c >= 0);
    CHECK(c < mesh.num_cells());
  }

  // a grid vertex touches several cells; the lowest index wins
  Vec2 vertex = mesh.nodes[5 * 19 + 7];
  int found = loc.locate(vertex);
  int lowest = -1;
  for (int c = 0; c < mesh.num_cells() && lowest < 0; ++c)
    for (int k = 0; k < 3; ++k)
      if (mesh.cells[c][k] == 5 * 19 + 7) {
        lowest = c;
        break;
      }
  CHECK(found == lowest);
}

TEST_CASE("target interpolation is exact for linear fields") {
  TargetData target;
  target.mesh = build_unit_square_mesh(13);
  target.ybar = ScalarField(target.mesh.nodes.size());
  auto lin = [](Vec2 p) { return 2.0 * p.x - 0.7 * p.y + 0.25; };
  for (int n = 0; n < target.mesh.num_nodes(); ++n)
    target.ybar[n] = lin(target.mesh.nodes[n]);
  target.build_locator();

  for (Vec2 x : {Vec2{0.123, 0.456}, Vec2{0.777, 0.111}, Vec2{0.5, 0.5}, Vec2{0.0, 1.0}}) {
    CHECK(target.value(x) == doctest::Approx(lin(x)).epsilon(1e-13));
    Vec2 g = target.gradient(x);
    CHECK(g.x == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(g.y == doctest::Approx(-0.7).epsilon(1e-12));
  }

  TriMesh other = build_unit_square_mesh(10);
  ScalarField vals = interpolate_target(other, target);
  for (int n = 0; n < other.num_nodes(); ++n)
    CHECK(vals[n] == doctest::Approx(lin(other.nodes[n])).epsilon(1e-13));
}

TEST_CASE("the state solve is mean free with the flux-balance multiplier") {
  TriMesh mesh = labeled_circle(24, "circle 0.5 0.5 0.3");
  CoefficientField kappa = CoefficientField::piecewise_constant({1000.0, 5.0});
  double g = 1000.0;
  StateSolution st = solve_state(mesh, kappa, g, 1e-12, 100000);
  CHECK(st.cg.iterations > 0);

  std::vector<double> m = lumped_mass(mesh);
  double mean = 0.0;
  for (std::size_t n = 0; n < m.size(); ++n) mean += m[n] * st.field[n];
  CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(st.multiplier == doctest::Approx(4.0 * g).epsilon(1e-9));
}

TEST_CASE("scaling the coefficient scales the state inversely") {
  TriMesh mesh = labeled_circle(18, "circle 0.5 0.5 0.25");
  CoefficientField k1 = CoefficientField::piecewise_constant({2.0, 8.0});
  CoefficientField k3 = CoefficientField::piecewise_constant({6.0, 24.0});
  StateSolution s1 = solve_state(mesh, k1, 100.0, 1e-13, 200000);
  StateSolution s3 = solve_state(mesh, k3, 100.0, 1e-13, 200000);
  double diff = 0.0, norm1 = 0.0;
  for (std::size_t n = 0; n < s1.field.size(); ++n) {
    diff += std::abs(s3.field[n] - s1.field[n] / 3.0);
    norm1 += std::abs(s1.field[n]);
  }
  CHECK(diff / norm1 < 1e-9);
}

TEST_CASE("the adjoint vanishes when the state already matches the target") {
  TriMesh mesh = labeled_circle(16, "circle 0.5 0.5 0.25");
  CoefficientField kappa = CoefficientField::piecewise_constant({1000.0, 5.0});
  TargetData target;
  target.mesh = mesh;
  StateSolution st = solve_state(mesh, kappa, 1000.0, 1e-12, 100000);
  target.ybar = st.field;
  target.build_locator();

  StateSolution adj = solve_adjoint(mesh, kappa, st.field, target, 1e-12, 100000);
  for (std::size_t n = 0; n < adj.field.size(); ++n)
    CHECK(std::abs(adj.field[n]) < 1e-10);
  CHECK(std::abs(adj.multiplier) < 1e-10);
}

TEST_CASE("the adjoint state predicts coefficient perturbations of the misfit") {
  // J(kappa) is smooth in kappa on a fixed mesh, so a central difference in a
  // subdomain value must match the adjoint-based derivative p' (dK) y closely.
  TriMesh mesh = labeled_circle(20, "circle 0.5 0.5 0.28");
  TargetData target = generate_target(29, {parse_shape_spec("circle 0.5 0.5 0.3")},
                                      {1000.0, 5000.0}, 1000.0, 1e-13, 400000);
  std::vector<double> base{1000.0, 5000.0};
  double g = 1000.0;
  std::vector<double> nu{1e-4};

  auto misfit = [&](const std::vector<double>& kv) {
    CoefficientField kf = CoefficientField::piecewise_constant(kv);
    StateSolution st = solve_state(mesh, kf, g, 1e-13, 400000);
    return evaluate_objective(mesh, st.field, target, nu).tracking;
  };

  CoefficientField kf = CoefficientField::piecewise_constant(base);
  StateSolution st = solve_state(mesh, kf, g, 1e-13, 400000);
  StateSolution adj = solve_adjoint(mesh, kf, st.field, target, 1e-13, 400000);

  for (int sub : {0, 1}) {
    // derivative of J in the direction chi_sub: p' K_sub y with unit coefficient
    SparseMatrix Ks = assemble_diffusion(
        mesh, [sub](Vec2, int s) { return s == sub ? 1.0 : 1e-300; });
    std::vector<double> Ky;
    Ks.multiply(st.field.v, Ky);
    double exact = 0.0;
    for (std::size_t n = 0; n < Ky.size(); ++n) exact += adj.field[n] * Ky[n];

    double delta = 1e-3 * base[sub];
    std::vector<double> up = base, dn = base;
    up[sub] += delta;
    dn[sub] -= delta;
    double fd = (misfit(up) - misfit(dn)) / (2.0 * delta);
    CHECK(std::abs(fd - exact) / std::max(std::abs(exact), 1e-14) < 1e-4);
  }
}

TEST_CASE("objective evaluation has exact quadrature and weighted perimeters") {
  TriMesh mesh = labeled_circle(22, "circle 0.5 0.5 0.3");
  TargetData target;
  target.mesh = build_unit_square_mesh(9);
  target.ybar = ScalarField(target.mesh.nodes.size(), 0.0);
  target.build_locator();

  ScalarField y(mesh.nodes.size());
  for (int n = 0; n < mesh.num_nodes(); ++n) y[n] = mesh.nodes[n].x - 0.5;
  std::vector<double> nu{3.0};
  ObjectiveValue val = evaluate_objective(mesh, y, target, nu);

  // 1/2 integral of (x - 1/2)^2 over the unit square
  CHECK(val.tracking == doctest::Approx(0.5 / 12.0).epsilon(1e-12));
  REQUIRE(val.interface_lengths.size() == 1);
  CHECK(val.interface_lengths[0] == doctest::Approx(interface_length(mesh, 1)).epsilon(1e-13));
  CHECK(val.perimeter == doctest::Approx(3.0 * val.interface_lengths[0]).epsilon(1e-13));
  CHECK(val.objective == doctest::Approx(val.tracking + val.perimeter).epsilon(1e-13));
}

TEST_CASE("generated targets are self-consistent") {
  TargetData target = generate_target(21, {parse_shape_spec("ellipse 0.5 0.5 0.2 0.13 0.0")},
                                      {1000.0, 7.5}, 1000.0);
  CHECK(target.mesh.num_shapes == 1);
  CHECK(target.locator.ready());

  std::vector<double> m = lumped_mass(target.mesh);
  double mean = 0.0;
  for (std::size_t n = 0; n < m.size(); ++n) mean += m[n] * target.ybar[n];
  CHECK(mean == doctest::Approx(0.0).epsilon(1e-8));

  // kappa sizes must cover every shape
  CHECK_THROWS_AS(generate_target(21, {parse_shape_spec("circle 0.5 0.5 0.2")},
                                  {1000.0}, 1000.0),
                  ConfigError);
}

TEST_CASE("symmetric difference area behaves like a set distance") {
  TriMesh mesh = labeled_circle(30, "circle 0.4 0.5 0.2");
  ShapeSpec same = parse_shape_spec("circle 0.4 0.5 0.2");
  ShapeSpec far = parse_shape_spec("circle 0.75 0.5 0.1");

  double to_self = symmetric_difference_area(mesh, 1, same);
  double to_far = symmetric_difference_area(mesh, 1, far);
  // the snapped region differs from the smooth circle by a band of width ~h
  CHECK(to_self < 2.0 * 3.14159265 * 0.2 * (2.0 / 29.0));
  // for disjoint regions the symmetric difference is the sum of the areas
  double pi = 3.14159265358979323846;
  CHECK(to_far == doctest::Approx(pi * 0.04 + pi * 0.01).epsilon(0.05));
  CHECK(to_far > to_self);
}
