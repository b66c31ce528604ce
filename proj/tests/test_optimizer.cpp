#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "shapeopt/errors.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/optimizer.hpp"
#include "shapeopt/shapes.hpp"

using namespace shapeopt;

namespace {

TriMesh labeled_circle(int res, const char* spec_text) {
  TriMesh mesh = build_unit_square_mesh(res);
  ShapeSpec s = parse_shape_spec(spec_text);
  return label_subdomains(mesh, {conforming_loop(mesh, [&s](Vec2 p) { return s.inside(p); })});
}

struct Problem {
  TargetData target;
  DescentContext ctx;

  explicit Problem(int target_res)
      : target(generate_target(target_res, {parse_shape_spec("circle 0.5 0.5 0.3")},
                               {1000.0, 5000.0}, 1000.0, 1e-12, 200000)),
        ctx{target, {1e-4}, DeformationSettings{}, 1000.0, 1e-11, 200000} {}
};

}  // namespace

TEST_CASE("step schedules implement constant, decaying, and warm-started rules") {
  StepSchedule constant{StepSchedule::Kind::constant, 0.01, 0};
  for (int k : {0, 1, 10, 399}) CHECK(constant.at(k) == 0.01);

  StepSchedule inverse{StepSchedule::Kind::inverse, 0.026, 0};
  CHECK(inverse.at(0) == 0.026);
  CHECK(inverse.at(1) == doctest::Approx(0.013).epsilon(1e-15));
  CHECK(inverse.at(9) == doctest::Approx(0.0026).epsilon(1e-15));

  StepSchedule warm{StepSchedule::Kind::warm_inverse, 0.026, 201};
  CHECK(warm.at(0) == 0.026);
  CHECK(warm.at(200) == 0.026);           // last constant step
  CHECK(warm.at(201) == 0.026);           // decay starts at c/1
  CHECK(warm.at(202) == doctest::Approx(0.026 / 2.0).epsilon(1e-15));
  CHECK(warm.at(400) == doctest::Approx(0.026 / 200.0).epsilon(1e-15));
}

TEST_CASE("draw indices separate iterations and samples") {
  CHECK(draw_index(0, 0) == 0);
  CHECK(draw_index(0, 5) == 5);
  CHECK(draw_index(1, 0) == 65536);
  CHECK(draw_index(3, 2) == 3 * 65536 + 2);
  CHECK(draw_index(400, 0) != draw_index(399, 65535));
}

TEST_CASE("direction evaluation averages the batch and keeps the first state") {
  Problem prob(27);
  TriMesh mesh = labeled_circle(18, "circle 0.5 0.5 0.25");

  CoefficientField a = CoefficientField::piecewise_constant({1000.0, 4000.0});
  CoefficientField b = CoefficientField::piecewise_constant({1000.0, 6000.0});

  GradientEval ea = evaluate_direction(mesh, {a}, prob.ctx);
  GradientEval eb = evaluate_direction(mesh, {b}, prob.ctx);
  GradientEval eab = evaluate_direction(mesh, {a, b}, prob.ctx);

  CHECK(eab.obj.objective ==
        doctest::Approx(0.5 * (ea.obj.objective + eb.obj.objective)).epsilon(1e-12));
  CHECK(eab.obj.tracking ==
        doctest::Approx(0.5 * (ea.obj.tracking + eb.obj.tracking)).epsilon(1e-12));
  CHECK(eab.obj.perimeter ==
        doctest::Approx(0.5 * (ea.obj.perimeter + eb.obj.perimeter)).epsilon(1e-12));

  for (std::size_t n = 0; n < eab.rhs.size(); ++n) {
    CHECK(eab.rhs[n].x ==
          doctest::Approx(0.5 * (ea.rhs[n].x + eb.rhs[n].x)).epsilon(1e-10));
    CHECK(eab.rhs[n].y ==
          doctest::Approx(0.5 * (ea.rhs[n].y + eb.rhs[n].y)).epsilon(1e-10));
  }

  // the snapshot state comes from the first sample, bit for bit
  REQUIRE(eab.y.size() == ea.y.size());
  for (std::size_t n = 0; n < eab.y.size(); ++n) CHECK(eab.y[n] == ea.y[n]);

  CHECK(ea.energy > 0.0);
  CHECK(eab.energy > 0.0);
  CHECK(ea.V.size() == mesh.nodes.size());

  CHECK_THROWS_AS(evaluate_direction(mesh, {}, prob.ctx), ConfigError);
}

TEST_CASE("backtracking steps decrease the objective monotonically") {
  Problem prob(27);
  TriMesh mesh = labeled_circle(18, "circle 0.5 0.5 0.24");
  CoefficientField kappa = CoefficientField::piecewise_constant({1000.0, 5000.0});
  ArmijoSettings armijo;

  double previous = 0.0;
  for (int k = 0; k < 4; ++k) {
    GradientEval ev;
    StepRecord rec = armijo_step(mesh, kappa, prob.ctx, armijo, &ev);
    CHECK(rec.step > 0.0);
    CHECK(rec.min_quality > 0.0);
    CHECK(rec.grad_norm > 0.0);
    CHECK(rec.objective == doctest::Approx(rec.tracking + rec.perimeter).epsilon(1e-12));
    CHECK(ev.y.size() == mesh.nodes.size());
    CHECK(ev.V.size() == mesh.nodes.size());
    if (k > 0) CHECK(rec.objective < previous);
    previous = rec.objective;

    // sufficient decrease against the recorded pre-step objective
    GradientEval post = evaluate_direction(mesh, {kappa}, prob.ctx);
    CHECK(post.obj.objective <=
          rec.objective - armijo.sigma * rec.step * rec.grad_norm * rec.grad_norm + 1e-15);
  }
}

TEST_CASE("the initial backtracking step scales with the mesh diameter") {
  Problem prob(27);
  CoefficientField kappa = CoefficientField::piecewise_constant({1000.0, 5000.0});

  // same problem on a coarser mesh: the accepted step must start larger than
  // alpha_hat because h > reference_diameter
  TriMesh mesh = labeled_circle(16, "circle 0.5 0.5 0.24");
  ArmijoSettings armijo;
  armijo.rho = 1e-9;  // effectively forbid backtracking so step == initial
  armijo.max_backtracks = 0;
  StepRecord rec = armijo_step(mesh, kappa, prob.ctx, armijo, nullptr);
  double expected = armijo.alpha_hat * (std::sqrt(2.0) / 15.0) / reference_diameter;
  CHECK(rec.step == doctest::Approx(expected).epsilon(1e-12));

  TriMesh mesh2 = labeled_circle(16, "circle 0.5 0.5 0.24");
  ArmijoSettings unscaled = armijo;
  unscaled.scale_by_diameter = false;
  StepRecord rec2 = armijo_step(mesh2, kappa, prob.ctx, unscaled, nullptr);
  CHECK(rec2.step == doctest::Approx(armijo.alpha_hat).epsilon(1e-12));
}

TEST_CASE("fixed steps commit the requested length and halve it once if needed") {
  Problem prob(27);
  TriMesh mesh = labeled_circle(18, "circle 0.5 0.5 0.24");
  CoefficientField kappa = CoefficientField::piecewise_constant({1000.0, 5000.0});

  TriMesh before = mesh;
  StepRecord rec = fixed_step(mesh, {kappa}, 0.01, prob.ctx);
  CHECK(rec.step == 0.01);
  CHECK(rec.min_quality > 0.0);
  // the mesh moved
  double moved = 0.0;
  for (int n = 0; n < mesh.num_nodes(); ++n) moved += norm(mesh.nodes[n] - before.nodes[n]);
  CHECK(moved > 0.0);

  GradientEval post = evaluate_direction(mesh, {kappa}, prob.ctx);
  CHECK(post.obj.objective < rec.objective);
}

TEST_CASE("a hopeless fixed step fails only after one halved retry") {
  Problem prob(27);
  TriMesh mesh = labeled_circle(14, "circle 0.5 0.5 0.25");
  CoefficientField kappa = CoefficientField::piecewise_constant({1000.0, 5000.0});
  CHECK_THROWS_AS(fixed_step(mesh, {kappa}, 1e9, prob.ctx), InvalidMeshAfterRetry);
}

TEST_CASE("zero-width sampling walks the exact deterministic trajectory") {
  Problem prob(27);
  CoefficientField constant = CoefficientField::piecewise_constant({1000.0, 5000.0});
  KlSpec spec = make_kl_spec({1000.0, 5000.0}, {0.0, 0.0}, 0.5, 20);

  TriMesh det = labeled_circle(18, "circle 0.5 0.5 0.24");
  TriMesh sto = det;

  StepSchedule sched{StepSchedule::Kind::warm_inverse, 0.01, 2};
  for (int k = 0; k < 4; ++k) {
    StepRecord a = fixed_step(det, {constant}, sched.at(k), prob.ctx);
    CoefficientField sampled =
        CoefficientField::realization(spec, draw_sample(spec, 1, draw_index(k, 0)));
    StepRecord b = fixed_step(sto, {sampled}, sched.at(k), prob.ctx);
    CHECK(a.objective == b.objective);
    CHECK(a.grad_norm == b.grad_norm);
    CHECK(a.step == b.step);
  }
  for (int n = 0; n < det.num_nodes(); ++n) {
    CHECK(det.nodes[n].x == sto.nodes[n].x);  // bitwise identical trajectories
    CHECK(det.nodes[n].y == sto.nodes[n].y);
  }
}
