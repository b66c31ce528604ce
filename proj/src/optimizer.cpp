#include "shapeopt/optimizer.hpp"

#include <string>

#include "shapeopt/errors.hpp"

namespace shapeopt {

GradientEval evaluate_direction(const TriMesh& mesh,
                                const std::vector<CoefficientField>& fields,
                                const DescentContext& ctx) {
  if (fields.empty()) throw ConfigError("need at least one coefficient sample");

  GradientEval ev;
  ev.rhs = VectorField(mesh.nodes.size());
  double count = static_cast<double>(fields.size());

  for (const auto& field : fields) {
    StateSolution state = solve_state(mesh, field, ctx.g, ctx.rtol, ctx.max_iter);
    StateSolution adj =
        solve_adjoint(mesh, field, state.field, ctx.target, ctx.rtol, ctx.max_iter);
    ObjectiveValue obj = evaluate_objective(mesh, state.field, ctx.target, ctx.nu);
    if (ev.y.size() == 0) ev.y = state.field;

    VectorField r = assemble_shape_derivative({mesh, field, state.field, adj.field,
                                               state.multiplier, adj.multiplier, ctx.target,
                                               ctx.nu});
    for (std::size_t n = 0; n < r.size(); ++n) ev.rhs[n] = ev.rhs[n] + r[n];
    ev.obj.objective += obj.objective;
    ev.obj.tracking += obj.tracking;
    ev.obj.perimeter += obj.perimeter;
    if (ev.obj.interface_lengths.empty())
      ev.obj.interface_lengths.assign(obj.interface_lengths.size(), 0.0);
    for (std::size_t s = 0; s < obj.interface_lengths.size(); ++s)
      ev.obj.interface_lengths[s] += obj.interface_lengths[s];
  }
  for (std::size_t n = 0; n < ev.rhs.size(); ++n) ev.rhs[n] = (1.0 / count) * ev.rhs[n];
  ev.obj.objective /= count;
  ev.obj.tracking /= count;
  ev.obj.perimeter /= count;
  for (double& l : ev.obj.interface_lengths) l /= count;

  ev.rhs = apply_locality_mask(mesh, std::move(ev.rhs));
  ev.mu = solve_mu_field(mesh, ctx.deformation.mu_min, ctx.deformation.mu_max,
                         ctx.deformation.rtol, ctx.deformation.max_iter);
  ev.V = solve_deformation(mesh, ev.mu, ctx.deformation.lambda, ev.rhs,
                           ctx.deformation.rtol, ctx.deformation.max_iter);
  ev.energy = apply_functional(ev.rhs, ev.V);
  return ev;
}

StepRecord armijo_step(TriMesh& mesh, const CoefficientField& kappa,
                       const DescentContext& ctx, const ArmijoSettings& armijo,
                       GradientEval* captured) {
  GradientEval ev = evaluate_direction(mesh, {kappa}, ctx);

  StepRecord rec;
  rec.objective = ev.obj.objective;
  rec.tracking = ev.obj.tracking;
  rec.perimeter = ev.obj.perimeter;
  rec.grad_norm = std::sqrt(std::max(ev.energy, 0.0));

  if (!(ev.energy > 0.0)) {
    // stationary: nothing to move
    rec.min_quality = quality_report(mesh).min_signed_area;
    if (captured) *captured = std::move(ev);
    return rec;
  }

  double alpha = armijo.alpha_hat;
  if (armijo.scale_by_diameter) alpha *= max_cell_diameter(mesh) / reference_diameter;

  for (int i = 0; i <= armijo.max_backtracks; ++i) {
    TriMesh trial = deform(mesh, ev.V, alpha);
    MeshQualityReport rep = quality_report(trial);
    if (rep.min_signed_area > 0.0) {
      StateSolution state = solve_state(trial, kappa, ctx.g, ctx.rtol, ctx.max_iter);
      ObjectiveValue obj = evaluate_objective(trial, state.field, ctx.target, ctx.nu);
      if (obj.objective <= ev.obj.objective - armijo.sigma * alpha * ev.energy) {
        mesh = std::move(trial);
        rec.step = alpha;
        rec.min_quality = rep.min_signed_area;
        rec.backtracks = i;
        if (captured) *captured = std::move(ev);
        return rec;
      }
    }
    alpha *= armijo.rho;
  }
  throw BacktrackExhausted("no valid sufficient-decrease step within " +
                           std::to_string(armijo.max_backtracks) + " backtracks");
}

StepRecord fixed_step(TriMesh& mesh, const std::vector<CoefficientField>& fields,
                      double t, const DescentContext& ctx, GradientEval* captured) {
  GradientEval ev = evaluate_direction(mesh, fields, ctx);

  StepRecord rec;
  rec.objective = ev.obj.objective;
  rec.tracking = ev.obj.tracking;
  rec.perimeter = ev.obj.perimeter;
  rec.grad_norm = std::sqrt(std::max(ev.energy, 0.0));

  if (!(ev.energy > 0.0)) {
    rec.min_quality = quality_report(mesh).min_signed_area;
    if (captured) *captured = std::move(ev);
    return rec;
  }

  TriMesh trial = deform(mesh, ev.V, t);
  MeshQualityReport rep = quality_report(trial);
  if (!(rep.min_signed_area > 0.0)) {
    t *= 0.5;  // one halved retry before giving up
    trial = deform(mesh, ev.V, t);
    rep = quality_report(trial);
    if (!(rep.min_signed_area > 0.0))
      throw InvalidMeshAfterRetry("mesh degenerates even after halving the step");
  }
  mesh = std::move(trial);
  rec.step = t;
  rec.min_quality = rep.min_signed_area;
  if (captured) *captured = std::move(ev);
  return rec;
}

}  // namespace shapeopt
