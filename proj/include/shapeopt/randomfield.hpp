#pragma once

#include <cstdint>
#include <vector>

#include "shapeopt/geometry.hpp"

namespace shapeopt {

// One retained term of the separable cosine expansion on the unit square:
// basis(x) = 2 cos(j*pi*x2) cos(k*pi*x1), eigenvalue
// gamma = 1/4 exp(-pi (j^2 + k^2) l^2).
struct KlTerm {
  int j = 0;
  int k = 0;
  double gamma = 0.0;
  double sqrt_gamma = 0.0;
};

// The m largest eigenpairs, ordered by descending gamma with lexicographic
// (j,k) tie-break.
std::vector<KlTerm> kl_eigenpairs(double corr_len, int m);

double kl_basis(const KlTerm& t, Vec2 x);
Vec2 kl_basis_gradient(const KlTerm& t, Vec2 x);

// Per-subdomain uncertain diffusion coefficient
//   kappa_i(x, omega) = kappa_bar_i + sum_t sqrt(gamma_t) basis_t(x) xi_{i,t},
// with xi_{i,t} uniform on [-width_i, width_i].
struct KlSpec {
  std::vector<double> kappa_bar;  // index 0 is the outer region
  std::vector<double> width;
  double corr_len = 0.5;
  int terms = 20;
  std::vector<KlTerm> basis;
};

// Validates sizes and the worst-case positivity budget
// kappa_bar_i - 2 width_i sum_t sqrt(gamma_t) > 0 (the basis peaks at 2).
KlSpec make_kl_spec(std::vector<double> kappa_bar, std::vector<double> width,
                    double corr_len, int terms);

struct SampleDraw {
  std::vector<std::vector<double>> xi;  // [subdomain][term]
};

// Counter-based draw: the value of xi_{i,t} depends only on
// (seed, index, subdomain, term), so batched and sequential generation agree
// and trajectories with equal seeds are bit-identical.
SampleDraw draw_sample(const KlSpec& spec, std::uint64_t seed, std::uint64_t index);

double evaluate_kappa(const KlSpec& spec, const SampleDraw& draw, Vec2 x, int subdomain);
Vec2 evaluate_kappa_gradient(const KlSpec& spec, const SampleDraw& draw, Vec2 x, int subdomain);

// Pointwise standard deviation of kappa_i at x (uniform xi have variance
// width^2/3); used by the statistical checks.
double kappa_stddev(const KlSpec& spec, Vec2 x, int subdomain);

}  // namespace shapeopt
