#include "shapeopt/randomfield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

constexpr double pi = std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) { return splitmix64(h ^ (v * 0x9e3779b97f4a7c15ull + 0x7f4a7c15ull)); }

}  // namespace

std::vector<KlTerm> kl_eigenpairs(double corr_len, int m) {
  if (m < 1) throw ConfigError("number of expansion terms must be positive");
  if (!(corr_len > 0.0)) throw ConfigError("correlation length must be positive");

  // Any pair outside the enumeration box has j^2+k^2 > (m+2)^2, which the
  // pairs (1,1),...,(1,m) already beat, so the box always contains the top m.
  int box = m + 2;
  std::vector<KlTerm> all;
  all.reserve(static_cast<std::size_t>(box) * box);
  for (int j = 1; j <= box; ++j) {
    for (int k = 1; k <= box; ++k) {
      double gamma = 0.25 * std::exp(-pi * (j * j + k * k) * corr_len * corr_len);
      all.push_back({j, k, gamma, std::sqrt(gamma)});
    }
  }
  std::sort(all.begin(), all.end(), [](const KlTerm& a, const KlTerm& b) {
    if (a.gamma != b.gamma) return a.gamma > b.gamma;
    if (a.j != b.j) return a.j < b.j;
    return a.k < b.k;
  });
  all.resize(m);
  return all;
}

double kl_basis(const KlTerm& t, Vec2 x) {
  return 2.0 * std::cos(t.j * pi * x.y) * std::cos(t.k * pi * x.x);
}

Vec2 kl_basis_gradient(const KlTerm& t, Vec2 x) {
  return {-2.0 * t.k * pi * std::sin(t.k * pi * x.x) * std::cos(t.j * pi * x.y),
          -2.0 * t.j * pi * std::cos(t.k * pi * x.x) * std::sin(t.j * pi * x.y)};
}

KlSpec make_kl_spec(std::vector<double> kappa_bar, std::vector<double> width,
                    double corr_len, int terms) {
  if (kappa_bar.empty()) throw ConfigError("kl spec needs at least one subdomain mean");
  if (width.size() != kappa_bar.size())
    throw ConfigError("kl spec has " + std::to_string(kappa_bar.size()) + " means but " +
                      std::to_string(width.size()) + " widths");

  KlSpec spec;
  spec.basis = kl_eigenpairs(corr_len, terms);
  spec.corr_len = corr_len;
  spec.terms = terms;

  double budget = 0.0;
  for (const auto& t : spec.basis) budget += 2.0 * t.sqrt_gamma;
  for (std::size_t i = 0; i < kappa_bar.size(); ++i) {
    if (!(width[i] >= 0.0)) throw ConfigError("kl width must be nonnegative");
    if (!(kappa_bar[i] - width[i] * budget > 0.0))
      throw NonpositiveKappa("subdomain " + std::to_string(i) +
                             ": worst-case coefficient " +
                             std::to_string(kappa_bar[i] - width[i] * budget) +
                             " is not positive");
  }
  spec.kappa_bar = std::move(kappa_bar);
  spec.width = std::move(width);
  return spec;
}

SampleDraw draw_sample(const KlSpec& spec, std::uint64_t seed, std::uint64_t index) {
  SampleDraw draw;
  draw.xi.resize(spec.kappa_bar.size());
  for (std::size_t i = 0; i < spec.kappa_bar.size(); ++i) {
    draw.xi[i].resize(spec.basis.size());
    for (std::size_t t = 0; t < spec.basis.size(); ++t) {
      std::uint64_t h = splitmix64(seed);
      h = mix(h, index);
      h = mix(h, i);
      h = mix(h, t);
      double u = static_cast<double>(h >> 11) * 0x1.0p-53;  // [0,1)
      draw.xi[i][t] = spec.width[i] * (2.0 * u - 1.0);
    }
  }
  return draw;
}

double evaluate_kappa(const KlSpec& spec, const SampleDraw& draw, Vec2 x, int subdomain) {
  double v = spec.kappa_bar.at(subdomain);
  const auto& xi = draw.xi.at(subdomain);
  for (std::size_t t = 0; t < spec.basis.size(); ++t)
    v += spec.basis[t].sqrt_gamma * kl_basis(spec.basis[t], x) * xi[t];
  if (!(v > 0.0))
    throw NonpositiveKappa("sampled coefficient is not positive in subdomain " +
                           std::to_string(subdomain));
  return v;
}

Vec2 evaluate_kappa_gradient(const KlSpec& spec, const SampleDraw& draw, Vec2 x, int subdomain) {
  Vec2 g{0.0, 0.0};
  const auto& xi = draw.xi.at(subdomain);
  for (std::size_t t = 0; t < spec.basis.size(); ++t)
    g = g + (spec.basis[t].sqrt_gamma * xi[t]) * kl_basis_gradient(spec.basis[t], x);
  return g;
}

double kappa_stddev(const KlSpec& spec, Vec2 x, int subdomain) {
  double var = 0.0;
  double w = spec.width.at(subdomain);
  for (const auto& t : spec.basis) {
    double b = t.sqrt_gamma * kl_basis(t, x);
    var += b * b * w * w / 3.0;
  }
  return std::sqrt(var);
}

}  // namespace shapeopt
