#pragma once

#include <vector>

#include "shapeopt/geometry.hpp"

namespace shapeopt {

// Nodal fields are plain value arrays; sizes are checked against the mesh at
// the point of use.

struct ScalarField {
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(std::size_t n, double fill = 0.0) : v(n, fill) {}
  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
  std::size_t size() const { return v.size(); }
};

struct VectorField {
  std::vector<Vec2> v;

  VectorField() = default;
  explicit VectorField(std::size_t n) : v(n) {}
  Vec2& operator[](std::size_t i) { return v[i]; }
  Vec2 operator[](std::size_t i) const { return v[i]; }
  std::size_t size() const { return v.size(); }
};

}  // namespace shapeopt
